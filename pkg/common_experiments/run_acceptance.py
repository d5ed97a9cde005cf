"""Run the common experiment configs.

Description
----------
Uses the loclab package to run every JSON config stored next to this
file and writes one report per config. The configs reproduce the
indispensability pattern of the strengthened sharp theorem, the
trivial dynamics of the zero Hamiltonian, superluminal leakage of
Newton-Wigner states, the spectra of positive energy Dirac effects,
the cylinder counterexamples, the lattice Fock control and the lemma
checks.

Variables below may be updated before running.

Returns
----------
report files: json or csv
    One report per config in out_dir, named after the config.

"""
import glob
import os
import sys
import timeit
from loclab import clirunner


# User can optionally define following variables
#############################################################################
config_dir = os.path.dirname(os.path.abspath(__file__))
out_dir = "reports"  # Directory for the reports, created when missing
out_format = "json"  # Options include "json" and "csv"
num_proc = 1  # Number of cores to use for processing


def report_name(config_path, fmt):
    """Set file name for a report."""
    name = os.path.splitext(os.path.basename(config_path))[0]
    return os.path.join(out_dir, f"{name}.{fmt}")


if __name__ == '__main__':
    start = timeit.default_timer()
    os.makedirs(out_dir, exist_ok=True)
    failures = []
    for config_path in sorted(glob.glob(os.path.join(config_dir, "*.json"))):
        t = timeit.default_timer()
        config = clirunner.ExperimentConfig.from_file(config_path).with_overrides(
            fmt=out_format, num_proc=num_proc
        )
        report = clirunner.run(config)
        out_path = report_name(config_path, out_format)
        with open(out_path, "w", encoding="utf-8", newline="") as f:
            f.write(clirunner.export(report, out_format))
        seconds = timeit.default_timer() - t
        status = "ok" if not report.violations else f"{len(report.violations)} violated"
        print(f"{os.path.basename(config_path)}: {status} ({seconds:.1f} s) -> {out_path}")
        failures.extend(report.violations)

    seconds = timeit.default_timer() - start
    print(f"Process completed in approximately {seconds / 60:.1f} minutes")
    if failures:
        sys.exit("Invariants violated:\n" + "\n".join(failures))
