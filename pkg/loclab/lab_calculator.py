"""Command line tool for localization experiments."""

import logging
import sys
import timeit
import click
from loclab import clirunner
from loclab import nogo
from loclab.exceptions import ArchiveError
from loclab.exceptions import CausalityError
from loclab.exceptions import ConfigError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import SamplingPlanError

# errors caused by the config or flags, reported with exit code 1
CONFIG_ERRORS = (
    ConfigError, InvalidRegionError, InvalidParameterError, CausalityError, SamplingPlanError,
    ArchiveError,
)


def _configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _write(text, out):
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        click.echo(f"Report written to {out}", err=True)


@click.group()
@click.option('-v', '--verbose', count=True, help='Increase log detail (-v info, -vv debug)')
def main(verbose):
    """Numerical laboratory for relativistic localization no-go theorems."""
    _configure_logging(verbose)


@main.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', required=False, default=None, help='Report file; the config output path or stdout otherwise')
@click.option('--format', 'fmt', required=False, default=None, type=click.Choice(clirunner.FORMATS), help='Report format')
@click.option('--system', required=False, default=None, help='Run on this catalog system only')
@click.option('--size', required=False, default=None, type=int, help='Override the lattice size of every system')
@click.option('--mass', required=False, default=None, type=float, help='Override the mass of every system')
@click.option('--seed', required=False, default=None, type=int, help='Override the random seed')
@click.option('--num-proc', 'num_proc', required=False, default=None, type=int, help='Number of worker processes')
def run(config, out, fmt, system, size, mass, seed, num_proc):
    """Run the experiments of a JSON config.

    Description:
    Builds every system named in CONFIG, runs its experiments and writes
    the report. Exits with 1 on an invalid config and with 2 when an
    asserted expectation fails.

    """
    t = timeit.default_timer()
    click.echo("Processing now...", err=True)
    try:
        cfg = clirunner.ExperimentConfig.from_file(config).with_overrides(
            system=system, size=size, mass=mass, seed=seed, out=out, fmt=fmt, num_proc=num_proc,
        )
        report = clirunner.run(cfg)
    except CONFIG_ERRORS as e:
        sys.exit(f"Invalid config: {e}")

    fmt = cfg.output.get("format", "json")
    _write(clirunner.export(report, fmt), cfg.output.get("path"))
    for entry in report.results:
        if entry["kind"] == "matrix":
            click.echo(clirunner.render_matrix_table(entry["result"]), err=True)

    seconds = (timeit.default_timer() - t)
    click.echo(f"Process completed in approximately {seconds:.1f} seconds", err=True)
    if report.violations:
        for message in report.violations:
            click.echo(f"Invariant violated: {message}", err=True)
        sys.exit(2)


@main.command(name='list')
def list_command():
    """List the catalog of constructible systems."""
    for entry in clirunner.list_systems():
        params = ", ".join(f"{k}={v}" for k, v in entry["params"].items())
        click.echo(f"{entry['name']} [{entry['variant']}] ({params})")
        click.echo(f"    {entry['provenance']}")


@main.command()
@click.option('--system', required=True, help='Catalog system name')
@click.option('--size', required=False, default=None, type=int, help='Lattice size')
@click.option('--mass', required=False, default=None, type=float, help='Mass parameter')
@click.option('--format', 'fmt', required=False, default=None, type=click.Choice(clirunner.FORMATS), help='Also print the machine report')
def matrix(system, size, mass, fmt):
    """Print the condition matrix of one catalog system."""
    t = timeit.default_timer()
    params = {}
    if size is not None:
        params["sites"] = size
    if mass is not None:
        params["mass"] = mass
    try:
        cfg = clirunner.ExperimentConfig.from_dict({
            "system": {"name": system, "params": params},
            "experiments": [{"kind": "matrix", "label": "matrix"}],
        })
        report = clirunner.run(cfg)
    except CONFIG_ERRORS as e:
        sys.exit(f"Invalid config: {e}")
    matrix_data = nogo.ConditionMatrix.from_dict(report.results[0]["result"])
    click.echo(clirunner.render_matrix_table(matrix_data))
    if fmt is not None:
        click.echo(clirunner.export(report, fmt), nl=False)
    seconds = (timeit.default_timer() - t)
    click.echo(f"Process completed in approximately {seconds:.1f} seconds", err=True)


@main.command()
@click.option('--system', required=True, help='Catalog system name')
@click.option('--size', required=False, default=None, type=int, help='Lattice size')
@click.option('--out', required=True, help='HDF5 file to write')
def archive(system, size, out):
    """Store the operators of a system's sampled regions in HDF5."""
    try:
        params = {} if size is None else {"sites": size}
        spec = clirunner.SystemSpec.from_dict({"name": system, "params": params})
        count = clirunner.archive_system(clirunner.build_system(spec), out)
    except CONFIG_ERRORS as e:
        sys.exit(f"Invalid config: {e}")
    click.echo(f"Archived {count} operators to {out}")


if __name__ == "__main__":
    main()
