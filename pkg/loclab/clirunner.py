"""Declarative experiment runner.

    Description
    ----------
    Parses an experiment config, builds the requested systems from the
    catalog, runs the listed experiments and assembles a versioned
    report. Reports export as nested JSON or as a flattened CSV table.

    Independent experiments may run on a multiprocessing Pool. Workers
    rebuild systems from their catalog specs, and results are assembled
    in config order, so the machine report only depends on the config
    and its seed.

"""

# import needed packages
from dataclasses import dataclass
from dataclasses import field
from functools import lru_cache
from functools import partial
import io
import json
import logging
from multiprocessing import Pool
from timeit import default_timer as timer
import warnings
import h5py
import numpy as np
import pandas as pd
from loclab import axioms
from loclab import modelzoo
from loclab import nogo
from loclab import opkernel
from loclab.axioms import TolerancePolicy
from loclab.exceptions import ArchiveError
from loclab.exceptions import CausalityError
from loclab.exceptions import ConfigError
from loclab.exceptions import InfeasibleSizeError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import InvariantViolation
from loclab.exceptions import SchemaVersionError
from loclab.exceptions import UnknownSystemError
from loclab.exceptions import UnsupportedFormatError
from loclab.opkernel import OpClass
from loclab.opkernel import Operator
from loclab.spacetime import ModelKind
from loclab.spacetime import Region
from loclab.spacetime import SpaceModel
from loclab.spacetime import interval
from loclab.spacetime import region_distance

logger = logging.getLogger(__name__)

SCHEMA = "loclab-report/1"
FORMATS = ("json", "csv")
LATTICE_SIZES = tuple(2 ** k for k in range(4, 10))
TENSOR_SIZES = (16, 32)
LEAKAGE_FLOOR = 1e-12
# systems a pool worker keeps built between tasks
SYSTEM_CACHE_SIZE = 4
CSV_COLUMNS = [
    "experiment", "kind", "system", "item", "outcome", "holds", "residual",
    "region", "probe", "gap", "time", "probability", "value",
]
GLYPHS = {"pass": "✔", "fail": "✘", "not_applicable": "–"}
SYSTEM_EXPERIMENTS = ("matrix", "leakage", "busch")
FREE_EXPERIMENTS = ("hegerfeldt", "borchers", "lemmas", "conjecture")
CONFIG_KEYS = (
    "system", "systems", "experiments", "tolerances", "output", "seed", "num_proc",
    "record_timings",
)


@dataclass(frozen=True)
class CatalogEntry:
    """Model zoo constructor with its default parameters and size rule."""

    name: str
    variant: str
    defaults: dict
    provenance: str
    size_rule: str
    build: object

    def to_dict(self):
        return {
            "name": self.name,
            "variant": self.variant,
            "params": dict(self.defaults),
            "size_rule": self.size_rule,
            "provenance": self.provenance,
        }


def _model(kind, p):
    return SpaceModel(kind, p["sites"], p["spacing"])


def _d0(m, p):
    return None if p.get("d0") is None else parse_region(m, p["d0"])


def _standard(kind, h):
    return lambda p, label: modelzoo.build_standard(_model(kind, p), h, p["mass"], label)


def _pathological(p, label, mode):
    m = _model(ModelKind.LINE_ISOTROPIC, p)
    return modelzoo.build_pathological(m, p["mass"], _d0(m, p), mode, label)


def _tensor(p, label):
    m = _model(ModelKind.LINE_ISOTROPIC, p)
    return modelzoo.build_tensor_counterexample(m, p["mass"], _d0(m, p), label)


_LINE = {"sites": 64, "spacing": 1.0, "mass": 1.0}
_FIXED = {"sites": 64, "spacing": 1.0, "mass": 1.0, "d0": None}

SYSTEM_CATALOG = {
    entry.name: entry for entry in (
        CatalogEntry(
            "zero_hamiltonian", "sharp", dict(_LINE),
            "Position projections with H = 0 on a line with a distinguished rest frame; "
            "every condition of the strengthened sharp theorem holds and dynamics is trivial, but no absolute velocity fails.",
            "lattice", _standard(ModelKind.LINE_DISTINGUISHED_FRAME, "zero"),
        ),
        CatalogEntry(
            "zero_hamiltonian_isotropic", "sharp", dict(_LINE),
            "Position projections with H = 0 on an isotropic line; boosted generators b.P are unbounded below.",
            "lattice", _standard(ModelKind.LINE_ISOTROPIC, "zero"),
        ),
        CatalogEntry(
            "standard_nonrelativistic", "sharp", dict(_LINE),
            "Position projections with H = P^2/2m; only microcausality fails among the strengthened sharp theorem conditions.",
            "lattice", _standard(ModelKind.LINE_ISOTROPIC, "nonrelativistic"),
        ),
        CatalogEntry(
            "newton_wigner", "sharp", dict(_LINE),
            "Newton-Wigner style position projections with H = (P^2 + m^2)^(1/2); only microcausality fails.",
            "lattice", _standard(ModelKind.LINE_ISOTROPIC, "relativistic"),
        ),
        CatalogEntry(
            "momentum_hamiltonian", "sharp", dict(_LINE),
            "Position projections with H = P, a pure translation; only energy bounded below fails.",
            "lattice", _standard(ModelKind.LINE_ISOTROPIC, "momentum"),
        ),
        CatalogEntry(
            "frozen", "sharp", dict(_LINE),
            "Standard projections disconnected from the nonrelativistic dynamics; only time covariance fails.",
            "lattice",
            lambda p, label: modelzoo.build_frozen(_model(ModelKind.LINE_ISOTROPIC, p), p["mass"], label),
        ),
        CatalogEntry(
            "only_d0", "sharp", dict(_FIXED),
            "Projection on a fixed region and zero elsewhere; only probability conservation fails.",
            "lattice",
            lambda p, label: _pathological(p, label, "only_d0"),
        ),
        CatalogEntry(
            "all_but_d0", "sharp", dict(_FIXED),
            "Projection on a fixed region and the identity elsewhere; only localizability fails.",
            "lattice",
            lambda p, label: _pathological(p, label, "all_but_d0"),
        ),
        CatalogEntry(
            "tensor_counterexample", "sharp", {"sites": 16, "spacing": 1.0, "mass": 1.0, "d0": None},
            "Position projection tensored with a fixed region projection; strong causality holds while NIWS "
            "and probability conservation fail.",
            "tensor", _tensor,
        ),
        CatalogEntry(
            "cylinder_threshold", "sharp", dict(_LINE),
            "Cylinder spacetime with E the identity on regions of measure at least 2/3; monotonicity and "
            "probability conservation fail.",
            "lattice",
            lambda p, label: modelzoo.build_cylinder_threshold(_model(ModelKind.CIRCLE, p), p["mass"], label),
        ),
        CatalogEntry(
            "measure_effect", "unsharp", dict(_LINE),
            "Cylinder spacetime with A = measure times identity; the unsharp theorem's conditions hold but the "
            "effects do not vanish.",
            "lattice",
            lambda p, label: modelzoo.build_measure_effect(_model(ModelKind.CIRCLE, p), p["mass"], label),
        ),
        CatalogEntry(
            "dirac_positive", "unsharp", {"sites": 64, "spacing": 0.1, "mass": 1.0},
            "Free Dirac particle restricted to positive energy; effects have no eigenvalue 1 and "
            "microcausality fails.",
            "lattice",
            lambda p, label: modelzoo.build_dirac_positive(_model(ModelKind.LINE_ISOTROPIC, p), p["mass"], label),
        ),
        CatalogEntry(
            "lattice_fock", "number", {"sites": 8, "hopping": 1.0},
            "Free lattice fermions with local number operators; the nonrelativistic positive control for "
            "the local number theorem.",
            "fock",
            lambda p, label: modelzoo.build_lattice_fock(p["sites"], p["hopping"], label),
        ),
    )
}


def list_systems():
    return [entry.to_dict() for entry in SYSTEM_CATALOG.values()]


def check_size(entry, sites):
    if entry.size_rule == "tensor":
        allowed = TENSOR_SIZES
    elif entry.size_rule == "fock":
        allowed = tuple(range(modelzoo.FOCK_MIN_SITES, modelzoo.FOCK_MAX_SITES + 1))
    else:
        allowed = LATTICE_SIZES
    if sites not in allowed:
        raise InfeasibleSizeError(
            f"{entry.name} supports lattice sizes {list(allowed)}, got {sites}."
        )


def parse_region(m, spec):
    """Region from a list of sites or a {"start", "width"} mapping."""
    if isinstance(spec, dict):
        try:
            return interval(m, int(spec["start"]), int(spec["width"]))
        except KeyError as e:
            raise InvalidRegionError(f"Region spec {spec} needs start and width.") from e
    if isinstance(spec, (list, tuple)):
        return m.validate(Region(spec))
    raise InvalidRegionError(f"Cannot read a region from {spec!r}.")


@dataclass(frozen=True)
class SystemSpec:
    name: str
    label: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            data = {"name": data}
        if not isinstance(data, dict) or "name" not in data:
            raise ConfigError(f"A system spec needs a name, got {data!r}.")
        name = data["name"]
        if name not in SYSTEM_CATALOG:
            raise UnknownSystemError(
                f"Unknown system {name!r}; choose from {sorted(SYSTEM_CATALOG)}."
            )
        params = dict(data.get("params", {}))
        unknown = set(params) - set(SYSTEM_CATALOG[name].defaults)
        if unknown:
            raise ConfigError(f"Unknown parameters {sorted(unknown)} for system {name}.")
        return cls(name, data.get("label", name), params)

    def resolved(self):
        params = dict(SYSTEM_CATALOG[self.name].defaults)
        params.update(self.params)
        return params

    def to_dict(self):
        return {"name": self.name, "label": self.label, "params": dict(self.params)}


def _check_matrix_expect(expect, label):
    conditions = {c.value for c in axioms.ConditionId}
    named = [c for key in ("fails", "passes", "among") for c in expect.get(key, [])]
    unknown = sorted(set(named) - conditions)
    if unknown:
        raise ConfigError(f"Experiment {label} expects unknown conditions {unknown}.")
    kinds = {k.value for k in nogo.ConclusionKind}
    unknown = sorted(set(expect.get("conclusions", {})) - kinds)
    if unknown:
        raise ConfigError(f"Experiment {label} expects unknown conclusions {unknown}.")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    label: str
    system: str = None
    params: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data, index):
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError(f"Experiment {index} needs a kind.")
        kind = data["kind"]
        if kind not in SYSTEM_EXPERIMENTS + FREE_EXPERIMENTS:
            raise ConfigError(
                f"Unknown experiment kind {kind!r}; choose from "
                f"{list(SYSTEM_EXPERIMENTS + FREE_EXPERIMENTS)}."
            )
        expect = dict(data.get("expect", {}))
        if kind == "matrix":
            _check_matrix_expect(expect, data.get("label", f"{kind}_{index}"))
        return cls(
            kind,
            data.get("label", f"{kind}_{index}"),
            data.get("system"),
            dict(data.get("params", {})),
            expect,
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "system": self.system,
            "params": dict(self.params),
            "expect": dict(self.expect),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed experiment config.

    Parameters
    ----------
    systems: tuple
        SystemSpec entries, labels unique.
    experiments: tuple
        ExperimentSpec entries in config order.
    policy: TolerancePolicy
    output: dict
        Optional path and format of the report.
    seed: int
    num_proc: int
    record_timings: bool

    """

    systems: tuple = ()
    experiments: tuple = ()
    policy: TolerancePolicy = TolerancePolicy()
    output: dict = field(default_factory=dict)
    seed: int = 0
    num_proc: int = 1
    record_timings: bool = False

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("An experiment config must be a JSON object.")
        for key in sorted(set(data) - set(CONFIG_KEYS)):
            warnings.warn(f"Ignoring unknown config key {key!r}.")
        raw = data.get("systems", [])
        if "system" in data:
            raw = [data["system"]] + list(raw)
        systems = tuple(SystemSpec.from_dict(s) for s in raw)
        labels = [s.label for s in systems]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"System labels must be unique, got {labels}.")
        experiments = tuple(
            ExperimentSpec.from_dict(e, i) for i, e in enumerate(data.get("experiments", []))
        )
        for e in experiments:
            if e.system is not None and e.system not in labels:
                raise ConfigError(f"Experiment {e.label} names unknown system label {e.system!r}.")
        try:
            policy = TolerancePolicy.from_dict(dict(data.get("tolerances", {})))
        except (InvalidParameterError, TypeError) as e:
            raise ConfigError(f"Invalid tolerances: {e}") from e
        output = dict(data.get("output", {}))
        if output.get("format", "json") not in FORMATS:
            raise UnsupportedFormatError(f"Unsupported report format {output['format']!r}.")
        seed = data.get("seed", 0)
        num_proc = data.get("num_proc", 1)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"Seed must be a non-negative integer, got {seed!r}.")
        if not isinstance(num_proc, int) or num_proc < 1:
            raise ConfigError(f"num_proc must be a positive integer, got {num_proc!r}.")
        return cls(systems, experiments, policy, output, seed, num_proc,
                   bool(data.get("record_timings", False)))

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        return cls.from_dict(data)

    def with_overrides(self, system=None, size=None, mass=None, seed=None, out=None,
                       fmt=None, num_proc=None):
        """Copy with CLI flag overrides applied."""
        systems = self.systems
        if system is not None:
            systems = (SystemSpec.from_dict(system),)
        for key, value in (("sites", size), ("mass", mass)):
            if value is not None:
                updated = []
                for s in systems:
                    if key not in SYSTEM_CATALOG[s.name].defaults:
                        raise ConfigError(f"System {s.name} has no {key} parameter.")
                    updated.append(SystemSpec(s.name, s.label, dict(s.params, **{key: value})))
                systems = tuple(updated)
        experiments = self.experiments
        if system is not None:
            labels = {s.label for s in systems}
            experiments = tuple(
                e if e.system is None or e.system in labels
                else ExperimentSpec(e.kind, e.label, None, e.params, e.expect)
                for e in experiments
            )
        output = dict(self.output)
        if out is not None:
            output["path"] = out
        if fmt is not None:
            if fmt not in FORMATS:
                raise UnsupportedFormatError(f"Unsupported report format {fmt!r}.")
            output["format"] = fmt
        return ExperimentConfig(
            systems, experiments, self.policy, output,
            self.seed if seed is None else seed,
            self.num_proc if num_proc is None else num_proc,
            self.record_timings,
        )

    def spec(self, label):
        for s in self.systems:
            if s.label == label:
                return s
        raise ConfigError(f"No system labelled {label!r}.")

    def to_dict(self):
        return {
            "systems": [s.to_dict() for s in self.systems],
            "experiments": [e.to_dict() for e in self.experiments],
            "tolerances": self.policy.to_dict(),
            "output": dict(self.output),
            "seed": self.seed,
            "num_proc": self.num_proc,
            "record_timings": self.record_timings,
        }


def build_system(spec):
    """Construct the system a SystemSpec names, labelled with its label."""
    entry = SYSTEM_CATALOG[spec.name]
    params = spec.resolved()
    check_size(entry, params["sites"])
    return entry.build(params, spec.label)


@lru_cache(maxsize=SYSTEM_CACHE_SIZE)
def _cached_system(name, label, params_json):
    return build_system(SystemSpec(name, label, json.loads(params_json)))


def _rebuild(spec):
    return _cached_system(spec.name, spec.label, json.dumps(spec.params, sort_keys=True))


@dataclass(frozen=True)
class Task:
    index: int
    experiment: ExperimentSpec
    system: str = None


def _leakage_plan(s, params):
    m = s.model
    width = int(params.get("width", max(1, m.sites // 16)))
    region = parse_region(m, params["region"]) if "region" in params \
        else interval(m, m.sites // 4, width)
    if "probe" in params:
        probe = parse_region(m, params["probe"])
    else:
        gap = float(params.get("gap", 0.25 * m.length))
        gap_sites = int(round(gap / m.spacing))
        probe = interval(m, region.sites[-1] + gap_sites, len(region))
    distance = region_distance(m, region, probe)
    times = [float(t) for t in params.get("times", [0.0, 0.5 * distance / m.light_speed])]
    for t in times:
        if t < 0 or not m.light_speed * t < distance:
            raise CausalityError(
                f"Leakage at t = {t} between regions {distance} apart is not spacelike clear."
            )
    return region, probe, times


def plan_tasks(config, systems):
    """Expand experiments into tasks and validate their regions up front."""
    tasks = []
    for e in config.experiments:
        if e.kind in SYSTEM_EXPERIMENTS:
            labels = [e.system] if e.system else [s.label for s in config.systems]
            if not labels:
                raise ConfigError(f"Experiment {e.label} needs at least one system.")
            for label in labels:
                s = systems[label]
                if e.kind == "leakage":
                    if s.variant is not modelzoo.Variant.SHARP:
                        raise ConfigError(f"Leakage needs a sharp system, {label} is {s.variant.value}.")
                    _leakage_plan(s, e.params)
                if e.kind == "busch":
                    for spec in e.params.get("regions", []):
                        parse_region(s.model, spec)
                tasks.append(Task(len(tasks), e, label))
        else:
            tasks.append(Task(len(tasks), e, None))
    return tasks


def _matrix(s, e, policy, rng):
    return nogo.condition_matrix(s, policy).to_dict()


def _leakage(s, e, policy, rng):
    region, probe, times = _leakage_plan(s, e.params)
    return {"leakage": [nogo.superluminal_leakage(s, region, probe, t).to_dict() for t in times]}


def _busch(s, e, policy, rng):
    specs = e.params.get("regions")
    regions = [parse_region(s.model, r) for r in specs] if specs \
        else axioms.sample_regions(s, policy)
    rows = []
    for region in regions:
        row = nogo.busch_spectrum(s, region).to_dict()
        row["region"] = region.to_list()
        rows.append(row)
    additivity = axioms.check_statics(s, policy)[1]
    return {"spectra": rows, "additivity_residual": float(additivity.residual)}


def random_hermitian(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator(opkernel.hermitize(raw), OpClass.HERMITIAN)


def random_basis(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(raw)
    return q


def _projection_onto(columns):
    return Operator(opkernel.hermitize(columns @ columns.conj().T), OpClass.PROJECTION)


def _hegerfeldt(systems, e, policy, rng):
    instances = int(e.params.get("instances", 100))
    max_dim = int(e.params.get("max_dim", 16))
    if max_dim < 2:
        raise InvalidParameterError(f"{e.label}: zero sets need max_dim >= 2, got {max_dim}.")
    grid = np.linspace(0.0, float(e.params.get("horizon", 10.0)), int(e.params.get("points", 64)))
    counts = {c.value: 0 for c in nogo.ZeroSetClass}
    for _ in range(instances):
        dim = int(rng.integers(2, max_dim + 1))
        basis = random_basis(rng, dim)
        rank = int(rng.integers(1, dim))
        psi = opkernel.StateVector.normalized(
            rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        )
        report = nogo.hegerfeldt_zero_set(
            random_hermitian(rng, dim), _projection_onto(basis[:, :rank]), psi, grid
        )
        counts[report.classification.value] += 1
    return {"instances": instances, "counts": counts,
            "anomalous_rate": counts["anomalous"] / instances if instances else 0.0}


def _borchers(systems, e, policy, rng):
    instances = int(e.params.get("instances", 20))
    dim = int(e.params.get("dim", 8))
    rank = int(e.params.get("rank", 2))
    if rank < 1 or 2 * rank > dim:
        raise InvalidParameterError(f"{e.label}: two orthogonal rank {rank} projections need dim >= {2 * rank}.")
    modes = {m.value: 0 for m in nogo.BorchersMode}
    witnesses, consistent = 0, 0
    for _ in range(instances):
        basis = random_basis(rng, dim)
        report = nogo.borchers_probe(
            _projection_onto(basis[:, :rank]),
            _projection_onto(basis[:, rank:2 * rank]),
            random_hermitian(rng, dim),
        )
        modes[report.mode.value] += 1
        witnesses += int(report.witness_found)
        consistent += int(report.consistent)
    return {"instances": instances, "modes": modes, "witnesses": witnesses, "consistent": consistent}


def _lemmas(systems, e, policy, rng):
    return nogo.appendix_lemma_suite(policy, rng=rng, instances=int(e.params.get("instances", 5))).to_dict()


def _conjecture(systems, e, policy, rng):
    labels = e.params.get("systems") or list(systems)
    matrices = [nogo.condition_matrix(systems[label], policy) for label in labels]
    return {"probe": nogo.conjecture_probe(matrices)}


SYSTEM_RUNNERS = {"matrix": _matrix, "leakage": _leakage, "busch": _busch}
FREE_RUNNERS = {
    "hegerfeldt": _hegerfeldt, "borchers": _borchers, "lemmas": _lemmas, "conjecture": _conjecture,
}


def _native(value):
    """Plain JSON types for numpy scalars, arrays and tuples."""
    if isinstance(value, dict):
        return {str(k): _native(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_native(v) for v in value]
    if isinstance(value, np.ndarray):
        return _native(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _execute(task, policy, seed, lookup):
    e = task.experiment
    rng = np.random.default_rng([seed, task.index])
    start = timer()
    if task.system is not None:
        result = SYSTEM_RUNNERS[e.kind](lookup(task.system), e, policy, rng)
    else:
        result = FREE_RUNNERS[e.kind](lookup(None), e, policy, rng)
    elapsed = timer() - start
    logger.info("Finished %s%s in %.2f s", e.label, f" on {task.system}" if task.system else "", elapsed)
    return _native(result), elapsed


def _pool_worker(task, config):
    def lookup(label):
        if label is None:
            return {s.label: _rebuild(s) for s in config.systems}
        return _rebuild(config.spec(label))
    return _execute(task, config.policy, config.seed, lookup)


def expectation_violations(kind, label, result, expect):
    """Messages for every asserted expectation the result breaks."""
    out = []
    if kind == "matrix":
        _check_matrix_expect(expect, label)
        verdicts = {v["condition"]: v for v in result["verdicts"]}
        among = expect.get("among", list(verdicts))
        if "fails" in expect:
            failing = sorted(c for c in among if verdicts[c]["outcome"] == "fail")
            if failing != sorted(expect["fails"]):
                out.append(f"{label}: expected failures {sorted(expect['fails'])}, got {failing}")
            for c in expect["fails"]:
                if c in verdicts and verdicts[c]["outcome"] == "fail" \
                        and not verdicts[c]["witness"].get("conclusive", False):
                    out.append(f"{label}: {c} fails below the failure tolerance")
        for c in expect.get("passes", []):
            if verdicts[c]["outcome"] != "pass":
                out.append(f"{label}: expected {c} to pass, residual {verdicts[c]['residual']:.3e}")
        conclusions = {c["kind"]: c for c in result["conclusions"]}
        for kind_name, holds in expect.get("conclusions", {}).items():
            if kind_name not in conclusions:
                raise ConfigError(f"{label}: {kind_name} is not a conclusion of this system.")
            if conclusions[kind_name]["holds"] != holds:
                out.append(f"{label}: expected {kind_name} holds = {holds}")
    elif kind == "leakage":
        for row in result["leakage"]:
            if row["time"] == 0.0 and row["probability"] != 0.0:
                out.append(f"{label}: leakage at t = 0 is {row['probability']!r}")
            if expect.get("positive") and row["time"] > 0 and row["probability"] <= LEAKAGE_FLOOR:
                out.append(f"{label}: no leakage at t = {row['time']}")
    elif kind == "busch":
        if expect.get("below_one"):
            for row in result["spectra"]:
                if not (row["gap_to_one"] > opkernel.RANGE_TOL and row["max_eigenvalue"] > opkernel.RANGE_TOL):
                    out.append(f"{label}: region {row['region']} spectrum {row}")
        if "max_additivity" in expect and result["additivity_residual"] > expect["max_additivity"]:
            out.append(f"{label}: additivity residual {result['additivity_residual']:.3e}")
    elif kind == "hegerfeldt":
        if result["counts"]["anomalous"] > expect.get("max_anomalous", result["instances"]):
            out.append(f"{label}: {result['counts']['anomalous']} anomalous zero sets")
    elif kind == "borchers":
        if result["witnesses"] < expect.get("min_witnesses", 0):
            out.append(f"{label}: only {result['witnesses']} contrapositive witnesses")
        if result["consistent"] != result["instances"]:
            out.append(f"{label}: {result['instances'] - result['consistent']} inconsistent probes")
    elif kind == "lemmas":
        for name, counts in result["counts"].items():
            if counts["violated"]:
                out.append(f"{label}: {counts['violated']} violated {name} cases")
    return out


@dataclass
class ReportDocument:
    """Versioned experiment report.

    Timings are only filled when the config sets record_timings, so the
    default report is a function of the config alone.
    """

    config: dict
    results: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    schema: str = SCHEMA

    def to_dict(self):
        return {
            "schema": self.schema,
            "config": self.config,
            "results": self.results,
            "violations": self.violations,
            "timings": self.timings,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != SCHEMA:
            raise SchemaVersionError(
                f"Unsupported report schema {data.get('schema')!r}, expected {SCHEMA!r}."
            )
        return cls(data["config"], list(data["results"]), list(data.get("violations", [])),
                   dict(data.get("timings", {})))


def run(config, strict=False):
    """Run every experiment of a config.

    Parameters
    ----------
    config: ExperimentConfig
    strict: bool
        Raise InvariantViolation when an asserted expectation fails.

    Returns
    ----------
    report: ReportDocument

    """
    start = timer()
    systems = {spec.label: build_system(spec) for spec in config.systems}
    tasks = plan_tasks(config, systems)
    logger.info("Running %d tasks on %d systems", len(tasks), len(systems))

    if config.num_proc > 1 and len(tasks) > 1:
        with Pool(config.num_proc) as p:
            outcomes = p.map(partial(_pool_worker, config=config), tasks)
    else:
        def lookup(label):
            return systems if label is None else systems[label]
        outcomes = [_execute(task, config.policy, config.seed, lookup) for task in tasks]

    results, violations, timings = [], [], {}
    for task, (result, elapsed) in zip(tasks, outcomes):
        e = task.experiment
        label = e.label if task.system is None else f"{e.label}:{task.system}"
        results.append({"experiment": e.label, "kind": e.kind, "system": task.system, "result": result})
        violations.extend(expectation_violations(e.kind, label, result, e.expect))
        timings[label] = elapsed
    timings["total"] = timer() - start

    report = ReportDocument(
        _native(config.to_dict()), results, violations,
        timings if config.record_timings else {},
    )
    if violations:
        for message in violations:
            logger.error("Invariant violated: %s", message)
        if strict:
            raise InvariantViolation("; ".join(violations))
    return report


def _region_text(sites):
    return " ".join(str(s) for s in sites) if sites is not None else None


def flatten(report):
    """One row per verdict or measurement, in report order."""
    rows = []
    for entry in report.results:
        base = {"experiment": entry["experiment"], "kind": entry["kind"], "system": entry["system"]}
        result = entry["result"]
        kind = entry["kind"]
        if kind == "matrix":
            for v in result["verdicts"]:
                rows.append(dict(base, item=v["condition"], outcome=v["outcome"], holds=v["holds"],
                                 residual=v["residual"]))
        elif kind == "leakage":
            for r in result["leakage"]:
                rows.append(dict(base, item="leakage", region=_region_text(r["region"]),
                                 probe=_region_text(r["probe"]), gap=r["gap"], time=r["time"],
                                 probability=r["probability"]))
        elif kind == "busch":
            for r in result["spectra"]:
                rows.append(dict(base, item="max_eigenvalue", region=_region_text(r["region"]),
                                 residual=r["gap_to_one"], value=r["max_eigenvalue"]))
        elif kind == "hegerfeldt":
            for name, count in result["counts"].items():
                rows.append(dict(base, item=name, value=count))
        elif kind == "borchers":
            rows.append(dict(base, item="witnesses", value=result["witnesses"]))
        elif kind == "lemmas":
            for r in result["entries"]:
                rows.append(dict(base, item=f"{r['lemma']}:{r['case']}", outcome=r["status"],
                                 residual=r["residual"]))
        elif kind == "conjecture":
            for r in result["probe"]:
                rows.append(dict(base, system=r["system"], item="trivial_dynamics",
                                 holds=r["trivial_dynamics"], residual=r["trivial_dynamics_residual"],
                                 outcome="consistent" if r["matches_conjecture"] else "counterexample"))
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def export(report, fmt="json"):
    """Serialize a report as JSON text or as an RFC 4180 CSV table."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        flatten(report).to_csv(buffer, index=False, lineterminator="\r\n")
        return buffer.getvalue()
    raise UnsupportedFormatError(f"Unsupported report format {fmt!r}; use one of {list(FORMATS)}.")


def parse_report(text):
    return ReportDocument.from_dict(json.loads(text))


def render_matrix_table(matrix):
    """Human readable condition matrix with glyphs and residuals."""
    data = matrix.to_dict() if hasattr(matrix, "to_dict") else matrix
    width = max(len(v["condition"]) for v in data["verdicts"])
    lines = [f"{data['system_label']} ({data['variant']})"]
    for v in data["verdicts"]:
        lines.append(f"  {GLYPHS[v['outcome']]} {v['condition']:<{width}}  {v['residual']:.2e}")
    for c in data["conclusions"]:
        glyph = GLYPHS["pass" if c["holds"] else "fail"]
        lines.append(f"  {glyph} {'=> ' + c['kind']:<{width}}  {c['residual']:.2e}")
    return "\n".join(lines)


def archive_system(s, path, policy=None):
    """Write the operators of the sampled regions of a system to HDF5.

    Description
    ----------
    One group per region holding the operator as a complex dataset and
    the region sites as an attribute. Operators with more than 256
    entries are stored with gzip compression and byte shuffling.

    """
    policy = policy or TolerancePolicy()
    regions = axioms.sample_regions(s, policy)
    with h5py.File(path, "w") as f:
        f.attrs["label"] = s.label
        f.attrs["variant"] = s.variant.value
        f.attrs["sites"] = s.model.sites
        for i, region in enumerate(regions):
            grp = f.create_group(f"region_{i}")
            grp.attrs["sites"] = np.asarray(region.sites, dtype=np.int64)
            entries = s.localize(region).entries
            if entries.size > 256:
                grp.create_dataset("operator", data=entries, compression="gzip",
                                   compression_opts=6, shuffle=True)
            else:
                grp.create_dataset("operator", data=entries)
            grp.attrs["class_hint"] = s.localize(region).class_hint.value
    logger.info("Archived %d operators of %s to %s", len(regions), s.label, path)
    return len(regions)


def load_archived_operator(path, region):
    """Operator stored for region by archive_system."""
    sites = list(region.sites if isinstance(region, Region) else Region(region).sites)
    try:
        with h5py.File(path, "r") as f:
            for name in f:
                grp = f[name]
                if list(grp.attrs["sites"]) == sites:
                    return Operator(grp["operator"][()], grp.attrs["class_hint"])
    except OSError as e:
        raise ArchiveError(f"Cannot read archive {path}: {e}") from e
    raise ArchiveError(f"Region {sites} is not represented in {path}.")
