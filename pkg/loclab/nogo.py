"""Theorem level experiments.

    Description
    ----------
    Condition matrices pair the verdicts of every checker with the
    conclusions the no-go theorems draw from them. The remaining
    experiments measure superluminal leakage of strictly localized
    states, the spectra of unsharp localization effects, the zero sets
    of detection probabilities, Borchers' commutator/product dichotomy
    and the auxiliary lemmas behind the theorem proofs.

"""

# import needed packages
from dataclasses import dataclass
from dataclasses import field
import enum
import logging
from typing import NamedTuple
import warnings
import numpy as np
from loclab import axioms
from loclab import modelzoo
from loclab import opkernel
from loclab.axioms import ConditionId
from loclab.axioms import Outcome
from loclab.axioms import TolerancePolicy
from loclab.axioms import Verdict
from loclab.exceptions import CausalityError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import PreconditionError
from loclab.modelzoo import UnsharpSystem
from loclab.modelzoo import Variant
from loclab.opkernel import OpClass
from loclab.opkernel import Operator
from loclab.opkernel import operator_norm
from loclab.spacetime import ModelKind
from loclab.spacetime import SpaceModel
from loclab.spacetime import Translation
from loclab.spacetime import nav_decompose
from loclab.spacetime import region_distance
from loclab.spacetime import shift_region

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-8
SPARSE_FRACTION = 0.05
MIN_GRID_POINTS = 20
ORTHOGONALITY_TOL = 1e-10


class ConclusionKind(enum.Enum):
    TRIVIAL_DYNAMICS = "trivial_dynamics"
    LOCALIZATION_VANISHES = "localization_vanishes"
    EFFECTS_VANISH = "effects_vanish"
    NUMBERS_VANISH = "numbers_vanish"


# primary conclusion first
CONCLUSIONS = {
    Variant.SHARP: (ConclusionKind.TRIVIAL_DYNAMICS, ConclusionKind.LOCALIZATION_VANISHES),
    Variant.UNSHARP: (ConclusionKind.EFFECTS_VANISH, ConclusionKind.TRIVIAL_DYNAMICS),
    Variant.NUMBER: (ConclusionKind.NUMBERS_VANISH, ConclusionKind.TRIVIAL_DYNAMICS),
}


@dataclass(frozen=True)
class Theorem:
    name: str
    variant: Variant
    premises: tuple
    conclusion: ConclusionKind


THEOREMS = (
    Theorem(
        "strengthened_sharp", Variant.SHARP,
        (ConditionId.LOCALIZABILITY, ConditionId.PROBABILITY_CONSERVATION,
         ConditionId.COVARIANCE, ConditionId.ENERGY_BOUNDED_BELOW, ConditionId.MICROCAUSALITY),
        ConclusionKind.TRIVIAL_DYNAMICS,
    ),
    Theorem(
        "hegerfeldt", Variant.SHARP,
        (ConditionId.MONOTONICITY, ConditionId.COVARIANCE,
         ConditionId.ENERGY_BOUNDED_BELOW, ConditionId.NIWS),
        ConclusionKind.TRIVIAL_DYNAMICS,
    ),
    Theorem(
        "malament", Variant.SHARP,
        (ConditionId.LOCALIZABILITY, ConditionId.COVARIANCE, ConditionId.SPATIAL_COVARIANCE,
         ConditionId.ENERGY_BOUNDED_BELOW, ConditionId.MICROCAUSALITY,
         ConditionId.NO_ABSOLUTE_VELOCITY),
        ConclusionKind.LOCALIZATION_VANISHES,
    ),
    Theorem(
        "unsharp", Variant.UNSHARP,
        (ConditionId.ADDITIVITY, ConditionId.COVARIANCE, ConditionId.SPATIAL_COVARIANCE,
         ConditionId.ENERGY_BOUNDED_BELOW, ConditionId.MICROCAUSALITY,
         ConditionId.NO_ABSOLUTE_VELOCITY),
        ConclusionKind.EFFECTS_VANISH,
    ),
    Theorem(
        "local_number", Variant.NUMBER,
        (ConditionId.ADDITIVITY, ConditionId.COVARIANCE, ConditionId.SPATIAL_COVARIANCE,
         ConditionId.ENERGY_BOUNDED_BELOW, ConditionId.NUMBER_CONSERVATION,
         ConditionId.MICROCAUSALITY, ConditionId.NO_ABSOLUTE_VELOCITY),
        ConclusionKind.NUMBERS_VANISH,
    ),
)


@dataclass(frozen=True)
class Conclusion:
    kind: ConclusionKind
    residual: float
    holds: bool
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "residual": float(self.residual),
            "holds": bool(self.holds),
            "witness": dict(self.witness),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(ConclusionKind(data["kind"]), float(data["residual"]),
                   bool(data["holds"]), dict(data.get("witness", {})))


@dataclass(frozen=True)
class TheoremCheck:
    """Whether a theorem's premises hold for a system, and its conclusion."""

    theorem: str
    premises_hold: bool
    failing_premises: tuple
    conclusion: ConclusionKind
    conclusion_holds: bool

    @property
    def consistent(self):
        return not self.premises_hold or self.conclusion_holds

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "premises_hold": bool(self.premises_hold),
            "failing_premises": [c.value for c in self.failing_premises],
            "conclusion": self.conclusion.value,
            "conclusion_holds": bool(self.conclusion_holds),
            "consistent": bool(self.consistent),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["theorem"],
            bool(data["premises_hold"]),
            tuple(ConditionId(c) for c in data["failing_premises"]),
            ConclusionKind(data["conclusion"]),
            bool(data["conclusion_holds"]),
        )


@dataclass(frozen=True)
class ConditionMatrix:
    """Verdicts of one system with its theorem conclusions.

    Attributes
    ----------
    system_label: str
    variant: Variant
    verdicts: tuple
        One Verdict per ConditionId, in ConditionId order.
    conclusions: tuple
        Conclusions for the variant, primary first.
    theorems: tuple
        TheoremCheck for every theorem stated for the variant.

    """

    system_label: str
    variant: Variant
    verdicts: tuple
    conclusions: tuple
    theorems: tuple

    @property
    def conclusion_kind(self):
        return self.conclusions[0].kind

    @property
    def conclusion_residual(self):
        return self.conclusions[0].residual

    @property
    def conclusion_holds(self):
        return self.conclusions[0].holds

    def verdict(self, condition):
        condition = ConditionId(condition)
        for v in self.verdicts:
            if v.condition is condition:
                return v
        raise KeyError(condition)

    def conclusion(self, kind):
        kind = ConclusionKind(kind)
        for c in self.conclusions:
            if c.kind is kind:
                return c
        raise KeyError(kind)

    def failing(self):
        return [v.condition for v in self.verdicts if v.outcome is Outcome.FAIL]

    def to_dict(self):
        return {
            "system_label": self.system_label,
            "variant": self.variant.value,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "conclusions": [c.to_dict() for c in self.conclusions],
            "theorems": [t.to_dict() for t in self.theorems],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["system_label"],
            Variant(data["variant"]),
            tuple(Verdict.from_dict(v) for v in data["verdicts"]),
            tuple(Conclusion.from_dict(c) for c in data["conclusions"]),
            tuple(TheoremCheck.from_dict(t) for t in data["theorems"]),
        )


def evaluate_conclusion(s, kind, policy=None):
    """Largest deviation from a theorem conclusion over the sampled regions.

    trivial_dynamics is measured with the system's own unitary family,
    max over regions and policy times of |U_t op U_t† - op|; the
    vanishing kinds measure max |op|.
    """
    policy = policy or TolerancePolicy()
    kind = ConclusionKind(kind)
    worst, witness = 0.0, {}
    for region in axioms.sample_regions(s, policy):
        op = s.localize(region)
        if kind is ConclusionKind.TRIVIAL_DYNAMICS:
            for t in policy.time_grid:
                moved = opkernel.conjugate(s.unitaries.evolution(t), op)
                value = operator_norm(moved.entries - op.entries)
                if value > worst or not witness:
                    worst = max(worst, value)
                    witness = {"region": region.to_list(), "time": float(t)}
        else:
            value = operator_norm(op)
            if value > worst or not witness:
                worst = max(worst, value)
                witness = {"region": region.to_list()}
    return Conclusion(kind, float(worst), worst <= policy.pass_tol, witness)


def check_theorem(theorem, verdicts, conclusions):
    by_id = {v.condition: v for v in verdicts}
    failing = tuple(c for c in theorem.premises if by_id[c].outcome is Outcome.FAIL)
    concluded = {c.kind: c for c in conclusions}[theorem.conclusion]
    return TheoremCheck(theorem.name, not failing, failing, theorem.conclusion, concluded.holds)


def condition_matrix(s, policy=None):
    """Run every checker and every conclusion that fits the system.

    Parameters
    ----------
    s: LocalizationSystem
    policy: TolerancePolicy

    Returns
    ----------
    matrix: ConditionMatrix

    """
    policy = policy or TolerancePolicy()
    verdicts = tuple(axioms.evaluate_conditions(s, policy))
    conclusions = tuple(evaluate_conclusion(s, kind, policy) for kind in CONCLUSIONS[s.variant])
    theorems = tuple(
        check_theorem(th, verdicts, conclusions) for th in THEOREMS if th.variant is s.variant
    )
    for check in theorems:
        if not check.consistent:
            logger.warning("%s: premises of %s hold but its conclusion fails", s.label, check.theorem)
    return ConditionMatrix(s.label, s.variant, verdicts, conclusions, theorems)


@dataclass(frozen=True)
class LeakageReport:
    region: list
    probe: list
    gap: float
    time: float
    probability: float
    spacelike_clear: bool = True

    def to_dict(self):
        return {
            "region": list(self.region),
            "probe": list(self.probe),
            "gap": float(self.gap),
            "time": float(self.time),
            "probability": float(self.probability),
            "spacelike_clear": bool(self.spacelike_clear),
        }


def superluminal_leakage(s, d, probe, t):
    """Probability found in probe after a state localized in d evolves for t.

    Description
    ----------
    The initial state is the system's site profile projected onto d, so
    E_d ψ = ψ exactly. The configuration must be spacelike clear: no
    luminal signal from d reaches probe within t.

    Parameters
    ----------
    s: SharpSystem
    d: Region
    probe: Region
    t: float
        Non-negative elapsed time.

    Returns
    ----------
    report: LeakageReport

    """
    if s.variant is not Variant.SHARP:
        raise PreconditionError(f"Leakage needs a sharp system, got {s.variant.value}.")
    if t < 0:
        raise InvalidParameterError(f"Elapsed time must be non-negative, got {t}.")
    m = s.model
    d = m.validate(d)
    probe = m.validate(probe)
    gap = region_distance(m, d, probe)
    if not m.light_speed * t < gap:
        raise CausalityError(
            f"Regions {gap} apart are causally connected within t = {t}; leakage would be allowed."
        )
    psi = s.localized_state(d)
    psi_t = modelzoo.evolve(s, psi, t)
    probability = min(1.0, max(0.0, opkernel.expectation(s.localize(probe), psi_t)))
    logger.debug("Leakage %.3e from %s to %s at t=%s", probability, d.to_list(), probe.to_list(), t)
    return LeakageReport(d.to_list(), probe.to_list(), gap, float(t), probability)


class BuschSpectrum(NamedTuple):
    max_eigenvalue: float
    min_eigenvalue: float
    gap_to_one: float

    def to_dict(self):
        return {k: float(v) for k, v in self._asdict().items()}


def busch_spectrum(s, d):
    """Extremal eigenvalues of the operator assigned to d, and 1 - max."""
    d = s.model.validate(d)
    if d.is_empty or len(d) >= s.model.sites:
        raise InvalidRegionError(f"Busch spectrum needs a nonempty proper region, got {d.to_list()}.")
    if s.variant is Variant.UNSHARP and 2 * len(d) > s.model.sites:
        warnings.warn(
            f"Region of {len(d)} of {s.model.sites} sites: an eigenvalue 1 may be forced by dimension."
        )
    eigenvalues = np.linalg.eigvalsh(opkernel.hermitize(s.localize(d).entries))
    top = float(eigenvalues[-1])
    return BuschSpectrum(top, float(eigenvalues[0]), 1.0 - top)


class ZeroSetClass(enum.Enum):
    IDENTICALLY_ZERO = "identically_zero"
    ZEROS_SPARSE = "zeros_sparse"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class ZeroSetReport:
    times: np.ndarray
    values: np.ndarray
    classification: ZeroSetClass
    zero_fraction: float
    max_abs: float

    def to_dict(self):
        return {
            "classification": self.classification.value,
            "zero_fraction": float(self.zero_fraction),
            "max_abs": float(self.max_abs),
            "points": int(len(self.times)),
        }


def detection_probabilities(h, a, psi, grid):
    """f(t) = <U_t ψ, A U_t ψ> for every t in grid, U_t = exp(itH)."""
    dec = opkernel.eig_hermitian(h)
    amplitudes = psi.amplitudes if isinstance(psi, opkernel.StateVector) else np.asarray(psi)
    coeffs = dec.eigenvectors.conj().T @ amplitudes
    phases = np.exp(1j * np.outer(dec.eigenvalues, grid))
    states = dec.eigenvectors @ (phases * coeffs[:, None])
    return np.real(np.sum(states.conj() * (a.entries @ states), axis=0))


def hegerfeldt_zero_set(h, a, psi, grid):
    """Classify the zero set of a detection probability along the dynamics.

    Returns
    ----------
    report: ZeroSetReport
        identically_zero when max |f| <= 1e-8; zeros_sparse when fewer
        than 5% of the grid points have |f| <= 1e-8; anomalous otherwise.

    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < MIN_GRID_POINTS:
        warnings.warn(f"Zero set sampled on only {grid.size} points.")
    values = detection_probabilities(h, a, psi, grid)
    magnitude = np.abs(values)
    max_abs = float(magnitude.max()) if magnitude.size else 0.0
    zero_fraction = float(np.mean(magnitude <= ZERO_TOL)) if magnitude.size else 1.0
    if max_abs <= ZERO_TOL:
        classification = ZeroSetClass.IDENTICALLY_ZERO
    elif zero_fraction < SPARSE_FRACTION:
        classification = ZeroSetClass.ZEROS_SPARSE
    else:
        classification = ZeroSetClass.ANOMALOUS
    return ZeroSetReport(grid, values, classification, zero_fraction, max_abs)


class BorchersMode(enum.Enum):
    VACUOUS = "vacuous"
    PREMISE_HOLDS = "premise_holds"
    CONTRAPOSITIVE = "contrapositive"


@dataclass(frozen=True)
class BorchersReport:
    mode: BorchersMode
    consistent: bool
    max_commutator: float
    max_product: float
    witness_found: bool
    witness_time: float = None

    def to_dict(self):
        return {
            "mode": self.mode.value,
            "consistent": bool(self.consistent),
            "max_commutator": float(self.max_commutator),
            "max_product": float(self.max_product),
            "witness_found": bool(self.witness_found),
            "witness_time": None if self.witness_time is None else float(self.witness_time),
        }


def borchers_probe(e, f, h, interval=(0.0, 0.5), points=16, horizon=10.0):
    """Borchers' dichotomy for orthogonal projections under U_t = exp(itH).

    Description
    ----------
    When [e, U_t f U_t†] vanishes on the interval, the product
    e U_t f U_t† must vanish for all t; this is checked on a wide grid
    over [-horizon, horizon]. Otherwise the probe looks for a time where
    the product is nonzero, the contrapositive witness.

    """
    if operator_norm(e.entries @ f.entries) > ORTHOGONALITY_TOL:
        raise PreconditionError("Borchers probe needs orthogonal projections, EF != 0.")
    if not e.entries.any() or not f.entries.any():
        return BorchersReport(BorchersMode.VACUOUS, True, 0.0, 0.0, False)
    dec = opkernel.eig_hermitian(h)

    def moved(t):
        u = Operator(dec.function(np.exp(1j * t * dec.eigenvalues)), OpClass.UNITARY)
        return opkernel.conjugate(u, f)

    commutator = max(
        opkernel.commutator_norm(e, moved(t)) for t in np.linspace(interval[0], interval[1], points)
    )
    wide = np.linspace(-horizon, horizon, 8 * points + 1)
    products = [operator_norm(e.entries @ moved(t).entries) for t in wide]
    k = int(np.argmax(products))
    product = float(products[k])
    found = product > opkernel.FAIL_TOL
    if commutator <= opkernel.RANGE_TOL:
        return BorchersReport(BorchersMode.PREMISE_HOLDS, not found, commutator, product,
                              found, float(wide[k]) if found else None)
    return BorchersReport(BorchersMode.CONTRAPOSITIVE, True, commutator, product,
                          found, float(wide[k]) if found else None)


def number_reduction(s, n):
    """Unsharp system A_Δ = N_Δ E_n / n on the n particle sector.

    Parameters
    ----------
    s: NumberSystem
    n: int
        Particle number, 1 <= n <= number of sites.

    Returns
    ----------
    system: UnsharpSystem

    """
    if s.variant is not Variant.NUMBER:
        raise PreconditionError(f"Number reduction needs a number system, got {s.variant.value}.")
    if int(n) != n or not 1 <= n <= s.model.sites:
        raise InvalidParameterError(f"Particle number must be in 1..{s.model.sites}, got {n}.")
    sector = opkernel.spectral_projection(s.total_number(), n - 0.5, n + 0.5).entries

    def assign(region):
        return Operator(opkernel.hermitize(s.localize(region).entries @ sector) / n, OpClass.EFFECT)

    return UnsharpSystem(
        s.model,
        assign,
        s.unitaries,
        label=f"{s.label}_reduced_{n}",
        provenance=f"Local numbers of {s.label} compressed to the {n} particle sector and divided by {n}.",
        featured_regions=s.featured_regions,
    )


@dataclass
class LemmaSuiteReport:
    entries: list = field(default_factory=list)
    number_reduction: dict = field(default_factory=dict)

    def add(self, lemma, case, status, residual, premise_residual=None):
        self.entries.append({
            "lemma": lemma,
            "case": case,
            "status": status,
            "residual": float(residual),
            "premise_residual": None if premise_residual is None else float(premise_residual),
        })

    def counts(self, lemma=None):
        out = {"confirmed": 0, "vacuous": 0, "violated": 0}
        for entry in self.entries:
            if lemma is None or entry["lemma"] == lemma:
                out[entry["status"]] += 1
        return out

    @property
    def violated(self):
        return [e for e in self.entries if e["status"] == "violated"]

    def to_dict(self):
        lemmas = sorted({e["lemma"] for e in self.entries})
        return {
            "entries": list(self.entries),
            "counts": {name: self.counts(name) for name in lemmas},
            "number_reduction": dict(self.number_reduction),
        }


def default_lemma_systems(sites=16):
    m = SpaceModel(ModelKind.LINE_ISOTROPIC, sites)
    return [
        modelzoo.build_standard(m, "zero"),
        modelzoo.build_standard(m, "nonrelativistic"),
        modelzoo.build_pathological(m, mode="only_d0"),
    ]


def _orthogonal_invariance(report, s, policy):
    m = s.model
    family = s.unitaries
    if m.kind is not ModelKind.LINE_ISOTROPIC or family.time_only or family.momentum is None:
        return
    for region in axioms.sample_regions(s, policy):
        e = s.localize(region)
        for shift in sorted({len(region) + 1, m.sites // 2}):
            if not region.isdisjoint(shift_region(m, region, shift)):
                continue
            a = Translation(0.0, shift)
            b, c = nav_decompose(m, a)
            premise = operator_norm(e.entries @ opkernel.conjugate(family.translation(a), e).entries)
            for step in (b, c):
                moved = opkernel.conjugate(family.translation(step), e)
                premise = max(premise, operator_norm(moved.entries - e.entries))
            residual = operator_norm(e)
            case = f"{s.label}:{region.to_list()}:{shift}"
            if premise > policy.pass_tol:
                report.add("orthogonal_invariance", case, "vacuous", residual, premise)
            else:
                status = "confirmed" if residual <= policy.fail_tol else "violated"
                report.add("orthogonal_invariance", case, status, residual, premise)


def _covering_join_invariance(report, s, policy):
    prob = axioms.check_conservation(s, policy)[0]
    cov = axioms.check_covariance(s, policy)[0]
    coverings = axioms.conservation_coverings(s.model, policy, s.featured_regions)
    if not (prob.holds and cov.holds):
        report.add("covering_join_invariance", s.label, "vacuous", 0.0,
                   max(prob.residual, cov.residual))
        return
    for index, covering in enumerate(coverings):
        joined = opkernel.lattice_join([s.localize(r) for r in covering])
        residual = max(
            operator_norm(opkernel.conjugate(s.unitaries.evolution(t), joined).entries - joined.entries)
            for t in policy.time_grid
        )
        status = "confirmed" if residual <= policy.pass_tol else "violated"
        report.add("covering_join_invariance", f"{s.label}:{index}", status, residual, 0.0)


def block_instance(rng, sizes=(3, 3, 3, 3)):
    """Hamiltonian block diagonal over the ranges of E0, E1, E2 and their complement."""
    dim = sum(sizes)
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w, _ = np.linalg.qr(raw)
    blocks = np.zeros((dim, dim), dtype=complex)
    projections = []
    start = 0
    for size in sizes:
        piece = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        blocks[start:start + size, start:start + size] = piece + piece.conj().T
        mask = np.zeros(dim)
        mask[start:start + size] = 1.0
        projections.append(Operator(opkernel.hermitize(w @ np.diag(mask) @ w.conj().T), OpClass.PROJECTION))
        start += size
    h = Operator(opkernel.hermitize(w @ blocks @ w.conj().T), OpClass.HERMITIAN)
    return h, projections[:3]


def _block_invariance(report, policy, rng, instances):
    for k in range(instances):
        h, (e0, e1, e2) = block_instance(rng)
        dec = opkernel.eig_hermitian(h)
        premise, residual = 0.0, 0.0
        for t in policy.time_grid:
            u = Operator(dec.function(np.exp(1j * t * dec.eigenvalues)), OpClass.UNITARY)
            for en in (e1, e2):
                premise = max(premise, opkernel.commutator_norm(e0, opkernel.conjugate(u, en)))
            residual = max(residual, operator_norm(opkernel.conjugate(u, e0).entries - e0.entries))
        if premise > policy.pass_tol:
            report.add("block_invariance", f"instance_{k}", "vacuous", residual, premise)
        else:
            status = "confirmed" if residual <= opkernel.EXACT_TOL else "violated"
            report.add("block_invariance", f"instance_{k}", status, residual, premise)


def _reduction_chain(policy, sites=6, n=2):
    fock = modelzoo.build_lattice_fock(sites)
    reduced = number_reduction(fock, n)
    verdicts = axioms.evaluate_conditions(reduced, policy)
    premises = {th.name: th for th in THEOREMS}["unsharp"].premises
    failing = [v.condition.value for v in verdicts
               if v.condition in premises and v.outcome is Outcome.FAIL]
    conclusion = evaluate_conclusion(reduced, ConclusionKind.EFFECTS_VANISH, policy)
    return {
        "system": reduced.label,
        "failing_premises": failing,
        "effects_vanish": bool(conclusion.holds),
        "max_effect_norm": float(conclusion.residual),
    }


def appendix_lemma_suite(policy=None, systems=None, rng=None, instances=5):
    """Check the auxiliary lemmas on sampled and constructed instances.

    Description
    ----------
    orthogonal_invariance: a region projection that is invariant under
    the two timelike translations of a "no absolute velocity"
    decomposition and orthogonal to its spacelike translate must vanish.
    covering_join_invariance: on systems passing probability conservation
    and covariance, covering joins commute with the dynamics.
    block_invariance: with H block diagonal over the ranges of E0, E1, E2,
    U_t E0 U_t† = E0. Cases whose premise fails are recorded as vacuous.
    The local number reduction is run on the lattice Fock system and
    records which unsharp premise blocks the chain.

    Parameters
    ----------
    policy: TolerancePolicy
    systems: list
        Systems for the region lemmas, small isotropic systems by default.
    rng: numpy.random.Generator
    instances: int
        Number of constructed block instances.

    Returns
    ----------
    report: LemmaSuiteReport

    """
    policy = policy or TolerancePolicy()
    rng = rng if rng is not None else np.random.default_rng(0)
    systems = systems if systems is not None else default_lemma_systems()
    report = LemmaSuiteReport()
    for s in systems:
        if s.variant is not Variant.SHARP:
            continue
        _orthogonal_invariance(report, s, policy)
        _covering_join_invariance(report, s, policy)
    _block_invariance(report, policy, rng, instances)
    report.number_reduction = _reduction_chain(policy)
    logger.info("Lemma suite: %s", {k: report.counts(k) for k in
                                    ("orthogonal_invariance", "covering_join_invariance", "block_invariance")})
    return report


def conjecture_probe(matrices):
    """Does every counterexample to a theorem have trivial dynamics?

    A counterexample is a system whose premises of some theorem hold
    while that theorem's conclusion fails. Reported, never asserted.
    """
    rows = []
    for matrix in matrices:
        broken = [t.theorem for t in matrix.theorems if not t.consistent]
        trivial = matrix.conclusion(ConclusionKind.TRIVIAL_DYNAMICS)
        rows.append({
            "system": matrix.system_label,
            "counterexample_to": broken,
            "trivial_dynamics": bool(trivial.holds),
            "trivial_dynamics_residual": float(trivial.residual),
            "matches_conjecture": bool(not broken or trivial.holds),
        })
    return rows


def detection_floor(s, policy=None):
    """Smallest maximal detection probability over the sampled regions."""
    policy = policy or TolerancePolicy()
    per_region = []
    for region in axioms.sample_regions(s, policy):
        top = float(np.linalg.eigvalsh(opkernel.hermitize(s.localize(region).entries))[-1])
        per_region.append({"region": region.to_list(), "max_probability": top})
    lowest = min(per_region, key=lambda row: (row["max_probability"], len(row["region"])))
    return {"floor": lowest["max_probability"], "region": lowest["region"], "regions": per_region}
