"""Numerical checkers for the localization conditions.

    Description
    ----------
    Each checker samples a fixed catalog of regions, times, translations
    and region families, and returns Verdicts carrying the largest
    violation found and a witness describing where it was found.
    Verdicts distinguish pass, fail and not applicable.

    Conditions quantified over an existential ε (microcausality, strong
    causality, NIWS) are sampled on a geometric time grid that stays
    strictly below the light-crossing time of each region pair. A
    violation anywhere on that grid falsifies the condition for the
    chosen gap.

"""

# import needed packages
import dataclasses
from dataclasses import dataclass
from dataclasses import field
import enum
import logging
import math
import numpy as np
from loclab import opkernel
from loclab.exceptions import InfeasibleFamilyError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import SamplingPlanError
from loclab.modelzoo import Variant
from loclab.opkernel import operator_norm
from loclab.spacetime import FamilyMode
from loclab.spacetime import ModelKind
from loclab.spacetime import NavOutcome
from loclab.spacetime import Translation
from loclab.spacetime import grow_region
from loclab.spacetime import interval
from loclab.spacetime import is_spacelike_clear
from loclab.spacetime import make_families
from loclab.spacetime import nav_decompose
from loclab.spacetime import region_distance
from loclab.spacetime import shift_region

logger = logging.getLogger(__name__)


class Outcome(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not_applicable"


class ConditionId(enum.Enum):
    LOCALIZABILITY = "localizability"
    ADDITIVITY = "additivity"
    COVARIANCE = "covariance"
    SPATIAL_COVARIANCE = "spatial_covariance"
    ENERGY_BOUNDED_BELOW = "energy_bounded_below"
    MICROCAUSALITY = "microcausality"
    STRONG_CAUSALITY = "strong_causality"
    NIWS = "niws"
    MONOTONICITY = "monotonicity"
    PROBABILITY_CONSERVATION = "probability_conservation"
    NUMBER_CONSERVATION = "number_conservation"
    NO_ABSOLUTE_VELOCITY = "no_absolute_velocity"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one condition check.

    The residual is the largest violation found; the witness records
    where it was found. Failing verdicts mark whether the residual also
    clears the failure tolerance (conclusive).
    """

    condition: ConditionId
    outcome: Outcome
    residual: float = 0.0
    witness: dict = field(default_factory=dict)
    samples_examined: int = 0

    @property
    def holds(self):
        return self.outcome is Outcome.PASS

    @property
    def applicable(self):
        return self.outcome is not Outcome.NOT_APPLICABLE

    def to_dict(self):
        return {
            "condition": self.condition.value,
            "outcome": self.outcome.value,
            "holds": self.holds,
            "residual": float(self.residual),
            "witness": dict(self.witness),
            "samples_examined": int(self.samples_examined),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            ConditionId(data["condition"]),
            Outcome(data["outcome"]),
            float(data["residual"]),
            dict(data.get("witness", {})),
            int(data.get("samples_examined", 0)),
        )


@dataclass(frozen=True)
class RegionPlan:
    """Fixed catalog of interval widths, gaps and placements."""

    width_fractions: tuple = (0.125, 0.25)
    gap_fractions: tuple = (0.125, 0.25)
    antipodal: bool = True


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances and sampling plan shared by all checkers.

    Parameters
    ----------
    pass_tol: float
        Largest residual that still counts as holding.
    fail_tol: float
        Smallest residual that counts as a genuine failure witness.
    time_grid: tuple
        Times used by covariance, conservation and conclusion checks.
    causality_points: int
        Points of the geometric causality time grid per region pair.
    causality_floor: float
        First time of the geometric causality grid.
    velocities: tuple
        Frame velocities, in units of c, of the boosted generators H - vP.
    refinement: tuple
        Lattice sizes of the energy refinement scan.
    energy_floor: float
        A refinement scan fails when its minimum keeps dropping below -energy_floor.
    nested_depth: int
        Depth of nested region chains used for monotonicity.
    region_plan: RegionPlan

    """

    pass_tol: float = 1e-8
    fail_tol: float = 1e-6
    time_grid: tuple = (0.1, 0.3, 0.5, 1.0)
    causality_points: int = 8
    causality_floor: float = 1e-3
    velocities: tuple = (0.0, 0.5, -0.5, 0.9, -0.9)
    refinement: tuple = (32, 64, 128, 256)
    energy_floor: float = 10.0
    nested_depth: int = 3
    region_plan: RegionPlan = RegionPlan()

    def __post_init__(self):
        for name in ("time_grid", "velocities", "refinement"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if isinstance(self.region_plan, dict):
            object.__setattr__(self, "region_plan", RegionPlan(
                **{k: tuple(v) if isinstance(v, list) else v for k, v in self.region_plan.items()}
            ))
        if not 0 < self.pass_tol < self.fail_tol:
            raise InvalidParameterError(
                f"Need 0 < pass_tol < fail_tol, got {self.pass_tol} and {self.fail_tol}."
            )
        if self.causality_points < 1 or self.causality_floor <= 0:
            raise InvalidParameterError("The causality grid needs a positive floor and at least one point.")
        if any(abs(v) >= 1 for v in self.velocities):
            raise InvalidParameterError("Boost velocities must be slower than light.")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"Unknown tolerance keys: {sorted(unknown)}.")
        return cls(**data)

    def to_dict(self):
        out = dataclasses.asdict(self)
        for key, value in list(out.items()):
            if isinstance(value, tuple):
                out[key] = list(value)
        out["region_plan"] = {k: list(v) if isinstance(v, tuple) else v
                              for k, v in out["region_plan"].items()}
        return out


class _Worst:
    """Running maximum of a residual together with its witness."""

    def __init__(self):
        self.residual = 0.0
        self.witness = {}
        self.samples = 0

    def update(self, value, **witness):
        self.samples += 1
        if value > self.residual or not self.witness:
            self.residual = max(float(value), self.residual)
            if value >= self.residual:
                self.witness = witness


def _verdict(condition, worst, policy, extra=None):
    witness = dict(worst.witness)
    if extra:
        witness.update(extra)
    if worst.residual <= policy.pass_tol:
        return Verdict(condition, Outcome.PASS, worst.residual, witness, worst.samples)
    witness["conclusive"] = worst.residual > policy.fail_tol
    logger.debug("%s fails with residual %.3e at %s", condition.value, worst.residual, witness)
    return Verdict(condition, Outcome.FAIL, worst.residual, witness, worst.samples)


def not_applicable(condition, reason):
    return Verdict(condition, Outcome.NOT_APPLICABLE, 0.0, {"reason": reason}, 0)


def _unique(regions):
    seen = []
    for r in regions:
        if r not in seen:
            seen.append(r)
    return seen


def catalog_anchors(m, plan=None):
    plan = plan or RegionPlan()
    start = m.sites // 8
    return _unique(interval(m, start, max(1, int(m.sites * w))) for w in plan.width_fractions)


def region_catalog(m, plan=None):
    """Intervals of the plan's widths with partners at the plan's gaps.

    Description
    ----------
    Every anchor starts at site N // 8. Each partner has the anchor's
    width and sits gap sites beyond the anchor's last site, so that the
    pair is gap spacings apart. Antipodal partners sit half a lattice
    away.

    """
    plan = plan or RegionPlan()
    start = m.sites // 8
    regions = []
    for fraction in plan.width_fractions:
        width = max(1, int(m.sites * fraction))
        regions.append(interval(m, start, width))
        for gap_fraction in plan.gap_fractions:
            gap = max(1, int(m.sites * gap_fraction))
            regions.append(interval(m, start + width - 1 + gap, width))
        if plan.antipodal:
            regions.append(interval(m, start + m.sites // 2, width))
    return _unique(regions)


def sample_regions(s, policy):
    return _unique(region_catalog(s.model, policy.region_plan) + list(s.featured_regions))


def disjoint_pairs(regions, ordered=False):
    pairs = []
    for i, d1 in enumerate(regions):
        for j, d2 in enumerate(regions):
            if (i < j or (ordered and i != j)) and not d1.is_empty and not d2.is_empty \
                    and d1.isdisjoint(d2):
                pairs.append((d1, d2))
    return pairs


def causality_times(policy, m, gap, lattice_shift=False):
    """Sample times strictly below the light-crossing time gap / c."""
    limit = gap / m.light_speed
    if lattice_shift:
        step = m.spacing / m.light_speed
        return [k * step for k in range(1, policy.causality_points + 1) if k * step < limit]
    top = 0.95 * limit
    if top <= policy.causality_floor:
        return [0.5 * limit]
    return [float(t) for t in np.geomspace(policy.causality_floor, top, policy.causality_points)]


def _region_pair(d1, d2):
    return {"region": d1.to_list(), "probe": d2.to_list()}


def _localizability(s, pairs, policy):
    cid = ConditionId.LOCALIZABILITY
    if s.variant is Variant.NUMBER:
        return not_applicable(cid, "localizability concerns projections and effects")
    worst = _Worst()
    eye = np.eye(s.dim)
    for d1, d2 in pairs:
        a = s.localize(d1).entries
        b = s.localize(d2).entries
        if s.variant is Variant.SHARP:
            value = operator_norm(a @ b)
        else:
            value = max(0.0, float(np.linalg.eigvalsh(opkernel.hermitize(a + b - eye))[-1]))
        worst.update(value, **_region_pair(d1, d2))
    return _verdict(cid, worst, policy)


def _additivity(s, pairs, policy):
    worst = _Worst()
    for d1, d2 in pairs:
        total = s.localize(d1).entries + s.localize(d2).entries
        value = operator_norm(total - s.localize(d1.union(d2)).entries)
        worst.update(value, **_region_pair(d1, d2))
    return _verdict(ConditionId.ADDITIVITY, worst, policy)


def monotonicity_families(m, policy):
    """Nested chains and collar squeezes around the catalog anchors."""
    anchors = catalog_anchors(m, policy.region_plan)
    anchors = _unique(anchors + [interval(m, m.sites // 8, m.sites // 2)])
    families = []
    for anchor in anchors:
        for mode, kwargs in ((FamilyMode.NESTED_TO, {"depth": policy.nested_depth}),
                             (FamilyMode.SQUEEZE_TO, {})):
            try:
                families.extend(make_families(m, mode, region=anchor, **kwargs))
            except InfeasibleFamilyError:
                logger.debug("Skipping %s family around %s", mode.value, anchor.to_list())
    return families


def _monotonicity(s, policy):
    cid = ConditionId.MONOTONICITY
    if s.variant is not Variant.SHARP:
        return not_applicable(cid, "monotonicity is stated for projection valued systems")
    worst = _Worst()
    for family in monotonicity_families(s.model, policy):
        meet = opkernel.lattice_meet([s.localize(r) for r in family])
        common = family[0]
        for r in family[1:]:
            common = common.intersection(r)
        value = operator_norm(meet.entries - s.localize(common).entries)
        worst.update(value, family=[r.to_list() for r in family], intersection=common.to_list())
    return _verdict(cid, worst, policy)


def check_statics(s, policy=None):
    """Localizability, additivity and monotonicity verdicts.

    Parameters
    ----------
    s: LocalizationSystem
    policy: TolerancePolicy

    Returns
    ----------
    verdicts: list
        Verdicts for localizability, additivity and monotonicity, in
        that order.

    """
    policy = policy or TolerancePolicy()
    pairs = disjoint_pairs(sample_regions(s, policy))
    if not pairs:
        raise SamplingPlanError(f"No disjoint region pairs on {s.model.sites} sites.")
    return [
        _localizability(s, pairs, policy),
        _additivity(s, pairs, policy),
        _monotonicity(s, policy),
    ]


def spatial_shifts(m):
    return sorted({1, -1, max(1, m.sites // 8), m.sites // 2})


def check_covariance(s, policy=None):
    """Time translation and spatial translation covariance verdicts."""
    policy = policy or TolerancePolicy()
    regions = sample_regions(s, policy)
    family = s.unitaries

    timed = _Worst()
    for region in regions:
        op = s.localize(region)
        for t in policy.time_grid:
            expected = opkernel.conjugate(family.evolution(t), op)
            value = operator_norm(expected.entries - s.operator_at(region, t).entries)
            timed.update(value, region=region.to_list(), time=float(t))
    verdicts = [_verdict(ConditionId.COVARIANCE, timed, policy)]

    if family.spatial_shift is None:
        verdicts.append(not_applicable(ConditionId.SPATIAL_COVARIANCE, "no spatial shift"))
        return verdicts
    spatial = _Worst()
    for shift in spatial_shifts(s.model):
        u = family.spatial(shift)
        for region in regions:
            moved = opkernel.conjugate(u, s.localize(region))
            target = s.localize(shift_region(s.model, region, shift))
            value = operator_norm(moved.entries - target.entries)
            spatial.update(value, region=region.to_list(), shift=int(shift))
    verdicts.append(_verdict(ConditionId.SPATIAL_COVARIANCE, spatial, policy))
    return verdicts


def _lowest_energy(family, velocity):
    if velocity == 0:
        return family.min_energy()
    generator = family.generator(velocity).entries
    return float(np.linalg.eigvalsh(opkernel.hermitize(generator))[0])


def check_energy(s, policy=None, refinement=None):
    """Energy bounded below, by a refinement scan.

    Description
    ----------
    Every finite matrix is bounded below, so the continuum condition is
    tracked across lattice refinements at fixed physical length. On
    isotropic lines the scan covers the boosted generators H - vP of
    affine families, elsewhere the time generator H alone. The condition
    fails when the minimum keeps dropping at every refinement and ends
    below -energy_floor.

    Parameters
    ----------
    s: LocalizationSystem
    policy: TolerancePolicy
    refinement: sequence
        Lattice sizes; defaults to the system's own levels, then the
        policy's.

    Returns
    ----------
    verdict: Verdict

    """
    policy = policy or TolerancePolicy()
    if s.family_factory is None:
        levels = (s.model.sites,)
    else:
        levels = tuple(refinement or s.refinement_levels or policy.refinement)
    worst = _Worst()
    scan = []
    for sites in levels:
        family = s.family_at(sites)
        boosted = (s.model.kind is ModelKind.LINE_ISOTROPIC and not family.time_only
                   and family.momentum is not None)
        velocities = policy.velocities if boosted else (0.0,)
        lows = [_lowest_energy(family, v * s.model.light_speed) for v in velocities]
        k = int(np.argmin(lows))
        scan.append({"sites": int(sites), "min_energy": float(lows[k]), "velocity": float(velocities[k])})
        worst.samples += len(velocities)
    minima = [entry["min_energy"] for entry in scan]
    diverging = (
        len(minima) >= 2
        and all(b < a for a, b in zip(minima, minima[1:]))
        and minima[-1] < -policy.energy_floor
    )
    worst.residual = (-policy.energy_floor - minima[-1]) if diverging else 0.0
    worst.witness = {"scan": scan, "diverging": bool(diverging)}
    return _verdict(ConditionId.ENERGY_BOUNDED_BELOW, worst, policy)


def niws_pairs(m, policy):
    """Anchors with collared neighbourhoods; the collar is the boundary gap."""
    collars = sorted({1, 2, max(2, m.sites // 16)})
    pairs = []
    for anchor in catalog_anchors(m, policy.region_plan):
        for k in collars:
            outer = grow_region(m, anchor, k, k)
            if len(outer) < m.sites:
                pairs.append((anchor, outer, k * m.spacing))
    return pairs


def check_causality(s, policy=None):
    """Microcausality, strong causality and NIWS verdicts.

    Strong causality is checked for sharp and unsharp systems, NIWS for
    sharp systems only.
    """
    policy = policy or TolerancePolicy()
    m = s.model
    lattice = s.unitaries.lattice_shift_dynamics
    micro = _Worst()
    strong = _Worst()
    for d1, d2 in disjoint_pairs(sample_regions(s, policy), ordered=True):
        gap = region_distance(m, d1, d2)
        a = s.localize(d1)
        for t in causality_times(policy, m, gap, lattice):
            if not is_spacelike_clear(m, d1, d2, t):
                continue
            b = s.operator_at(d2, t)
            witness = dict(_region_pair(d1, d2), time=float(t), gap=float(gap))
            micro.update(opkernel.commutator_norm(a, b), **witness)
            if s.variant is not Variant.NUMBER:
                strong.update(operator_norm(a.entries @ b.entries), **witness)
    if micro.samples == 0:
        raise SamplingPlanError(f"No spacelike-clear samples for {s.label}.")
    verdicts = [_verdict(ConditionId.MICROCAUSALITY, micro, policy)]
    if s.variant is Variant.NUMBER:
        verdicts.append(not_applicable(ConditionId.STRONG_CAUSALITY, "products of number operators do not vanish"))
    else:
        verdicts.append(_verdict(ConditionId.STRONG_CAUSALITY, strong, policy))

    if s.variant is not Variant.SHARP:
        verdicts.append(not_applicable(ConditionId.NIWS, "NIWS is stated for projection valued systems"))
        return verdicts
    spread = _Worst()
    eye = np.eye(s.dim)
    for inner, outer, gap in niws_pairs(m, policy):
        e = s.localize(inner).entries
        for t in causality_times(policy, m, gap, lattice):
            outside = eye - s.operator_at(outer, t).entries
            spread.update(operator_norm(outside @ e), region=inner.to_list(),
                          probe=outer.to_list(), time=float(t), gap=float(gap))
    verdicts.append(_verdict(ConditionId.NIWS, spread, policy))
    return verdicts


def conservation_coverings(m, policy, featured=()):
    """Two partitions, partitions around each anchor and a large-region partition."""
    coverings = make_families(m, FamilyMode.DISJOINT_COVERING)
    big = interval(m, m.sites // 8, math.ceil(3 * m.sites / 4))
    for region in _unique(catalog_anchors(m, policy.region_plan) + list(featured) + [big]):
        coverings.extend(make_families(m, FamilyMode.COVERING_WITH, region=region))
    return coverings


def check_conservation(s, policy=None):
    """Probability conservation (sharp) or number conservation (number).

    Returns
    ----------
    verdicts: list
        Verdicts for probability conservation and number conservation;
        the one that does not fit the system's variant is not applicable.

    """
    policy = policy or TolerancePolicy()
    coverings = conservation_coverings(s.model, policy, s.featured_regions)
    prob_id = ConditionId.PROBABILITY_CONSERVATION
    num_id = ConditionId.NUMBER_CONSERVATION

    if s.variant is Variant.SHARP:
        reference = opkernel.lattice_join([s.localize(r) for r in coverings[0]])
        worst = _Worst()
        for index, covering in enumerate(coverings):
            for t in (0.0,) + policy.time_grid:
                joined = opkernel.lattice_join([s.operator_at(r, t) for r in covering])
                value = operator_norm(joined.entries - reference.entries)
                worst.update(value, covering=[r.to_list() for r in covering],
                             covering_index=index, time=float(t))
        return [
            _verdict(prob_id, worst, policy),
            not_applicable(num_id, "number conservation concerns number operators"),
        ]

    if s.variant is Variant.NUMBER:
        total = s.total_number()
        worst = _Worst()
        for index, covering in enumerate(coverings):
            summed = sum(s.localize(r).entries for r in covering)
            worst.update(operator_norm(summed - total.entries), covering_index=index,
                         covering=[r.to_list() for r in covering])
        for t in policy.time_grid:
            moved = opkernel.conjugate(s.unitaries.evolution(t), total)
            worst.update(operator_norm(moved.entries - total.entries), time=float(t))
        return [
            not_applicable(prob_id, "probability conservation concerns projections"),
            _verdict(num_id, worst, policy),
        ]

    return [
        not_applicable(prob_id, "probability conservation concerns projections"),
        not_applicable(num_id, "number conservation concerns number operators"),
    ]


def nav_samples(m):
    shifts = sorted({1, 2, max(1, m.sites // 4), m.sites // 2})
    samples = []
    for s in shifts:
        for sign in (1, -1):
            samples.append(Translation(0.0, sign * s))
            samples.append(Translation(0.5 * s * m.spacing / m.light_speed, sign * s))
    return samples


def check_nav(s, policy=None):
    """No absolute velocity: every sampled spacelike translation decomposes."""
    policy = policy or TolerancePolicy()
    m = s.model
    cid = ConditionId.NO_ABSOLUTE_VELOCITY
    if m.kind is ModelKind.CIRCLE:
        return not_applicable(cid, "no absolute velocity is not defined on the cylinder")
    samples = nav_samples(m)
    failures = []
    for a in samples:
        pair = nav_decompose(m, a)
        if pair is None or pair is NavOutcome.NOT_APPLICABLE:
            failures.append(a.to_dict())
            continue
        b, c = pair
        diff = b - c
        if not (b.is_timelike(m) and c.is_timelike(m)) or diff.shift != a.shift \
                or abs(diff.time - a.time) > 1e-12:
            failures.append(a.to_dict())
    worst = _Worst()
    worst.samples = len(samples)
    worst.residual = len(failures) / len(samples)
    if failures:
        worst.witness = {"translation": failures[0], "failures": len(failures)}
    return _verdict(cid, worst, policy)


def evaluate_conditions(s, policy=None):
    """Run every checker and return one verdict per ConditionId, in order."""
    policy = policy or TolerancePolicy()
    verdicts = []
    verdicts.extend(check_statics(s, policy))
    verdicts.extend(check_covariance(s, policy))
    verdicts.append(check_energy(s, policy))
    verdicts.extend(check_causality(s, policy))
    verdicts.extend(check_conservation(s, policy))
    verdicts.append(check_nav(s, policy))
    by_id = {v.condition: v for v in verdicts}
    return [by_id[cid] for cid in ConditionId]
