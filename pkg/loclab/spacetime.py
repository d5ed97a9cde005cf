"""Discrete spacetime models.

    Description
    ----------
    Periodic line lattices (with or without a distinguished rest frame)
    and the circle lattice of a cylinder spacetime. Provides regions,
    minimal-image distances, light-cone tests, translations, the
    "no absolute velocity" decomposition and generators of coverings and
    nested region families used by the condition checkers.

    Sites are points of the lattice. Two regions are at distance zero
    only when they share a site; neighbouring sites are one spacing
    apart.

"""

# import needed packages
from dataclasses import dataclass
import enum
import logging
import math
import warnings
import numpy as np
from loclab.exceptions import InfeasibleFamilyError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import NotSpacelikeError

logger = logging.getLogger(__name__)


class ModelKind(enum.Enum):
    LINE_ISOTROPIC = "line_isotropic"
    LINE_DISTINGUISHED_FRAME = "line_distinguished_frame"
    CIRCLE = "circle"


class NavOutcome(enum.Enum):
    """Sentinel for models where no absolute velocity has no meaning."""

    NOT_APPLICABLE = "not_applicable"


class FamilyMode(enum.Enum):
    DISJOINT_COVERING = "disjoint_covering"
    NESTED_TO = "nested_to"
    COVERING_WITH = "covering_with"
    SQUEEZE_TO = "squeeze_to"


@dataclass(frozen=True)
class Region:
    """Finite set of lattice sites, kept sorted and unique."""

    sites: tuple = ()

    def __post_init__(self):
        try:
            normalized = tuple(sorted({int(s) for s in self.sites}))
        except (TypeError, ValueError) as e:
            raise InvalidRegionError(f"Region sites must be integers: {self.sites!r}.") from e
        if normalized and normalized[0] < 0:
            raise InvalidRegionError(f"Region sites must be non-negative: {normalized}.")
        object.__setattr__(self, "sites", normalized)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site):
        return site in self.sites

    @property
    def is_empty(self):
        return len(self.sites) == 0

    def union(self, other):
        return Region(set(self.sites) | set(other.sites))

    def intersection(self, other):
        return Region(set(self.sites) & set(other.sites))

    def difference(self, other):
        return Region(set(self.sites) - set(other.sites))

    def isdisjoint(self, other):
        return set(self.sites).isdisjoint(other.sites)

    def issubset(self, other):
        return set(self.sites).issubset(other.sites)

    def indicator(self, sites):
        """0/1 vector of length sites marking the region."""
        ind = np.zeros(sites)
        ind[list(self.sites)] = 1.0
        return ind

    def to_list(self):
        return list(self.sites)


@dataclass(frozen=True)
class SpaceModel:
    """Spatial lattice of a discrete spacetime.

    Parameters
    ----------
    kind: ModelKind or str
        line_isotropic, line_distinguished_frame or circle.
    sites: int
        Number of lattice sites N, at least 4.
    spacing: float
        Lattice spacing a in length units.
    light_speed: float
        Signal speed c, 1 in lattice units by default.

    """

    kind: ModelKind
    sites: int
    spacing: float = 1.0
    light_speed: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ModelKind(self.kind))
        except ValueError as e:
            raise InvalidParameterError(f"Unknown model kind {self.kind!r}.") from e
        if int(self.sites) != self.sites or self.sites < 4:
            raise InvalidParameterError(f"A space model needs at least 4 sites, got {self.sites}.")
        if not self.spacing > 0 or not math.isfinite(self.spacing):
            raise InvalidParameterError(f"Spacing must be positive, got {self.spacing}.")
        if not self.light_speed > 0 or not math.isfinite(self.light_speed):
            raise InvalidParameterError(f"Light speed must be positive, got {self.light_speed}.")
        object.__setattr__(self, "sites", int(self.sites))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "light_speed", float(self.light_speed))

    @property
    def length(self):
        return self.sites * self.spacing

    def measure(self, region):
        """Normalized counting measure |Δ|/N."""
        return len(region) / self.sites

    def all_sites(self):
        return Region(range(self.sites))

    def validate(self, region):
        if not isinstance(region, Region):
            region = Region(region)
        if region.sites and region.sites[-1] >= self.sites:
            raise InvalidRegionError(
                f"Region {region.to_list()} leaves the {self.sites}-site lattice."
            )
        return region

    def refined(self, sites):
        """Same kind and physical length on a different number of sites."""
        return SpaceModel(self.kind, sites, self.length / sites, self.light_speed)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "sites": self.sites,
            "spacing": self.spacing,
            "light_speed": self.light_speed,
        }


@dataclass(frozen=True)
class Translation:
    """Spacetime translation by time t and an integer site shift s."""

    time: float
    shift: int

    def displacement(self, m):
        return abs(self.shift) * m.spacing

    def is_timelike(self, m):
        return m.light_speed * abs(self.time) > self.displacement(m)

    def is_spacelike(self, m):
        return m.light_speed * abs(self.time) < self.displacement(m)

    def __sub__(self, other):
        return Translation(self.time - other.time, self.shift - other.shift)

    def to_dict(self):
        return {"time": float(self.time), "shift": int(self.shift)}


def interval(m, start, width):
    """Contiguous region of width sites starting at start, wrapping around."""
    if width < 0 or width > m.sites:
        raise InvalidRegionError(f"Interval width {width} does not fit {m.sites} sites.")
    return Region((start + k) % m.sites for k in range(width))


def _pair_offsets(m, d1, d2):
    a = np.asarray(d1.sites)[:, None]
    b = np.asarray(d2.sites)[None, :]
    delta = np.abs(a - b) % m.sites
    return np.minimum(delta, m.sites - delta)


def region_distance(m, d1, d2):
    """Minimal-image distance between two regions in length units.

    Description
    ----------
    Smallest lattice separation over all site pairs, times the spacing.
    Shared sites give 0. An empty region is infinitely far from
    everything, returned as math.inf.

    """
    d1 = m.validate(d1)
    d2 = m.validate(d2)
    if d1.is_empty or d2.is_empty:
        return math.inf
    return float(_pair_offsets(m, d1, d2).min() * m.spacing)


def is_spacelike_clear(m, d1, d2, t):
    """True iff a signal at speed c cannot bridge the gap within time t."""
    if t < 0:
        raise InvalidParameterError(f"Elapsed time must be non-negative, got {t}.")
    return m.light_speed * t < region_distance(m, d1, d2)


def shift_region(m, d, s):
    d = m.validate(d)
    return Region((x + s) % m.sites for x in d.sites)


def grow_region(m, d, left, right):
    """Region d extended by left sites below and right sites above."""
    d = m.validate(d)
    grown = set(d.sites)
    for j in range(1, left + 1):
        grown.update(shift_region(m, d, -j).sites)
    for j in range(1, right + 1):
        grown.update(shift_region(m, d, j).sites)
    return Region(grown)


def nav_decompose(m, a):
    """Write a spacelike translation as a difference of timelike ones.

    Parameters
    ----------
    m: SpaceModel
    a: Translation
        Spacelike translation (t, s).

    Returns
    ----------
    pair: tuple or None or NavOutcome
        (b, c) with b = (T + t, s) and c = (T, 0), T = |s|a/c + |t| + 1,
        on isotropic lines; None on a line with a distinguished frame;
        NavOutcome.NOT_APPLICABLE on the circle.

    """
    if not a.is_spacelike(m):
        raise NotSpacelikeError(f"Translation {a.to_dict()} is not spacelike.")
    if m.kind is ModelKind.CIRCLE:
        return NavOutcome.NOT_APPLICABLE
    if m.kind is ModelKind.LINE_DISTINGUISHED_FRAME:
        return None
    big = a.displacement(m) / m.light_speed + abs(a.time) + 1.0
    return Translation(big + a.time, a.shift), Translation(big, 0)


def disjoint_covering(m, block, offset=0):
    """Partition of all sites into contiguous blocks starting at offset."""
    if block < 1:
        raise InfeasibleFamilyError(f"Block size must be positive, got {block}.")
    return [
        interval(m, offset + start, min(block, m.sites - start))
        for start in range(0, m.sites, block)
    ]


def make_families(m, mode, region=None, block=None, depth=None, collar=None):
    """Generate coverings and nested families of regions.

    Description
    ----------
    disjoint_covering: two partitions into blocks, the second offset by
    half a block. nested_to: decreasing chain of regions grown around
    region, ending with region itself. covering_with: region plus the
    blocks of a partition that it leaves uncovered. squeeze_to: the two
    regions obtained by adding a collar on either side of region, whose
    intersection is exactly region.

    Parameters
    ----------
    m: SpaceModel
    mode: FamilyMode or str
    region: Region
        Anchor region for the nested_to, covering_with and squeeze_to modes.
    block: int
        Block size of partitions, default N // 4.
    depth: int
        Maximal growth of the nested chain, default as deep as stays proper.
    collar: int
        Collar width for squeeze_to, default (N - |region|) // 2.

    Returns
    ----------
    families: list
        List of region lists.

    """
    mode = FamilyMode(mode)
    block = block or max(1, m.sites // 4)
    if mode is FamilyMode.DISJOINT_COVERING:
        families = [disjoint_covering(m, block)]
        if block >= 2:
            families.append(disjoint_covering(m, block, offset=block // 2))
        return families

    if region is None:
        raise InfeasibleFamilyError(f"Mode {mode.value} needs an anchor region.")
    region = m.validate(region)

    if mode is FamilyMode.COVERING_WITH:
        members = [region]
        for piece in disjoint_covering(m, block):
            rest = piece.difference(region)
            if not rest.is_empty:
                members.append(rest)
        if len(members) == 1:
            warnings.warn(f"Covering with {region.to_list()} has a single member.")
        return [members]

    if region.is_empty or len(region) >= m.sites:
        raise InfeasibleFamilyError(
            f"Mode {mode.value} needs a nonempty proper region, got {len(region)} sites."
        )

    if mode is FamilyMode.NESTED_TO:
        chain = []
        k = 1
        while len(grow_region(m, region, k, k)) < m.sites:
            chain.append(grow_region(m, region, k, k))
            if depth is not None and k >= depth:
                break
            k += 1
        chain.reverse()
        chain.append(region)
        return [chain]

    collar = collar if collar is not None else (m.sites - len(region)) // 2
    if collar < 1:
        raise InfeasibleFamilyError(f"No room for a collar around {len(region)} sites.")
    left = grow_region(m, region, collar, 0)
    right = grow_region(m, region, 0, collar)
    if left.intersection(right) != region or len(left) >= m.sites or len(right) >= m.sites:
        raise InfeasibleFamilyError(
            f"Collars of {collar} sites around {region.to_list()} overlap."
        )
    return [[left, right]]
