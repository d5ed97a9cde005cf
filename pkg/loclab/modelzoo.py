"""Localization systems, counterexamples and positive controls.

    Description
    ----------
    Every construction lives on a SpaceModel and bundles a region to
    operator assignment with a UnitaryFamily. Three variants exist:
    sharp systems assign projections, unsharp systems assign effects and
    number systems assign local number operators.

    Momentum is diagonal in the discrete Fourier basis with symmetric
    mode numbers k in (-N/2, N/2], and the one-site shift S satisfies
    S = exp(-i a P) exactly, so spatial translation covariance of the
    position projections is exact. Dispersions are applied to P through
    its known spectral decomposition.

"""

# import needed packages
from collections import OrderedDict
import enum
import logging
import numpy as np
from loclab import opkernel
from loclab.exceptions import DimensionError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import PreconditionError
from loclab.exceptions import StructureError
from loclab.opkernel import OpClass
from loclab.opkernel import Operator
from loclab.opkernel import SpectralDecomposition
from loclab.opkernel import StateVector
from loclab.spacetime import ModelKind
from loclab.spacetime import Region
from loclab.spacetime import SpaceModel
from loclab.spacetime import interval

logger = logging.getLogger(__name__)

FOCK_MIN_SITES = 4
FOCK_MAX_SITES = 10
TENSOR_MAX_SITES = 32
# memory budget of each operator cache, in bytes
CACHE_BYTES = 2 ** 27
DIRAC_ALPHA = np.array([[0.0, 1.0], [1.0, 0.0]])
DIRAC_BETA = np.array([[1.0, 0.0], [0.0, -1.0]])


class Variant(enum.Enum):
    SHARP = "sharp"
    UNSHARP = "unsharp"
    NUMBER = "number"


class HamiltonianKind(enum.Enum):
    ZERO = "zero"
    NONRELATIVISTIC = "nonrelativistic"
    RELATIVISTIC = "relativistic"
    MOMENTUM = "momentum"


class PathologyMode(enum.Enum):
    ONLY_D0 = "only_d0"
    ALL_BUT_D0 = "all_but_d0"


def momentum_eigenvalues(sites, spacing):
    """Momenta 2πk/(N a) in FFT order with k in (-N/2, N/2]."""
    k = np.fft.fftfreq(sites, d=1.0 / sites)
    if sites % 2 == 0:
        k = np.where(k == -(sites // 2), sites // 2, k)
    return 2.0 * np.pi * k / (sites * spacing)


def fourier_matrix(sites):
    """Unitary matrix whose columns are plane waves in FFT mode order."""
    k = np.fft.fftfreq(sites, d=1.0 / sites)
    x = np.arange(sites)
    return np.exp(2j * np.pi * np.outer(x, k) / sites) / np.sqrt(sites)


def shift_matrix(sites):
    """Permutation S with S e_x = e_{x+1 mod N}."""
    return np.roll(np.eye(sites), 1, axis=0)


def momentum_decomposition(sites, spacing):
    p = momentum_eigenvalues(sites, spacing)
    order = np.argsort(p, kind="stable")
    return SpectralDecomposition(p[order], fourier_matrix(sites)[:, order])


def momentum_operator(sites, spacing):
    dec = momentum_decomposition(sites, spacing)
    return Operator(opkernel.hermitize(dec.reconstruct()), OpClass.HERMITIAN)


def dispersion(kind, mass=1.0):
    """Energy as a function of momentum for a Hamiltonian kind."""
    kind = HamiltonianKind(kind)
    if kind in (HamiltonianKind.NONRELATIVISTIC, HamiltonianKind.RELATIVISTIC):
        if not np.isfinite(mass) or mass <= 0:
            raise InvalidParameterError(f"Mass must be positive, got {mass}.")
    if kind is HamiltonianKind.ZERO:
        return lambda p: np.zeros_like(p)
    if kind is HamiltonianKind.NONRELATIVISTIC:
        return lambda p: p ** 2 / (2.0 * mass)
    if kind is HamiltonianKind.RELATIVISTIC:
        return lambda p: np.sqrt(p ** 2 + mass ** 2)
    return lambda p: p


class OperatorCache:
    """Least recently used store of operators within a byte budget.

    The most recent operator is always kept, even when it alone exceeds
    the budget.
    """

    def __init__(self, max_bytes=None):
        self.max_bytes = CACHE_BYTES if max_bytes is None else int(max_bytes)
        self._items = OrderedDict()
        self.nbytes = 0

    def __len__(self):
        return len(self._items)

    def __contains__(self, key):
        return key in self._items

    def get(self, key, build):
        """Cached operator for key, calling build() on a miss."""
        if key in self._items:
            self._items.move_to_end(key)
            return self._items[key]
        value = build()
        self._items[key] = value
        self.nbytes += value.entries.nbytes
        while self.nbytes > self.max_bytes and len(self._items) > 1:
            _, evicted = self._items.popitem(last=False)
            self.nbytes -= evicted.entries.nbytes
        return value


class UnitaryFamily:
    """Time evolution and translations of a localization system.

    Description
    ----------
    U_t = exp(itH). For an affine family, a translation b = (t, s) is
    generated by H(b) = tH - s·a·P, so exp(iH(b)) = U_t S^s. Families
    flagged time_only only carry the one-parameter time group.

    Parameters
    ----------
    hamiltonian: Operator
        Hermitian time generator H.
    momentum: Operator
        Hermitian momentum P with S = exp(-iaP), or None.
    spatial_shift: Operator
        Unitary one-site shift S, or None.
    spacing: float
    light_speed: float
    time_only: bool
        True when only time translations are represented.
    lattice_shift_dynamics: bool
        True when U_t is an exact lattice shift at t = k a / c.
    decomposition: SpectralDecomposition
        Known eigendecomposition of H, computed on demand otherwise.
    cache_bytes: int
        Memory budget for evolution operators, CACHE_BYTES by default.

    """

    def __init__(self, hamiltonian, momentum=None, spatial_shift=None, spacing=1.0,
                 light_speed=1.0, time_only=False, lattice_shift_dynamics=False,
                 decomposition=None, cache_bytes=None):
        self.hamiltonian = hamiltonian
        self.momentum = momentum
        self.spatial_shift = spatial_shift
        self.spacing = spacing
        self.light_speed = light_speed
        self.time_only = time_only
        self.lattice_shift_dynamics = lattice_shift_dynamics
        self._decomposition = decomposition
        self.evolution_cache = OperatorCache(cache_bytes)
        self.is_trivial = not hamiltonian.entries.any()

    @property
    def dim(self):
        return self.hamiltonian.dim

    def spectrum(self):
        if self._decomposition is None:
            self._decomposition = opkernel.eig_hermitian(self.hamiltonian)
        return self._decomposition

    def min_energy(self):
        return float(self.spectrum().eigenvalues[0])

    def evolution(self, t):
        """U_t = exp(itH); exactly the identity at t = 0 or for H = 0."""
        t = float(t)
        if t == 0.0 or self.is_trivial:
            return Operator.identity(self.dim)
        return self.evolution_cache.get(t, lambda: self._exponentiate(t))

    def _exponentiate(self, t):
        dec = self.spectrum()
        return Operator(dec.function(np.exp(1j * t * dec.eigenvalues)), OpClass.UNITARY)

    def evolve(self, psi, t):
        amplitudes = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
        if amplitudes.shape[0] != self.dim:
            raise DimensionError(f"State of dimension {amplitudes.shape[0]} != {self.dim}.")
        if float(t) == 0.0 or self.is_trivial:
            return amplitudes
        return self.evolution(t) @ amplitudes

    def hamiltonian_of(self, b):
        if b.shift == 0:
            return b.time * self.hamiltonian
        if self.time_only or self.momentum is None:
            raise InvalidParameterError("This family only represents time translations.")
        return b.time * self.hamiltonian - (b.shift * self.spacing) * self.momentum

    def generator(self, velocity):
        """Boosted generator H - vP for a frame moving at velocity v."""
        if velocity == 0:
            return self.hamiltonian
        if self.momentum is None:
            raise InvalidParameterError("This family carries no momentum operator.")
        return self.hamiltonian - velocity * self.momentum

    def translation(self, b):
        """U(b) = exp(i H(b))."""
        return opkernel.apply_spectral_function(
            self.hamiltonian_of(b), lambda lam: np.exp(1j * lam), OpClass.UNITARY
        )

    def spatial(self, s):
        if self.spatial_shift is None:
            raise InvalidParameterError("This family carries no spatial shift.")
        base = self.spatial_shift.entries
        if s < 0:
            base = base.conj().T
        return Operator(np.linalg.matrix_power(base, abs(int(s))), OpClass.UNITARY)


class LocalizationSystem:
    """Region to operator assignment bundled with its unitary family.

    Parameters
    ----------
    model: SpaceModel
    assign: callable
        Region to Operator at time zero.
    unitaries: UnitaryFamily
    label: str
        Short name of the construction.
    provenance: str
        Description of where the construction comes from.
    featured_regions: tuple
        Regions the construction is built around (e.g. a fixed Δ0).
    frozen: bool
        When True the operator assigned at time t ignores the dynamics.
    site_profile: callable
        Region to amplitude array used for strictly localized states.
    family_factory: callable
        Number of sites to UnitaryFamily at the same physical length.
    refinement_levels: tuple
        Site counts used by the energy refinement scan, or None.
    details: dict
        Extra operators of the construction.

    """

    variant = None
    expected_class = None

    def __init__(self, model, assign, unitaries, label, provenance="",
                 featured_regions=(), frozen=False, site_profile=None,
                 family_factory=None, refinement_levels=None, details=None):
        self.model = model
        self._assign = assign
        self.unitaries = unitaries
        self.label = label
        self.provenance = provenance
        self.featured_regions = tuple(featured_regions)
        self.frozen = frozen
        self.site_profile = site_profile
        self.family_factory = family_factory
        self.refinement_levels = refinement_levels
        self.details = details or {}
        self.operator_cache = OperatorCache()

    @property
    def dim(self):
        return self.unitaries.dim

    def localize(self, region):
        """Operator assigned to region at time zero."""
        region = self.model.validate(region)
        return self.operator_cache.get(region.sites, lambda: self._checked(region))

    def _checked(self, region):
        op = self._assign(region)
        if op.dim != self.dim:
            raise DimensionError(f"Assigned operator has dimension {op.dim} != {self.dim}.")
        return op

    operator = localize

    def operator_at(self, region, t):
        """Operator for region on the hyperplane at time t."""
        op = self.localize(region)
        if self.frozen:
            return op
        return opkernel.conjugate(self.unitaries.evolution(t), op)

    def family_at(self, sites):
        if sites == self.model.sites or self.family_factory is None:
            return self.unitaries
        return self.family_factory(sites)

    def localized_state(self, region):
        """Normalized E_Δ applied to the construction's site profile."""
        region = self.model.validate(region)
        if self.site_profile is None:
            raise PreconditionError(f"{self.label} has no localized state profile.")
        if region.is_empty:
            raise PreconditionError("Cannot localize a state in the empty region.")
        return StateVector.normalized(self.localize(region) @ self.site_profile(region))

    def __repr__(self):
        return f"{type(self).__name__}(label={self.label!r}, dim={self.dim})"


class SharpSystem(LocalizationSystem):
    variant = Variant.SHARP
    expected_class = "projection"


class UnsharpSystem(LocalizationSystem):
    variant = Variant.UNSHARP
    expected_class = "effect"


class NumberSystem(LocalizationSystem):
    variant = Variant.NUMBER
    expected_class = "hermitian"

    def number_of(self, region):
        return self.localize(region)

    def total_number(self):
        return self.localize(self.model.all_sites())


def _indicator_projection(model, region):
    return Operator.diagonal(region.indicator(model.sites), OpClass.PROJECTION)


def region_blocks(model, region):
    """Maximal runs of consecutive sites, a run may wrap past site N - 1."""
    sites = list(region.sites)
    if not sites or len(sites) == model.sites:
        return [sites] if sites else []
    blocks = [[sites[0]]]
    for site in sites[1:]:
        if site == blocks[-1][-1] + 1:
            blocks[-1].append(site)
        else:
            blocks.append([site])
    if len(blocks) > 1 and blocks[0][0] == 0 and blocks[-1][-1] == model.sites - 1:
        blocks[0] = blocks.pop() + blocks[0]
    return blocks


def gaussian_profile(model, region):
    """Sum of Gaussians, one per run of the region, width a quarter of the run.

    Every site of a run is at most two widths from its centre, so the
    profile is strictly positive on the whole region.
    """
    profile = np.zeros(model.sites)
    positions = np.arange(model.sites)
    for block in region_blocks(model, region):
        center = (block[0] + 0.5 * (len(block) - 1)) % model.sites
        offsets = np.abs(positions - center)
        offsets = np.minimum(offsets, model.sites - offsets)
        width = max(1.0, len(block) / 4.0)
        profile += np.exp(-0.5 * (offsets / width) ** 2)
    return profile


def standard_family(model, kind, mass=1.0):
    """Unitary family with H = ω(P) for one of the standard dispersions."""
    kind = HamiltonianKind(kind)
    omega = dispersion(kind, mass)
    p_dec = momentum_decomposition(model.sites, model.spacing)
    energies = omega(p_dec.eigenvalues)
    order = np.argsort(energies, kind="stable")
    decomposition = SpectralDecomposition(energies[order], p_dec.eigenvectors[:, order])
    hamiltonian = Operator(opkernel.hermitize(p_dec.function(energies)), OpClass.HERMITIAN)
    if kind is HamiltonianKind.ZERO:
        hamiltonian = Operator(np.zeros((model.sites, model.sites)), OpClass.HERMITIAN)
    return UnitaryFamily(
        hamiltonian,
        momentum=Operator(opkernel.hermitize(p_dec.reconstruct()), OpClass.HERMITIAN),
        spatial_shift=Operator(shift_matrix(model.sites), OpClass.UNITARY),
        spacing=model.spacing,
        light_speed=model.light_speed,
        lattice_shift_dynamics=kind is HamiltonianKind.MOMENTUM,
        decomposition=decomposition,
    )


def _refinement_factory(model, build_family):
    def factory(sites):
        return build_family(model.refined(sites))
    return factory


def build_standard(m, h="nonrelativistic", mass=1.0, label=None):
    """Position projections with a standard Hamiltonian.

    Parameters
    ----------
    m: SpaceModel
    h: HamiltonianKind or str
        zero, nonrelativistic (P²/2m), relativistic ((P²+m²)^(1/2)) or
        momentum (H = P).
    mass: float
    label: str
        Name of the system, standard_<kind> by default.

    Returns
    ----------
    system: SharpSystem

    """
    kind = HamiltonianKind(h)
    return _position_system(
        m, kind, mass,
        label=label or f"standard_{kind.value}",
        provenance=f"Spectral projections of position with the {kind.value} Hamiltonian.",
    )


def _position_system(m, kind, mass, label, provenance, frozen=False):
    dispersion(kind, mass)
    return SharpSystem(
        m,
        lambda region: _indicator_projection(m, region),
        standard_family(m, kind, mass),
        label=label,
        provenance=provenance,
        frozen=frozen,
        site_profile=lambda region: gaussian_profile(m, region),
        family_factory=_refinement_factory(m, lambda mm: standard_family(mm, kind, mass)),
    )


def _default_d0(m):
    return interval(m, m.sites // 2, max(1, m.sites // 8))


def _check_d0(m, d0):
    d0 = m.validate(d0 if d0 is not None else _default_d0(m))
    if d0.is_empty or len(d0) >= m.sites:
        raise InvalidRegionError(f"Δ0 must be a nonempty proper region, got {d0.to_list()}.")
    return d0


def tensor_family(m, mass=1.0):
    single = standard_family(m, HamiltonianKind.NONRELATIVISTIC, mass)
    n = m.sites
    eye = np.eye(n)
    dec = single.spectrum()
    energies = np.tile(dec.eigenvalues, n)
    vectors = np.kron(eye, dec.eigenvectors)
    order = np.argsort(energies, kind="stable")
    return UnitaryFamily(
        Operator(np.kron(eye, single.hamiltonian.entries), OpClass.HERMITIAN),
        momentum=Operator(np.kron(single.momentum.entries, eye), OpClass.HERMITIAN),
        spatial_shift=Operator(np.kron(shift_matrix(n), eye), OpClass.UNITARY),
        spacing=m.spacing,
        light_speed=m.light_speed,
        time_only=True,
        decomposition=SpectralDecomposition(energies[order], vectors[:, order]),
    )


def build_tensor_counterexample(m, mass=1.0, d0=None, label=None):
    """E_Δ = E^Q_Δ ⊗ E^Q_Δ0 with dynamics I ⊗ exp(itP²/2m).

    Strong causality holds trivially since disjoint first factors
    annihilate each other, while wavepackets in the second factor spread.
    """
    if m.sites > TENSOR_MAX_SITES:
        raise InvalidParameterError(
            f"The tensor counterexample supports at most {TENSOR_MAX_SITES} sites, got {m.sites}."
        )
    dispersion(HamiltonianKind.NONRELATIVISTIC, mass)
    d0 = _check_d0(m, d0)
    e0 = d0.indicator(m.sites)

    def assign(region):
        return Operator(np.kron(np.diag(region.indicator(m.sites)), np.diag(e0)), OpClass.PROJECTION)

    def profile(region):
        return np.kron(gaussian_profile(m, region), gaussian_profile(m, d0))

    return SharpSystem(
        m,
        assign,
        tensor_family(m, mass),
        label=label or "tensor_counterexample",
        provenance="Position projection tensored with a fixed region projection, free dynamics in the second factor.",
        featured_regions=(d0,),
        site_profile=profile,
        family_factory=_refinement_factory(m, lambda mm: tensor_family(mm, mass)),
        refinement_levels=tuple(n for n in (8, 16, 32) if n <= TENSOR_MAX_SITES),
    )


def build_frozen(m, mass=1.0, label=None):
    """Standard projections whose time-t assignment ignores the dynamics."""
    return _position_system(
        m, HamiltonianKind.NONRELATIVISTIC, mass,
        label=label or "frozen",
        provenance="Standard position projections with E at time t set equal to E at time zero.",
        frozen=True,
    )


def build_pathological(m, mass=1.0, d0=None, mode="only_d0", label=None):
    """Assign the position projection to Δ0 only; 0 or I everywhere else."""
    mode = PathologyMode(mode)
    dispersion(HamiltonianKind.NONRELATIVISTIC, mass)
    d0 = _check_d0(m, d0)
    e_d0 = _indicator_projection(m, d0)
    other = Operator.zeros(m.sites) if mode is PathologyMode.ONLY_D0 else Operator.identity(m.sites)

    def assign(region):
        return e_d0 if region == d0 else other

    return SharpSystem(
        m,
        assign,
        standard_family(m, HamiltonianKind.NONRELATIVISTIC, mass),
        label=label or mode.value,
        provenance=(
            "Position projection on a fixed region Δ0, "
            + ("zero" if mode is PathologyMode.ONLY_D0 else "identity")
            + " on every other region, free nonrelativistic dynamics."
        ),
        featured_regions=(d0,),
        site_profile=lambda region: gaussian_profile(m, region),
        family_factory=_refinement_factory(
            m, lambda mm: standard_family(mm, HamiltonianKind.NONRELATIVISTIC, mass)
        ),
    )


def _require_circle(m):
    if m.kind is not ModelKind.CIRCLE:
        raise InvalidParameterError(f"Construction needs a circle model, got {m.kind.value}.")


def build_cylinder_threshold(m, mass=1.0, label=None):
    """E_Δ = I when μ(Δ) ≥ 2/3, otherwise 0, on the cylinder."""
    _require_circle(m)
    eye = Operator.identity(m.sites)
    zero = Operator.zeros(m.sites)

    def assign(region):
        # μ(Δ) ≥ 2/3 in integer arithmetic
        return eye if 3 * len(region) >= 2 * m.sites else zero

    return SharpSystem(
        m,
        assign,
        standard_family(m, HamiltonianKind.NONRELATIVISTIC, mass),
        label=label or "cylinder_threshold",
        provenance="Cylinder spacetime, E is the identity on regions of measure at least 2/3 and zero otherwise.",
        featured_regions=(interval(m, m.sites // 8, m.sites // 2),),
        family_factory=_refinement_factory(
            m, lambda mm: standard_family(mm, HamiltonianKind.NONRELATIVISTIC, mass)
        ),
    )


def build_measure_effect(m, mass=1.0, label=None):
    """A_Δ = μ(Δ) I on the cylinder."""
    _require_circle(m)

    def assign(region):
        return Operator(m.measure(region) * np.eye(m.sites), OpClass.EFFECT)

    return UnsharpSystem(
        m,
        assign,
        standard_family(m, HamiltonianKind.NONRELATIVISTIC, mass),
        label=label or "measure_effect",
        provenance="Cylinder spacetime, A is the normalized rotation invariant measure times the identity.",
        family_factory=_refinement_factory(
            m, lambda mm: standard_family(mm, HamiltonianKind.NONRELATIVISTIC, mass)
        ),
    )


def dirac_hamiltonian(m, mass=1.0):
    """H_D = α P + β m on two component spinors, α = σx and β = σz."""
    p = momentum_operator(m.sites, m.spacing).entries
    return Operator(
        opkernel.hermitize(np.kron(p, DIRAC_ALPHA) + mass * np.kron(np.eye(m.sites), DIRAC_BETA)),
        OpClass.HERMITIAN,
    )


def _dirac_parts(m, mass):
    h_d = dirac_hamiltonian(m, mass)
    dec = opkernel.eig_hermitian(h_d)
    positive = dec.eigenvalues > 0
    if positive.sum() != m.sites:
        raise StructureError(
            f"Positive energy subspace has rank {positive.sum()}, expected {m.sites}."
        )
    basis = dec.eigenvectors[:, positive]
    energies = dec.eigenvalues[positive]
    eye2 = np.eye(2)
    momentum = basis.conj().T @ np.kron(momentum_operator(m.sites, m.spacing).entries, eye2) @ basis
    shift = basis.conj().T @ np.kron(shift_matrix(m.sites), eye2) @ basis
    family = UnitaryFamily(
        Operator(np.diag(energies), OpClass.HERMITIAN),
        momentum=Operator(opkernel.hermitize(momentum), OpClass.HERMITIAN),
        spatial_shift=Operator(shift, OpClass.UNITARY),
        spacing=m.spacing,
        light_speed=m.light_speed,
        decomposition=SpectralDecomposition(energies, np.eye(m.sites)),
    )
    return h_d, basis, family


def build_dirac_positive(m, mass=1.0, label=None):
    """Position probabilities compressed to the positive energy subspace.

    Description
    ----------
    The Dirac Hamiltonian acts on 2N dimensional spinor wavefunctions.
    F projects onto its positive energy eigenspace (rank N) and the
    effect for Δ is the compression V+† (E_Δ ⊗ I₂) V+, where the columns
    of V+ span the range of F. Effects, dynamics and translations act on
    the N dimensional positive energy space.

    Parameters
    ----------
    m: SpaceModel
    mass: float
        Positive mass.
    label: str
        Name of the system, dirac_positive by default.

    Returns
    ----------
    system: UnsharpSystem
        details holds dirac_hamiltonian, positive_projection and
        positive_basis.

    """
    if not np.isfinite(mass) or mass <= 0:
        raise InvalidParameterError(f"Mass must be positive, got {mass}.")
    h_d, basis, family = _dirac_parts(m, mass)
    eye2 = np.eye(2)

    def assign(region):
        full = np.kron(np.diag(region.indicator(m.sites)), eye2)
        return Operator(opkernel.hermitize(basis.conj().T @ full @ basis), OpClass.EFFECT)

    return UnsharpSystem(
        m,
        assign,
        family,
        label=label or "dirac_positive",
        provenance="Free lattice Dirac particle restricted to positive energy, position probabilities compressed by F.",
        family_factory=_refinement_factory(m, lambda mm: _dirac_parts(mm, mass)[2]),
        details={
            "dirac_hamiltonian": h_d,
            "positive_projection": Operator(
                opkernel.hermitize(basis @ basis.conj().T), OpClass.PROJECTION
            ),
            "positive_basis": basis,
        },
    )


def occupation_table(sites):
    """occ[state, x] = 1 when mode x is occupied in basis state state."""
    states = np.arange(2 ** sites)[:, None]
    return (states >> np.arange(sites)[None, :]) & 1


def _parity_below(state, mode):
    return bin(state & ((1 << mode) - 1)).count("1") % 2


def second_quantize(h):
    """dΓ(h) = Σ h[x, y] c†_x c_y on the fermionic Fock space.

    Basis state bits follow c†_0 ... c†_{L-1} |0>, so moving an operator
    to mode x picks up the parity of the occupied modes below x.
    """
    h = np.asarray(h, dtype=complex)
    sites = h.shape[0]
    dim = 2 ** sites
    out = np.zeros((dim, dim), dtype=complex)
    for state in range(dim):
        for y in range(sites):
            if not (state >> y) & 1:
                continue
            sign_y = _parity_below(state, y)
            middle = state ^ (1 << y)
            for x in range(sites):
                amp = h[x, y]
                if amp == 0 or (middle >> x) & 1:
                    continue
                sign = sign_y + _parity_below(middle, x)
                out[middle | (1 << x), state] += amp * (-1) ** sign
    return out


def fock_shift(sites):
    """Many body shift mapping c†_x to c†_{x+1 mod L}."""
    dim = 2 ** sites
    out = np.zeros((dim, dim))
    top = 1 << (sites - 1)
    for state in range(dim):
        moved = ((state << 1) & (dim - 1)) | (1 if state & top else 0)
        sign = 1.0
        if state & top:
            # c†_0 moves past the other n - 1 creators
            sign = (-1.0) ** (bin(state).count("1") - 1)
        out[moved, state] = sign
    return out


def _fock_family(sites, hopping):
    single = shift_matrix(sites)
    hop = second_quantize(-hopping * (single + single.T))
    occupations = occupation_table(sites).sum(axis=1)
    dim = 2 ** sites
    energies = np.empty(dim)
    vectors = np.zeros((dim, dim), dtype=complex)
    column = 0
    # H conserves particle number, so diagonalize one sector at a time
    for n in range(sites + 1):
        idx = np.flatnonzero(occupations == n)
        w, v = np.linalg.eigh(opkernel.hermitize(hop[np.ix_(idx, idx)]))
        energies[column:column + len(idx)] = w
        vectors[idx, column:column + len(idx)] = v
        column += len(idx)
    ground = energies.min()
    energies = energies - ground
    order = np.argsort(energies, kind="stable")
    hamiltonian = opkernel.hermitize(hop - ground * np.eye(dim))
    return UnitaryFamily(
        Operator(hamiltonian, OpClass.HERMITIAN),
        momentum=Operator(
            opkernel.hermitize(second_quantize(momentum_operator(sites, 1.0).entries)),
            OpClass.HERMITIAN,
        ),
        spatial_shift=Operator(fock_shift(sites), OpClass.UNITARY),
        decomposition=SpectralDecomposition(energies[order], vectors[:, order]),
    )


def build_lattice_fock(sites=8, hopping=1.0, label=None):
    """Free fermions hopping on a ring with local number operators.

    Parameters
    ----------
    sites: int
        Number of lattice sites L, between 4 and 10 (Fock dimension 2^L).
    hopping: float
        Nearest neighbour hopping amplitude J.
    label: str
        Name of the system, lattice_fock by default.

    Returns
    ----------
    system: NumberSystem
        N_Δ = Σ_{x in Δ} n_x; H = dΓ(-J(S + S†)) shifted so its ground
        energy is 0. The model has a distinguished rest frame.

    """
    if int(sites) != sites or not FOCK_MIN_SITES <= sites <= FOCK_MAX_SITES:
        raise InvalidParameterError(
            f"Lattice Fock systems need {FOCK_MIN_SITES} to {FOCK_MAX_SITES} sites, got {sites}."
        )
    if not np.isfinite(hopping):
        raise InvalidParameterError(f"Hopping must be finite, got {hopping}.")
    sites = int(sites)
    m = SpaceModel(ModelKind.LINE_DISTINGUISHED_FRAME, sites, 1.0)
    occ = occupation_table(sites)

    def assign(region):
        counts = occ[:, list(region.sites)].sum(axis=1) if len(region) else np.zeros(2 ** sites)
        return Operator.diagonal(counts.astype(float), OpClass.HERMITIAN)

    levels = tuple(sorted({FOCK_MIN_SITES, 6, sites}))
    return NumberSystem(
        m,
        assign,
        _fock_family(sites, hopping),
        label=label or "lattice_fock",
        provenance="Free fermions with nearest neighbour hopping, local occupation number operators.",
        family_factory=lambda n: _fock_family(n, hopping),
        refinement_levels=levels,
    )


def evolve(s, psi, t):
    """exp(itH)ψ for the system's dynamics."""
    amplitudes = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    if amplitudes.shape[0] != s.dim:
        raise DimensionError(f"State of dimension {amplitudes.shape[0]} != {s.dim}.")
    if float(t) == 0.0:
        return psi if isinstance(psi, StateVector) else StateVector(amplitudes)
    return StateVector(s.unitaries.evolve(amplitudes, t))


def localize_op(s, d, t=0.0):
    if not isinstance(d, Region):
        d = Region(d)
    return s.operator_at(d, t)
