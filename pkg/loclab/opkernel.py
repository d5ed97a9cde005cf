"""Finite dimensional operator kernel.

    Description
    ----------
    Dense complex operators with a declared structural class, spectral
    calculus through full Hermitian eigendecompositions, tensor products,
    operator norms and the lattice operations (join and meet) on
    orthogonal projections.

    Tolerances follow two levels. Identities that hold exactly in exact
    arithmetic are checked against EXACT_TOL, while a violation has to
    exceed FAIL_TOL to count as a genuine failure witness.

"""

# import needed packages
from dataclasses import dataclass
import enum
import logging
import numpy as np
from loclab.exceptions import DimensionError
from loclab.exceptions import DomainError
from loclab.exceptions import PreconditionError
from loclab.exceptions import StructureError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
EXACT_TOL = 1e-10
RANGE_TOL = 1e-8
FAIL_TOL = 1e-6


class OpClass(enum.Enum):
    GENERAL = "general"
    HERMITIAN = "hermitian"
    UNITARY = "unitary"
    PROJECTION = "projection"
    EFFECT = "effect"


SELF_ADJOINT = (OpClass.HERMITIAN, OpClass.PROJECTION, OpClass.EFFECT)


class Operator:
    """Dense square complex matrix with a structural class hint.

    Description
    ----------
    Entries are copied on construction and stored read only. Operators
    are shared between experiments.
    The class hint records what the builder promised; classify() measures
    what actually holds.

    Parameters
    ----------
    entries: array_like
        Square two dimensional array of complex values.
    class_hint: OpClass or str
        Declared structural class, default general.

    """

    __slots__ = ("entries", "class_hint")

    def __init__(self, entries, class_hint=OpClass.GENERAL):
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionError(
                f"Operator entries must be a non-empty square matrix, got shape {arr.shape}."
            )
        arr.setflags(write=False)
        self.entries = arr
        self.class_hint = OpClass(class_hint)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), OpClass.PROJECTION)

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((dim, dim)), OpClass.PROJECTION)

    @classmethod
    def diagonal(cls, values, class_hint=OpClass.HERMITIAN):
        return cls(np.diag(np.asarray(values)), class_hint)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def is_self_adjoint(self):
        return self.class_hint in SELF_ADJOINT

    def dagger(self):
        return Operator(self.entries.conj().T, self.class_hint)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _check_dims(self, other)
            hint = OpClass.GENERAL
            if self.class_hint is OpClass.UNITARY and other.class_hint is OpClass.UNITARY:
                hint = OpClass.UNITARY
            return Operator(self.entries @ other.entries, hint)
        vec = np.asarray(other)
        if vec.shape[0] != self.dim:
            raise DimensionError(
                f"Cannot apply a {self.dim}-dim operator to shape {vec.shape}."
            )
        return self.entries @ vec

    def __add__(self, other):
        _check_dims(self, other)
        hint = OpClass.GENERAL
        if self.is_self_adjoint and other.is_self_adjoint:
            hint = OpClass.HERMITIAN
        return Operator(self.entries + other.entries, hint)

    def __sub__(self, other):
        _check_dims(self, other)
        hint = OpClass.GENERAL
        if self.is_self_adjoint and other.is_self_adjoint:
            hint = OpClass.HERMITIAN
        return Operator(self.entries - other.entries, hint)

    def __mul__(self, scalar):
        hint = OpClass.GENERAL
        if self.is_self_adjoint and np.isreal(scalar):
            hint = OpClass.HERMITIAN
        return Operator(scalar * self.entries, hint)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"Operator(dim={self.dim}, class_hint={self.class_hint.value})"


def _check_dims(a, b):
    if a.dim != b.dim:
        raise DimensionError(f"Dimension mismatch: {a.dim} != {b.dim}.")


def _entries(a):
    if isinstance(a, Operator):
        return a.entries
    return np.asarray(a, dtype=complex)


def hermitize(entries):
    """Return the Hermitian part (A + A†)/2 of an array."""
    arr = np.asarray(entries, dtype=complex)
    return 0.5 * (arr + arr.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with an orthonormal eigenvector family.

    Column j of eigenvectors belongs to eigenvalues[j].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def function(self, values):
        """Return V diag(values) V† for per-eigenvalue values."""
        vecs = self.eigenvectors
        return (vecs * np.asarray(values)) @ vecs.conj().T

    def reconstruct(self):
        return self.function(self.eigenvalues)

    def projection(self, mask):
        """Projection onto the span of the eigenvectors selected by mask."""
        vecs = self.eigenvectors[:, np.asarray(mask, dtype=bool)]
        return vecs @ vecs.conj().T


@dataclass(frozen=True)
class ClassReport:
    """Structural predicates of an operator with their residuals."""

    hermitian: bool
    unitary: bool
    projection: bool
    effect: bool
    residuals: dict

    @property
    def classes(self):
        flags = (
            ("hermitian", self.hermitian),
            ("unitary", self.unitary),
            ("projection", self.projection),
            ("effect", self.effect),
        )
        return tuple(name for name, flag in flags if flag)


def operator_norm(a):
    """Largest singular value, from the eigenvalues of A†A."""
    arr = _entries(a)
    gram = hermitize(arr.conj().T @ arr)
    top = np.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(top, 0.0)))


def hermiticity_residual(a):
    arr = _entries(a)
    return operator_norm(arr - arr.conj().T)


def eig_hermitian(a):
    """Eigendecomposition of a Hermitian operator.

    Parameters
    ----------
    a: Operator
        Operator that must be Hermitian within 1e-12 * max(1, |a|).

    Returns
    ----------
    decomposition: SpectralDecomposition
        Ascending eigenvalues and orthonormal eigenvectors.

    """
    arr = _entries(a)
    residual = hermiticity_residual(arr)
    scale = max(1.0, operator_norm(arr))
    if residual > HERMITIAN_TOL * scale:
        raise StructureError(
            f"Operator is not hermitian: |A - A^dagger| = {residual:.3e}.",
            residual=residual,
        )
    eigenvalues, eigenvectors = np.linalg.eigh(hermitize(arr))
    return SpectralDecomposition(eigenvalues, eigenvectors)


def _evaluate(f, eigenvalues):
    with np.errstate(all="ignore"):
        try:
            values = np.asarray(f(eigenvalues), dtype=complex)
        except (TypeError, ValueError):
            values = None
        if values is None or values.shape != eigenvalues.shape:
            values = np.empty(len(eigenvalues), dtype=complex)
            for i, lam in enumerate(eigenvalues):
                try:
                    values[i] = f(float(lam))
                except (ValueError, ZeroDivisionError, OverflowError) as e:
                    raise DomainError(
                        f"Function is undefined at eigenvalue {lam!r}.", eigenvalue=float(lam)
                    ) from e
    bad = ~np.isfinite(values)
    if bad.any():
        lam = float(eigenvalues[np.argmax(bad)])
        raise DomainError(f"Function is undefined at eigenvalue {lam!r}.", eigenvalue=lam)
    return values


def apply_spectral_function(a, f, class_hint=None):
    """Apply a scalar function to a Hermitian operator.

    Description
    ----------
    Computes V f(Λ) V† from the eigendecomposition of a. The function is
    first called on the whole eigenvalue array and falls back to one call
    per eigenvalue for scalar-only callables.

    Parameters
    ----------
    a: Operator
        Hermitian operator.
    f: callable
        Real to complex scalar function.
    class_hint: OpClass
        Optional class for the result. When omitted, real valued results
        are marked hermitian.

    Returns
    ----------
    result: Operator

    """
    decomposition = a if isinstance(a, SpectralDecomposition) else eig_hermitian(a)
    values = _evaluate(f, decomposition.eigenvalues)
    entries = decomposition.function(values)
    if class_hint is None:
        class_hint = OpClass.HERMITIAN if not values.imag.any() else OpClass.GENERAL
    if OpClass(class_hint) in SELF_ADJOINT:
        entries = hermitize(entries)
    return Operator(entries, class_hint)


def spectral_projection(a, lower=-np.inf, upper=np.inf):
    """Spectral projection of a Hermitian operator onto (lower, upper]."""
    decomposition = a if isinstance(a, SpectralDecomposition) else eig_hermitian(a)
    lam = decomposition.eigenvalues
    mask = (lam > lower) & (lam <= upper)
    return Operator(hermitize(decomposition.projection(mask)), OpClass.PROJECTION)


def _product_hint(a, b):
    if a is b:
        return a
    if a in SELF_ADJOINT and b in SELF_ADJOINT:
        if {a, b} <= {OpClass.PROJECTION, OpClass.EFFECT}:
            return OpClass.EFFECT
        return OpClass.HERMITIAN
    return OpClass.GENERAL


def tensor_product(a, b):
    """Kronecker product a ⊗ b; the class hint survives when both agree."""
    return Operator(np.kron(a.entries, b.entries), _product_hint(a.class_hint, b.class_hint))


def commutator_norm(a, b):
    _check_dims(a, b)
    return operator_norm(a.entries @ b.entries - b.entries @ a.entries)


def is_scalar(a):
    """True when a is exactly c·I for some complex c."""
    arr = _entries(a)
    return bool(np.array_equal(arr, arr[0, 0] * np.eye(arr.shape[0])))


def conjugate(u, a):
    """Return U A U†, keeping exact scalars untouched."""
    _check_dims(u, a)
    if is_scalar(a):
        return a
    entries = u.entries @ a.entries @ u.entries.conj().T
    if a.is_self_adjoint:
        entries = hermitize(entries)
    return Operator(entries, a.class_hint)


def expectation(a, psi):
    """Real part of <psi, A psi> for a state vector or amplitude array."""
    amplitudes = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    return float(np.vdot(amplitudes, a @ amplitudes).real)


def projection_residual(a):
    arr = _entries(a)
    diff = arr @ arr - arr
    # Frobenius norm bounds the operator norm from above
    if np.linalg.norm(diff) <= EXACT_TOL:
        return float(np.linalg.norm(diff))
    return operator_norm(diff)


def _require_projections(ps):
    ps = list(ps)
    if not ps:
        raise DimensionError("Lattice operations need at least one projection.")
    dim = ps[0].dim
    for p in ps:
        if p.dim != dim:
            raise DimensionError(f"Dimension mismatch: {p.dim} != {dim}.")
        herm = float(np.linalg.norm(p.entries - p.entries.conj().T))
        idem = projection_residual(p)
        if herm > EXACT_TOL or idem > EXACT_TOL:
            raise StructureError(
                f"Lattice operations need projections; |P^2 - P| = {idem:.3e}.",
                residual=max(herm, idem),
            )
    return ps


def lattice_join(ps):
    """Projection onto the closed span of the union of ranges.

    Description
    ----------
    The range of a sum of projections equals the span of their ranges,
    so the join is the projection onto the eigenspaces of the sum with
    eigenvalue above RANGE_TOL.

    """
    ps = _require_projections(ps)
    total = hermitize(sum(p.entries for p in ps))
    eigenvalues, eigenvectors = np.linalg.eigh(total)
    span = eigenvectors[:, eigenvalues > RANGE_TOL]
    return Operator(hermitize(span @ span.conj().T), OpClass.PROJECTION)


def lattice_meet(ps):
    """Projection onto the intersection of ranges, by De Morgan from the join."""
    ps = _require_projections(ps)
    eye = np.eye(ps[0].dim)
    complements = [Operator(eye - p.entries, OpClass.PROJECTION) for p in ps]
    joined = lattice_join(complements)
    return Operator(hermitize(eye - joined.entries), OpClass.PROJECTION)


def classify(a):
    """Measure which structural classes an operator belongs to.

    Returns
    ----------
    report: ClassReport
        Predicates for hermitian, unitary, projection and effect together
        with the residual each predicate was decided on.

    """
    arr = _entries(a)
    dim = arr.shape[0]
    scale = max(1.0, operator_norm(arr))
    herm_res = hermiticity_residual(arr)
    hermitian = herm_res <= HERMITIAN_TOL * scale
    unit_res = operator_norm(arr @ arr.conj().T - np.eye(dim))
    proj_res = projection_residual(arr)
    eigenvalues = np.linalg.eigvalsh(hermitize(arr))
    effect_res = float(max(0.0, -eigenvalues[0], eigenvalues[-1] - 1.0))
    return ClassReport(
        hermitian=bool(hermitian),
        unitary=bool(unit_res <= EXACT_TOL),
        projection=bool(hermitian and proj_res <= EXACT_TOL),
        effect=bool(hermitian and effect_res <= EXACT_TOL),
        residuals={
            "hermitian": herm_res,
            "unitary": unit_res,
            "projection": proj_res,
            "effect": effect_res,
        },
    )


class StateVector:
    """Unit vector of complex amplitudes."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        arr = np.array(amplitudes, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError(f"State amplitudes must be a non-empty vector, got {arr.shape}.")
        residual = abs(np.linalg.norm(arr) - 1.0)
        if residual > EXACT_TOL:
            raise StructureError(f"State is not normalized: ||psi|| - 1 = {residual:.3e}.", residual)
        arr.setflags(write=False)
        self.amplitudes = arr

    @classmethod
    def normalized(cls, amplitudes):
        arr = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise PreconditionError("Cannot normalize the zero vector.")
        return cls(arr / norm)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def __repr__(self):
        return f"StateVector(dim={self.dim})"
