#!/usr/bin/env python

"""Tests for `opkernel` module."""

from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st
import numpy as np
import pytest
from loclab import opkernel
from loclab.exceptions import DimensionError
from loclab.exceptions import DomainError
from loclab.exceptions import PreconditionError
from loclab.exceptions import StructureError
from loclab.opkernel import OpClass
from loclab.opkernel import Operator

PAULI_X = np.array([[0, 1], [1, 0]])
PAULI_Z = np.array([[1, 0], [0, -1]])


def random_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator(opkernel.hermitize(raw), OpClass.HERMITIAN)


def diag_projection(*flags):
    return Operator.diagonal(np.asarray(flags, dtype=float), OpClass.PROJECTION)


def test_operator_rejects_non_square():
    with pytest.raises(DimensionError):
        Operator(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        Operator(np.zeros(4))


def test_operator_entries_are_read_only():
    op = Operator.identity(2)
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0


@settings(deadline=None, max_examples=50)
@given(seed=st.integers(0, 2 ** 32 - 1), dim=st.integers(1, 6))
def test_eig_hermitian_reconstructs(seed, dim):
    a = random_hermitian(seed, dim)
    dec = opkernel.eig_hermitian(a)
    scale = max(1.0, opkernel.operator_norm(a))
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert opkernel.operator_norm(a.entries - dec.reconstruct()) <= 1e-10 * scale
    gram = dec.eigenvectors.conj().T @ dec.eigenvectors
    assert opkernel.operator_norm(gram - np.eye(dim)) <= 1e-10


@settings(deadline=None, max_examples=50)
@given(seed=st.integers(0, 2 ** 32 - 1), dim=st.integers(1, 6))
def test_operator_norm_is_largest_singular_value(seed, dim):
    rng = np.random.default_rng(seed)
    arr = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    assert opkernel.operator_norm(arr) == pytest.approx(np.linalg.norm(arr, 2), rel=1e-9)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(StructureError) as info:
        opkernel.eig_hermitian(Operator([[0.0, 1.0], [0.0, 0.0]]))
    assert info.value.residual == pytest.approx(1.0)


def test_spectral_function_domain_error():
    a = Operator.diagonal([4.0, -1.0])
    with pytest.raises(DomainError) as info:
        opkernel.apply_spectral_function(a, np.sqrt)
    assert info.value.eigenvalue == -1.0


def test_spectral_function_scalar_only_callable():
    a = Operator.diagonal([4.0, 9.0])
    root = opkernel.apply_spectral_function(a, lambda x: float(x) ** 0.5)
    assert np.allclose(root.entries, np.diag([2.0, 3.0]))
    assert root.class_hint is OpClass.HERMITIAN


def test_exponential_is_unitary():
    a = random_hermitian(3, 5)
    u = opkernel.apply_spectral_function(a, lambda x: np.exp(1j * x), OpClass.UNITARY)
    assert opkernel.classify(u).unitary


def test_spectral_projection_interval():
    a = Operator.diagonal([0.0, 1.0, 2.0])
    p = opkernel.spectral_projection(a, 0.5, 2.0)
    assert np.allclose(p.entries, np.diag([0.0, 1.0, 1.0]))


def test_join_and_meet_of_diagonal_projections():
    p = diag_projection(1, 1, 0)
    q = diag_projection(0, 1, 1)
    assert np.allclose(opkernel.lattice_join([p, q]).entries, np.eye(3))
    assert np.allclose(opkernel.lattice_meet([p, q]).entries, np.diag([0, 1, 0]))


def test_join_of_non_commuting_projections():
    p = diag_projection(1, 0, 0)
    v = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    q = Operator(np.outer(v, v), OpClass.PROJECTION)
    assert np.allclose(opkernel.lattice_join([p, q]).entries, np.diag([1, 1, 0]))
    assert np.allclose(opkernel.lattice_meet([p, q]).entries, np.zeros((3, 3)))


def test_lattice_operations_need_projections():
    with pytest.raises(StructureError):
        opkernel.lattice_join([Operator.diagonal([0.5, 1.0])])
    with pytest.raises(DimensionError):
        opkernel.lattice_meet([])


def test_commutator_norm_of_pauli_matrices():
    assert opkernel.commutator_norm(Operator(PAULI_X), Operator(PAULI_Z)) == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        opkernel.commutator_norm(Operator(PAULI_X), Operator.identity(3))


def test_tensor_product():
    p = diag_projection(1, 0)
    out = opkernel.tensor_product(p, Operator.identity(3))
    assert out.dim == 6
    assert out.class_hint is OpClass.PROJECTION
    assert opkernel.classify(out).projection


def test_conjugate_keeps_scalars():
    u = opkernel.apply_spectral_function(random_hermitian(1, 4), lambda x: np.exp(1j * x),
                                         OpClass.UNITARY)
    a = Operator(0.5 * np.eye(4), OpClass.EFFECT)
    assert opkernel.conjugate(u, a) is a
    moved = opkernel.conjugate(u, diag_projection(1, 0, 0, 0))
    assert opkernel.classify(moved).projection


def test_classify_effect():
    report = opkernel.classify(Operator(0.5 * np.eye(2)))
    assert report.effect and report.hermitian
    assert not report.projection
    assert "effect" in report.classes


def test_state_vector_normalization():
    with pytest.raises(StructureError):
        opkernel.StateVector([1.0, 1.0])
    with pytest.raises(PreconditionError):
        opkernel.StateVector.normalized([0.0, 0.0])
    psi = opkernel.StateVector.normalized([3.0, 4.0])
    assert psi.dim == 2
    assert opkernel.expectation(diag_projection(0, 1), psi) == pytest.approx(0.64)


def test_lattice_absorption_laws():
    e = diag_projection(1, 0, 1)
    assert np.allclose(opkernel.lattice_join([e, Operator.zeros(3)]).entries, e.entries)
    assert np.allclose(opkernel.lattice_join([e, Operator.identity(3)]).entries, np.eye(3))
    assert np.allclose(opkernel.lattice_meet([e, Operator.identity(3)]).entries, e.entries)
    complement = Operator(np.eye(3) - e.entries, OpClass.PROJECTION)
    assert np.allclose(opkernel.lattice_meet([e, complement]).entries, np.zeros((3, 3)))


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_spectral_function_composes(seed):
    a = random_hermitian(seed, 5)
    squared = opkernel.apply_spectral_function(a, lambda x: x ** 2)
    shifted = opkernel.apply_spectral_function(squared, lambda x: x + 1.0)
    direct = opkernel.apply_spectral_function(a, lambda x: x ** 2 + 1.0)
    assert opkernel.operator_norm(shifted.entries - direct.entries) <= 1e-9 * max(1.0, opkernel.operator_norm(direct))


def test_tensor_mixed_product():
    a, b = random_hermitian(5, 3), random_hermitian(6, 4)
    c, d = random_hermitian(7, 3), random_hermitian(8, 4)
    left = opkernel.tensor_product(a, b) @ opkernel.tensor_product(c, d)
    right = opkernel.tensor_product(a @ c, b @ d)
    assert opkernel.operator_norm(left.entries - right.entries) <= 1e-10
    assert np.array_equal(opkernel.tensor_product(Operator.identity(3), Operator.identity(4)).entries,
                          np.eye(12))
