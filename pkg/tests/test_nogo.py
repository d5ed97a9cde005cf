#!/usr/bin/env python

"""Tests for `nogo` module."""

import logging
import numpy as np
import pytest
from loclab import axioms
from loclab import clirunner
from loclab import modelzoo
from loclab import nogo
from loclab import opkernel
from loclab.axioms import ConditionId
from loclab.axioms import Outcome
from loclab.clirunner import ExperimentConfig
from loclab.exceptions import CausalityError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import PreconditionError
from loclab.nogo import BorchersMode
from loclab.nogo import ConclusionKind
from loclab.nogo import ZeroSetClass
from loclab.opkernel import OpClass
from loclab.opkernel import Operator
from loclab.spacetime import Region
from loclab.spacetime import SpaceModel
from loclab.spacetime import interval


@pytest.fixture(scope='module')
def matrices(policy):
    cache = {}

    def lookup(system):
        if system.label not in cache:
            cache[system.label] = nogo.condition_matrix(system, policy)
        return cache[system.label]
    return lookup


@pytest.fixture(scope='module')
def newton_wigner64():
    return modelzoo.build_standard(SpaceModel("line_isotropic", 64, 0.1), "relativistic")


def theorem(matrix, name):
    return {t.theorem: t for t in matrix.theorems}[name]


def test_zero_hamiltonian_matrix(zero_frame16, matrices):
    matrix = matrices(zero_frame16)
    assert matrix.conclusion_kind is ConclusionKind.TRIVIAL_DYNAMICS
    assert matrix.conclusion_holds
    assert matrix.conclusion_residual == 0.0
    sharp = theorem(matrix, "strengthened_sharp")
    assert sharp.premises_hold and sharp.consistent
    malament = theorem(matrix, "malament")
    assert malament.failing_premises == (ConditionId.NO_ABSOLUTE_VELOCITY,)
    assert not matrix.conclusion(ConclusionKind.LOCALIZATION_VANISHES).holds


def test_standard_matrix(standard16, matrices):
    matrix = matrices(standard16)
    assert not matrix.conclusion_holds
    sharp = theorem(matrix, "strengthened_sharp")
    assert sharp.failing_premises == (ConditionId.MICROCAUSALITY,)
    assert all(t.consistent for t in matrix.theorems)
    assert ConditionId.MICROCAUSALITY in matrix.failing()


def test_matrix_dict_round_trip(standard16, matrices):
    matrix = matrices(standard16)
    assert nogo.ConditionMatrix.from_dict(matrix.to_dict()) == matrix
    assert matrix.verdict("microcausality") is matrix.verdicts[5]


def test_cylinder_measure_escapes_unsharp_theorem(measure16, policy, caplog):
    with caplog.at_level(logging.WARNING, logger="loclab.nogo"):
        matrix = nogo.condition_matrix(measure16, policy)
    unsharp = theorem(matrix, "unsharp")
    assert unsharp.premises_hold and not unsharp.consistent
    assert not matrix.conclusion_holds
    assert "unsharp" in caplog.text
    row, = nogo.conjecture_probe([matrix])
    assert row["counterexample_to"] == ["unsharp"]
    assert row["trivial_dynamics"] and row["matches_conjecture"]


def test_superluminal_leakage(newton_wigner64):
    region, probe = interval(newton_wigner64.model, 16, 4), interval(newton_wigner64.model, 49, 4)
    start = nogo.superluminal_leakage(newton_wigner64, region, probe, 0.0)
    assert start.gap == pytest.approx(2.8)
    assert start.probability == 0.0
    later = nogo.superluminal_leakage(newton_wigner64, region, probe, 1.0)
    assert later.spacelike_clear
    assert later.probability > 1e-12
    with pytest.raises(CausalityError):
        nogo.superluminal_leakage(newton_wigner64, region, probe, 3.0)
    with pytest.raises(InvalidParameterError):
        nogo.superluminal_leakage(newton_wigner64, region, probe, -1.0)


def test_leakage_needs_sharp_system(measure16):
    with pytest.raises(PreconditionError):
        nogo.superluminal_leakage(measure16, Region([0]), Region([8]), 1.0)


def test_busch_spectrum(dirac32, standard16):
    spectrum = nogo.busch_spectrum(dirac32, interval(dirac32.model, 0, 8))
    assert spectrum.max_eigenvalue < 1.0
    assert spectrum.min_eigenvalue >= -1e-10
    assert spectrum.gap_to_one == pytest.approx(1.0 - spectrum.max_eigenvalue)
    sharp = nogo.busch_spectrum(standard16, Region([1, 2]))
    assert sharp.gap_to_one == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidRegionError):
        nogo.busch_spectrum(dirac32, Region())
    with pytest.warns(UserWarning):
        nogo.busch_spectrum(dirac32, interval(dirac32.model, 0, 20))


def oscillating_detector():
    h = Operator.diagonal([0.0, 1.0])
    w = np.array([1.0, -1.0]) / np.sqrt(2)
    a = Operator(np.outer(w, w), OpClass.PROJECTION)
    psi = opkernel.StateVector.normalized([1.0, 1.0])
    return h, a, psi


def test_zero_set_classification():
    h, a, psi = oscillating_detector()
    sparse = nogo.hegerfeldt_zero_set(h, a, psi, np.linspace(0.0, 10.0, 101))
    assert sparse.classification is ZeroSetClass.ZEROS_SPARSE
    assert sparse.max_abs == pytest.approx(1.0, abs=1e-3)
    grid = np.concatenate([2 * np.pi * np.arange(19), [np.pi]])
    anomalous = nogo.hegerfeldt_zero_set(h, a, psi, grid)
    assert anomalous.classification is ZeroSetClass.ANOMALOUS
    assert anomalous.zero_fraction == pytest.approx(0.95)
    dark = nogo.hegerfeldt_zero_set(Operator.diagonal([0.0, 1.0, 2.0]),
                                    Operator.diagonal([0.0, 0.0, 1.0]),
                                    opkernel.StateVector([1.0, 0.0, 0.0]),
                                    np.linspace(0.0, 5.0, 40))
    assert dark.classification is ZeroSetClass.IDENTICALLY_ZERO


def test_zero_set_warns_on_short_grid():
    h, a, psi = oscillating_detector()
    with pytest.warns(UserWarning):
        nogo.hegerfeldt_zero_set(h, a, psi, np.linspace(0.0, 1.0, 5))


def test_borchers_probe_modes():
    e = Operator.diagonal([1.0, 0.0], OpClass.PROJECTION)
    f = Operator.diagonal([0.0, 1.0], OpClass.PROJECTION)
    vacuous = nogo.borchers_probe(e, Operator.zeros(2), Operator.diagonal([0.0, 1.0]))
    assert vacuous.mode is BorchersMode.VACUOUS
    still = nogo.borchers_probe(e, f, Operator.diagonal([0.0, 1.0]))
    assert still.mode is BorchersMode.PREMISE_HOLDS
    assert still.consistent and not still.witness_found
    mixing = nogo.borchers_probe(e, f, Operator([[0.0, 1.0], [1.0, 0.0]]))
    assert mixing.mode is BorchersMode.CONTRAPOSITIVE
    assert mixing.witness_found and mixing.witness_time is not None
    with pytest.raises(PreconditionError):
        nogo.borchers_probe(e, e, Operator.diagonal([0.0, 1.0]))


def test_number_reduction(fock6, standard16):
    reduced = nogo.number_reduction(fock6, 2)
    assert reduced.label == "lattice_fock_reduced_2"
    sector = opkernel.spectral_projection(fock6.total_number(), 1.5, 2.5)
    whole = reduced.localize(fock6.model.all_sites())
    assert opkernel.operator_norm(whole.entries - sector.entries) <= 1e-12
    assert opkernel.classify(reduced.localize(Region([0, 1]))).effect
    with pytest.raises(InvalidParameterError):
        nogo.number_reduction(fock6, 0)
    with pytest.raises(PreconditionError):
        nogo.number_reduction(standard16, 1)


def test_lemma_suite(policy):
    report = nogo.appendix_lemma_suite(policy, rng=np.random.default_rng(3), instances=2)
    assert report.violated == []
    assert report.counts("block_invariance")["confirmed"] == 2
    assert report.counts("orthogonal_invariance")["confirmed"] > 0
    chain = report.number_reduction
    assert chain["failing_premises"] == ["microcausality", "no_absolute_velocity"]
    assert not chain["effects_vanish"]
    assert set(report.to_dict()["counts"]) == {
        "block_invariance", "covering_join_invariance", "orthogonal_invariance",
    }


def test_detection_floor(measure16, policy):
    floor = nogo.detection_floor(measure16, policy)
    assert floor["floor"] == pytest.approx(0.125)
    assert len(floor["region"]) == 2


def test_leakage_from_split_region(newton_wigner64):
    report = nogo.superluminal_leakage(newton_wigner64, Region([0, 40]), Region([20]), 1.0)
    assert report.gap == pytest.approx(2.0)
    assert report.probability > 1e-12


def test_leakage_grows_with_the_detector(newton_wigner64):
    m = newton_wigner64.model
    region = interval(m, 16, 4)
    small = nogo.superluminal_leakage(newton_wigner64, region, interval(m, 49, 4), 1.0)
    big = nogo.superluminal_leakage(newton_wigner64, region, interval(m, 47, 8), 1.0)
    assert big.gap < small.gap
    assert small.probability <= big.probability + 1e-12


def refined(grid):
    """Grid with the midpoint of every pair of neighbours added."""
    grid = np.sort(np.asarray(grid, dtype=float))
    return np.sort(np.concatenate([grid, 0.5 * (grid[1:] + grid[:-1])]))


def test_zero_set_classification_survives_refinement():
    h, a, psi = oscillating_detector()
    sparse = refined(np.linspace(0.0, 10.0, 101))
    assert sparse.size == 201
    assert nogo.hegerfeldt_zero_set(h, a, psi, sparse).classification is ZeroSetClass.ZEROS_SPARSE
    grid = refined(np.concatenate([2 * np.pi * np.arange(19), [np.pi]]))
    anomalous = nogo.hegerfeldt_zero_set(h, a, psi, grid)
    assert anomalous.classification is ZeroSetClass.ANOMALOUS
    assert anomalous.zero_fraction == pytest.approx(19 / 39)
    dark = nogo.hegerfeldt_zero_set(Operator.diagonal([0.0, 1.0, 2.0]),
                                    Operator.diagonal([0.0, 0.0, 1.0]),
                                    opkernel.StateVector([1.0, 0.0, 0.0]),
                                    refined(np.linspace(0.0, 5.0, 40)))
    assert dark.classification is ZeroSetClass.IDENTICALLY_ZERO


def test_positive_energy_dirac_breaks_microcausality(dirac32, policy):
    micro = axioms.check_causality(dirac32, policy)[0]
    assert micro.condition is ConditionId.MICROCAUSALITY
    assert micro.outcome is Outcome.FAIL
    assert micro.residual > 1e-6
    w = micro.witness
    assert w["time"] * dirac32.model.light_speed < w["gap"]


def test_random_lemma_instances_at_scale():
    config = ExperimentConfig.from_dict({
        "experiments": [
            {"kind": "hegerfeldt",
             "params": {"instances": 100, "max_dim": 16, "points": 64, "horizon": 10.0},
             "expect": {"max_anomalous": 0}},
            {"kind": "borchers", "params": {"instances": 20, "dim": 8, "rank": 2},
             "expect": {"min_witnesses": 20}},
        ],
        "seed": 0,
    })
    report = clirunner.run(config)
    assert report.violations == []
    counts = report.results[0]["result"]["counts"]
    assert counts["anomalous"] == 0
    assert counts["zeros_sparse"] == 100
    borchers = report.results[1]["result"]
    assert borchers["witnesses"] == borchers["consistent"] == 20
