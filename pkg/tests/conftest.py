"""Builds out fixtures of small systems for package tests."""
import pytest
from loclab import modelzoo
from loclab.axioms import TolerancePolicy
from loclab.spacetime import SpaceModel


@pytest.fixture(scope="session")
def policy():
    """Default tolerances with a short refinement scan at physical length 16."""
    return TolerancePolicy(refinement=(16, 32, 64))


@pytest.fixture(scope="session")
def line16():
    return SpaceModel("line_isotropic", 16)


@pytest.fixture(scope="session")
def frame16():
    return SpaceModel("line_distinguished_frame", 16)


@pytest.fixture(scope="session")
def circle16():
    return SpaceModel("circle", 16)


@pytest.fixture(scope="session")
def standard16(line16):
    return modelzoo.build_standard(line16, "nonrelativistic")


@pytest.fixture(scope="session")
def relativistic16(line16):
    return modelzoo.build_standard(line16, "relativistic")


@pytest.fixture(scope="session")
def momentum16(line16):
    return modelzoo.build_standard(line16, "momentum")


@pytest.fixture(scope="session")
def zero_frame16(frame16):
    return modelzoo.build_standard(frame16, "zero")


@pytest.fixture(scope="session")
def frozen16(line16):
    return modelzoo.build_frozen(line16)


@pytest.fixture(scope="session")
def only_d0_16(line16):
    return modelzoo.build_pathological(line16, mode="only_d0")


@pytest.fixture(scope="session")
def all_but_d0_16(line16):
    return modelzoo.build_pathological(line16, mode="all_but_d0")


@pytest.fixture(scope="session")
def tensor16(line16):
    return modelzoo.build_tensor_counterexample(line16)


@pytest.fixture(scope="session")
def cylinder16(circle16):
    return modelzoo.build_cylinder_threshold(circle16)


@pytest.fixture(scope="session")
def measure16(circle16):
    return modelzoo.build_measure_effect(circle16)


@pytest.fixture(scope="session")
def dirac32():
    return modelzoo.build_dirac_positive(SpaceModel("line_isotropic", 32, 0.1))


@pytest.fixture(scope="session")
def fock6():
    return modelzoo.build_lattice_fock(6)
