#!/usr/bin/env python

"""Tests for `spacetime` module."""

from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st
import math
import pytest
from loclab import spacetime
from loclab.exceptions import InfeasibleFamilyError
from loclab.exceptions import InvalidParameterError
from loclab.exceptions import InvalidRegionError
from loclab.exceptions import NotSpacelikeError
from loclab.spacetime import NavOutcome
from loclab.spacetime import Region
from loclab.spacetime import SpaceModel
from loclab.spacetime import Translation


@pytest.fixture(scope='module')
def line8():
    return SpaceModel("line_isotropic", 8)


def test_space_model_validation():
    with pytest.raises(InvalidParameterError):
        SpaceModel("line_isotropic", 3)
    with pytest.raises(InvalidParameterError):
        SpaceModel("torus", 8)
    with pytest.raises(InvalidParameterError):
        SpaceModel("circle", 8, spacing=0.0)


def test_region_normalizes_and_validates(line8):
    assert Region([3, 1, 3]).sites == (1, 3)
    with pytest.raises(InvalidRegionError):
        Region([-1])
    with pytest.raises(InvalidRegionError):
        line8.validate([2, 8])


def test_interval_wraps(line8):
    assert spacetime.interval(line8, 6, 4).to_list() == [0, 1, 6, 7]


def test_region_distance(line8):
    assert spacetime.region_distance(line8, Region([0]), Region([4])) == 4.0
    assert spacetime.region_distance(line8, Region([0]), Region([7])) == 1.0
    assert spacetime.region_distance(line8, Region([0, 1]), Region([1, 2])) == 0.0
    assert spacetime.region_distance(line8, Region(), Region([1])) == math.inf
    spaced = SpaceModel("line_isotropic", 8, spacing=0.5)
    assert spacetime.region_distance(spaced, Region([0]), Region([3])) == 1.5


@settings(deadline=None)
@given(a=st.sets(st.integers(0, 15), min_size=1), b=st.sets(st.integers(0, 15), min_size=1),
       shift=st.integers(-20, 20))
def test_distance_symmetric_and_shift_invariant(a, b, shift):
    m = SpaceModel("circle", 16)
    d1, d2 = Region(a), Region(b)
    d = spacetime.region_distance(m, d1, d2)
    assert d == spacetime.region_distance(m, d2, d1)
    moved = spacetime.region_distance(
        m, spacetime.shift_region(m, d1, shift), spacetime.shift_region(m, d2, shift)
    )
    assert moved == d


def test_spacelike_clear(line8):
    d1, d2 = Region([0]), Region([3])
    assert spacetime.is_spacelike_clear(line8, d1, d2, 2.9)
    assert not spacetime.is_spacelike_clear(line8, d1, d2, 3.0)
    with pytest.raises(InvalidParameterError):
        spacetime.is_spacelike_clear(line8, d1, d2, -0.1)


def test_nav_decompose_isotropic(line8):
    a = Translation(0.5, 3)
    b, c = spacetime.nav_decompose(line8, a)
    assert b.is_timelike(line8) and c.is_timelike(line8)
    diff = b - c
    assert diff.shift == 3
    assert diff.time == pytest.approx(0.5)


def test_nav_decompose_other_models():
    a = Translation(0.0, 2)
    assert spacetime.nav_decompose(SpaceModel("line_distinguished_frame", 8), a) is None
    assert spacetime.nav_decompose(SpaceModel("circle", 8), a) is NavOutcome.NOT_APPLICABLE
    with pytest.raises(NotSpacelikeError):
        spacetime.nav_decompose(SpaceModel("line_isotropic", 8), Translation(5.0, 1))


def test_grow_region(line8):
    assert spacetime.grow_region(line8, Region([0]), 1, 2).to_list() == [0, 1, 2, 7]


def test_disjoint_coverings(line8):
    families = spacetime.make_families(line8, "disjoint_covering")
    assert len(families) == 2
    for covering in families:
        sites = [s for region in covering for s in region]
        assert sorted(sites) == list(range(8))


def test_nested_to(line8):
    (chain,) = spacetime.make_families(line8, "nested_to", region=Region([3, 4]))
    assert [r.to_list() for r in chain] == [[1, 2, 3, 4, 5, 6], [2, 3, 4, 5], [3, 4]]
    (short,) = spacetime.make_families(line8, "nested_to", region=Region([3, 4]), depth=1)
    assert [r.to_list() for r in short] == [[2, 3, 4, 5], [3, 4]]


def test_squeeze_to(line8):
    (pair,) = spacetime.make_families(line8, "squeeze_to", region=Region([3, 4]))
    left, right = pair
    assert left.to_list() == [0, 1, 2, 3, 4]
    assert right.to_list() == [3, 4, 5, 6, 7]
    assert left.intersection(right) == Region([3, 4])
    with pytest.raises(InfeasibleFamilyError):
        spacetime.make_families(line8, "squeeze_to", region=spacetime.interval(line8, 0, 7))


def test_families_need_proper_region(line8):
    with pytest.raises(InfeasibleFamilyError):
        spacetime.make_families(line8, "nested_to", region=line8.all_sites())
    with pytest.raises(InfeasibleFamilyError):
        spacetime.make_families(line8, "nested_to")


def test_covering_with(line8):
    (members,) = spacetime.make_families(line8, "covering_with", region=Region([1, 2, 3]))
    assert members[0] == Region([1, 2, 3])
    assert sorted(s for r in members for s in r) == list(range(8))
    with pytest.warns(UserWarning):
        spacetime.make_families(line8, "covering_with", region=line8.all_sites())


def test_shift_region_wraps(line8):
    assert spacetime.shift_region(line8, Region([0, 1]), -1) == Region([0, 7])
    assert spacetime.shift_region(line8, Region([2, 5]), 8) == Region([2, 5])


@given(sites=st.sets(st.integers(0, 7)), s=st.integers(-20, 20), t=st.integers(-20, 20))
def test_shift_region_is_group_action(sites, s, t):
    m = SpaceModel("line_isotropic", 8)
    d = Region(sites)
    twice = spacetime.shift_region(m, spacetime.shift_region(m, d, s), t)
    assert twice == spacetime.shift_region(m, d, s + t)


def test_nav_decompose_negative_shift(line8):
    b, c = spacetime.nav_decompose(line8, Translation(0.0, -2))
    assert (b.time, b.shift) == (3.0, -2)
    assert (c.time, c.shift) == (3.0, 0)
