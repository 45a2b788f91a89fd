#!/usr/bin/env python3
"""
Tests for trails: points, partitioning and the telescoping identity
"""

import sys
import os
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.histograms import (
    Direction,
    Trail,
    histogram_set_for_outputs,
    partition_into_trails,
    trail_points,
    trail_theorem_sides,
)
from src.prob_core import VoteDistribution, enumerate_histograms


HALF = VoteDistribution((Fraction(1, 2), Fraction(1, 2)))
FIRST_TO_SECOND = Direction(0, 1)


def test_trail_points():
    """Test the histograms a trail passes through"""
    print("Testing trail points...")

    trail = Trail((6, 1), FIRST_TO_SECOND, 4)
    assert trail_points(trail) == [(6, 1), (5, 2), (4, 3), (3, 4), (2, 5)]
    assert trail.exit == (2, 5)

    trail = Trail((3, 0, 10), FIRST_TO_SECOND, 3)
    assert trail_points(trail) == [(3, 0, 10), (2, 1, 10), (1, 2, 10), (0, 3, 10)]

    assert trail_points(Trail((4, 4, 4), Direction(2, 0), 0)) == [(4, 4, 4)]

    print("✓ Trail points working")


def test_trail_validation():
    """Test malformed directions and trails"""
    print("Testing trail validation...")

    with pytest.raises(ValueError):
        Direction(1, 1)
    with pytest.raises(ValueError):
        Direction(-1, 0)
    with pytest.raises(ValueError):
        Trail((1, 0), FIRST_TO_SECOND, 2)
    with pytest.raises(ValueError):
        Trail((1, 0), Direction(0, 2), 1)

    print("✓ Trail validation working")


def test_trail_json():
    """Test the trail JSON form"""
    print("Testing trail JSON...")

    trail = Trail((3, 0, 10), Direction(0, 1), 3)
    data = trail.to_json()
    assert data == {"entry": [3, 0, 10], "j": 0, "k": 1, "q": 3}
    assert Trail.from_json(json.dumps(data)) == trail

    print("✓ Trail JSON working")


def test_partition_examples():
    """Test partitioning on the two-trail example"""
    print("Testing trail partition...")

    region = {(7, 0), (6, 1), (5, 2), (2, 5), (1, 6), (0, 7)}
    trails = partition_into_trails(region, FIRST_TO_SECOND)
    assert [t.entry for t in trails] == [(7, 0), (2, 5)]
    assert [t.length for t in trails] == [2, 2]

    everything = list(enumerate_histograms(9, 2))
    trails = partition_into_trails(everything, FIRST_TO_SECOND)
    assert len(trails) == 1 and trails[0].entry == (9, 0) and trails[0].length == 9

    assert partition_into_trails(set(), FIRST_TO_SECOND) == []

    with pytest.raises(ValueError):
        partition_into_trails({(2, 0), (1, 0)}, FIRST_TO_SECOND)

    print("✓ Trail partition working")


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=6),
    c=st.integers(min_value=2, max_value=4),
    data=st.data()
)
def test_partition_is_sound_and_maximal(n, c, data):
    """Trails cover the set exactly once and cannot be extended"""
    universe = list(enumerate_histograms(n, c))
    region = set(data.draw(st.lists(st.sampled_from(universe), unique=True)))
    j, k = data.draw(st.permutations(range(c)))[:2]
    d = Direction(j, k)

    trails = partition_into_trails(region, d)
    covered = [t for trail in trails for t in trail_points(trail)]
    assert len(covered) == len(set(covered))
    assert set(covered) == region
    for trail in trails:
        assert trail.point(-1) not in region
        assert trail.point(trail.length + 1) not in region


def test_trail_theorem_examples():
    """Test the identity on hand-computed trails"""
    print("Testing trail identity...")

    lhs, rhs = trail_theorem_sides(Trail((2, 0), FIRST_TO_SECOND, 2), HALF)
    assert lhs == rhs == 0, f"got {lhs}, {rhs}"

    lhs, rhs = trail_theorem_sides(Trail((2, 0), FIRST_TO_SECOND, 1), HALF)
    assert lhs == rhs == Fraction(1, 2), f"got {lhs}, {rhs}"

    lhs, rhs = trail_theorem_sides(Trail((1, 1), FIRST_TO_SECOND, 0), HALF)
    assert lhs == rhs == 0

    # no mass on bin 1: the entry term needs a bin-1 row and vanishes
    degenerate = VoteDistribution((Fraction(3, 4), Fraction(0), Fraction(1, 4)))
    lhs, rhs = trail_theorem_sides(Trail((3, 0, 1), FIRST_TO_SECOND, 2), degenerate)
    assert lhs == rhs == 0

    print("✓ Trail identity working")


@settings(max_examples=60, deadline=None)
@given(
    weights=st.lists(st.integers(min_value=1, max_value=5), min_size=2, max_size=4),
    n=st.integers(min_value=1, max_value=8),
    data=st.data()
)
def test_trail_theorem_random(weights, n, data):
    """The identity holds for every trail and distribution"""
    total = sum(weights)
    pi = VoteDistribution(tuple(Fraction(w, total) for w in weights))
    entry = data.draw(st.sampled_from(list(enumerate_histograms(n, pi.c))))
    j, k = data.draw(st.permutations(range(pi.c)))[:2]
    q = data.draw(st.integers(min_value=0, max_value=entry[j]))

    lhs, rhs = trail_theorem_sides(Trail(entry, Direction(j, k), q), pi)
    assert lhs == rhs


def test_histogram_set_for_outputs():
    """Test collecting the histograms behind an output set"""
    print("Testing output regions...")

    region = histogram_set_for_outputs(lambda t: int(t[0] >= t[1]), 3, 2, {1})
    assert region == {(3, 0), (2, 1)}
    assert histogram_set_for_outputs(lambda t: 0, 3, 2, {1}) == set()

    print("✓ Output regions working")


def run_all_tests():
    """Run all tests"""
    print("=" * 50)
    print("Trail Test Suite")
    print("=" * 50)

    tests = [
        test_trail_points,
        test_trail_validation,
        test_trail_json,
        test_partition_examples,
        test_partition_is_sound_and_maximal,
        test_trail_theorem_examples,
        test_trail_theorem_random,
        test_histogram_set_for_outputs,
    ]

    for test in tests:
        try:
            test()
        except AssertionError as e:
            print(f"✗ {test.__name__} failed: {e}")
            return False
        except Exception as e:
            print(f"✗ {test.__name__} error: {e}")
            return False

    print("=" * 50)
    print("✅ All tests passed!")
    print("=" * 50)
    return True


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
