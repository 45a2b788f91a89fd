#!/usr/bin/env python3
"""
Tests for the truncated geometric mechanism, exact DP ratios and utility
"""

import sys
import os
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.dp_mechanisms import (
    FiniteMechanismMatrix,
    UnboundedRatioError,
    exact_dp_epsilon,
    exact_dp_ratio,
    identity_matrix,
    matrix_from_rows,
    truncated_geometric,
    uniform_matrix,
    utility,
)


def test_truncated_geometric_small():
    """Test the n=1 matrix and degenerate sizes"""
    print("Testing truncated geometric matrix...")

    matrix = truncated_geometric(Fraction(1, 2), 1)
    assert matrix.rows == ((Fraction(2, 3), Fraction(1, 3)), (Fraction(1, 3), Fraction(2, 3)))
    assert matrix.n == 1
    assert truncated_geometric(Fraction(1, 2), 0).rows == ((Fraction(1),),)

    with pytest.raises(ValueError):
        truncated_geometric(Fraction(1), 3)
    with pytest.raises(ValueError):
        truncated_geometric(Fraction(0), 3)
    with pytest.raises(ValueError):
        truncated_geometric(Fraction(1, 2), -1)

    print("✓ Truncated geometric matrix working")


@settings(max_examples=30, deadline=None)
@given(
    num=st.integers(min_value=1, max_value=9),
    den=st.integers(min_value=2, max_value=10),
    n=st.integers(min_value=1, max_value=12)
)
def test_geometric_ratio_is_inverse_alpha(num, den, n):
    """Neighbouring counts differ by exactly a factor 1/alpha"""
    if num >= den:
        return
    alpha = Fraction(num, den)
    matrix = truncated_geometric(alpha, n)
    assert all(sum(row) == 1 for row in matrix.rows)
    assert exact_dp_ratio(matrix) == 1 / alpha
    assert exact_dp_epsilon(matrix) == pytest.approx(math.log(den / num))


def test_utility():
    """Test utility ordering and the reference matrices"""
    print("Testing utility...")

    for gamma in (Fraction(0), Fraction(1, 10), Fraction(1)):
        values = [utility(truncated_geometric(a, 5), gamma)
                  for a in (Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))]
        assert values[0] < values[1] < values[2], f"gamma={gamma}: {values}"
        assert all(v <= 0 for v in values)

    assert utility(identity_matrix(4), Fraction(1)) == 0
    assert utility(uniform_matrix(1), Fraction(0)) == Fraction(-1, 2)
    assert utility(truncated_geometric(Fraction(1, 2), 1), Fraction(0)) == Fraction(-1, 3)

    with pytest.raises(ValueError):
        utility(identity_matrix(2), Fraction(-1))
    with pytest.raises(ValueError):
        utility(matrix_from_rows([["1/2", "1/4", "1/4"]]), Fraction(0))

    print("✓ Utility working")


def test_exact_ratio_edge_cases():
    """Test reference matrices and unbounded ratios"""
    print("Testing exact ratio edge cases...")

    assert exact_dp_ratio(uniform_matrix(4)) == 1
    assert exact_dp_epsilon(uniform_matrix(4)) == 0
    with pytest.raises(UnboundedRatioError):
        exact_dp_ratio(identity_matrix(2))

    matrix = matrix_from_rows([["3/4", "1/4"], ["1/4", "3/4"]])
    assert exact_dp_ratio(matrix) == 3

    with pytest.raises(ValueError):
        FiniteMechanismMatrix(((Fraction(1, 2), Fraction(1, 3)),))
    with pytest.raises(ValueError):
        FiniteMechanismMatrix(((Fraction(1),), (Fraction(1, 2), Fraction(1, 2))))
    with pytest.raises(ValueError):
        FiniteMechanismMatrix(((Fraction(3, 2), Fraction(-1, 2)),))

    rendered = truncated_geometric(Fraction(1, 2), 1).render()
    assert rendered.splitlines() == ["2/3  1/3", "1/3  2/3"]

    print("✓ Exact ratio edge cases working")


def run_all_tests():
    """Run all tests"""
    print("=" * 50)
    print("Geometric Mechanism Test Suite")
    print("=" * 50)

    tests = [
        test_truncated_geometric_small,
        test_geometric_ratio_is_inverse_alpha,
        test_utility,
        test_exact_ratio_edge_cases,
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
