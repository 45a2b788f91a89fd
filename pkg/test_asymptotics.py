#!/usr/bin/env python3
"""
Tests for closed forms, decay rates, hyperplane bounds and the inverse-sqrt fit
"""

import sys
import os
import math
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src import VotePrivacy, load_config
from src.asymptotics import (
    FitResult,
    dist_to_hyperplane,
    fit_inverse_sqrt,
    gsr_exponential_bound,
    hist2_delta_closed_form,
    histc_delta_mixture,
    histogram_eps_ratio,
    log_slope,
    majority_delta_exact,
    majority_rate,
    render_table,
    scoring_hyperplanes,
    stirling_hist2_delta,
)
from src.ddp import delta_exact
from src.prob_core import VoteDistribution
from src.voting_rules import alpha_majority_mechanism, borda, build_mechanism, histogram_mechanism, plurality


SLOW = os.environ.get("VOTEPRIV_SLOW") == "1"
TABLE_RULES = {
    "borda": 1.347,
    "stv": 1.495,
    "maximin": 1.553,
    "plurality": 1.717,
    "2-approval": 1.786,
}


def test_hist2_closed_form():
    """Test the 2-bin histogram closed form"""
    print("Testing 2-bin histogram closed form...")

    assert hist2_delta_closed_form(Fraction(1, 2), 3) == Fraction(1, 2)
    assert hist2_delta_closed_form(Fraction(1, 2), 5) == Fraction(3, 8)
    for p in (Fraction(1, 3), Fraction(1, 2), Fraction(7, 10)):
        for n in (1, 2, 6, 9, 15):
            pi = VoteDistribution((p, 1 - p))
            assert hist2_delta_closed_form(p, n) == delta_exact(histogram_mechanism(2), pi, n).delta, \
                f"p={p} n={n}"

    with pytest.raises(ValueError):
        hist2_delta_closed_form(Fraction(1), 3)
    with pytest.raises(ValueError):
        hist2_delta_closed_form(Fraction(1, 2), 0)

    print("✓ 2-bin closed form working")


def test_hist2_leading_term():
    """delta sqrt(n) approaches sqrt(2/pi) at p = 1/2"""
    print("Testing 2-bin leading term...")

    delta = hist2_delta_closed_form(Fraction(1, 2), 801)
    assert abs(float(delta) * math.sqrt(801) - math.sqrt(2 / math.pi)) < 0.01
    assert float(hist2_delta_closed_form(Fraction(1, 2), 400)) == pytest.approx(
        stirling_hist2_delta(Fraction(1, 2), 400), rel=0.01)

    print("✓ 2-bin leading term working")


def test_majority_closed_form():
    """Test the alpha-majority closed form"""
    print("Testing majority closed form...")

    half = Fraction(1, 2)
    assert majority_delta_exact(half, half, 3) == Fraction(1, 2)
    for n in (1, 4, 9):
        assert majority_delta_exact(Fraction(1), half, n) == Fraction(1, 2 ** (n - 1))
    assert majority_delta_exact(Fraction(0), half, 7) == 0

    for alpha in (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(3, 5), Fraction(1)):
        for n in (1, 5, 10):
            pi = VoteDistribution((Fraction(2, 5), Fraction(3, 5)))
            assert majority_delta_exact(alpha, Fraction(2, 5), n) == \
                delta_exact(alpha_majority_mechanism(alpha), pi, n).delta, f"alpha={alpha} n={n}"

    print("✓ Majority closed form working")


def test_majority_rate():
    """Test the exponential decay rate of majority"""
    print("Testing majority rate...")

    assert majority_rate(0.5, 0.5) == pytest.approx(1.0)
    assert majority_rate(Fraction(3, 5), Fraction(1, 2)) == pytest.approx(math.exp(-0.020136), rel=1e-5)
    assert majority_rate(0.6, 0.5) == pytest.approx(0.98007, abs=1e-5)

    with pytest.raises(ValueError):
        majority_rate(1, 0.5)
    with pytest.raises(ValueError):
        majority_rate(0, 0.5)

    # exact deltas decay at that rate once the sqrt(n) prefactor is removed
    samples = [(n, float(majority_delta_exact(Fraction(3, 5), Fraction(1, 2), n)))
               for n in range(100, 401, 5)]
    expected = math.log(majority_rate(0.6, 0.5))
    assert log_slope(samples, sqrt_n=True) == pytest.approx(expected, rel=0.05)
    assert log_slope(samples) == pytest.approx(expected, rel=0.15)

    print("✓ Majority rate working")


def test_mixture_formula():
    """The c-bin histogram pair delta is a binomial mixture of 2-bin cases"""
    print("Testing histogram mixture...")

    uniform = VoteDistribution.uniform(3)
    assert histc_delta_mixture(uniform, 4, (0, 1)) == \
        delta_exact(histogram_mechanism(3), uniform, 4, pairs=[(0, 1)]).delta

    pi = VoteDistribution((Fraction(1, 2), Fraction(1, 6), Fraction(1, 5), Fraction(2, 15)))
    for pair in ((0, 1), (3, 2), (1, 3)):
        for n in (1, 3, 6):
            assert histc_delta_mixture(pi, n, pair) == \
                delta_exact(histogram_mechanism(4), pi, n, pairs=[pair]).delta, f"pair={pair} n={n}"

    with pytest.raises(ValueError):
        histc_delta_mixture(uniform, 4, (1, 1))

    print("✓ Histogram mixture working")


def test_histogram_threshold():
    """Past (1 + 1/(p_min n))^2 the histogram's delta has dropped well below its eps = 0 value"""
    print("Testing histogram eps threshold...")

    assert histogram_eps_ratio(VoteDistribution.uniform(2), 10) == Fraction(36, 25)

    pi = VoteDistribution((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    mechanism = histogram_mechanism(3)
    for n in (10, 20):
        at_zero = delta_exact(mechanism, pi, n).delta
        at_threshold = delta_exact(mechanism, pi, n, histogram_eps_ratio(pi, n)).delta
        assert at_threshold <= at_zero / 2, f"n={n}: {at_threshold} vs {at_zero}"

    print("✓ Histogram eps threshold working")


def test_plurality_decays_exponentially():
    """Away from ties, doubling n more than squares down delta"""
    print("Testing exponential decay of plurality...")

    pi = VoteDistribution((Fraction(3, 5), Fraction(2, 5)))
    mechanism = build_mechanism("plurality", "winner", 2)
    for n in (50, 100):
        small = delta_exact(mechanism, pi, n).delta
        large = delta_exact(mechanism, pi, 2 * n).delta
        assert large / small < Fraction(7, 10), f"n={n}: ratio {float(large / small)}"

    print("✓ Exponential decay working")


def test_inverse_sqrt_fit():
    """Test the least-squares fit on synthetic and exact data"""
    print("Testing inverse-sqrt fit...")

    samples = [(n, 1 / math.sqrt(2 * n + 3)) for n in range(3, 50)]
    fit = fit_inverse_sqrt(samples, rule="synthetic", observable="winner")
    assert fit.a == pytest.approx(2.0, abs=1e-9)
    assert fit.b == pytest.approx(3.0, abs=1e-7)
    assert fit.mse == pytest.approx(0.0, abs=1e-20)
    assert (fit.n_min, fit.n_max) == (3, 49)
    assert fit.render().startswith("δ(n) = 1/sqrt(2n + 3")
    assert fit.to_json()["rendered"] == fit.render()

    exact = [(n, float(hist2_delta_closed_form(Fraction(1, 2), n))) for n in range(3, 50)]
    fit = fit_inverse_sqrt(exact)
    assert fit.a == pytest.approx(math.pi / 2, rel=0.05)

    with pytest.raises(ValueError):
        fit_inverse_sqrt([(3, 0.5)])
    with pytest.raises(ValueError):
        fit_inverse_sqrt([(3, 0.5), (4, 0.0)])

    assert log_slope([(n, math.exp(-0.1 * n)) for n in range(1, 30)]) == pytest.approx(-0.1)

    print("✓ Inverse-sqrt fit working")


def test_hyperplanes():
    """Test scoring hyperplanes, distances and the exponential bound"""
    print("Testing hyperplanes...")

    H = scoring_hyperplanes(plurality(2))
    assert H.vectors == ((1, -1),) and H.pairs == ((0, 1),)

    H = scoring_hyperplanes(borda(3))
    assert len(H) == 3
    assert all(-2 <= v <= 2 for h in H.vectors for v in h)
    assert scoring_hyperplanes([2, 1, 0], 3).vectors == H.vectors

    uniform = VoteDistribution.uniform(6)
    assert all(dist_to_hyperplane(uniform, h) == 0 for h in H.vectors)
    skewed = VoteDistribution((Fraction(1, 2),) + (Fraction(1, 10),) * 5)
    assert dist_to_hyperplane(skewed, H.vectors[0]) > 0

    assert gsr_exponential_bound(uniform, H, 3, 100) == pytest.approx(0.1)
    bound = gsr_exponential_bound(skewed, H, 3, 20000)
    assert bound < math.sqrt(1 / 20000)

    with pytest.raises(ValueError):
        dist_to_hyperplane(uniform, (0,) * 6)
    with pytest.raises(ValueError):
        gsr_exponential_bound(VoteDistribution.uniform(2), H, 3, 10)

    print("✓ Hyperplanes working")


def test_winner_no_less_private_than_score():
    """The winner is a function of the score vector, so its delta is never larger"""
    print("Testing winner vs score privacy...")

    app = VotePrivacy(jobs=None if SLOW else 1, config=load_config("/nonexistent/votepriv.json"))
    n_values = list(range(3, 21 if SLOW else 9))
    for rule in TABLE_RULES:
        winner = app.sweep(rule, "winner", 3, "uniform", n_values)
        score = app.sweep(rule, "score", 3, "uniform", n_values)
        for w, s in zip(winner, score):
            assert w.result.delta <= s.result.delta, f"{rule} n={w.task_id}"

    print("✓ Winner vs score privacy working")


def test_rule_fits_and_ranking():
    """Winner-observable fits over n in [3, 49] rank the m=3 rules"""
    if not SLOW:
        print("Skipping rule fits (set VOTEPRIV_SLOW=1)")
        return
    print("Testing rule fits...")

    app = VotePrivacy(config=load_config("/nonexistent/votepriv.json"))
    fits, _ = app.table(list(TABLE_RULES), 3, "uniform", list(range(3, 50)), observables=("winner",))
    by_rule = {fit.rule: fit for fit in fits}
    for rule, a in TABLE_RULES.items():
        assert by_rule[rule].a == pytest.approx(a, rel=0.15), f"{rule}: a={by_rule[rule].a}"
    assert [f.rule for f in sorted(fits, key=lambda f: f.a)] == list(TABLE_RULES)

    print("✓ Rule fits working")


def test_render_table():
    """Test the comparison table"""
    print("Testing table rendering...")

    fits = [
        FitResult(1.9, 0.1, 1e-6, 1e-3, 3, 49, "plurality", "winner"),
        FitResult(1.2, -0.3, 2e-6, 4e-3, 3, 49, "borda", "winner"),
        FitResult(0.9, 0.5, 2e-6, 4e-3, 3, 49, "borda", "score"),
    ]
    text = render_table(fits)
    assert "Most private first: borda < plurality" in text
    assert "δ(n) = 1/sqrt(1.2n - 0.3)" in text
    assert "MSE" in text

    print("✓ Table rendering working")


def run_all_tests():
    """Run all tests"""
    print("=" * 50)
    print("Asymptotics Test Suite")
    print("=" * 50)

    tests = [
        test_hist2_closed_form,
        test_hist2_leading_term,
        test_majority_closed_form,
        test_majority_rate,
        test_mixture_formula,
        test_histogram_threshold,
        test_plurality_decays_exponentially,
        test_inverse_sqrt_fit,
        test_hyperplanes,
        test_winner_no_less_private_than_score,
        test_rule_fits_and_ranking,
        test_render_table,
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
