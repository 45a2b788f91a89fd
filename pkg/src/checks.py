"""
Invariant suites - randomized exact-arithmetic checks behind the `check` command
"""

import logging
import random
import sys
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, TextIO, Tuple

from .asymptotics import (
    hist2_delta_closed_form,
    histc_delta_mixture,
    histogram_eps_ratio,
    majority_delta_exact,
)
from .ddp import (
    delta_bruteforce_db,
    delta_exact,
    delta_via_trails,
    eps_delta_curve,
    postprocess,
    simulator_ddp_min_delta,
)
from .dp_mechanisms import exact_dp_ratio, truncated_geometric, utility
from .histograms import Direction, Trail, partition_into_trails, trail_points, trail_theorem_sides
from .prob_core import VoteDistribution, enumerate_histograms
from .voting_rules import (
    alpha_majority_mechanism,
    gsr_score_mechanism,
    gsr_winner_mechanism,
    histogram_mechanism,
    parse_rule,
    table_mechanism,
)


SUITES = ("trails", "oracle", "postprocess", "lemma1", "geom", "bounds")

DEFAULT_CASES = {
    "trails": 1000,
    "oracle": 50,
    "postprocess": 200,
    "lemma1": 100,
    "geom": 1,
    "bounds": 100,
}

RULES_M3 = ("plurality", "2-approval", "borda", "stv", "maximin")


def random_distribution(rng: random.Random, c: int, allow_zero: bool = True) -> VoteDistribution:
    """Random rational distribution with small denominators"""
    while True:
        low = 0 if allow_zero else 1
        weights = [rng.randint(low, 9) for _ in range(c)]
        if sum(1 for w in weights if w > 0) >= 2:
            total = sum(weights)
            return VoteDistribution(tuple(Fraction(w, total) for w in weights))


def random_histogram(rng: random.Random, n: int, c: int) -> Tuple[int, ...]:
    cuts = sorted(rng.randint(0, n) for _ in range(c - 1))
    bounds = [0] + cuts + [n]
    return tuple(bounds[i + 1] - bounds[i] for i in range(c))


class InvariantSuites:
    """Randomized invariant checks with exact discrepancies on failure"""

    def __init__(self, seed: int = 42, cases: Optional[Dict[str, int]] = None,
                 n_max: Optional[int] = None, stream: TextIO = None):
        self.seed = seed
        self.cases = dict(DEFAULT_CASES)
        self.cases.update(cases or {})
        self.n_max = n_max
        self.stream = stream or sys.stdout
        self.test_results: List[Dict] = []

    def run(self, suite: str) -> bool:
        """Run one suite or 'all'; True iff every case passed"""
        if suite == "all":
            names = list(SUITES)
        elif suite in SUITES:
            names = [suite]
        else:
            raise ValueError(f"Unknown suite {suite!r}; expected one of {SUITES + ('all',)}")

        suite_methods: Dict[str, Callable[[random.Random], None]] = {
            "trails": self.check_trails,
            "oracle": self.check_oracle,
            "postprocess": self.check_postprocess,
            "lemma1": self.check_lemma1,
            "geom": self.check_geom,
            "bounds": self.check_bounds,
        }
        ok = True
        for name in names:
            rng = random.Random(f"{self.seed}:{name}")
            start = time.time()
            before = len(self.test_results)
            try:
                suite_methods[name](rng)
            except Exception as e:
                self._record(name, "suite", "error", f"{type(e).__name__}: {e}")
            results = self.test_results[before:]
            failed = [r for r in results if r['status'] != 'pass']
            ok = ok and not failed
            logging.info(f"Suite {name}: {len(results) - len(failed)}/{len(results)} passed "
                         f"in {time.time() - start:.1f}s")
        return ok

    def _record(self, suite: str, test: str, status: str, details: str = ""):
        self.test_results.append({'suite': suite, 'test': test, 'status': status, 'details': details})

    def _expect_equal(self, suite: str, test: str, left: Fraction, right: Fraction):
        if left == right:
            self._record(suite, test, 'pass')
        else:
            self._record(suite, test, 'fail', f"{left} != {right} (difference {left - right})")

    def _expect_at_most(self, suite: str, test: str, left: Fraction, right: Fraction):
        if left <= right:
            self._record(suite, test, 'pass')
        else:
            self._record(suite, test, 'fail', f"{left} > {right} (excess {left - right})")

    def check_trails(self, rng: random.Random):
        """Trail identity on random trails, then partition soundness"""
        for case in range(self.cases["trails"]):
            c = rng.randint(2, 4)
            n = rng.randint(1, 12)
            pi = random_distribution(rng, c)
            j, k = rng.sample(range(c), 2)
            entry = random_histogram(rng, n, c)
            q = rng.randint(0, entry[j])
            trail = Trail(entry, Direction(j, k), q)
            lhs, rhs = trail_theorem_sides(trail, pi)
            self._expect_equal("trails", f"identity #{case} {trail.to_json()} pi={pi.render()}", lhs, rhs)

        for case in range(max(1, self.cases["trails"] // 20)):
            c = rng.randint(2, 4)
            n = rng.randint(0, 8)
            universe = list(enumerate_histograms(n, c))
            region = {t for t in universe if rng.random() < 0.5}
            d = Direction(*rng.sample(range(c), 2))
            trails = partition_into_trails(region, d)
            covered = [t for trail in trails for t in trail_points(trail)]
            sound = len(covered) == len(set(covered)) and set(covered) == region
            maximal = all(
                trail.point(-1) not in region and trail.point(trail.length + 1) not in region
                for trail in trails
            )
            status = 'pass' if sound and maximal else 'fail'
            self._record("trails", f"partition #{case} n={n} c={c} d=({d.j},{d.k})", status,
                         "" if status == 'pass' else f"sound={sound} maximal={maximal}")

    def _oracle_case(self, label: str, mechanism, pi, n, row_index: int = 0):
        exact = delta_exact(mechanism, pi, n).delta
        oracle = delta_bruteforce_db(mechanism, pi, n, row_index=row_index).delta
        self._expect_equal("oracle", label, exact, oracle)

    def check_oracle(self, rng: random.Random):
        """Histogram enumeration against database enumeration"""
        n_max = self.n_max or 8
        for c in (2, 3):
            for n in range(1, n_max + 1):
                pi = random_distribution(rng, c)
                self._oracle_case(f"histogram c={c} n={n} pi={pi.render()}", histogram_mechanism(c), pi, n)

        for n in range(1, n_max + 1):
            alpha = Fraction(rng.randint(0, 10), 10)
            pi = random_distribution(rng, 2, allow_zero=False)
            self._oracle_case(f"majority alpha={alpha} n={n} pi={pi.render()}",
                              alpha_majority_mechanism(alpha), pi, n)

        uniform = VoteDistribution.uniform(6)
        for name in RULES_M3:
            rule = parse_rule(name, 3)
            for n in range(1, min(n_max, 6) + 1):
                for mechanism in (gsr_winner_mechanism(rule), gsr_score_mechanism(rule)):
                    self._oracle_case(f"{mechanism.name} n={n}", mechanism, uniform, n)

        # i.i.d. rows: which row is conditioned on must not matter
        for case in range(self.cases["oracle"]):
            c = rng.randint(2, 3)
            n = rng.randint(2, 6 if c == 2 else 5)
            pi = random_distribution(rng, c)
            mechanism = histogram_mechanism(c)
            first = delta_bruteforce_db(mechanism, pi, n, row_index=0).delta
            last = delta_bruteforce_db(mechanism, pi, n, row_index=n - 1).delta
            self._expect_equal("oracle", f"row symmetry #{case} c={c} n={n}", first, last)

    def check_postprocess(self, rng: random.Random):
        """delta(f . M) <= delta(M) for random output maps"""
        for case in range(self.cases["postprocess"]):
            c = rng.randint(2, 3)
            n = rng.randint(1, 6)
            pi = random_distribution(rng, c)
            mechanism = histogram_mechanism(c)
            outputs = list(enumerate_histograms(n, c))
            images = rng.randint(1, len(outputs))
            f = {t: rng.randrange(images) for t in outputs}
            base = delta_exact(mechanism, pi, n).delta
            processed = delta_exact(postprocess(mechanism, f), pi, n).delta
            self._expect_at_most("postprocess", f"#{case} c={c} n={n} images={images}", processed, base)

    def check_lemma1(self, rng: random.Random):
        """Simulator and alternative definitions bound each other"""
        for case in range(self.cases["lemma1"]):
            c = rng.randint(2, 3)
            n = rng.randint(1, 5)
            pi = random_distribution(rng, c)
            labels = rng.randint(2, 4)
            table = {t: rng.randrange(labels) for t in enumerate_histograms(n, c)}
            mechanism = table_mechanism(table, c, name=f"random#{case}")
            r = 1 + Fraction(rng.randint(0, 8), rng.randint(1, 8))
            alternative = delta_exact(mechanism, pi, n, r).delta
            simulator = simulator_ddp_min_delta(mechanism, pi, n, r)
            self._expect_at_most("lemma1", f"#{case} simulator <= alternative r={r}", simulator, alternative)
            squared = delta_exact(mechanism, pi, n, r * r).delta
            self._expect_at_most("lemma1", f"#{case} alternative(r^2) <= (1+r) simulator r={r}",
                                 squared, (1 + r) * simulator)

    def check_geom(self, rng: random.Random):
        """Truncated geometric: ratio exactly 1/alpha, utility monotone in alpha"""
        for alpha in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)):
            for n in (2, 5, 10):
                ratio = exact_dp_ratio(truncated_geometric(alpha, n))
                self._expect_equal("geom", f"ratio alpha={alpha} n={n}", ratio, 1 / alpha)

        gamma = Fraction(1, 10)
        alphas = (Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))
        utilities = [utility(truncated_geometric(a, 5), gamma) for a in alphas]
        for (a1, u1), (a2, u2) in zip(zip(alphas, utilities), zip(alphas[1:], utilities[1:])):
            status = 'pass' if u1 < u2 else 'fail'
            self._record("geom", f"utility alpha {a1} -> {a2}", status,
                         "" if status == 'pass' else f"{u1} >= {u2} (difference {u1 - u2})")

    def check_bounds(self, rng: random.Random):
        """Closed forms and the trail engine against enumeration"""
        n_max = self.n_max or 40
        for case in range(self.cases["bounds"]):
            den = rng.randint(2, 12)
            p = Fraction(rng.randint(1, den - 1), den)
            n = rng.randint(1, n_max)
            pi = VoteDistribution((p, 1 - p))
            self._expect_equal("bounds", f"hist2 p={p} n={n}",
                               hist2_delta_closed_form(p, n), delta_exact(histogram_mechanism(2), pi, n).delta)

            alpha = Fraction(rng.randint(0, 10), 10)
            self._expect_equal("bounds", f"majority alpha={alpha} p={p} n={n}",
                               majority_delta_exact(alpha, p, n),
                               delta_exact(alpha_majority_mechanism(alpha), pi, n).delta)

        for c in (3, 4):
            for n in range(1, min(n_max, 25) + 1, 3):
                pi = random_distribution(rng, c, allow_zero=False)
                j, k = rng.sample(range(c), 2)
                restricted = delta_exact(histogram_mechanism(c), pi, n, pairs=[(j, k)]).delta
                self._expect_equal("bounds", f"mixture c={c} n={n} pair=({j},{k})",
                                   histc_delta_mixture(pi, n, (j, k)), restricted)

        for n in range(1, min(n_max, 30) + 1, 4):
            p = Fraction(rng.randint(1, 9), 10)
            pi = VoteDistribution((p, 1 - p))
            for mechanism in (alpha_majority_mechanism(Fraction(1, 2)), histogram_mechanism(2)):
                for j, k in ((0, 1), (1, 0)):
                    restricted = delta_exact(mechanism, pi, n, pairs=[(j, k)]).delta
                    via_trails = delta_via_trails(mechanism, pi, n, Direction(j, k)).delta
                    self._expect_equal("bounds", f"trails {mechanism.name} n={n} pair=({j},{k})",
                                       via_trails, restricted)

        pi = VoteDistribution((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
        for n in (10, 20, 30):
            threshold = histogram_eps_ratio(pi, n)
            ratios = [Fraction(1), Fraction(11, 10), Fraction(3, 2), threshold, Fraction(4)]
            curve = eps_delta_curve(histogram_mechanism(3), pi, n, sorted(ratios))
            deltas = [d for _, d in curve]
            monotone = all(a >= b for a, b in zip(deltas, deltas[1:]))
            self._record("bounds", f"eps curve monotone n={n}", 'pass' if monotone else 'fail',
                         "" if monotone else f"deltas {[str(d) for d in deltas]}")
            at_threshold = dict(curve)[threshold]
            self._expect_at_most("bounds", f"delta at histogram threshold n={n}", at_threshold, deltas[0] / 2)

    def print_summary(self):
        """Write the pass/fail report"""
        out = self.stream
        total = len(self.test_results)
        passed = len([r for r in self.test_results if r['status'] == 'pass'])
        failed = len([r for r in self.test_results if r['status'] == 'fail'])
        errors = len([r for r in self.test_results if r['status'] == 'error'])

        for result in self.test_results:
            if result['status'] != 'pass':
                print(f"FAIL [{result['suite']}] {result['test']}: {result['details']}", file=out)

        print(f"checks: {total} total, {passed} passed, {failed} failed, {errors} errors", file=out)

