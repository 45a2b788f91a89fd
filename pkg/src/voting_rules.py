"""
Generalized scoring rules and the histogram-respecting mechanisms built on them
"""

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from .prob_core import Histogram, parse_rational


MAX_CANDIDATES = 5

LinearOrder = Tuple[int, ...]


def canonical_orders(m: int) -> List[LinearOrder]:
    """All rankings of candidates 0..m-1 (position 0 = top), lexicographic"""
    if m < 1:
        raise ValueError(f"Need at least one candidate, got m={m}")
    if m > MAX_CANDIDATES:
        raise ValueError(
            f"m={m} gives {math.factorial(m)} bins; profiles are enumerated exhaustively, "
            f"so m is capped at {MAX_CANDIDATES} ({math.factorial(MAX_CANDIDATES)} bins)"
        )
    return list(itertools.permutations(range(m)))


def weak_order(scores: Sequence) -> Tuple[int, ...]:
    """Dense ranks of the components, 0 for the smallest value"""
    levels = {v: r for r, v in enumerate(sorted(set(scores)))}
    return tuple(levels[v] for v in scores)


class GsrRule:
    """Base class for rules given by per-vote score vectors f and a selector g.

    Subclasses fill the f table and implement select(), which only compares
    components, so it gives the same answer on dense ranks and on raw scores.
    """

    kind = "gsr"

    def __init__(
        self,
        name: str,
        m: int,
        f_table: Sequence[Sequence[Fraction]],
        tie_break: Optional[Sequence[int]] = None
    ):
        self.name = name
        self.m = m
        self.orders = canonical_orders(m)
        if len(f_table) != len(self.orders):
            raise ValueError(f"f table has {len(f_table)} rows, expected {len(self.orders)}")
        self.f_table = tuple(tuple(Fraction(v) for v in row) for row in f_table)
        widths = {len(row) for row in self.f_table}
        if len(widths) > 1:
            raise ValueError("f table rows differ in length")
        self.K = widths.pop() if widths else 0
        self.tie_break = self._check_tie_break(tie_break)
        self._priority = {cand: i for i, cand in enumerate(self.tie_break)}

        self.scale = 1
        for row in self.f_table:
            for v in row:
                self.scale = self.scale * v.denominator // math.gcd(self.scale, v.denominator)
        # per order, the nonzero (component, scaled value) pairs
        self._sparse = tuple(
            tuple((i, int(v * self.scale)) for i, v in enumerate(row) if v)
            for row in self.f_table
        )

    def _check_tie_break(self, tie_break: Optional[Sequence[int]]) -> Tuple[int, ...]:
        if tie_break is None:
            return tuple(range(self.m))
        order = tuple(int(c) for c in tie_break)
        if sorted(order) != list(range(self.m)):
            raise ValueError(f"Tie-break {order} is not a permutation of 0..{self.m - 1}")
        return order

    def _check_profile(self, P: Sequence[int]):
        if len(P) != len(self.orders):
            raise ValueError(f"Profile has {len(P)} bins, {self.name} needs {len(self.orders)}")

    def pick(self, candidates) -> int:
        """Resolve a tie: the candidate earliest in the tie-break priority"""
        return min(candidates, key=self._priority.__getitem__)

    def score_key(self, P: Sequence[int]) -> Tuple[int, ...]:
        """f(P) scaled to integers by the common denominator of the f table"""
        scores = [0] * self.K
        for v, count in enumerate(P):
            if count:
                for i, value in self._sparse[v]:
                    scores[i] += count * value
        return tuple(scores)

    def score(self, P: Sequence[int]) -> Tuple[Fraction, ...]:
        self._check_profile(P)
        return tuple(Fraction(s, self.scale) for s in self.score_key(P))

    def winner(self, P: Sequence[int]) -> int:
        """Fast path: select() straight on the integer scores"""
        return self.select(self.score_key(P))

    def select(self, ranks: Sequence) -> int:
        raise NotImplementedError

    def cowinner_set(self, ranks: Sequence) -> FrozenSet[int]:
        raise NotImplementedError


class PositionalRule(GsrRule):
    """Scoring-vector rule: candidate i gets s[position of i] from each vote"""

    kind = "positional"

    def __init__(
        self,
        name: str,
        s: Sequence[Fraction],
        m: int,
        tie_break: Optional[Sequence[int]] = None
    ):
        s = tuple(Fraction(v) for v in s)
        if len(s) != m:
            raise ValueError(f"Scoring vector {s} has length {len(s)}, expected m={m}")
        if any(a < b for a, b in zip(s, s[1:])):
            raise ValueError(f"Scoring vector must be non-increasing: {[str(v) for v in s]}")
        self.s = s
        table = []
        for order in canonical_orders(m):
            row = [Fraction(0)] * m
            for position, cand in enumerate(order):
                row[cand] = s[position]
            table.append(row)
        super().__init__(name, m, table, tie_break)

    def select(self, ranks: Sequence) -> int:
        return self.pick(self.cowinner_set(ranks))

    def cowinner_set(self, ranks: Sequence) -> FrozenSet[int]:
        best = max(ranks)
        return frozenset(i for i, r in enumerate(ranks) if r == best)


class StvRule(GsrRule):
    """Single transferable vote (instant runoff).

    Component (A, j) counts the votes whose top choice outside A is j. Each
    round eliminates the remaining candidate with the fewest top placements;
    ties eliminate the candidate earliest in the tie-break priority
    (the lowest index by default).
    """

    kind = "stv"

    def __init__(self, m: int, tie_break: Optional[Sequence[int]] = None):
        self.components: List[Tuple[FrozenSet[int], int]] = []
        for size in range(m):
            for removed in itertools.combinations(range(m), size):
                for j in range(m):
                    if j not in removed:
                        self.components.append((frozenset(removed), j))
        self.index = {comp: i for i, comp in enumerate(self.components)}
        table = []
        for order in canonical_orders(m):
            row = [Fraction(0)] * len(self.components)
            for i, (removed, j) in enumerate(self.components):
                top = next(c for c in order if c not in removed)
                if top == j:
                    row[i] = Fraction(1)
            table.append(row)
        super().__init__("stv", m, table, tie_break)

    def _round_counts(self, ranks: Sequence, eliminated: FrozenSet[int]) -> Dict[int, int]:
        return {
            j: ranks[self.index[(eliminated, j)]]
            for j in range(self.m) if j not in eliminated
        }

    def select(self, ranks: Sequence) -> int:
        eliminated = frozenset()
        while len(eliminated) < self.m - 1:
            counts = self._round_counts(ranks, eliminated)
            low = min(counts.values())
            losers = [j for j, v in counts.items() if v == low]
            loser = min(losers, key=self._priority.__getitem__)
            eliminated = eliminated | {loser}
        return next(j for j in range(self.m) if j not in eliminated)

    def cowinner_set(self, ranks: Sequence) -> FrozenSet[int]:
        """Winners over every way of resolving elimination ties"""
        winners = set()
        frontier = {frozenset()}
        while frontier:
            eliminated = frontier.pop()
            if len(eliminated) == self.m - 1:
                winners.update(j for j in range(self.m) if j not in eliminated)
                continue
            counts = self._round_counts(ranks, eliminated)
            low = min(counts.values())
            for j, v in counts.items():
                if v == low:
                    frontier.add(eliminated | {j})
        return frozenset(winners)


class PairwiseRule(GsrRule):
    """Rules over N(a, b) = #votes ranking a above b, one component per ordered pair"""

    def __init__(self, name: str, m: int, tie_break: Optional[Sequence[int]] = None):
        if m < 2:
            raise ValueError(f"{name} needs at least two candidates")
        self.pairs = [(a, b) for a in range(m) for b in range(m) if a != b]
        self.index = {pair: i for i, pair in enumerate(self.pairs)}
        table = []
        for order in canonical_orders(m):
            position = {cand: p for p, cand in enumerate(order)}
            table.append([
                Fraction(1) if position[a] < position[b] else Fraction(0)
                for a, b in self.pairs
            ])
        super().__init__(name, m, table, tie_break)

    def candidate_scores(self, ranks: Sequence) -> List:
        raise NotImplementedError

    def select(self, ranks: Sequence) -> int:
        return self.pick(self.cowinner_set(ranks))

    def cowinner_set(self, ranks: Sequence) -> FrozenSet[int]:
        scores = self.candidate_scores(ranks)
        best = max(scores)
        return frozenset(a for a, v in enumerate(scores) if v == best)


class MaximinRule(PairwiseRule):
    kind = "maximin"

    def __init__(self, m: int, tie_break: Optional[Sequence[int]] = None):
        super().__init__("maximin", m, tie_break)

    def candidate_scores(self, ranks: Sequence) -> List:
        return [
            min(ranks[self.index[(a, b)]] for b in range(self.m) if b != a)
            for a in range(self.m)
        ]


class CopelandRule(PairwiseRule):
    """Copeland score doubled: 2 per pairwise win, 1 per pairwise tie"""

    kind = "copeland"

    def __init__(self, m: int, tie_break: Optional[Sequence[int]] = None):
        super().__init__("copeland", m, tie_break)

    def candidate_scores(self, ranks: Sequence) -> List:
        scores = []
        for a in range(self.m):
            total = 0
            for b in range(self.m):
                if a == b:
                    continue
                ab, ba = ranks[self.index[(a, b)]], ranks[self.index[(b, a)]]
                total += 2 if ab > ba else (1 if ab == ba else 0)
            scores.append(total)
        return scores


def positional_rule(s: Sequence[Fraction], m: int, name: str = "positional",
                    tie_break: Optional[Sequence[int]] = None) -> PositionalRule:
    return PositionalRule(name, s, m, tie_break)


def plurality(m: int, tie_break: Optional[Sequence[int]] = None) -> PositionalRule:
    return PositionalRule("plurality", [1] + [0] * (m - 1), m, tie_break)


def k_approval(k: int, m: int, tie_break: Optional[Sequence[int]] = None) -> PositionalRule:
    if not 1 <= k <= m:
        raise ValueError(f"k-approval needs 1 <= k <= m, got k={k}, m={m}")
    return PositionalRule(f"{k}-approval", [1] * k + [0] * (m - k), m, tie_break)


def veto(m: int, tie_break: Optional[Sequence[int]] = None) -> PositionalRule:
    return PositionalRule("veto", [1] * (m - 1) + [0], m, tie_break)


def borda(m: int, tie_break: Optional[Sequence[int]] = None) -> PositionalRule:
    return PositionalRule("borda", list(range(m - 1, -1, -1)), m, tie_break)


def stv_rule(m: int, tie_break: Optional[Sequence[int]] = None) -> StvRule:
    return StvRule(m, tie_break)


def maximin_rule(m: int, tie_break: Optional[Sequence[int]] = None) -> MaximinRule:
    return MaximinRule(m, tie_break)


def copeland_rule(m: int, tie_break: Optional[Sequence[int]] = None) -> CopelandRule:
    return CopelandRule(m, tie_break)


def gsr_score(rule: GsrRule, P: Sequence[int]) -> Tuple[Fraction, ...]:
    """f(P) = sum over orders V of P[V] * f(V)"""
    return rule.score(P)


def gsr_winner(rule: GsrRule, P: Sequence[int]) -> int:
    """g(Ord(f(P)))"""
    return rule.select(weak_order(gsr_score(rule, P)))


def cowinners(rule: GsrRule, P: Sequence[int]) -> FrozenSet[int]:
    """Winner set before the tie-break is applied"""
    return rule.cowinner_set(weak_order(gsr_score(rule, P)))


def stv_winner(P: Sequence[int], m: int, tie_break: Optional[Sequence[int]] = None) -> int:
    return stv_rule(m, tie_break).winner(P)


def maximin_winner(P: Sequence[int], m: int, tie_break: Optional[Sequence[int]] = None) -> int:
    return maximin_rule(m, tie_break).winner(P)


def copeland_winner(P: Sequence[int], m: int, tie_break: Optional[Sequence[int]] = None) -> int:
    return copeland_rule(m, tie_break).winner(P)


def alpha_majority(alpha: Fraction, t: Sequence[int]) -> int:
    """0 (first value) iff at least alpha*n rows hold the first value, else 1"""
    if len(t) != 2:
        raise ValueError(f"alpha-majority is defined on 2 bins, got {len(t)}")
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    return 0 if t[0] >= alpha * sum(t) else 1


_APPROVAL = re.compile(r"^(?:k-?approval:(\d+)|(\d+)-approval)$")


def parse_rule(name: str, m: int, tie_break: Optional[Sequence[int]] = None) -> GsrRule:
    """Build a rule from plurality | kapproval:k | k-approval | veto | borda |
    stv | maximin | copeland | "s1,...,sm" """
    key = name.strip().lower()
    if key == "plurality":
        return plurality(m, tie_break)
    if key == "veto":
        return veto(m, tie_break)
    if key == "borda":
        return borda(m, tie_break)
    if key == "stv":
        return stv_rule(m, tie_break)
    if key == "maximin":
        return maximin_rule(m, tie_break)
    if key == "copeland":
        return copeland_rule(m, tie_break)
    match = _APPROVAL.match(key)
    if match:
        return k_approval(int(match.group(1) or match.group(2)), m, tie_break)
    if ',' in key:
        s = [parse_rational(part) for part in key.split(',')]
        return positional_rule(s, m, name=f"positional[{key}]", tie_break=tie_break)
    raise ValueError(f"Unknown rule: {name!r}")


@dataclass
class MechanismSpec:
    """Deterministic map from histograms over c bins to output labels"""
    name: str
    c: int
    label_fn: Callable[[Histogram], Hashable]
    outputs: Optional[Tuple[Hashable, ...]] = None

    def __call__(self, t: Histogram) -> Hashable:
        return self.label_fn(t)


def histogram_mechanism(c: int) -> MechanismSpec:
    return MechanismSpec(f"histogram[{c}]", c, lambda t: tuple(t))


def gsr_winner_mechanism(rule: GsrRule) -> MechanismSpec:
    return MechanismSpec(
        f"{rule.name}/winner", len(rule.orders), rule.winner, tuple(range(rule.m))
    )


def gsr_score_mechanism(rule: GsrRule) -> MechanismSpec:
    """Labels are f(P) scaled to integers; equal labels iff equal score vectors"""
    return MechanismSpec(f"{rule.name}/score", len(rule.orders), rule.score_key)


def alpha_majority_mechanism(alpha: Fraction) -> MechanismSpec:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    return MechanismSpec(
        f"majority[{alpha}]", 2, lambda t: alpha_majority(alpha, t), (0, 1)
    )


def table_mechanism(table: Dict[Histogram, Hashable], c: int, name: str = "table") -> MechanismSpec:
    lookup = {tuple(t): label for t, label in table.items()}

    def label_fn(t: Histogram) -> Hashable:
        try:
            return lookup[tuple(t)]
        except KeyError:
            raise ValueError(f"Mechanism table '{name}' has no entry for histogram {tuple(t)}")

    return MechanismSpec(name, c, label_fn, tuple(sorted(set(lookup.values()), key=repr)))


def constant_mechanism(c: int, label: Hashable = 0) -> MechanismSpec:
    return MechanismSpec(f"constant[{label}]", c, lambda t: label, (label,))


OBSERVABLES = ("winner", "score", "histogram")


def build_mechanism(
    rule_name: str,
    observable: str,
    m: int,
    alpha: Optional[Fraction] = None,
    c: Optional[int] = None,
    tie_break: Optional[Sequence[int]] = None
) -> MechanismSpec:
    """Resolve CLI-level names into a mechanism over the right number of bins"""
    if observable not in OBSERVABLES:
        raise ValueError(f"Unknown observable {observable!r}; expected one of {OBSERVABLES}")
    if observable == "histogram":
        return histogram_mechanism(c if c is not None else math.factorial(m))
    if rule_name.strip().lower() == "majority":
        if m != 2:
            raise ValueError(f"majority is a two-candidate rule, got m={m}")
        if observable != "winner":
            raise ValueError("majority only supports the winner observable")
        return alpha_majority_mechanism(Fraction(1, 2) if alpha is None else alpha)
    rule = parse_rule(rule_name, m, tie_break)
    if observable == "winner":
        return gsr_winner_mechanism(rule)
    return gsr_score_mechanism(rule)
