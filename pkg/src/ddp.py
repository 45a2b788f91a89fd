"""
Exact distributional-DP engines for histogram-respecting mechanisms
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple, Union

from .histograms import Direction, histogram_set_for_outputs, partition_into_trails
from .prob_core import (
    ConditionalTable,
    VoteDistribution,
    cond_hist_prob,
    conditional_output_table,
    format_rational,
)
from .voting_rules import MechanismSpec


DEFAULT_MAX_DATABASES = 10 ** 7


class SizeGuardError(RuntimeError):
    """Brute-force enumeration would exceed the configured database budget"""


@dataclass
class DeltaResult:
    """Exact delta at ratio r = e^eps with its maximizing pair and output set.

    x and x_prime are 0-based bins; serialized forms use 1-based bin numbers.
    """
    delta: Fraction
    eps_ratio: Fraction
    n: int
    x: Optional[int] = None
    x_prime: Optional[int] = None
    witness: FrozenSet[Hashable] = field(default_factory=frozenset)
    definition: str = "alternative"

    @property
    def float_delta(self) -> float:
        return float(self.delta)

    @property
    def epsilon(self) -> float:
        return math.log(self.eps_ratio)

    def to_json(self, rule: Optional[str] = None, observable: Optional[str] = None) -> Dict:
        return {
            "n": self.n,
            "rule": rule,
            "observable": observable,
            "eps_ratio": format_rational(self.eps_ratio),
            "epsilon": self.epsilon,
            "delta": format_rational(self.delta),
            "delta_float": self.float_delta,
            "x": None if self.x is None else self.x + 1,
            "xprime": None if self.x_prime is None else self.x_prime + 1,
            "witness_size": len(self.witness),
            "definition": self.definition,
        }

    def to_csv_row(self, rule: str, observable: str) -> List[str]:
        return [
            str(self.n),
            rule,
            observable,
            format_rational(self.eps_ratio),
            str(self.delta.numerator),
            str(self.delta.denominator),
            repr(self.float_delta),
            "" if self.x is None else str(self.x + 1),
            "" if self.x_prime is None else str(self.x_prime + 1),
        ]


CSV_HEADER = ["n", "rule", "observable", "eps_ratio", "delta_num", "delta_den",
              "delta_float", "x", "xprime"]


def _check_inputs(M: MechanismSpec, pi: VoteDistribution, n: int, eps_ratio: Fraction) -> Fraction:
    if M.c != pi.c:
        raise ValueError(f"Mechanism '{M.name}' expects {M.c} bins, distribution has {pi.c}")
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    eps_ratio = Fraction(eps_ratio)
    if eps_ratio < 1:
        raise ValueError(f"eps_ratio must be >= 1, got {eps_ratio}")
    if len(pi.support()) < 2:
        raise ValueError("Need at least two values with positive probability")
    return eps_ratio


def _ordered_pairs(pi: VoteDistribution, pairs: Optional[Sequence[Tuple[int, int]]]) -> List[Tuple[int, int]]:
    support = pi.support()
    if pairs is None:
        return [(x, xp) for x in support for xp in support if x != xp]
    checked = []
    for x, xp in pairs:
        if x == xp or x not in support or xp not in support:
            raise ValueError(f"Pair ({x}, {xp}) must be two distinct supported bins")
        checked.append((x, xp))
    return checked


def output_distribution(M: MechanismSpec, pi: VoteDistribution, n: int, x: int) -> Dict[Hashable, Fraction]:
    """Pr(M(X) = o | X_1 = x) for every reachable output o"""
    _check_inputs(M, pi, n, Fraction(1))
    if not 0 <= x < pi.c:
        raise ValueError(f"Bin index {x} out of range for c={pi.c}")
    if pi[x] == 0:
        raise ValueError(f"Cannot condition on bin {x}: zero probability")
    return conditional_output_table(M.label_fn, pi, n).distribution(x)


def pair_delta(table: ConditionalTable, x: int, x_prime: int, eps_ratio: Fraction) -> Tuple[Fraction, FrozenSet]:
    """sum_o max(0, P_x(o) - r P_x'(o)) in integer arithmetic, plus the positive set"""
    u, v = eps_ratio.numerator, eps_ratio.denominator
    a = table.weights
    left, right = v * a[x_prime], u * a[x]
    total = 0
    witness = []
    for label, row in table.masses.items():
        diff = left * row[x] - right * row[x_prime]
        if diff > 0:
            total += diff
            witness.append(label)
    scale = v * a[x] * a[x_prime] * table.n * table.scale ** (table.n - 1)
    return Fraction(total, scale), frozenset(witness)


def delta_from_table(
    table: ConditionalTable,
    eps_ratio: Fraction,
    pairs: Optional[Sequence[Tuple[int, int]]] = None
) -> DeltaResult:
    best = None
    for x, xp in _ordered_pairs(table.pi, pairs):
        value, witness = pair_delta(table, x, xp, eps_ratio)
        if best is None or value > best.delta:
            best = DeltaResult(value, eps_ratio, table.n, x, xp, witness)
    return best


def delta_exact(
    M: MechanismSpec,
    pi: VoteDistribution,
    n: int,
    eps_ratio: Fraction = Fraction(1),
    pairs: Optional[Sequence[Tuple[int, int]]] = None
) -> DeltaResult:
    """Smallest delta such that M is (ln r, delta)-DDP under i.i.d. rows.

    The worst output set for an ordered pair (x, x') is exactly the outputs
    with P_x(o) > r P_x'(o), so delta is a sum of positive parts maximized
    over pairs. The first maximizing pair in (x, x') order is reported.
    """
    eps_ratio = _check_inputs(M, pi, n, eps_ratio)
    table = conditional_output_table(M.label_fn, pi, n)
    return delta_from_table(table, eps_ratio, pairs)


def _delta_from_distributions(
    dists: Dict[int, Dict[Hashable, Fraction]],
    eps_ratio: Fraction,
    n: int,
    definition: str = "alternative"
) -> DeltaResult:
    best = None
    for x, xp in itertools.permutations(sorted(dists), 2):
        labels = set(dists[x]) | set(dists[xp])
        value = Fraction(0)
        witness = []
        for o in labels:
            diff = dists[x].get(o, Fraction(0)) - eps_ratio * dists[xp].get(o, Fraction(0))
            if diff > 0:
                value += diff
                witness.append(o)
        if best is None or value > best.delta:
            best = DeltaResult(value, eps_ratio, n, x, xp, frozenset(witness), definition)
    return best


def delta_bruteforce_db(
    M: MechanismSpec,
    pi: VoteDistribution,
    n: int,
    eps_ratio: Fraction = Fraction(1),
    row_index: int = 0,
    max_databases: int = DEFAULT_MAX_DATABASES
) -> DeltaResult:
    """Reference oracle: walk every database instead of every histogram"""
    eps_ratio = _check_inputs(M, pi, n, eps_ratio)
    c = pi.c
    if c ** n > max_databases:
        raise SizeGuardError(f"{c}^{n} = {c ** n} databases exceeds the limit of {max_databases}")
    if not 0 <= row_index < n:
        raise ValueError(f"row_index {row_index} outside [0, {n})")

    dists: Dict[int, Dict[Hashable, Fraction]] = {}
    for x in pi.support():
        dist: Dict[Hashable, Fraction] = {}
        for rest in itertools.product(range(c), repeat=n - 1):
            prob = Fraction(1)
            for v in rest:
                prob *= pi[v]
            if prob == 0:
                continue
            db = rest[:row_index] + (x,) + rest[row_index:]
            hist = [0] * c
            for v in db:
                hist[v] += 1
            label = M(tuple(hist))
            dist[label] = dist.get(label, Fraction(0)) + prob
        dists[x] = dist
    return _delta_from_distributions(dists, eps_ratio, n)


def delta_via_trails(M: MechanismSpec, pi: VoteDistribution, n: int, d: Direction) -> DeltaResult:
    """Pair (j, k) delta at r = 1, summed as exit-minus-entry over (j,k)-trails"""
    _check_inputs(M, pi, n, Fraction(1))
    d.check_bins(pi.c)
    if pi[d.j] == 0 or pi[d.k] == 0:
        raise ValueError(f"Direction ({d.j}, {d.k}) needs both bins in the support")
    table = conditional_output_table(M.label_fn, pi, n)
    _, witness = pair_delta(table, d.j, d.k, Fraction(1))
    region = histogram_set_for_outputs(M.label_fn, n, pi.c, witness)
    trails = partition_into_trails(region, d)
    delta = Fraction(0)
    for trail in trails:
        delta += cond_hist_prob(trail.exit, d.j, pi) - cond_hist_prob(trail.entry, d.k, pi)
    logging.debug(f"{M.name}: n={n} pair ({d.j},{d.k}) used {len(trails)} trails over {len(region)} histograms")
    return DeltaResult(delta, Fraction(1), n, d.j, d.k, witness, "trails")


def simulator_ddp_min_delta(
    M: MechanismSpec,
    pi: VoteDistribution,
    n: int,
    eps_ratio: Fraction = Fraction(1)
) -> Fraction:
    """Smallest delta achieved by a simulator that guesses x' for the hidden row.

    Such a simulator outputs P_x' whatever the true row is, so it must be
    (r, delta)-close to P_x in both directions for every supported x.
    """
    eps_ratio = _check_inputs(M, pi, n, eps_ratio)
    table = conditional_output_table(M.label_fn, pi, n)
    support = pi.support()
    best = None
    for guess in support:
        worst = Fraction(0)
        for x in support:
            if x == guess:
                continue
            forward, _ = pair_delta(table, x, guess, eps_ratio)
            backward, _ = pair_delta(table, guess, x, eps_ratio)
            worst = max(worst, forward, backward)
        if best is None or worst < best:
            best = worst
    return best


def postprocess(M: MechanismSpec, f: Union[Dict[Hashable, Hashable], Callable[[Hashable], Hashable]],
                name: Optional[str] = None) -> MechanismSpec:
    """f composed with M; a dict must cover M's whole declared output alphabet"""
    if callable(f):
        fn = f
        outputs = None if M.outputs is None else tuple(dict.fromkeys(fn(o) for o in M.outputs))
    else:
        mapping = dict(f)
        if M.outputs is not None:
            missing = [o for o in M.outputs if o not in mapping]
            if missing:
                raise ValueError(f"Post-processing map is partial: no image for {missing[:5]}")
        outputs = None if M.outputs is None else tuple(dict.fromkeys(mapping[o] for o in M.outputs))

        def fn(o):
            try:
                return mapping[o]
            except KeyError:
                raise ValueError(f"Post-processing map is partial: no image for {o!r}")

    label_fn = M.label_fn
    return MechanismSpec(name or f"post({M.name})", M.c, lambda t: fn(label_fn(t)), outputs)


def eps_delta_curve(
    M: MechanismSpec,
    pi: VoteDistribution,
    n: int,
    ratios: Sequence[Fraction]
) -> List[Tuple[Fraction, Fraction]]:
    """delta at each ratio, sharing one enumeration pass"""
    checked = [_check_inputs(M, pi, n, r) for r in ratios]
    table = conditional_output_table(M.label_fn, pi, n)
    return [(r, delta_from_table(table, r).delta) for r in checked]
