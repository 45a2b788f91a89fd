"""
Closed forms, leading-order terms, hyperplane bounds and the inverse-sqrt fit
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .prob_core import VoteDistribution, binomial_pmf
from .voting_rules import PositionalRule, canonical_orders, positional_rule


def hist2_delta_closed_form(p: Fraction, n: int) -> Fraction:
    """Exact r = 1 delta of the 2-bin histogram with Pr(first bin) = p.

    The worst set is {t : t_1 > pn}, one trail from (n, 0) down to
    (floor(pn) + 1, ...), so delta is the probability that the n-1 free
    rows put exactly floor(pn) rows in the first bin.
    """
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    k = math.floor(p * n)
    return binomial_pmf(k, n - 1, p)


def majority_delta_exact(alpha: Fraction, p: Fraction, n: int) -> Fraction:
    """Exact r = 1 delta of alpha-majority with Pr(first value) = p.

    The first value wins on the trail from (n, 0) to (k0, n - k0) with
    k0 = ceil(alpha n); only its exit contributes.
    """
    alpha, p = Fraction(alpha), Fraction(p)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    k0 = math.ceil(alpha * n)
    if k0 < 1:
        return Fraction(0)
    return binomial_pmf(k0 - 1, n - 1, p)


def majority_rate(alpha: Union[Fraction, float], p: Union[Fraction, float]) -> float:
    """Per-row geometric decay (p/alpha)^alpha ((1-p)/(1-alpha))^(1-alpha)"""
    alpha, p = float(alpha), float(p)
    if alpha <= 0 or alpha >= 1:
        raise ValueError(f"alpha={alpha} must lie strictly inside (0, 1); use majority_delta_exact")
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie strictly between 0 and 1")
    return math.exp(alpha * math.log(p / alpha) + (1 - alpha) * math.log((1 - p) / (1 - alpha)))


def stirling_hist2_delta(p: Union[Fraction, float], n: int) -> float:
    """Leading term 1/sqrt(2 pi p(1-p) n) of the 2-bin histogram delta"""
    p = float(p)
    return 1.0 / math.sqrt(2 * math.pi * p * (1 - p) * n)


def histogram_eps_ratio(pi: VoteDistribution, n: int) -> Fraction:
    """(1 + 1/(p_min n))^2, the ratio past which the histogram's delta decays"""
    return (1 + 1 / (pi.p_min() * n)) ** 2


def histc_delta_mixture(pi: VoteDistribution, n: int, pair: Tuple[int, int]) -> Fraction:
    """Pair-restricted r = 1 delta of the c-bin histogram as a mixture of 2-bin cases.

    Given that s rows (the conditioned one included) fall in {j, k}, the
    split between j and k is a 2-bin histogram with p' = p_j/(p_j + p_k);
    s - 1 of the n - 1 free rows land in {j, k} binomially.
    """
    j, k = pair
    if j == k or not (0 <= j < pi.c and 0 <= k < pi.c):
        raise ValueError(f"Invalid pair {pair} for c={pi.c}")
    mass = pi[j] + pi[k]
    if mass == 0:
        raise ValueError(f"Pair {pair} has no probability mass")
    inner = pi[j] / mass
    delta = Fraction(0)
    for s in range(1, n + 1):
        weight = binomial_pmf(s - 1, n - 1, mass)
        if weight == 0:
            continue
        if inner in (0, 1):
            delta += weight
        else:
            delta += weight * hist2_delta_closed_form(inner, s)
    return delta


@dataclass
class FitResult:
    """delta(n) ~ 1/sqrt(a n + b) fitted on delta^-2 = a n + b"""
    a: float
    b: float
    mse: float
    mse_linear: float
    n_min: int
    n_max: int
    rule: Optional[str] = None
    observable: Optional[str] = None
    definition: str = "alternative"

    def render(self) -> str:
        sign = "+" if self.b >= 0 else "-"
        return f"δ(n) = 1/sqrt({self.a:.4g}n {sign} {abs(self.b):.4g})"

    def to_json(self) -> Dict:
        return {
            "rule": self.rule,
            "observable": self.observable,
            "a": self.a,
            "b": self.b,
            "mse": self.mse,
            "mse_linear": self.mse_linear,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "definition": self.definition,
            "rendered": self.render(),
        }


def fit_inverse_sqrt(samples: Sequence[Tuple[int, float]], rule: Optional[str] = None,
                     observable: Optional[str] = None) -> FitResult:
    """Least squares of delta^-2 against [n, 1]"""
    if len(samples) < 2:
        raise ValueError(f"Need at least 2 samples to fit, got {len(samples)}")
    ns = np.array([float(n) for n, _ in samples])
    deltas = np.array([float(d) for _, d in samples])
    if np.any(deltas <= 0):
        raise ValueError("All delta samples must be positive")
    y = deltas ** -2
    A = np.vstack([ns, np.ones(len(ns))]).T
    (a, b), _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    linear = a * ns + b
    if np.any(linear <= 0):
        raise ValueError(f"Fitted a·n + b is not positive over n in [{int(ns.min())}, {int(ns.max())}]")
    mse = float(np.mean((deltas - 1.0 / np.sqrt(linear)) ** 2))
    mse_linear = float(np.mean((y - linear) ** 2))
    return FitResult(
        a=float(a), b=float(b), mse=mse, mse_linear=mse_linear,
        n_min=int(ns.min()), n_max=int(ns.max()), rule=rule, observable=observable
    )


def log_slope(samples: Sequence[Tuple[int, float]], sqrt_n: bool = False) -> float:
    """Least-squares slope of ln delta(n); sqrt_n fits ln(delta sqrt(n)) instead"""
    ns = np.array([float(n) for n, _ in samples])
    logs = np.array([math.log(d) for _, d in samples])
    if sqrt_n:
        logs = logs + 0.5 * np.log(ns)
    A = np.vstack([ns, np.ones(len(ns))]).T
    (slope, _), _, _, _ = np.linalg.lstsq(A, logs, rcond=None)
    return float(slope)


@dataclass
class HyperplaneSet:
    """Decision hyperplanes over order indices, one per candidate pair"""
    vectors: Tuple[Tuple[Fraction, ...], ...]
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        for h in self.vectors:
            if sum(h) != 0:
                raise ValueError("Hyperplane does not pass through the all-ones vector")

    def __len__(self) -> int:
        return len(self.vectors)


def scoring_hyperplanes(s: Union[Sequence[Fraction], PositionalRule], m: Optional[int] = None) -> HyperplaneSet:
    """h[V] = s(V, k1) - s(V, k2) for every candidate pair k1 < k2"""
    rule = s if isinstance(s, PositionalRule) else positional_rule(s, m)
    vectors, pairs = [], []
    for k1 in range(rule.m):
        for k2 in range(k1 + 1, rule.m):
            vectors.append(tuple(row[k1] - row[k2] for row in rule.f_table))
            pairs.append((k1, k2))
    return HyperplaneSet(tuple(vectors), tuple(pairs))


def dist_to_hyperplane(pi: VoteDistribution, h: Sequence[Fraction]) -> float:
    """Signed distance (pi . h) / ||h||"""
    if len(h) != pi.c:
        raise ValueError(f"Hyperplane has {len(h)} components, distribution has {pi.c}")
    if all(v == 0 for v in h):
        raise ValueError("Zero hyperplane has no direction")
    dot = sum(p * v for p, v in zip(pi.probs, h))
    return float(dot) / float(np.linalg.norm(np.array([float(v) for v in h])))


def gsr_exponential_bound(pi: VoteDistribution, H: HyperplaneSet, m: int, n: int) -> float:
    """min(exp(-dmin^2 n / (3 m! max pi)), sqrt(1/n)), constant dropped"""
    if any(p <= 0 for p in pi.probs):
        raise ValueError("The bound needs every order to have positive probability")
    if pi.c != len(canonical_orders(m)):
        raise ValueError(f"Distribution has {pi.c} entries, expected {math.factorial(m)}")
    dmin = min(abs(dist_to_hyperplane(pi, h)) for h in H.vectors)
    rate = dmin ** 2 / (3 * math.factorial(m) * float(max(pi.probs)))
    return min(math.exp(-rate * n), math.sqrt(1.0 / n))


def render_table(fits: Sequence[FitResult]) -> str:
    """Winner/score fit layout, an MSE table, and the ranking by a"""
    by_rule: Dict[str, Dict[str, FitResult]] = {}
    for fit in fits:
        by_rule.setdefault(fit.rule or "?", {})[fit.observable or "?"] = fit

    width = max([len(r) for r in by_rule] + [4])
    lines = [f"{'Rule':<{width}}  {'Winner':<34}  Score", "-" * (width + 72)]
    for rule, fits_for_rule in by_rule.items():
        winner = fits_for_rule.get("winner")
        score = fits_for_rule.get("score")
        lines.append(
            f"{rule:<{width}}  {winner.render() if winner else '-':<34}  {score.render() if score else '-'}"
        )

    lines += ["", f"{'Rule':<{width}}  MSE (δ)       MSE (δ^-2)"]
    for rule, fits_for_rule in by_rule.items():
        winner = fits_for_rule.get("winner")
        if winner:
            lines.append(f"{rule:<{width}}  {winner.mse:<12.4g}  {winner.mse_linear:.4g}")

    ranked = sorted((f for f in fits if f.observable == "winner"), key=lambda f: f.a)
    if ranked:
        lines += ["", "Most private first: " + " < ".join(f.rule or "?" for f in ranked)]
    return "\n".join(lines)
