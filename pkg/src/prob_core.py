"""
Probability Core - Exact rational pmfs and histogram enumeration for i.i.d. rows
"""

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple, Union


Rational = Fraction
Histogram = Tuple[int, ...]
RationalLike = Union[Fraction, int, str]


def parse_rational(text: RationalLike) -> Fraction:
    """Parse "num/den", an integer or a decimal string into an exact rational"""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(f"Refusing float {text!r}: pass an exact rational string")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Malformed rational: {text!r}")


def format_rational(q: Fraction) -> str:
    """Serialize as "num/den" (Fraction keeps lowest terms)"""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_histogram(text: str) -> Histogram:
    try:
        counts = tuple(int(part) for part in text.split(','))
    except ValueError:
        raise ValueError(f"Malformed histogram: {text!r}")
    return as_histogram(counts)


def format_histogram(t: Sequence[int]) -> str:
    return ",".join(str(v) for v in t)


def as_histogram(counts: Sequence[int]) -> Histogram:
    t = tuple(int(v) for v in counts)
    if any(v < 0 for v in t):
        raise ValueError(f"Histogram counts must be non-negative: {t}")
    return t


@dataclass(frozen=True)
class VoteDistribution:
    """Exact rational distribution over the c values a row can take"""
    probs: Tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, 'probs', probs)
        if any(p < 0 for p in probs):
            raise ValueError(f"Negative probability in {format_rationals(probs)}")
        if sum(probs) != 1:
            raise ValueError(f"Probabilities sum to {sum(probs)}, not 1")
        if sum(1 for p in probs if p > 0) < 2:
            raise ValueError("Distribution needs at least two values with positive probability")

    @classmethod
    def uniform(cls, c: int) -> 'VoteDistribution':
        if c < 2:
            raise ValueError(f"Uniform distribution needs c >= 2, got {c}")
        return cls(tuple(Fraction(1, c) for _ in range(c)))

    @classmethod
    def parse(cls, text: str, c: Optional[int] = None) -> 'VoteDistribution':
        """Parse "uniform" (needs c) or a comma list of rationals"""
        if text.strip().lower() == "uniform":
            if c is None:
                raise ValueError("'uniform' needs the number of bins")
            return cls.uniform(c)
        probs = tuple(parse_rational(part) for part in text.split(','))
        if c is not None and len(probs) != c:
            raise ValueError(f"Distribution has {len(probs)} entries, expected {c}")
        return cls(probs)

    @property
    def c(self) -> int:
        return len(self.probs)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> Fraction:
        return self.probs[i]

    def support(self) -> List[int]:
        return [i for i, p in enumerate(self.probs) if p > 0]

    def p_min(self) -> Fraction:
        """Smallest single-bin probability over the support"""
        return min(p for p in self.probs if p > 0)

    def pair_p_min(self) -> Fraction:
        """min over i != j of p_i + p_j"""
        ordered = sorted(self.probs)
        return ordered[0] + ordered[1]

    def common_denominator(self) -> Tuple[int, Tuple[int, ...]]:
        """Return (D, a) with p_i = a_i / D and a_i integers"""
        D = 1
        for p in self.probs:
            D = D * p.denominator // math.gcd(D, p.denominator)
        return D, tuple(int(p * D) for p in self.probs)

    def render(self) -> str:
        return format_rationals(self.probs)


def format_rationals(values: Sequence[Fraction]) -> str:
    return ",".join(format_rational(v) for v in values)


class FactorialTable:
    """Arbitrary-precision factorials, grown on demand and shared read-only"""

    def __init__(self, size: int = 64):
        self._lock = threading.Lock()
        self._facts: List[int] = [1]
        self.ensure(size)

    def ensure(self, n: int):
        if n < len(self._facts):
            return
        with self._lock:
            facts = list(self._facts)
            while len(facts) <= n:
                facts.append(facts[-1] * len(facts))
            self._facts = facts

    @property
    def size(self) -> int:
        return len(self._facts) - 1

    def factorial(self, n: int) -> int:
        self.ensure(n)
        return self._facts[n]

    def binomial(self, n: int, k: int) -> int:
        if k < 0 or k > n:
            return 0
        self.ensure(n)
        f = self._facts
        return f[n] // (f[k] * f[n - k])

    def multinomial(self, t: Sequence[int]) -> int:
        n = sum(t)
        self.ensure(n)
        f = self._facts
        den = 1
        for v in t:
            den *= f[v]
        return f[n] // den


_factorial_table: Optional[FactorialTable] = None
_table_lock = threading.Lock()


def get_factorial_table(n: int = 0) -> FactorialTable:
    """Shared factorial table covering at least n!"""
    global _factorial_table
    if _factorial_table is None:
        with _table_lock:
            if _factorial_table is None:
                _factorial_table = FactorialTable()
    _factorial_table.ensure(n)
    return _factorial_table


def _check_dims(t: Sequence[int], pi: VoteDistribution):
    if len(t) != pi.c:
        raise ValueError(f"Histogram has {len(t)} bins but distribution has {pi.c}")


def multinomial_pmf(t: Sequence[int], pi: VoteDistribution) -> Fraction:
    """n!/(t_1!...t_c!) * prod p_i^t_i"""
    _check_dims(t, pi)
    t = as_histogram(t)
    prob = Fraction(get_factorial_table(sum(t)).multinomial(t))
    for p, k in zip(pi.probs, t):
        if k:
            if p == 0:
                return Fraction(0)
            prob *= p ** k
    return prob


def cond_hist_prob(t: Sequence[int], x: int, pi: VoteDistribution) -> Fraction:
    """Pr(Hist(X) = t | X_1 = x): the other n-1 rows must form t - e_x"""
    _check_dims(t, pi)
    if not 0 <= x < pi.c:
        raise ValueError(f"Bin index {x} out of range for c={pi.c}")
    if sum(t) < 1:
        raise ValueError("Conditioning on a row needs n >= 1")
    if t[x] == 0:
        return Fraction(0)
    rest = list(t)
    rest[x] -= 1
    return multinomial_pmf(rest, pi)


def enumerate_histograms(n: int, c: int) -> Iterator[Histogram]:
    """Yield every composition of n into c parts in colexicographic order.

    The last bin is the slowest-varying coordinate, the second bin the
    fastest, and the first bin takes whatever is left:
    n=2, c=2 gives (2,0), (1,1), (0,2).
    """
    if n < 0 or c < 1:
        raise ValueError(f"Need n >= 0 and c >= 1, got n={n}, c={c}")
    if c == 1:
        yield (n,)
        return
    tail = [0] * (c - 1)
    used = 0
    while True:
        yield (n - used,) + tuple(tail)
        if used < n:
            tail[0] += 1
            used += 1
            continue
        # carry: clear the lowest nonzero slot, bump the next one
        i = 0
        while i < len(tail) and tail[i] == 0:
            i += 1
        if i + 1 >= len(tail):
            return
        used -= tail[i] - 1
        tail[i] = 0
        tail[i + 1] += 1


def histogram_count(n: int, c: int) -> int:
    return get_factorial_table(n + c).binomial(n + c - 1, c - 1)


def binomial_pmf(k: int, n: int, p: Fraction) -> Fraction:
    """C(n,k) p^k (1-p)^(n-k)"""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    return get_factorial_table(n).binomial(n, k) * p ** k * (1 - p) ** (n - k)


@dataclass
class ConditionalTable:
    """Per-output integer masses of Pr(M(X) = o | X_1 = x).

    masses[o][x] divided by denominator(x) is the conditional probability.
    Working over the common denominator keeps one enumeration pass in
    integer arithmetic.
    """
    n: int
    pi: VoteDistribution
    scale: int
    weights: Tuple[int, ...]
    masses: Dict[Hashable, List[int]]

    def denominator(self, x: int) -> int:
        return self.n * self.weights[x] * self.scale ** (self.n - 1)

    def probability(self, label: Hashable, x: int) -> Fraction:
        if self.weights[x] == 0:
            raise ValueError(f"Bin {x} has zero probability; conditioning is undefined")
        row = self.masses.get(label)
        if row is None:
            return Fraction(0)
        return Fraction(row[x], self.denominator(x))

    def distribution(self, x: int) -> Dict[Hashable, Fraction]:
        return {label: self.probability(label, x) for label in self.masses}

    @property
    def labels(self) -> List[Hashable]:
        return list(self.masses)


def conditional_output_table(
    label_fn: Callable[[Histogram], Hashable],
    pi: VoteDistribution,
    n: int
) -> ConditionalTable:
    """Push every histogram of n rows through label_fn in a single pass.

    Pr(t | X_1 = x) = t_x / (n p_x) * Pr(t), and Pr(t) = w(t) / D^n with
    w(t) = multinomial(t) * prod a_i^t_i, so each histogram adds t_x * w(t)
    to its label's mass for bin x.
    """
    if n < 1:
        raise ValueError(f"Need at least one row, got n={n}")
    c = pi.c
    scale, weights = pi.common_denominator()
    table = get_factorial_table(n)
    facts = [table.factorial(k) for k in range(n + 1)]
    powers = [[a ** k for k in range(n + 1)] for a in weights]
    fact_n = facts[n]
    masses: Dict[Hashable, List[int]] = {}

    for t in enumerate_histograms(n, c):
        num = fact_n
        den = 1
        for i, k in enumerate(t):
            if k:
                num *= powers[i][k]
                den *= facts[k]
        if num == 0:
            continue
        w = num // den
        label = label_fn(t)
        row = masses.get(label)
        if row is None:
            row = [0] * c
            masses[label] = row
        for i, k in enumerate(t):
            if k:
                row[i] += k * w

    return ConditionalTable(n=n, pi=pi, scale=scale, weights=weights, masses=masses)
