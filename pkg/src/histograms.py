"""
Trails over histograms: construction, partitioning and the telescoping identity
"""

import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Collection, Dict, Hashable, Iterable, List, Set, Tuple

from .prob_core import Histogram, VoteDistribution, as_histogram, cond_hist_prob, enumerate_histograms


@dataclass(frozen=True)
class Direction:
    """Move one row from bin j to bin k (0-based)"""
    j: int
    k: int

    def __post_init__(self):
        if self.j == self.k:
            raise ValueError(f"Direction needs j != k, got ({self.j}, {self.k})")
        if self.j < 0 or self.k < 0:
            raise ValueError(f"Negative bin index in direction ({self.j}, {self.k})")

    def check_bins(self, c: int):
        if self.j >= c or self.k >= c:
            raise ValueError(f"Direction ({self.j}, {self.k}) out of range for c={c}")


@dataclass(frozen=True)
class Trail:
    """Histograms entry - z*e_j + z*e_k for z = 0..length"""
    entry: Histogram
    direction: Direction
    length: int

    def __post_init__(self):
        object.__setattr__(self, 'entry', as_histogram(self.entry))
        self.direction.check_bins(len(self.entry))
        if self.length < 0:
            raise ValueError(f"Trail length must be >= 0, got {self.length}")
        if self.entry[self.direction.j] < self.length:
            raise ValueError(
                f"Trail of length {self.length} leaves the simplex from {self.entry}"
            )

    def point(self, z: int) -> Histogram:
        t = list(self.entry)
        t[self.direction.j] -= z
        t[self.direction.k] += z
        return tuple(t)

    @property
    def exit(self) -> Histogram:
        return self.point(self.length)

    def to_json(self) -> Dict:
        return {
            "entry": list(self.entry),
            "j": self.direction.j,
            "k": self.direction.k,
            "q": self.length,
        }

    @classmethod
    def from_json(cls, data) -> 'Trail':
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            entry=tuple(data["entry"]),
            direction=Direction(int(data["j"]), int(data["k"])),
            length=int(data["q"]),
        )


def trail_points(trail: Trail) -> List[Histogram]:
    return [trail.point(z) for z in range(trail.length + 1)]


def partition_into_trails(histograms: Collection[Histogram], d: Direction) -> List[Trail]:
    """Split a histogram set into disjoint maximal (j,k)-trails.

    Moving along d preserves every bin outside {j, k} and t_j + t_k, so
    histograms are grouped by that invariant and each group's consecutive
    runs in t_j become trails. Trails come back sorted by entry, descending.
    """
    points = {as_histogram(t) for t in histograms}
    if not points:
        return []
    sizes = {len(t) for t in points}
    totals = {sum(t) for t in points}
    if len(sizes) != 1 or len(totals) != 1:
        raise ValueError("All histograms must share the same bin count and total")
    d.check_bins(sizes.pop())

    groups: Dict[Tuple, List[Histogram]] = defaultdict(list)
    for t in points:
        fixed = tuple(v for i, v in enumerate(t) if i not in (d.j, d.k))
        groups[(fixed, t[d.j] + t[d.k])].append(t)

    trails = []
    for members in groups.values():
        members.sort(key=lambda t: t[d.j], reverse=True)
        start = members[0]
        previous = start[d.j]
        length = 0
        for t in members[1:]:
            if t[d.j] == previous - 1:
                length += 1
            else:
                trails.append(Trail(start, d, length))
                start = t
                length = 0
            previous = t[d.j]
        trails.append(Trail(start, d, length))

    trails.sort(key=lambda tr: tr.entry, reverse=True)
    return trails


def trail_theorem_sides(trail: Trail, pi: VoteDistribution) -> Tuple[Fraction, Fraction]:
    """Return (lhs, rhs) of the trail identity.

    lhs = Pr(Hist in T | X_1 = j) - Pr(Hist in T | X_1 = k), summed point by point
    rhs = Pr(Hist = exit | X_1 = j) - Pr(Hist = entry | X_1 = k)
    """
    j, k = trail.direction.j, trail.direction.k
    lhs = Fraction(0)
    for t in trail_points(trail):
        lhs += cond_hist_prob(t, j, pi) - cond_hist_prob(t, k, pi)
    rhs = cond_hist_prob(trail.exit, j, pi) - cond_hist_prob(trail.entry, k, pi)
    return lhs, rhs


def histogram_set_for_outputs(
    label_fn: Callable[[Histogram], Hashable],
    n: int,
    c: int,
    outputs: Iterable[Hashable]
) -> Set[Histogram]:
    """All histograms of (n, c) whose output lies in the given set"""
    wanted = set(outputs)
    return {t for t in enumerate_histograms(n, c) if label_fn(t) in wanted}
