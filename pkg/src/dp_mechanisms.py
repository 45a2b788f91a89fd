"""
Count-query mechanisms under classical DP: truncated geometric noise, exact epsilon and utility
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from .prob_core import format_rational, parse_rational


class UnboundedRatioError(ValueError):
    """A cell is zero in one row and positive in its neighbour"""


@dataclass(frozen=True)
class FiniteMechanismMatrix:
    """rows[i][r] = Pr(output r | true count i)"""
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.rows)
        object.__setattr__(self, 'rows', rows)
        if not rows:
            raise ValueError("Mechanism matrix needs at least one row")
        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise ValueError("Mechanism matrix rows differ in length")
        for i, row in enumerate(rows):
            if any(v < 0 for v in row):
                raise ValueError(f"Row {i} has a negative entry")
            if sum(row) != 1:
                raise ValueError(f"Row {i} sums to {sum(row)}, not 1")

    @property
    def n(self) -> int:
        return len(self.rows) - 1

    def __getitem__(self, i: int) -> Tuple[Fraction, ...]:
        return self.rows[i]

    def render(self) -> str:
        cells = [[format_rational(v) for v in row] for row in self.rows]
        width = max(len(cell) for row in cells for cell in row)
        return "\n".join("  ".join(cell.rjust(width) for cell in row) for row in cells)


def truncated_geometric(alpha: Fraction, n: int) -> FiniteMechanismMatrix:
    """Two-sided geometric noise on a count in 0..n, tails folded onto 0 and n"""
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha={alpha} must lie strictly between 0 and 1")
    if n < 0:
        raise ValueError(f"Need n >= 0, got {n}")
    if n == 0:
        return FiniteMechanismMatrix(((Fraction(1),),))
    interior = (1 - alpha) / (1 + alpha)
    rows = []
    for i in range(n + 1):
        row = [interior * alpha ** abs(i - r) for r in range(n + 1)]
        row[0] = alpha ** i / (1 + alpha)
        row[n] = alpha ** (n - i) / (1 + alpha)
        rows.append(tuple(row))
    return FiniteMechanismMatrix(tuple(rows))


def exact_dp_ratio(Mx: FiniteMechanismMatrix) -> Fraction:
    """max Mx[i][r] / Mx[i'][r] over neighbouring counts |i - i'| = 1"""
    ratio = Fraction(1)
    for i in range(len(Mx.rows)):
        for i_prime in (i - 1, i + 1):
            if not 0 <= i_prime < len(Mx.rows):
                continue
            for r, (num, den) in enumerate(zip(Mx[i], Mx[i_prime])):
                if den == 0:
                    if num > 0:
                        raise UnboundedRatioError(
                            f"Output {r} has probability {num} for count {i} but 0 for count {i_prime}"
                        )
                    continue
                ratio = max(ratio, num / den)
    return ratio


def exact_dp_epsilon(Mx: FiniteMechanismMatrix) -> float:
    return math.log(exact_dp_ratio(Mx))


def utility(Mx: FiniteMechanismMatrix, gamma: Fraction) -> Fraction:
    """-(1/(n+1)) sum_i sum_{r != i} Mx[i][r] (1 + gamma |i - r|), uniform prior"""
    gamma = Fraction(gamma)
    if gamma < 0:
        raise ValueError(f"gamma={gamma} must be >= 0")
    if len(Mx.rows) != len(Mx.rows[0]):
        raise ValueError("Utility needs a square matrix (outputs range over the counts)")
    loss = Fraction(0)
    for i, row in enumerate(Mx.rows):
        for r, v in enumerate(row):
            if r != i:
                loss += v * (1 + gamma * abs(i - r))
    return -loss / len(Mx.rows)


def identity_matrix(n: int) -> FiniteMechanismMatrix:
    return FiniteMechanismMatrix(tuple(
        tuple(Fraction(int(i == r)) for r in range(n + 1)) for i in range(n + 1)
    ))


def uniform_matrix(n: int) -> FiniteMechanismMatrix:
    cell = Fraction(1, n + 1)
    return FiniteMechanismMatrix(tuple(tuple(cell for _ in range(n + 1)) for _ in range(n + 1)))


def matrix_from_rows(rows: Sequence[Sequence]) -> FiniteMechanismMatrix:
    """Build from rationals or "num/den" strings"""
    return FiniteMechanismMatrix(tuple(tuple(parse_rational(v) for v in row) for row in rows))
