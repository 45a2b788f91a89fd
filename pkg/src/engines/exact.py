"""
Histogram-enumeration engine: one integer pass over all histograms of n rows
"""

from fractions import Fraction

from ..ddp import DeltaResult, delta_exact
from ..prob_core import VoteDistribution
from ..voting_rules import MechanismSpec
from . import DeltaEngine


class ExactEngine(DeltaEngine):
    """Positive-part characterization over every ordered pair of values"""

    name = "exact"

    def compute(self, mechanism: MechanismSpec, pi: VoteDistribution, n: int,
                eps_ratio: Fraction = Fraction(1)) -> DeltaResult:
        return delta_exact(mechanism, pi, n, eps_ratio)
