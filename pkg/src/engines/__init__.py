"""
Delta engines selectable by name
"""

from fractions import Fraction

from ..ddp import DeltaResult
from ..prob_core import VoteDistribution
from ..voting_rules import MechanismSpec


class DeltaEngine:
    """Base class for delta engines"""

    name = "base"

    def compute(self, mechanism: MechanismSpec, pi: VoteDistribution, n: int,
                eps_ratio: Fraction = Fraction(1)) -> DeltaResult:
        """Exact delta of mechanism at ratio eps_ratio"""
        raise NotImplementedError
