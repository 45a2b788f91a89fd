"""
Trail engine: every pair's delta as a sum of exit-minus-entry terms
"""

import logging
from fractions import Fraction

from ..ddp import DeltaResult, delta_via_trails
from ..histograms import Direction
from ..prob_core import VoteDistribution
from ..voting_rules import MechanismSpec
from . import DeltaEngine


class TrailsEngine(DeltaEngine):
    """Only defined at eps = 0 (ratio 1), where the trail identity is exact"""

    name = "trails"

    def compute(self, mechanism: MechanismSpec, pi: VoteDistribution, n: int,
                eps_ratio: Fraction = Fraction(1)) -> DeltaResult:
        if Fraction(eps_ratio) != 1:
            raise ValueError(f"The trails engine needs eps_ratio = 1, got {eps_ratio}")
        best = None
        support = pi.support()
        for j in support:
            for k in support:
                if j == k:
                    continue
                result = delta_via_trails(mechanism, pi, n, Direction(j, k))
                if best is None or result.delta > best.delta:
                    best = result
        logging.debug(f"trails engine: {mechanism.name} n={n} delta={best.delta}")
        return best
