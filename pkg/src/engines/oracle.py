"""
Database-enumeration oracle, guarded by a database budget
"""

from fractions import Fraction

from ..ddp import DEFAULT_MAX_DATABASES, DeltaResult, delta_bruteforce_db
from ..prob_core import VoteDistribution
from ..voting_rules import MechanismSpec
from . import DeltaEngine


class OracleEngine(DeltaEngine):
    """Walks all c^n databases; raises SizeGuardError past max_databases"""

    name = "oracle"

    def __init__(self, max_databases: int = DEFAULT_MAX_DATABASES):
        self.max_databases = max_databases

    def compute(self, mechanism: MechanismSpec, pi: VoteDistribution, n: int,
                eps_ratio: Fraction = Fraction(1)) -> DeltaResult:
        return delta_bruteforce_db(mechanism, pi, n, eps_ratio, max_databases=self.max_databases)
