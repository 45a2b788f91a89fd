"""
Engine Router - Name-based selection of delta engines
"""

import logging
from typing import Dict, List

from .ddp import DEFAULT_MAX_DATABASES
from .engines import DeltaEngine
from .engines.exact import ExactEngine
from .engines.oracle import OracleEngine
from .engines.trails import TrailsEngine


class EngineRouter:
    """Routes delta requests to the configured engines"""

    def __init__(self, config: Dict):
        self.config = config
        self._init_engines()

    def _init_engines(self):
        """Initialize available engines"""
        oracle = self.config.get('oracle', {})
        max_databases = oracle.get('max_databases', DEFAULT_MAX_DATABASES)

        self.engines = {
            "exact": ExactEngine(),
            "trails": TrailsEngine(),
            "oracle": OracleEngine(max_databases=max_databases),
        }
        logging.debug(f"Engines ready: {', '.join(self.engines)} (oracle budget {max_databases})")

    def available(self) -> List[str]:
        return list(self.engines)

    def get_engine(self, engine_name: str) -> DeltaEngine:
        """Get engine by name"""
        try:
            return self.engines[engine_name]
        except KeyError:
            raise ValueError(f"Unknown engine {engine_name!r}; expected one of {self.available()}")
