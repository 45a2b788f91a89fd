"""
votepriv - exact distributional differential privacy of voting rules
Exact (eps, delta) computation for histogram-respecting mechanisms under i.i.d. votes
"""

import json
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .asymptotics import FitResult, fit_inverse_sqrt, render_table
from .checks import SUITES, InvariantSuites
from .ddp import DEFAULT_MAX_DATABASES
from .engine_router import EngineRouter
from .sweep_manager import ParallelSweepManager, SweepResult, build_tasks


DEFAULT_CONFIG = {
    "sweep": {
        "jobs": None,
        "task_timeout": None,
    },
    "oracle": {
        "max_databases": DEFAULT_MAX_DATABASES,
    },
    "fit": {
        "n_min": 3,
        "n_max": 49,
    },
    "voting": {
        "tie_break": None,
    },
    "checks": {
        "seed": 42,
        "cases": {},
    },
    "logging": {
        "level": "WARNING",
    },
}

CONFIG_ENV = "VOTEPRIV_CONFIG"
JOBS_ENV = "VOTEPRIV_JOBS"


def load_config(config_path: Optional[str] = None) -> Dict:
    """Defaults deep-merged with a JSON file (argument, $VOTEPRIV_CONFIG, or ./votepriv.json)"""
    config = json.loads(json.dumps(DEFAULT_CONFIG))
    path = Path(config_path or os.environ.get(CONFIG_ENV) or "votepriv.json")
    if not path.exists():
        if config_path:
            logging.warning(f"Config file {path} not found, using defaults")
        return config
    try:
        with open(path) as f:
            override = json.load(f)
    except Exception as e:
        logging.warning(f"Ignoring unreadable config {path}: {e}")
        return config
    return merge_config(config, override)


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Deep-merge config dictionaries"""
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = merge_config(base[key], value)
        else:
            base[key] = value
    return base


def resolve_jobs(config: Dict, jobs: Optional[int] = None) -> int:
    """--jobs, then config, then $VOTEPRIV_JOBS, then the CPU count"""
    if jobs is None:
        jobs = config.get("sweep", {}).get("jobs")
    if jobs is None and os.environ.get(JOBS_ENV):
        try:
            jobs = int(os.environ[JOBS_ENV])
        except ValueError:
            raise ValueError(f"{JOBS_ENV} must be an integer, got {os.environ[JOBS_ENV]!r}")
    if jobs is None:
        jobs = os.cpu_count() or 1
    if int(jobs) < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return int(jobs)


class VotePrivacy:
    """Entry point tying config, engines and the sweep manager together"""

    def __init__(self, config_path: Optional[str] = None, jobs: Optional[int] = None,
                 config: Optional[Dict] = None):
        self.config = config if config is not None else load_config(config_path)
        self.router = EngineRouter(self.config)
        self.sweeper = ParallelSweepManager(
            max_workers=resolve_jobs(self.config, jobs),
            task_timeout=self.config['sweep'].get('task_timeout')
        )
        logging.info(f"votepriv initialized: engines {self.router.available()}, "
                     f"{self.sweeper.max_workers} worker(s)")

    @property
    def tie_break(self) -> Optional[Tuple[int, ...]]:
        tie_break = self.config.get("voting", {}).get("tie_break")
        return None if tie_break is None else tuple(tie_break)

    def sweep(
        self,
        rule: str,
        observable: str,
        m: int,
        dist: str,
        n_values: Iterable[int],
        eps_ratio: Fraction = Fraction(1),
        engine: str = "exact",
        alpha: Optional[Fraction] = None,
        tie_break: Optional[Sequence[int]] = None
    ) -> List[SweepResult]:
        """delta(n) for every n, one task per n, ordered by n"""
        self.router.get_engine(engine)
        tasks = build_tasks(
            rule, observable, m, dist, n_values, eps_ratio=eps_ratio, engine=engine,
            alpha=alpha,
            tie_break=tuple(tie_break) if tie_break is not None else self.tie_break,
            max_databases=self.config['oracle']['max_databases']
        )
        results = self.sweeper.process_tasks_sync(tasks)
        summary = self.sweeper.aggregate_results(results)
        logging.info(f"Sweep {rule}/{observable}: {summary['tasks_completed']} done, "
                     f"{summary['tasks_failed']} failed in {summary['total_processing_time_ms']:.0f}ms")
        return results

    def fit(self, samples: Sequence[Tuple[int, float]], rule: Optional[str] = None,
            observable: Optional[str] = None, n_min: Optional[int] = None,
            n_max: Optional[int] = None) -> FitResult:
        """Inverse-sqrt fit restricted to [n_min, n_max]"""
        n_min = self.config['fit']['n_min'] if n_min is None else n_min
        n_max = self.config['fit']['n_max'] if n_max is None else n_max
        window = [(n, d) for n, d in samples if n_min <= n <= n_max]
        return fit_inverse_sqrt(window, rule=rule, observable=observable)

    def check(self, suite: str, seed: Optional[int] = None, cases: Optional[int] = None,
              n_max: Optional[int] = None, stream=None) -> Tuple[bool, InvariantSuites]:
        """Run an invariant suite; a --cases value overrides the configured counts"""
        seed = self.config['checks']['seed'] if seed is None else seed
        overrides = dict(self.config['checks'].get('cases', {}))
        if cases is not None:
            names = SUITES if suite == "all" else (suite,)
            overrides.update({name: cases for name in names})
        suites = InvariantSuites(seed=seed, cases=overrides, n_max=n_max, stream=stream)
        return suites.run(suite), suites

    def table(self, rules: Sequence[str], m: int, dist: str, n_values: Sequence[int],
              observables: Sequence[str] = ("winner", "score")) -> Tuple[List[FitResult], Dict]:
        """Sweep every rule and observable and fit each series"""
        fits = []
        sweeps = {}
        for rule in rules:
            for observable in observables:
                results = self.sweep(rule, observable, m, dist, n_values)
                failed = [r for r in results if r.error]
                if failed:
                    raise ValueError(f"{rule}/{observable} sweep failed: {failed[0].error}")
                sweeps[(rule, observable)] = [r.result for r in results]
                samples = [(r.result.n, r.result.float_delta) for r in results]
                fits.append(self.fit(samples, rule=rule, observable=observable,
                                     n_min=min(n_values), n_max=max(n_values)))
        return fits, sweeps

    def render_table(self, fits: Sequence[FitResult]) -> str:
        return render_table(fits)


def initialize(config_path: Optional[str] = None) -> VotePrivacy:
    """Initialize with the merged configuration"""
    return VotePrivacy(config_path)


__all__ = ['VotePrivacy', 'initialize', 'load_config', 'merge_config', 'resolve_jobs', 'DEFAULT_CONFIG']
