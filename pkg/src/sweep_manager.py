"""
Parallel Sweep Manager - Runs independent delta(n) tasks across worker processes
"""

import concurrent.futures
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .ddp import DEFAULT_MAX_DATABASES, DeltaResult, SizeGuardError
from .engine_router import EngineRouter
from .prob_core import VoteDistribution
from .voting_rules import build_mechanism


@dataclass
class SweepTask:
    """Picklable description of one delta computation; workers rebuild the mechanism"""
    id: int
    rule: str
    observable: str
    m: int
    dist: str
    n: int
    eps_ratio: Fraction = Fraction(1)
    engine: str = "exact"
    alpha: Optional[Fraction] = None
    tie_break: Optional[Tuple[int, ...]] = None
    max_databases: int = DEFAULT_MAX_DATABASES


@dataclass
class SweepResult:
    """Result from one sweep task"""
    task_id: int
    result: Optional[DeltaResult]
    processing_time_ms: float
    error: Optional[str] = None
    error_kind: Optional[str] = None


def run_sweep_task(task: SweepTask) -> SweepResult:
    """Worker entry point; never raises"""
    start_time = time.time()
    try:
        mechanism = build_mechanism(
            task.rule, task.observable, task.m, alpha=task.alpha, tie_break=task.tie_break,
            c=len(task.dist.split(',')) if task.dist.strip().lower() != "uniform" else None
        )
        pi = VoteDistribution.parse(task.dist, mechanism.c)
        router = EngineRouter({"oracle": {"max_databases": task.max_databases}})
        result = router.get_engine(task.engine).compute(mechanism, pi, task.n, task.eps_ratio)
        return SweepResult(
            task_id=task.id,
            result=result,
            processing_time_ms=(time.time() - start_time) * 1000
        )
    except SizeGuardError as e:
        kind = "guard"
        message = str(e)
    except ValueError as e:
        kind = "usage"
        message = str(e)
    except Exception as e:
        kind = "internal"
        message = f"{type(e).__name__}: {e}"

    logging.error(f"Sweep task {task.id} ({task.rule}/{task.observable}, n={task.n}) failed: {message}")
    return SweepResult(
        task_id=task.id,
        result=None,
        processing_time_ms=(time.time() - start_time) * 1000,
        error=message,
        error_kind=kind
    )


def build_tasks(
    rule: str,
    observable: str,
    m: int,
    dist: str,
    n_values: Iterable[int],
    eps_ratio: Fraction = Fraction(1),
    engine: str = "exact",
    alpha: Optional[Fraction] = None,
    tie_break: Optional[Tuple[int, ...]] = None,
    max_databases: int = DEFAULT_MAX_DATABASES
) -> List[SweepTask]:
    return [
        SweepTask(
            id=n, rule=rule, observable=observable, m=m, dist=dist, n=n,
            eps_ratio=eps_ratio, engine=engine, alpha=alpha, tie_break=tie_break,
            max_databases=max_databases
        )
        for n in n_values
    ]


def _stop_workers(executor: concurrent.futures.ProcessPoolExecutor):
    """Terminate worker processes still busy with timed-out tasks"""
    terminate = getattr(executor, "terminate_workers", None)
    if terminate is not None:
        terminate()
        return
    # no public API before Python 3.14
    for process in list((executor._processes or {}).values()):
        process.terminate()


class ParallelSweepManager:
    """Manages parallel execution of delta sweeps"""

    def __init__(self, max_workers: int = 1, task_timeout: Optional[float] = None):
        self.max_workers = max(1, int(max_workers))
        self.task_timeout = task_timeout
        logging.info(f"Sweep manager initialized with {self.max_workers} worker(s)")

    def process_tasks_sync(self, tasks: List[SweepTask]) -> List[SweepResult]:
        """Run tasks and return results sorted by task id.

        With a task_timeout, the pool is given task_timeout seconds per round
        of max_workers tasks; whatever is unfinished then is reported as an
        internal timeout and its worker is stopped.
        """
        if self.task_timeout is None and (self.max_workers == 1 or len(tasks) <= 1):
            results = [run_sweep_task(task) for task in tasks]
            results.sort(key=lambda r: r.task_id)
            return results

        results = []
        start_time = time.time()
        executor = concurrent.futures.ProcessPoolExecutor(max_workers=self.max_workers)
        try:
            futures = {executor.submit(run_sweep_task, task): task for task in tasks}
            deadline = None
            if self.task_timeout is not None:
                rounds = -(-len(tasks) // self.max_workers)
                deadline = self.task_timeout * rounds
            done, not_done = concurrent.futures.wait(futures, timeout=deadline)

            for future in done:
                task = futures[future]
                try:
                    results.append(future.result())
                except Exception as e:
                    logging.error(f"Worker for task {task.id} died: {e}")
                    results.append(self._failed(task, str(e), 0))

            waited_ms = (time.time() - start_time) * 1000
            for future in not_done:
                task = futures[future]
                future.cancel()
                logging.error(f"Sweep task {task.id} (n={task.n}) timed out after {self.task_timeout}s")
                results.append(self._failed(task, f"timed out after {self.task_timeout}s", waited_ms))
            if not_done:
                _stop_workers(executor)
        finally:
            executor.shutdown(wait=True, cancel_futures=True)

        results.sort(key=lambda r: r.task_id)
        return results

    @staticmethod
    def _failed(task: SweepTask, message: str, elapsed_ms: float) -> SweepResult:
        return SweepResult(
            task_id=task.id,
            result=None,
            processing_time_ms=elapsed_ms,
            error=message,
            error_kind="internal"
        )

    def aggregate_results(self, results: List[SweepResult]) -> Dict[str, Any]:
        """Summarize a finished sweep"""
        successful = [r for r in results if r.error is None]
        failed = [r for r in results if r.error is not None]

        return {
            "results": [r.result for r in successful],
            "tasks_completed": len(successful),
            "tasks_failed": len(failed),
            "total_processing_time_ms": sum(r.processing_time_ms for r in results),
            "errors": [{"task": r.task_id, "kind": r.error_kind, "error": r.error} for r in failed],
        }
