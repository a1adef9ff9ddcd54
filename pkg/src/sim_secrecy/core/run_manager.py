"""Registry of long-running experiment jobs started through the server."""

from __future__ import annotations

import asyncio
import logging
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import anyio

from .exceptions import RunLimitError, RunNotFoundError

logger = logging.getLogger(__name__)

PENDING = "pending"
RUNNING = "running"
SUCCEEDED = "succeeded"
FAILED = "failed"


@dataclass
class ExperimentRun:
    """
    One submitted job (training, sweep, ablation...).

    The job itself is a blocking callable returning a JSON-ready dict; it runs in a
    worker thread so the event loop keeps serving requests.
    """

    run_id: str
    kind: str
    params: dict
    created_at: float
    status: str = PENDING
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    result: Optional[dict] = None
    error: Optional[dict] = None
    _task: Optional[asyncio.Task] = field(default=None, repr=False)

    @property
    def done(self) -> bool:
        return self.status in (SUCCEEDED, FAILED)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "kind": self.kind,
            "params": self.params,
            "status": self.status,
            "created_at": self.created_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "result": self.result,
            "error": self.error,
        }


class RunManager:
    """
    Coroutine-safe registry of experiment runs.

    At most `max_concurrent_runs` runs may be pending or running at once; finished
    runs are kept for `retention_seconds` so clients can fetch their results.
    """

    def __init__(self, max_concurrent_runs: int = 2, retention_seconds: int = 3600):
        self._max_concurrent_runs = max_concurrent_runs
        self._retention_seconds = retention_seconds
        self._runs: Dict[str, ExperimentRun] = {}
        self._lock = asyncio.Lock()

    async def submit(
        self, kind: str, func: Callable[[str], dict], params: Optional[dict] = None
    ) -> ExperimentRun:
        """
        Register a job and start it in the background.

        `func` is called in a worker thread with the new run ID.

        Raises:
            RunLimitError: If the concurrency limit is reached
        """
        async with self._lock:
            if self.active_count >= self._max_concurrent_runs:
                raise RunLimitError(self._max_concurrent_runs)

            run = ExperimentRun(
                run_id=f"run_{uuid.uuid4().hex[:16]}",
                kind=kind,
                params=dict(params or {}),
                created_at=time.time(),
            )
            self._runs[run.run_id] = run
            run._task = asyncio.create_task(self._execute(run, func))
            logger.info(f"Submitted {kind} run {run.run_id}")
            return run

    async def _execute(self, run: ExperimentRun, func: Callable[[str], Any]) -> None:
        run.status = RUNNING
        run.started_at = time.time()
        try:
            run.result = await anyio.to_thread.run_sync(func, run.run_id)
            run.status = SUCCEEDED
            logger.info(f"Run {run.run_id} succeeded")
        except Exception as e:
            run.status = FAILED
            run.error = {"type": type(e).__name__, "message": str(e)}
            logger.error(f"Run {run.run_id} failed: {e}")
        finally:
            run.finished_at = time.time()

    def get_run(self, run_id: str) -> ExperimentRun:
        """
        Raises:
            RunNotFoundError: If no such run is registered
        """
        run = self._runs.get(run_id)
        if run is None:
            raise RunNotFoundError(run_id)
        return run

    def list_runs(self, status: Optional[str] = None) -> list[dict]:
        runs = list(self._runs.values())
        if status:
            runs = [r for r in runs if r.status == status.lower()]
        return [r.to_dict() for r in runs]

    async def wait(self, run_id: str) -> ExperimentRun:
        """Block until a run finishes and return it."""
        run = self.get_run(run_id)
        if run._task is not None:
            await asyncio.shield(run._task)
        return run

    async def prune_finished(self) -> int:
        """Drop finished runs older than the retention period."""
        now = time.time()
        async with self._lock:
            expired = [
                run_id
                for run_id, run in self._runs.items()
                if run.done and now - (run.finished_at or now) > self._retention_seconds
            ]
            for run_id in expired:
                del self._runs[run_id]
        if expired:
            logger.info(f"Pruned {len(expired)} finished run(s)")
        return len(expired)

    async def shutdown(self) -> int:
        """
        Stop waiting on unfinished runs.

        Worker threads cannot be interrupted; their results are simply discarded.
        """
        pending = [r for r in self._runs.values() if not r.done and r._task is not None]
        for run in pending:
            run._task.cancel()
        for run in pending:
            try:
                await run._task
            except asyncio.CancelledError:
                pass
            run.status = FAILED
            run.error = {"type": "Cancelled", "message": "server shut down"}
        if pending:
            logger.info(f"Abandoned {len(pending)} unfinished run(s) on shutdown")
        return len(pending)

    @property
    def active_count(self) -> int:
        return sum(1 for r in self._runs.values() if not r.done)

    @property
    def run_count(self) -> int:
        return len(self._runs)


class RunSweeper:
    """Background task that periodically prunes expired runs."""

    def __init__(self, run_manager: RunManager, interval_seconds: int = 60):
        self._run_manager = run_manager
        self._interval = interval_seconds
        self._task: Optional[asyncio.Task] = None
        self._shutdown_event = asyncio.Event()

    async def start(self) -> None:
        self._shutdown_event.clear()
        self._task = asyncio.create_task(self._sweep_loop())
        logger.info(f"Run sweeper started (interval: {self._interval}s)")

    async def stop(self) -> None:
        if self._task:
            self._shutdown_event.set()
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
            logger.info("Run sweeper stopped")

    async def _sweep_loop(self) -> None:
        while not self._shutdown_event.is_set():
            try:
                await asyncio.wait_for(self._shutdown_event.wait(), timeout=self._interval)
            except asyncio.TimeoutError:
                try:
                    await self._run_manager.prune_finished()
                except Exception as e:
                    logger.error(f"Error during run sweep: {e}")
