"""Continuous-evaluation engine: a bounded worker pool over a FIFO job queue.

Each submission fans out into one job per test, public tests first so public
feedback lands before private evaluation.  Job execution is delegated to
callables injected by the service; judge-side faults (SandboxSystemError or
any unexpected exception) earn exactly one retry, after which the job is DEAD
and surfaces as SYSTEM_ERROR.  Jobs are appended in prepare-completion order,
which equals arrival order whenever preparation is quick.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .types import QueueFull, SandboxSystemError

log = logging.getLogger(__name__)


class JobState(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    RETRIED = "RETRIED"
    DEAD = "DEAD"


@dataclass
class EvalJob:
    job_id: str
    submission_id: str
    test_id: str
    state: JobState = JobState.QUEUED
    attempt: int = 1


@dataclass(frozen=True)
class PoolConfig:
    workers: int = 2
    queue_capacity: int = 10_000

    def __post_init__(self):
        if self.workers < 1 or self.queue_capacity < 1:
            raise ValueError("workers and queue_capacity must be >= 1")


class EvalPool:
    """Worker pool; at most `workers` jobs hold RUNNING at any instant.

    prepare_fn(submission_id, test_ids) -> list[test_id]
        compiles/probes and returns the test ids to evaluate (empty when a
        compile failure was already reported).
    run_job_fn(job) -> None
        executes one test and durably records its result before returning.
    dead_job_fn(job) -> None
        records a SYSTEM_ERROR result for a job whose both attempts faulted.
    """

    def __init__(
        self,
        config: PoolConfig,
        prepare_fn: Callable[[str, list[str] | None], list[str]],
        run_job_fn: Callable[[EvalJob], None],
        dead_job_fn: Callable[[EvalJob], None],
    ):
        self.config = config
        self._prepare_fn = prepare_fn
        self._run_job_fn = run_job_fn
        self._dead_job_fn = dead_job_fn
        self._cond = threading.Condition()
        self._queue: deque = deque()  # ("prepare", sid, test_ids|None) | ("job", EvalJob)
        self._reserved: dict[str, int] = {}
        self._jobs: dict[str, dict[str, EvalJob]] = {}
        self._running = 0
        self._stopping = False
        self._threads: list[threading.Thread] = []

    # ------------------------------------------------------------------
    # lifecycle

    def start(self):
        for i in range(self.config.workers):
            t = threading.Thread(target=self._worker, name=f"judge-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self):
        with self._cond:
            self._stopping = True
            self._cond.notify_all()
        for t in self._threads:
            t.join(timeout=30)
        self._threads.clear()

    def wait_idle(self, timeout: float = 60.0) -> bool:
        """Block until no queued, reserved or running work remains."""
        deadline = time.monotonic() + timeout
        with self._cond:
            while self._queue or self._running or self._reserved:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return False
                self._cond.wait(min(remaining, 0.2))
        return True

    # ------------------------------------------------------------------
    # intake

    def pending_jobs(self) -> int:
        with self._cond:
            return sum(1 for kind, *_ in self._queue if kind == "job") + sum(
                self._reserved.values()
            )

    def submit_prepare(self, submission_id: str, n_tests: int, test_ids: list[str] | None = None):
        """Admit a submission; raises QueueFull if its fan-out would not fit."""
        with self._cond:
            pending = sum(1 for kind, *_ in self._queue if kind == "job")
            pending += sum(self._reserved.values())
            if pending + n_tests > self.config.queue_capacity:
                raise QueueFull(f"{pending} pending jobs, capacity {self.config.queue_capacity}")
            self._reserved[submission_id] = n_tests
            self._queue.append(("prepare", submission_id, test_ids))
            self._cond.notify()

    def job_states(self, submission_id: str) -> dict[str, EvalJob]:
        with self._cond:
            return {
                tid: EvalJob(j.job_id, j.submission_id, j.test_id, j.state, j.attempt)
                for tid, j in self._jobs.get(submission_id, {}).items()
            }

    # ------------------------------------------------------------------
    # workers

    def _worker(self):
        while True:
            with self._cond:
                while not self._queue and not self._stopping:
                    self._cond.wait()
                if self._stopping:
                    return
                task = self._queue.popleft()
                if task[0] == "job":
                    job = task[1]
                    job.state = JobState.RUNNING
                self._running += 1
            try:
                if task[0] == "prepare":
                    self._do_prepare(task[1], task[2])
                else:
                    self._do_job(task[1])
            finally:
                with self._cond:
                    self._running -= 1
                    self._cond.notify_all()

    def _do_prepare(self, submission_id: str, test_ids: list[str] | None):
        try:
            ready = self._prepare_fn(submission_id, test_ids)
        except Exception:
            log.exception("prepare failed for %s", submission_id)
            ready = []
        with self._cond:
            self._reserved.pop(submission_id, None)
            jobs = self._jobs.setdefault(submission_id, {})
            for tid in ready:
                job = EvalJob(f"{submission_id}/{tid}", submission_id, tid)
                jobs[tid] = job
                self._queue.append(("job", job))
            self._cond.notify_all()

    def _do_job(self, job: EvalJob):
        try:
            self._run_job_fn(job)
        except Exception as e:
            if not isinstance(e, SandboxSystemError):
                log.exception("job %s crashed", job.job_id)
            if job.attempt == 1:
                with self._cond:
                    job.attempt = 2
                    job.state = JobState.RETRIED
                    self._queue.append(("job", job))
                    self._cond.notify()
            else:
                try:
                    self._dead_job_fn(job)
                finally:
                    with self._cond:
                        job.state = JobState.DEAD
            return
        with self._cond:
            job.state = JobState.DONE
