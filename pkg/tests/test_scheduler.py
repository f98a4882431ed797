import threading
import time

import pytest

from optjudge.scheduler import EvalJob, EvalPool, JobState, PoolConfig
from optjudge.types import QueueFull, SandboxSystemError


class Harness:
    """Pool wiring with scriptable job behavior."""

    def __init__(self, tests_by_sid, job_seconds=0.0, fail_once=(), fail_always=()):
        self.tests_by_sid = tests_by_sid
        self.job_seconds = job_seconds
        self.fail_once = set(fail_once)
        self.fail_always = set(fail_always)
        self.completed: list[str] = []
        self.dead: list[str] = []
        self.attempts: dict[str, int] = {}
        self.lock = threading.Lock()
        self.concurrent = 0
        self.max_concurrent = 0

    def prepare(self, sid, test_ids):
        return test_ids if test_ids is not None else self.tests_by_sid[sid]

    def run_job(self, job: EvalJob):
        key = f"{job.submission_id}/{job.test_id}"
        with self.lock:
            self.attempts[key] = self.attempts.get(key, 0) + 1
            self.concurrent += 1
            self.max_concurrent = max(self.max_concurrent, self.concurrent)
        try:
            if self.job_seconds:
                time.sleep(self.job_seconds)
            if key in self.fail_always or (key in self.fail_once and self.attempts[key] == 1):
                raise SandboxSystemError("injected fault")
            with self.lock:
                self.completed.append(key)
        finally:
            with self.lock:
                self.concurrent -= 1

    def dead_job(self, job: EvalJob):
        with self.lock:
            self.dead.append(f"{job.submission_id}/{job.test_id}")

    def pool(self, workers=2, capacity=10_000) -> EvalPool:
        return EvalPool(PoolConfig(workers, capacity), self.prepare, self.run_job, self.dead_job)


def test_fan_out_one_job_per_test():
    h = Harness({"s1": ["t1", "t2", "t3"]})
    pool = h.pool()
    pool.start()
    pool.submit_prepare("s1", 3)
    assert pool.wait_idle(10)
    pool.stop()
    assert sorted(h.completed) == ["s1/t1", "s1/t2", "s1/t3"]
    states = pool.job_states("s1")
    assert {j.state for j in states.values()} == {JobState.DONE}


def test_serial_worker_completes_in_enqueue_order():
    h = Harness({"s1": ["a", "b"], "s2": ["c"]})
    pool = h.pool(workers=1)
    pool.start()
    pool.submit_prepare("s1", 2)
    pool.submit_prepare("s2", 1)
    assert pool.wait_idle(10)
    pool.stop()
    assert h.completed == ["s1/a", "s1/b", "s2/c"]


def test_bounded_concurrency():
    h = Harness({f"s{i}": ["t1", "t2"] for i in range(5)}, job_seconds=0.05)
    pool = h.pool(workers=3)
    pool.start()
    for i in range(5):
        pool.submit_prepare(f"s{i}", 2)
    assert pool.wait_idle(30)
    pool.stop()
    assert h.max_concurrent <= 3
    assert len(h.completed) == 10


def test_queue_capacity_rejects_before_accepting():
    h = Harness({"s1": ["t1", "t2", "t3"]})
    pool = h.pool(workers=1, capacity=2)
    with pytest.raises(QueueFull):
        pool.submit_prepare("s1", 3)


def test_judge_fault_retried_once_then_succeeds():
    h = Harness({"s1": ["t1", "t2"]}, fail_once={"s1/t1"})
    pool = h.pool()
    pool.start()
    pool.submit_prepare("s1", 2)
    assert pool.wait_idle(10)
    pool.stop()
    assert h.attempts["s1/t1"] == 2
    assert sorted(h.completed) == ["s1/t1", "s1/t2"]
    assert pool.job_states("s1")["t1"].state is JobState.DONE
    assert h.dead == []


def test_two_faults_mark_job_dead():
    h = Harness({"s1": ["t1", "t2"]}, fail_always={"s1/t2"})
    pool = h.pool()
    pool.start()
    pool.submit_prepare("s1", 2)
    assert pool.wait_idle(10)
    pool.stop()
    assert h.attempts["s1/t2"] == 2
    assert h.dead == ["s1/t2"]
    states = pool.job_states("s1")
    assert states["t2"].state is JobState.DEAD
    assert states["t2"].attempt == 2
    assert states["t1"].state is JobState.DONE


def test_makespan_on_five_workers():
    # 20 uniform 0.1s jobs on 5 workers: ceil(20/5) * 0.1 * 1.5 slack
    h = Harness({"s1": [f"t{i}" for i in range(20)]}, job_seconds=0.1)
    pool = h.pool(workers=5)
    pool.start()
    start = time.monotonic()
    pool.submit_prepare("s1", 20)
    assert pool.wait_idle(30)
    elapsed = time.monotonic() - start
    pool.stop()
    assert len(h.completed) == 20
    assert elapsed <= (20 // 5) * 0.1 * 1.5


def test_liveness_every_job_reaches_done_or_dead():
    h = Harness(
        {f"s{i}": ["t1", "t2", "t3"] for i in range(4)},
        fail_once={"s0/t1", "s2/t3"},
        fail_always={"s3/t2"},
    )
    pool = h.pool(workers=3)
    pool.start()
    for i in range(4):
        pool.submit_prepare(f"s{i}", 3)
    assert pool.wait_idle(30)
    pool.stop()
    for i in range(4):
        for job in pool.job_states(f"s{i}").values():
            assert job.state in (JobState.DONE, JobState.DEAD)
    assert len(h.completed) + len(h.dead) == 12
