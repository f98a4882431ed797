"""Composition root: wires store, sandbox, scheduler and leaderboard together.

All mutation funnels through `_emit`, which appends to the event log and
applies the event to the in-memory view under one lock; workers execute
sandbox calls outside it.  Submission ids are derived from the event
sequence, so a recovered run reproduces the ids of an uninterrupted one.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .checkers import run_checker, validate_instance
from .leaderboard import (
    LeaderboardEntry,
    Scope,
    compute_standings,
    derive_best_known_changes,
    progress_series,
    result_score,
    standings,
    submission_score,
)
from .sandbox import CompileFailure, Executable, Sandbox, default_profiles, load_profiles_file
from .scheduler import EvalJob, EvalPool, JobState, PoolConfig
from .scoring import aggregate_report, relative_score
from .state import JudgeState, ProblemState, SubmissionState
from .store import Event, Store
from .types import (
    AlreadyFinalized,
    CheckerKind,
    ContestFinalized,
    Direction,
    EvaluationReport,
    NotFinalized,
    Phase,
    ResourceLimits,
    ResourceUsage,
    Role,
    SandboxSystemError,
    SubmissionKind,
    Submission,
    TestLocked,
    TestResult,
    TestStatus,
    UnknownProblem,
    UnknownSubmission,
    ValidationError,
    Visibility,
    dec_str,
    parse_dec,
)


@dataclass(frozen=True)
class TokenEntry:
    token: str
    role: Role
    contestant_id: str


@dataclass
class ServiceConfig:
    data_dir: Path
    listen: str = "127.0.0.1:8077"
    workers: int = 2
    queue_capacity: int = 10_000
    tokens: list[TokenEntry] = field(default_factory=list)
    profiles_file: Path | None = None

    @classmethod
    def load(cls, path: Path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text())
        tokens = [
            TokenEntry(t["token"], Role(t["role"]), t.get("contestant_id", ""))
            for t in doc.get("tokens", [])
        ]
        base = Path(path).parent
        profiles = doc.get("profiles_file")
        return cls(
            data_dir=base / doc["data_dir"] if not Path(doc["data_dir"]).is_absolute() else Path(doc["data_dir"]),
            listen=doc.get("listen", "127.0.0.1:8077"),
            workers=int(doc.get("workers", 2)),
            queue_capacity=int(doc.get("queue_capacity", 10_000)),
            tokens=tokens,
            profiles_file=(base / profiles if profiles and not Path(profiles).is_absolute() else profiles and Path(profiles)),
        )


def _now_ms() -> int:
    return int(time.time() * 1000)


class JudgeService:
    def __init__(self, config: ServiceConfig, clock=None):
        self.config = config
        self.clock = clock or _now_ms
        self.store = Store(config.data_dir)
        self.state: JudgeState = self.store.snapshot_state()
        profiles = (
            load_profiles_file(config.profiles_file)
            if config.profiles_file
            else default_profiles()
        )
        self.sandbox = Sandbox(Path(config.data_dir) / "jobs", profiles)
        self.lock = threading.RLock()
        self.pool = EvalPool(
            PoolConfig(config.workers, config.queue_capacity),
            self._prepare,
            self._run_job,
            self._dead_job,
        )
        self._executables: dict[str, Executable] = {}
        self.tokens = {t.token: t for t in config.tokens}

    def start(self):
        self.pool.start()
        self._recover()

    def stop(self):
        self.pool.stop()
        with self.lock:
            for exe in self._executables.values():
                self.sandbox.cleanup(exe)
            self._executables.clear()
        self.store.close()

    # ------------------------------------------------------------------
    # event funnel

    def _emit(self, kind: str, payload: dict) -> Event:
        ts = self.clock()
        seq = self.store.append(ts, kind, payload)
        ev = Event(seq, ts, kind, payload)
        self.state.apply(ev)
        return ev

    # ------------------------------------------------------------------
    # organizer operations

    def create_problem(self, manifest: dict) -> str:
        try:
            pid = manifest["problem_id"]
            title = manifest.get("title", pid)
            direction = Direction(manifest["direction"])
            checker = CheckerKind(manifest["checker"])
            limits = ResourceLimits.from_json(manifest["limits"])
        except (KeyError, ValueError, TypeError) as e:
            raise ValidationError(f"bad problem manifest: {e}")
        if not pid or not isinstance(pid, str):
            raise ValidationError("problem_id must be a nonempty string")
        deadline = manifest.get("deadline")
        with self.lock:
            if pid in self.state.problems:
                raise ValidationError(f"problem {pid} already exists")
            self._emit(
                "PROBLEM_CREATED",
                {
                    "problem_id": pid,
                    "title": title,
                    "direction": direction.value,
                    "checker": checker.value,
                    "limits": limits.to_json(),
                    "deadline_ms": deadline,
                },
            )
        return pid

    def add_test(
        self,
        problem_id: str,
        test_id: str,
        visibility: Visibility,
        input_bytes: bytes,
        best_known=None,
        limits_override: ResourceLimits | None = None,
    ) -> str:
        if not test_id:
            raise ValidationError("test_id must be nonempty")
        with self.lock:
            prob = self._problem(problem_id)
            if prob.phase is Phase.FINALIZED:
                raise ContestFinalized(problem_id)
            existing = prob.tests.get(test_id)
            if existing is not None and existing.locked:
                raise TestLocked(f"test {test_id} already judged; input is immutable")
            validate_instance(prob.checker, input_bytes)
            bk = None
            if best_known is not None:
                bk = parse_dec(best_known)
                if bk <= 0:
                    raise ValidationError("best_known must be strictly positive")
            digest = self.store.blobs.put(input_bytes)
            payload = {
                "problem_id": problem_id,
                "test_id": test_id,
                "visibility": visibility.value,
                "input_sha256": digest,
            }
            if bk is not None:
                payload["best_known"] = dec_str(bk)
            if limits_override is not None:
                payload["limits_override"] = limits_override.to_json()
            self._emit("TEST_ADDED", payload)
        return digest

    def finalize(self, problem_id: str) -> list[dict]:
        with self.lock:
            prob = self._problem(problem_id)
            if prob.phase is Phase.FINALIZED:
                raise AlreadyFinalized(problem_id)
            entries = compute_standings(self.state, prob, prob.private_test_ids())
            self._emit(
                "FINALIZED",
                {"problem_id": problem_id, "entries": [e.to_json() for e in entries]},
            )
            return list(prob.finalized_entries or [])

    # ------------------------------------------------------------------
    # contestant operations

    def submit(
        self,
        problem_id: str,
        contestant_id: str,
        kind: SubmissionKind,
        language_profile: str,
        payload: bytes,
    ) -> str:
        if not payload:
            raise ValidationError("payload must be nonempty")
        with self.lock:
            prob = self._problem(problem_id)
            if prob.phase is Phase.FINALIZED:
                raise ContestFinalized(f"{problem_id} is finalized")
            if not prob.test_order:
                raise ValidationError(f"{problem_id} has no tests yet")
            if kind is SubmissionKind.SOURCE:
                self.sandbox.profile(language_profile)  # raises UnknownProfile
            else:
                language_profile = ""
            sid = f"s{self.store.last_seq + 1:08d}"
            # reserve pool capacity first so a full queue rejects before the
            # submission is recorded
            self.pool.submit_prepare(sid, len(prob.test_order))
            digest = self.store.blobs.put(payload)
            self._emit(
                "SUBMISSION_RECEIVED",
                {
                    "submission_id": sid,
                    "problem_id": problem_id,
                    "contestant_id": contestant_id,
                    "kind": kind.value,
                    "language_profile": language_profile,
                    "payload_sha256": digest,
                    "submitted_at": self.clock(),
                },
            )
        return sid

    # ------------------------------------------------------------------
    # pipeline callbacks (called on worker threads)

    def _prepare(self, submission_id: str, test_ids: list[str] | None) -> list[str]:
        with self.lock:
            sub = self.state.submissions[submission_id]
            prob = self.state.problems[sub.problem_id]
            payload = self.store.blobs.get(sub.payload_sha)
            submission = Submission(
                submission_id=sub.submission_id,
                problem_id=sub.problem_id,
                contestant_id=sub.contestant_id,
                kind=sub.kind,
                language_profile=sub.language_profile,
                payload=payload,
                submitted_at=sub.submitted_at,
            )
            wanted = list(test_ids) if test_ids is not None else list(prob.test_order)

        prepared = None
        fault = None
        for _ in range(2):  # judge-side prepare faults get one retry
            try:
                prepared = self.sandbox.prepare(submission)
                fault = None
                break
            except SandboxSystemError as e:
                fault = e

        with self.lock:
            if fault is not None:
                for tid in wanted:
                    self._record_result_locked(
                        submission_id, tid, 1, TestStatus.SYSTEM_ERROR, None,
                        ResourceUsage(), None, None,
                    )
                self._maybe_finish_locked(submission_id)
                return []
            if isinstance(prepared, CompileFailure):
                stderr_sha = (
                    self.store.blobs.put(prepared.stderr_excerpt)
                    if prepared.stderr_excerpt
                    else None
                )
                payload = {
                    "submission_id": submission_id,
                    "compile_failed": True,
                    "compile_message": prepared.message,
                    "evaluated_at": self.clock(),
                }
                if stderr_sha:
                    payload["compile_stderr_sha256"] = stderr_sha
                self._emit("REPORT_EMITTED", payload)
                self._incorporate_locked(submission_id)
                return []
            self._executables[submission_id] = prepared
            # public feedback first
            public = [t for t in wanted if prob.tests[t].visibility is Visibility.PUBLIC]
            private = [t for t in wanted if prob.tests[t].visibility is Visibility.PRIVATE]
            return public + private

    def _run_job(self, job: EvalJob):
        with self.lock:
            sub = self.state.submissions[job.submission_id]
            prob = self.state.problems[sub.problem_id]
            exe = self._executables.get(job.submission_id)
            if exe is None:
                raise SandboxSystemError(f"no prepared executable for {job.submission_id}")
            test = prob.tests[job.test_id]
            test_input = self.store.blobs.get(test.input_sha)
            limits = prob.test_limits(job.test_id)
            is_public = test.visibility is Visibility.PUBLIC

        outcome = self.sandbox.execute(exe, test_input, limits)

        if outcome.raw_status is TestStatus.OK:
            check = run_checker(prob, test_input, outcome.stdout)
            status = TestStatus.OK if check.feasible else TestStatus.WRONG_ANSWER
            objective = check.objective if check.feasible else None
        else:
            status, objective = outcome.raw_status, None

        # content-addressed writes are safe outside the single-writer lock
        stdout_sha = self.store.blobs.put(outcome.stdout) if outcome.stdout else None
        stderr_sha = (
            self.store.blobs.put(outcome.stderr_excerpt)
            if (is_public and outcome.stderr_excerpt)
            else None
        )
        with self.lock:
            self._record_result_locked(
                job.submission_id, job.test_id, job.attempt, status, objective,
                outcome.usage, stderr_sha, stdout_sha,
            )
            self._maybe_finish_locked(job.submission_id)

    def _dead_job(self, job: EvalJob):
        with self.lock:
            self._record_result_locked(
                job.submission_id, job.test_id, job.attempt,
                TestStatus.SYSTEM_ERROR, None, ResourceUsage(), None, None,
            )
            self._maybe_finish_locked(job.submission_id)

    def _record_result_locked(
        self, submission_id, test_id, attempt, status, objective, usage, stderr_sha, stdout_sha
    ):
        payload = {
            "submission_id": submission_id,
            "test_id": test_id,
            "attempt": attempt,
            "status": status.value,
            "cpu_seconds": round(usage.cpu_seconds, 6),
            "wall_seconds": round(usage.wall_seconds, 6),
            "peak_memory_bytes": usage.peak_memory_bytes,
        }
        if objective is not None:
            payload["objective"] = dec_str(objective)
        if stderr_sha:
            payload["stderr_sha256"] = stderr_sha
        if stdout_sha:
            payload["stdout_sha256"] = stdout_sha
        self._emit("JOB_DONE", payload)

    def _maybe_finish_locked(self, submission_id: str):
        sub = self.state.submissions[submission_id]
        if sub.report is not None:
            return
        prob = self.state.problems[sub.problem_id]
        if any(tid not in sub.results for tid in prob.test_order):
            return
        self._emit(
            "REPORT_EMITTED",
            {
                "submission_id": submission_id,
                "compile_failed": False,
                "evaluated_at": self.clock(),
            },
        )
        self._incorporate_locked(submission_id)
        exe = self._executables.pop(submission_id, None)
        if exe is not None:
            self.sandbox.cleanup(exe)

    def _incorporate_locked(self, submission_id: str):
        sub = self.state.submissions[submission_id]
        if sub.report is None:
            return
        prob = self.state.problems[sub.problem_id]
        for tid, bk in derive_best_known_changes(prob, sub.results):
            self._emit(
                "BEST_KNOWN_CHANGED",
                {"problem_id": prob.problem_id, "test_id": tid, "best_known": dec_str(bk)},
            )

    def _recover(self):
        """Finish what a previous process left behind."""
        with self.lock:
            pending: list[tuple[str, list[str]]] = []
            for prob in self.state.problems.values():
                for sub in self.state.problem_submissions(prob.problem_id):
                    if sub.report is not None:
                        # re-derive best_known changes lost between
                        # REPORT_EMITTED and the crash
                        self._incorporate_locked(sub.submission_id)
                        continue
                    missing = [t for t in prob.test_order if t not in sub.results]
                    if not missing:
                        self._maybe_finish_locked(sub.submission_id)
                    else:
                        pending.append((sub.submission_id, missing))
        for sid, missing in pending:
            self.pool.submit_prepare(sid, len(missing), missing)

    # ------------------------------------------------------------------
    # reads

    def _problem(self, problem_id: str) -> ProblemState:
        prob = self.state.problems.get(problem_id)
        if prob is None:
            raise UnknownProblem(problem_id)
        return prob

    def _submission(self, submission_id: str) -> SubmissionState:
        sub = self.state.submissions.get(submission_id)
        if sub is None:
            raise UnknownSubmission(submission_id)
        return sub

    def standings(self, problem_id: str, scope: Scope) -> list[LeaderboardEntry]:
        with self.lock:
            return standings(self.state, self._problem(problem_id), scope)

    def final_entries_json(self, problem_id: str) -> list[dict]:
        """Frozen FINAL_PRIVATE rows exactly as persisted, byte-stable."""
        with self.lock:
            prob = self._problem(problem_id)
            if prob.phase is not Phase.FINALIZED:
                raise NotFinalized(problem_id)
            return json.loads(json.dumps(prob.finalized_entries or []))

    def progress(self, problem_id: str):
        with self.lock:
            return progress_series(self.state, self._problem(problem_id))

    def materialize_report(self, submission_id: str) -> EvaluationReport | None:
        """Scored report for a finished submission, None while evaluating."""
        with self.lock:
            sub = self._submission(submission_id)
            if sub.report is None:
                return None
            prob = self.state.problems[sub.problem_id]
            if sub.report.compile_failed:
                return aggregate_report(submission_id, [], True, set(), sub.report.evaluated_at)
            results = []
            for tid in prob.test_order:
                r = sub.results[tid]
                results.append(
                    TestResult(
                        test_id=tid,
                        status=r.status,
                        objective=r.objective if r.status is TestStatus.OK else None,
                        score=result_score(prob, r),
                        usage=ResourceUsage(r.cpu_seconds, r.wall_seconds, r.peak_memory_bytes),
                    )
                )
            return aggregate_report(
                submission_id,
                results,
                False,
                set(prob.public_test_ids()),
                sub.report.evaluated_at,
            )

    def submission_points(self, submission_id: str) -> Fraction | None:
        """This submission's points on the live (public) scale; None while running."""
        with self.lock:
            sub = self._submission(submission_id)
            if sub.report is None:
                return None
            prob = self.state.problems[sub.problem_id]
            public = submission_score(prob, sub, prob.public_test_ids())
            entries = compute_standings(self.state, prob, prob.public_test_ids())
            best = entries[0].total_score if entries else Fraction(0)
            if best == 0:
                return Fraction(0)
            return relative_score(public, best)

    def job_status(self, submission_id: str) -> dict[str, JobState]:
        """Per-test job state; tests already judged in a previous process
        count as DONE even though the pool never saw them."""
        sub = self._submission(submission_id)
        prob = self.state.problems[sub.problem_id]
        jobs = self.pool.job_states(submission_id)
        out: dict[str, JobState] = {}
        with self.lock:
            for tid in prob.test_order:
                if tid in jobs:
                    out[tid] = jobs[tid].state
                elif tid in sub.results:
                    out[tid] = JobState.DONE
                else:
                    out[tid] = JobState.QUEUED
        return out
