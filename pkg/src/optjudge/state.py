"""Materialized view of the event log.

`JudgeState.apply` is the single place events become state, so a replayed
log reconstructs exactly what the live service held.  The view keeps hashes,
not blob contents; callers fetch payloads from the blob store when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .store import Event
from .types import (
    CheckerKind,
    Direction,
    Phase,
    ResourceLimits,
    SchemaViolation,
    SubmissionKind,
    TestStatus,
    Visibility,
    parse_dec,
)


@dataclass
class TestState:
    test_id: str
    visibility: Visibility
    input_sha: str
    best_known: Fraction | None = None
    limits_override: ResourceLimits | None = None
    locked: bool = False  # input immutable once something was judged on it


@dataclass
class ProblemState:
    problem_id: str
    title: str
    direction: Direction
    checker: CheckerKind
    limits: ResourceLimits
    deadline_ms: int | None = None
    phase: Phase = Phase.RUNNING
    tests: dict[str, TestState] = field(default_factory=dict)
    test_order: list[str] = field(default_factory=list)
    finalized_entries: list[dict] | None = None
    finalized_at: int | None = None

    def public_test_ids(self) -> list[str]:
        return [t for t in self.test_order if self.tests[t].visibility is Visibility.PUBLIC]

    def private_test_ids(self) -> list[str]:
        return [t for t in self.test_order if self.tests[t].visibility is Visibility.PRIVATE]

    def test_limits(self, test_id: str) -> ResourceLimits:
        return self.tests[test_id].limits_override or self.limits


@dataclass
class StoredResult:
    test_id: str
    status: TestStatus
    objective: Fraction | None
    attempt: int
    cpu_seconds: float
    wall_seconds: float
    peak_memory_bytes: int
    stderr_sha: str | None = None
    stdout_sha: str | None = None


@dataclass
class ReportState:
    compile_failed: bool
    compile_message: str
    compile_stderr_sha: str | None
    evaluated_at: int


@dataclass
class SubmissionState:
    submission_id: str
    problem_id: str
    contestant_id: str
    kind: SubmissionKind
    language_profile: str
    payload_sha: str
    submitted_at: int
    seq: int
    results: dict[str, StoredResult] = field(default_factory=dict)
    report: ReportState | None = None


class JudgeState:
    def __init__(self):
        self.problems: dict[str, ProblemState] = {}
        self.submissions: dict[str, SubmissionState] = {}
        self._problem_subs: dict[str, list[str]] = {}

    def problem_submissions(self, problem_id: str) -> list[SubmissionState]:
        """Submissions of one problem in arrival order."""
        return [self.submissions[s] for s in self._problem_subs.get(problem_id, [])]

    # ------------------------------------------------------------------

    def apply(self, ev: Event):
        handler = getattr(self, f"_on_{ev.kind.lower()}", None)
        if handler is None:
            raise SchemaViolation(f"no handler for event kind {ev.kind}")
        try:
            handler(ev)
        except (KeyError, ValueError, TypeError) as e:
            raise SchemaViolation(f"bad {ev.kind} payload at seq {ev.seq}: {e}")

    def _on_problem_created(self, ev: Event):
        p = ev.payload
        pid = p["problem_id"]
        self.problems[pid] = ProblemState(
            problem_id=pid,
            title=p["title"],
            direction=Direction(p["direction"]),
            checker=CheckerKind(p["checker"]),
            limits=ResourceLimits.from_json(p["limits"]),
            deadline_ms=p.get("deadline_ms"),
        )
        self._problem_subs.setdefault(pid, [])

    def _on_test_added(self, ev: Event):
        p = ev.payload
        prob = self.problems[p["problem_id"]]
        test = TestState(
            test_id=p["test_id"],
            visibility=Visibility(p["visibility"]),
            input_sha=p["input_sha256"],
            best_known=parse_dec(p["best_known"]) if p.get("best_known") else None,
            limits_override=(
                ResourceLimits.from_json(p["limits_override"])
                if p.get("limits_override")
                else None
            ),
        )
        if test.test_id not in prob.tests:
            prob.test_order.append(test.test_id)
        prob.tests[test.test_id] = test

    def _on_submission_received(self, ev: Event):
        p = ev.payload
        sub = SubmissionState(
            submission_id=p["submission_id"],
            problem_id=p["problem_id"],
            contestant_id=p["contestant_id"],
            kind=SubmissionKind(p["kind"]),
            language_profile=p.get("language_profile", ""),
            payload_sha=p["payload_sha256"],
            submitted_at=p["submitted_at"],
            seq=ev.seq,
        )
        self.submissions[sub.submission_id] = sub
        self._problem_subs.setdefault(sub.problem_id, []).append(sub.submission_id)

    def _on_job_done(self, ev: Event):
        p = ev.payload
        sub = self.submissions[p["submission_id"]]
        result = StoredResult(
            test_id=p["test_id"],
            status=TestStatus(p["status"]),
            objective=parse_dec(p["objective"]) if p.get("objective") else None,
            attempt=p.get("attempt", 1),
            cpu_seconds=p.get("cpu_seconds", 0.0),
            wall_seconds=p.get("wall_seconds", 0.0),
            peak_memory_bytes=p.get("peak_memory_bytes", 0),
            stderr_sha=p.get("stderr_sha256"),
            stdout_sha=p.get("stdout_sha256"),
        )
        sub.results[result.test_id] = result
        prob = self.problems[sub.problem_id]
        if result.test_id in prob.tests:
            prob.tests[result.test_id].locked = True

    def _on_report_emitted(self, ev: Event):
        p = ev.payload
        sub = self.submissions[p["submission_id"]]
        if sub.report is not None:
            return  # duplicate reports are ignored idempotently
        sub.report = ReportState(
            compile_failed=p.get("compile_failed", False),
            compile_message=p.get("compile_message", ""),
            compile_stderr_sha=p.get("compile_stderr_sha256"),
            evaluated_at=p["evaluated_at"],
        )

    def _on_best_known_changed(self, ev: Event):
        p = ev.payload
        prob = self.problems[p["problem_id"]]
        prob.tests[p["test_id"]].best_known = parse_dec(p["best_known"])

    def _on_finalized(self, ev: Event):
        p = ev.payload
        prob = self.problems[p["problem_id"]]
        prob.phase = Phase.FINALIZED
        prob.finalized_entries = p["entries"]
        prob.finalized_at = ev.ts
