"""HTTP service boundary.

Endpoint table (all JSON unless noted):

    POST /api/v1/problems                        organizer, problem manifest
    PUT  /api/v1/problems/{pid}/tests/{tid}      organizer, raw input bytes;
         ?visibility=public|private&best_known=…  optional per-test limit
         overrides via cpu_seconds/wall_seconds/memory_bytes/output_bytes/
         disk_bytes query params
    POST /api/v1/problems/{pid}/finalize         organizer
    POST /api/v1/submissions                     contestant -> 202 {submission_id}
    GET  /api/v1/submissions/{sid}               redacted report / status
    GET  /api/v1/problems/{pid}/leaderboard?scope=public|final
    GET  /api/v1/problems/{pid}/progress
    GET  /api/v1/problems                        listing (any valid token)
    GET  /api/v1/health                          unauthenticated

Redaction is constructive: views are built from explicitly allowed fields per
role, never by deleting keys, so private test ids, objectives and per-test
scores cannot leak into a contestant response by omission.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .leaderboard import Scope
from .scheduler import JobState
from .service import JudgeService, TokenEntry
from .state import ProblemState, SubmissionState
from .types import (
    EvaluationReport,
    JudgeError,
    Phase,
    ResourceLimits,
    Role,
    SubmissionKind,
    TestStatus,
    ValidationError,
    Visibility,
    dec_str,
)

_STATUS_BY_KIND = {
    "BadToken": 401,
    "WrongRole": 403,
    "NotOwner": 403,
    "UnknownProblem": 404,
    "UnknownSubmission": 404,
    "Finalized": 409,
    "NotFinalized": 409,
    "AlreadyFinalized": 409,
    "TestLocked": 409,
    "Validation": 422,
    "UnknownProfile": 422,
    "SchemaViolation": 422,
    "NonPositiveObjective": 422,
    "QueueFull": 429,
}


class BadToken(JudgeError):
    kind = "BadToken"


class WrongRole(JudgeError):
    kind = "WrongRole"


class NotOwner(JudgeError):
    kind = "NotOwner"


class SubmissionIn(BaseModel):
    problem_id: str
    kind: str = "SOURCE"
    language_profile: str = ""
    payload: str  # base64


def redact_report(
    problem: ProblemState,
    sub: SubmissionState,
    report: EvaluationReport | None,
    job_states: dict[str, JobState],
    principal: TokenEntry,
    stderr_lookup=None,
) -> dict:
    """Build the submission view a principal is allowed to see.

    Organizers see everything.  The owning contestant sees detailed public
    results plus only the evaluated count for private tests.  Non-owners are
    rejected upstream before this is called.
    """
    is_organizer = principal.role is Role.ORGANIZER
    public_ids = problem.public_test_ids()
    private_ids = problem.private_test_ids()
    by_test = {r.test_id: r for r in report.results} if report else {}

    def result_row(tid: str, with_stderr: bool) -> dict:
        row = {"test_id": tid, "state": job_states.get(tid, JobState.QUEUED).value}
        scored = by_test.get(tid)
        stored = sub.results.get(tid)
        if scored is not None:
            row["status"] = scored.status.value
            row["score"] = dec_str(scored.score)
            if scored.objective is not None:
                row["objective"] = dec_str(scored.objective)
            row["usage"] = scored.usage.to_json()
        elif stored is not None:  # mid-evaluation partial result
            row["status"] = stored.status.value
            if stored.status is TestStatus.OK and stored.objective is not None:
                row["objective"] = dec_str(stored.objective)
        if with_stderr and stored is not None and stored.stderr_sha and stderr_lookup:
            row["stderr_excerpt"] = stderr_lookup(stored.stderr_sha)
        return row

    view = {
        "submission_id": sub.submission_id,
        "problem_id": sub.problem_id,
        "contestant_id": sub.contestant_id,
        "kind": sub.kind.value,
        "language_profile": sub.language_profile,
        "submitted_at": sub.submitted_at,
        "finished": report is not None,
        "aggregate_status": report.aggregate_status.value if report else None,
        "evaluated_at": report.evaluated_at if report else None,
        "public_results": [result_row(t, with_stderr=True) for t in public_ids],
        "public_score": dec_str(
            sum((r.score for r in (report.results if report else []) if r.test_id in set(public_ids)), start=0)
        ) if report else None,
        "private_summary": {
            "total": len(private_ids),
            "evaluated": sum(1 for t in private_ids if t in sub.results),
            "running": sum(
                1 for t in private_ids if job_states.get(t) is JobState.RUNNING
            ),
        },
    }
    if report is not None and report.aggregate_status.value == "COMPILE_ERROR":
        view["compile_message"] = sub.report.compile_message if sub.report else ""
    if is_organizer:
        view["private_results"] = [result_row(t, with_stderr=False) for t in private_ids]
        view["total_score"] = dec_str(report.total_score) if report else None
    return view


def create_app(service: JudgeService, static_dir=None) -> FastAPI:
    app = FastAPI(title="optjudge", docs_url=None, redoc_url=None)

    def principal(authorization: str | None = Header(default=None)) -> TokenEntry:
        if not authorization or not authorization.startswith("Bearer "):
            raise BadToken("missing bearer token")
        entry = service.tokens.get(authorization[len("Bearer "):].strip())
        if entry is None:
            raise BadToken("unknown token")
        return entry

    def organizer(p: TokenEntry = Depends(principal)) -> TokenEntry:
        if p.role is not Role.ORGANIZER:
            raise WrongRole("organizer role required")
        return p

    def contestant(p: TokenEntry = Depends(principal)) -> TokenEntry:
        if p.role is not Role.CONTESTANT:
            raise WrongRole("contestant role required")
        return p

    @app.exception_handler(JudgeError)
    async def judge_error_handler(request, exc: JudgeError):
        code = _STATUS_BY_KIND.get(exc.kind, 500)
        return JSONResponse(
            status_code=code,
            content={"error": {"kind": exc.kind, "message": exc.message}},
        )

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "pending_jobs": service.pool.pending_jobs()}

    @app.get("/api/v1/problems")
    def list_problems(p: TokenEntry = Depends(principal)):
        with service.lock:
            return {
                "problems": [
                    {
                        "problem_id": prob.problem_id,
                        "title": prob.title,
                        "direction": prob.direction.value,
                        "checker": prob.checker.value,
                        "phase": prob.phase.value,
                        "public_tests": len(prob.public_test_ids()),
                        "private_tests": len(prob.private_test_ids()),
                        "deadline": prob.deadline_ms,
                    }
                    for prob in service.state.problems.values()
                ]
            }

    @app.post("/api/v1/problems", status_code=201)
    async def create_problem(request: Request, p: TokenEntry = Depends(organizer)):
        manifest = await request.json()
        pid = service.create_problem(manifest)
        return {"problem_id": pid}

    @app.put("/api/v1/problems/{pid}/tests/{tid}")
    async def put_test(
        pid: str,
        tid: str,
        request: Request,
        visibility: str = Query(...),
        best_known: str | None = Query(default=None),
        cpu_seconds: str | None = Query(default=None),
        wall_seconds: str | None = Query(default=None),
        memory_bytes: int | None = Query(default=None),
        output_bytes: int | None = Query(default=None),
        disk_bytes: int | None = Query(default=None),
        p: TokenEntry = Depends(organizer),
    ):
        if visibility not in ("public", "private"):
            raise ValidationError("visibility must be public or private")
        vis = Visibility.PUBLIC if visibility == "public" else Visibility.PRIVATE
        overrides = None
        if any(v is not None for v in (cpu_seconds, wall_seconds, memory_bytes, output_bytes, disk_bytes)):
            base = service._problem(pid).limits
            overrides = ResourceLimits.create(
                cpu_seconds if cpu_seconds is not None else base.cpu_seconds,
                memory_bytes if memory_bytes is not None else base.memory_bytes,
                output_bytes if output_bytes is not None else base.output_bytes,
                disk_bytes if disk_bytes is not None else base.disk_bytes,
                wall_seconds,
            )
        body = await request.body()
        digest = service.add_test(pid, tid, vis, body, best_known, overrides)
        return {"problem_id": pid, "test_id": tid, "sha256": digest}

    @app.post("/api/v1/problems/{pid}/finalize")
    def finalize(pid: str, p: TokenEntry = Depends(organizer)):
        entries = service.finalize(pid)
        return {"problem_id": pid, "phase": Phase.FINALIZED.value, "entries": entries}

    @app.post("/api/v1/submissions", status_code=202)
    def submit(body: SubmissionIn, p: TokenEntry = Depends(contestant)):
        try:
            kind = SubmissionKind(body.kind.upper())
        except ValueError:
            raise ValidationError(f"kind must be SOURCE or BINARY, got {body.kind!r}")
        try:
            payload = base64.b64decode(body.payload, validate=True)
        except (binascii.Error, ValueError):
            raise ValidationError("payload must be valid base64")
        sid = service.submit(body.problem_id, p.contestant_id, kind, body.language_profile, payload)
        return {"submission_id": sid}

    @app.get("/api/v1/submissions/{sid}")
    def submission_view(sid: str, p: TokenEntry = Depends(principal)):
        with service.lock:
            sub = service._submission(sid)
            if p.role is not Role.ORGANIZER and sub.contestant_id != p.contestant_id:
                raise NotOwner("not your submission")
            prob = service.state.problems[sub.problem_id]
            report = service.materialize_report(sid)
            job_states = service.job_status(sid)

            def stderr_lookup(sha: str) -> str:
                return service.store.blobs.get(sha).decode("utf-8", errors="replace")

            view = redact_report(prob, sub, report, job_states, p, stderr_lookup)
            points = service.submission_points(sid)
            view["relative_points"] = dec_str(points) if points is not None else None
            return view

    @app.get("/api/v1/problems/{pid}/leaderboard")
    def leaderboard_view(pid: str, scope: str = Query(default="public"), p: TokenEntry = Depends(principal)):
        if scope not in ("public", "final"):
            raise ValidationError("scope must be public or final")
        with service.lock:
            prob = service._problem(pid)
            if scope == "final":
                entries = service.final_entries_json(pid)
            else:
                entries = [e.to_json() for e in service.standings(pid, Scope.PUBLIC_LIVE)]
            return {
                "problem_id": pid,
                "scope": scope,
                "phase": prob.phase.value,
                "entries": entries,
            }

    @app.get("/api/v1/problems/{pid}/progress")
    def progress_view(pid: str, p: TokenEntry = Depends(principal)):
        points = service.progress(pid)
        return {"problem_id": pid, "points": [pt.to_json() for pt in points]}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
