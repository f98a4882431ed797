"""Rankings, the public/private phase split and the progress time series.

Scores are recomputed at read time against the current best-known values, so
a submission that later loses its lead drops below 100 without any stored
state being rewritten.  Only finalization freezes anything: the private
standings snapshot is persisted verbatim in the FINALIZED event and every
later read returns it unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .scoring import best_known_update, relative_score, score_test
from .state import JudgeState, ProblemState, StoredResult, SubmissionState
from .types import (
    CheckOutcome,
    NotFinalized,
    Phase,
    TestStatus,
    dec_str,
    parse_dec,
)


class Scope(str, Enum):
    PUBLIC_LIVE = "PUBLIC_LIVE"
    FINAL_PRIVATE = "FINAL_PRIVATE"


@dataclass
class LeaderboardEntry:
    contestant_id: str
    best_submission_id: str
    total_score: Fraction
    relative_points: Fraction | None  # None while no feasible submission exists
    rank: int
    achieved_at: int

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "contestant_id": self.contestant_id,
            "best_submission_id": self.best_submission_id,
            "total_score": dec_str(self.total_score),
            "relative_points": (
                dec_str(self.relative_points) if self.relative_points is not None else None
            ),
            "achieved_at": self.achieved_at,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LeaderboardEntry":
        return cls(
            contestant_id=doc["contestant_id"],
            best_submission_id=doc["best_submission_id"],
            total_score=parse_dec(doc["total_score"]),
            relative_points=(
                parse_dec(doc["relative_points"])
                if doc.get("relative_points") is not None
                else None
            ),
            rank=doc["rank"],
            achieved_at=doc["achieved_at"],
        )


@dataclass
class ProgressPoint:
    submitted_at: int
    contestant_id: str
    submission_id: str
    relative_points: Fraction
    is_new_best: bool

    def to_json(self) -> dict:
        return {
            "submitted_at": self.submitted_at,
            "contestant_id": self.contestant_id,
            "submission_id": self.submission_id,
            "relative_points": dec_str(self.relative_points),
            "is_new_best": self.is_new_best,
        }


def result_score(problem: ProblemState, result: StoredResult) -> Fraction:
    if result.status is not TestStatus.OK:
        return Fraction(0)
    best_known = problem.tests[result.test_id].best_known
    if best_known is None:
        # only possible before the first report incorporated this objective
        best_known = result.objective
    outcome = CheckOutcome(True, result.objective)
    return score_test(outcome, best_known, problem.direction)


def submission_score(problem: ProblemState, sub: SubmissionState, test_ids: list[str]) -> Fraction:
    total = Fraction(0)
    for tid in test_ids:
        r = sub.results.get(tid)
        if r is not None:
            total += result_score(problem, r)
    return total


def _reported(state: JudgeState, problem_id: str) -> list[SubmissionState]:
    subs = [s for s in state.problem_submissions(problem_id) if s.report is not None]
    subs.sort(key=lambda s: (s.submitted_at, s.seq))
    return subs


def compute_standings(state: JudgeState, problem: ProblemState, test_ids: list[str]) -> list[LeaderboardEntry]:
    best_of: dict[str, tuple[Fraction, SubmissionState]] = {}
    for sub in _reported(state, problem.problem_id):
        score = submission_score(problem, sub, test_ids)
        held = best_of.get(sub.contestant_id)
        # strictly better replaces; ties keep the earlier submission
        if held is None or score > held[0]:
            best_of[sub.contestant_id] = (score, sub)

    rows = sorted(
        best_of.values(), key=lambda t: (-t[0], t[1].submitted_at, t[1].contestant_id)
    )
    best_total = rows[0][0] if rows else Fraction(0)
    entries: list[LeaderboardEntry] = []
    for i, (score, sub) in enumerate(rows):
        # score ties share a rank (ordered by time within the tie), so the
        # 100-point entries are exactly the rank-1 ones
        if i > 0 and score == rows[i - 1][0]:
            rank = entries[-1].rank
        else:
            rank = i + 1
        points = None if best_total == 0 else relative_score(score, best_total)
        entries.append(
            LeaderboardEntry(
                contestant_id=sub.contestant_id,
                best_submission_id=sub.submission_id,
                total_score=score,
                relative_points=points,
                rank=rank,
                achieved_at=sub.submitted_at,
            )
        )
    return entries


def standings(state: JudgeState, problem: ProblemState, scope: Scope) -> list[LeaderboardEntry]:
    if scope is Scope.FINAL_PRIVATE:
        if problem.phase is not Phase.FINALIZED:
            raise NotFinalized(f"{problem.problem_id} is still running")
        return [LeaderboardEntry.from_json(doc) for doc in problem.finalized_entries or []]
    return compute_standings(state, problem, problem.public_test_ids())


def progress_series(state: JudgeState, problem: ProblemState) -> list[ProgressPoint]:
    """Every reported submission as one point, plus the running-best flag."""
    test_ids = problem.public_test_ids()
    subs = _reported(state, problem.problem_id)
    totals = [submission_score(problem, s, test_ids) for s in subs]
    best_total = max(totals, default=Fraction(0))
    points: list[ProgressPoint] = []
    running = Fraction(0)
    for sub, total in zip(subs, totals):
        is_best = total > running and total > 0
        running = max(running, total)
        rel = Fraction(0) if best_total == 0 else relative_score(total, best_total)
        points.append(
            ProgressPoint(
                submitted_at=sub.submitted_at,
                contestant_id=sub.contestant_id,
                submission_id=sub.submission_id,
                relative_points=rel,
                is_new_best=is_best,
            )
        )
    return points


def derive_best_known_changes(
    problem: ProblemState, results: dict[str, StoredResult]
) -> list[tuple[str, Fraction]]:
    """best_known updates a report's OK objectives would cause, in test order."""
    changes = []
    for tid in problem.test_order:
        r = results.get(tid)
        if r is None or r.status is not TestStatus.OK or r.objective is None:
            continue
        new, changed = best_known_update(
            problem.tests[tid].best_known, r.objective, problem.direction
        )
        if changed:
            changes.append((tid, new))
    return changes
