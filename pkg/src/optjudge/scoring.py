"""Per-test scoring, report aggregation and relative-to-best normalization.

Everything here is a pure function over exact rationals; callers own all
mutation and timestamps.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .types import (
    AggregateStatus,
    CheckOutcome,
    Direction,
    DuplicateTestResult,
    EvaluationReport,
    NoBestYet,
    NonPositiveObjective,
    TestResult,
    TestStatus,
    ValidationError,
)


def score_test(outcome: CheckOutcome, best_known: Fraction, direction: Direction) -> Fraction:
    """Ratio-to-best score in [0, 1]; infeasible scores 0.

    Solutions that tie or beat best_known clamp to 1 (the caller is expected
    to fold the new objective back into best_known afterwards).
    """
    if best_known is None or best_known <= 0:
        raise ValidationError("best_known must be strictly positive")
    if not outcome.feasible:
        return Fraction(0)
    if outcome.objective is None or outcome.objective <= 0:
        # a feasible outcome with a nonpositive objective means the checker
        # is broken, not the solver
        raise NonPositiveObjective(f"feasible objective {outcome.objective}")
    if direction is Direction.MINIMIZE:
        ratio = Fraction(best_known, 1) / outcome.objective
    else:
        ratio = outcome.objective / Fraction(best_known, 1)
    return min(Fraction(1), ratio)


def aggregate_report(
    submission_id: str,
    results: list[TestResult],
    compile_failed: bool,
    public_test_ids: set[str],
    evaluated_at: int,
) -> EvaluationReport:
    """Fold per-test results into the aggregate status and summed scores."""
    if compile_failed:
        return EvaluationReport(
            submission_id=submission_id,
            aggregate_status=AggregateStatus.COMPILE_ERROR,
            total_score=Fraction(0),
            public_score=Fraction(0),
            results=[],
            evaluated_at=evaluated_at,
        )
    if not results:
        raise ValidationError("results must be nonempty unless compilation failed")
    seen = set()
    for r in results:
        if r.test_id in seen:
            raise DuplicateTestResult(r.test_id)
        seen.add(r.test_id)

    ok = sum(1 for r in results if r.status is TestStatus.OK)
    if ok == len(results):
        status = AggregateStatus.ACCEPTED
    elif ok > 0:
        status = AggregateStatus.PARTIAL
    else:
        status = AggregateStatus.FAILED
    total = sum((r.score for r in results), Fraction(0))
    public = sum((r.score for r in results if r.test_id in public_test_ids), Fraction(0))
    return EvaluationReport(
        submission_id=submission_id,
        aggregate_status=status,
        total_score=total,
        public_score=public,
        results=list(results),
        evaluated_at=evaluated_at,
    )


def relative_score(total: Fraction, best_total: Fraction) -> Fraction:
    """Rescale so the best submission gets exactly 100 points."""
    if best_total == 0:
        raise NoBestYet("no feasible submission yet")
    if total < 0 or best_total < total:
        raise ValidationError("need best_total >= total >= 0")
    return 100 * Fraction(total) / Fraction(best_total)


def best_known_update(
    best_known: Fraction | None, observed: Fraction, direction: Direction
) -> tuple[Fraction, bool]:
    """Fold an OK objective into best_known; returns (value, changed)."""
    if observed <= 0:
        raise NonPositiveObjective(f"observed objective {observed}")
    if best_known is None:
        return observed, True
    if direction is Direction.MINIMIZE:
        new = min(best_known, observed)
    else:
        new = max(best_known, observed)
    return new, new != best_known


def workers_for_makespan(n_jobs: int, job_seconds: Fraction, target_seconds: Fraction) -> int:
    """Smallest worker count whose makespan ceil(n/w)*t fits in the target.

    With uniform job durations the makespan on w workers is ceil(n/w) * t, so
    the smallest feasible w is ceil(n / floor(target/t)).
    """
    if n_jobs <= 0:
        return 1
    waves = math.floor(Fraction(target_seconds) / Fraction(job_seconds))
    if waves < 1:
        raise ValidationError("target shorter than a single job")
    return math.ceil(n_jobs / waves)
