from fractions import Fraction
from types import SimpleNamespace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from optjudge.scoring import (
    aggregate_report,
    best_known_update,
    relative_score,
    score_test,
    workers_for_makespan,
)
from optjudge.types import (
    AggregateStatus,
    CheckOutcome,
    Direction,
    DuplicateTestResult,
    NoBestYet,
    NonPositiveObjective,
    ResourceUsage,
    TestResult,
    TestStatus,
    ValidationError,
)

F = Fraction


def ok(tid, score, objective="1"):
    return TestResult(tid, TestStatus.OK, F(objective), F(score), ResourceUsage())


def bad(tid, status=TestStatus.TIME_LIMIT):
    return TestResult(tid, status, None, F(0), ResourceUsage())


# ---------------------------------------------------------------------------
# score_test

def test_minimize_ratio():
    out = CheckOutcome(True, F("12.5"))
    assert score_test(out, F(10), Direction.MINIMIZE) == F("0.8")


def test_infeasible_scores_zero():
    assert score_test(CheckOutcome(False), F(10), Direction.MINIMIZE) == 0


def test_maximize_ratio():
    assert score_test(CheckOutcome(True, F(15)), F(20), Direction.MAXIMIZE) == F("0.75")


def test_beating_best_known_clamps_to_one():
    assert score_test(CheckOutcome(True, F(8)), F(10), Direction.MINIMIZE) == 1


def test_nonpositive_feasible_objective_signals_broken_checker():
    # bypass CheckOutcome validation: simulates a buggy checker implementation
    fake = SimpleNamespace(feasible=True, objective=F(-3))
    with pytest.raises(NonPositiveObjective):
        score_test(fake, F(10), Direction.MINIMIZE)


def test_nonpositive_best_known_rejected():
    with pytest.raises(ValidationError):
        score_test(CheckOutcome(True, F(1)), F(0), Direction.MINIMIZE)


@given(
    obj=st.fractions(min_value=F(1, 1000), max_value=F(1000)),
    best=st.fractions(min_value=F(1, 1000), max_value=F(1000)),
    direction=st.sampled_from(list(Direction)),
)
def test_feasible_score_in_unit_interval_and_one_iff_ties_or_beats(obj, best, direction):
    s = score_test(CheckOutcome(True, obj), best, direction)
    assert 0 < s <= 1
    beats = obj <= best if direction is Direction.MINIMIZE else obj >= best
    assert (s == 1) == beats


# ---------------------------------------------------------------------------
# aggregate_report

def test_all_ok_is_accepted_with_summed_score():
    rep = aggregate_report(
        "s1", [ok("t1", 1), ok("t2", "0.8"), ok("t3", "0.5")], False, {"t1"}, 17
    )
    assert rep.aggregate_status is AggregateStatus.ACCEPTED
    assert rep.total_score == F("2.3")
    assert rep.public_score == F(1)
    assert rep.evaluated_at == 17


def test_mixed_statuses_are_partial():
    rep = aggregate_report("s1", [ok("t1", 1), bad("t2")], False, set(), 0)
    assert rep.aggregate_status is AggregateStatus.PARTIAL
    assert rep.total_score == F(1)


def test_no_ok_results_is_failed():
    rep = aggregate_report("s1", [bad("t1"), bad("t2", TestStatus.WRONG_ANSWER)], False, set(), 0)
    assert rep.aggregate_status is AggregateStatus.FAILED
    assert rep.total_score == 0


def test_compile_error_short_circuits():
    rep = aggregate_report("s1", [], True, set(), 3)
    assert rep.aggregate_status is AggregateStatus.COMPILE_ERROR
    assert rep.total_score == 0 and rep.public_score == 0
    assert rep.results == []


def test_duplicate_test_results_rejected():
    with pytest.raises(DuplicateTestResult):
        aggregate_report("s1", [ok("t1", 1), ok("t1", 1)], False, set(), 0)


def test_empty_results_without_compile_failure_rejected():
    with pytest.raises(ValidationError):
        aggregate_report("s1", [], False, set(), 0)


def test_aggregate_is_pure():
    results = [ok("t1", "0.5"), bad("t2")]
    a = aggregate_report("s1", results, False, {"t1"}, 42)
    b = aggregate_report("s1", results, False, {"t1"}, 42)
    assert a == b


@given(
    scores=st.lists(st.fractions(min_value=0, max_value=1), min_size=1, max_size=8),
    data=st.data(),
)
def test_total_score_strictly_monotone_in_any_single_result(scores, data):
    results = [
        ok(f"t{i}", s, "1") if s > 0 else bad(f"t{i}") for i, s in enumerate(scores)
    ]
    base = aggregate_report("s", results, False, set(), 0)
    i = data.draw(st.integers(min_value=0, max_value=len(scores) - 1))
    bump = data.draw(st.fractions(min_value=F(1, 100), max_value=1))
    higher = min(F(1), scores[i] + bump)
    if higher == scores[i]:
        return
    results[i] = ok(f"t{i}", higher, "1")
    assert aggregate_report("s", results, False, set(), 0).total_score > base.total_score


# ---------------------------------------------------------------------------
# relative_score

def test_relative_examples():
    assert relative_score(F(46), F("57.5")) == 80
    assert relative_score(F("57.5"), F("57.5")) == 100
    assert relative_score(F(0), F("57.5")) == 0


def test_relative_no_best_yet():
    with pytest.raises(NoBestYet):
        relative_score(F(0), F(0))


@given(
    a=st.fractions(min_value=0, max_value=1000),
    b=st.fractions(min_value=F(1, 100), max_value=1000),
    k=st.fractions(min_value=F(1, 100), max_value=100),
)
def test_relative_score_invariant_under_positive_scaling(a, b, k):
    if a > b:
        a, b = b, a
    assert relative_score(k * a, k * b) == relative_score(a, b)


# ---------------------------------------------------------------------------
# best_known_update

def test_best_known_min_rule():
    assert best_known_update(F(10), F(8), Direction.MINIMIZE) == (F(8), True)
    assert best_known_update(F(10), F(12), Direction.MINIMIZE) == (F(10), False)


def test_best_known_initialization():
    assert best_known_update(None, F(9), Direction.MINIMIZE) == (F(9), True)


def test_best_known_max_rule():
    assert best_known_update(F(10), F(12), Direction.MAXIMIZE) == (F(12), True)
    assert best_known_update(F(10), F(9), Direction.MAXIMIZE) == (F(10), False)


# ---------------------------------------------------------------------------
# worker sizing

def test_worker_sizing_for_a_large_contest():
    # 100 public tests at 30 CPU-minutes each, public feedback in ~90 minutes
    assert workers_for_makespan(100, F(30), F(90)) == 34


def test_worker_count_serial_degenerate():
    assert workers_for_makespan(20, F(1, 10), F(100)) == 1
