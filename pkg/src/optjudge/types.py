"""Domain model shared by every layer: problems, tests, submissions, results.

All objective values, scores and limits that take part in ranking are exact
`fractions.Fraction` values.  On the wire they travel as decimal strings with
at most six fractional digits; `parse_dec` / `dec_str` are the only two
functions that convert.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction


class Direction(str, Enum):
    MINIMIZE = "MINIMIZE"
    MAXIMIZE = "MAXIMIZE"


class Visibility(str, Enum):
    PUBLIC = "PUBLIC"
    PRIVATE = "PRIVATE"


class Phase(str, Enum):
    RUNNING = "RUNNING"
    FINALIZED = "FINALIZED"


class SubmissionKind(str, Enum):
    SOURCE = "SOURCE"
    BINARY = "BINARY"


class CheckerKind(str, Enum):
    UFLP = "UFLP"
    ORIENTEERING = "ORIENTEERING"


class TestStatus(str, Enum):
    OK = "OK"
    WRONG_ANSWER = "WRONG_ANSWER"
    TIME_LIMIT = "TIME_LIMIT"
    WALL_LIMIT = "WALL_LIMIT"
    MEMORY_LIMIT = "MEMORY_LIMIT"
    OUTPUT_LIMIT = "OUTPUT_LIMIT"
    RUNTIME_ERROR = "RUNTIME_ERROR"
    SYSTEM_ERROR = "SYSTEM_ERROR"


class AggregateStatus(str, Enum):
    COMPILE_ERROR = "COMPILE_ERROR"
    FAILED = "FAILED"
    PARTIAL = "PARTIAL"
    ACCEPTED = "ACCEPTED"


class Role(str, Enum):
    CONTESTANT = "CONTESTANT"
    ORGANIZER = "ORGANIZER"


# ---------------------------------------------------------------------------
# errors

class JudgeError(Exception):
    """Base error; `kind` is the machine-readable error name used by the API."""

    kind = "Internal"

    def __init__(self, message: str = ""):
        super().__init__(message or self.kind)
        self.message = message or self.kind


class ValidationError(JudgeError):
    kind = "Validation"


class NonPositiveObjective(JudgeError):
    kind = "NonPositiveObjective"


class NoBestYet(JudgeError):
    kind = "NoBestYet"


class DuplicateTestResult(JudgeError):
    kind = "DuplicateTestResult"


class UnknownChecker(JudgeError):
    kind = "UnknownChecker"


class UnknownProblem(JudgeError):
    kind = "UnknownProblem"


class UnknownSubmission(JudgeError):
    kind = "UnknownSubmission"


class UnknownProfile(JudgeError):
    kind = "UnknownProfile"


class QueueFull(JudgeError):
    kind = "QueueFull"


class ContestFinalized(JudgeError):
    kind = "Finalized"


class NotFinalized(JudgeError):
    kind = "NotFinalized"


class AlreadyFinalized(JudgeError):
    kind = "AlreadyFinalized"


class TestLocked(JudgeError):
    kind = "TestLocked"


class SchemaViolation(JudgeError):
    kind = "SchemaViolation"


class StorageFull(JudgeError):
    kind = "StorageFull"


class CorruptLog(JudgeError):
    kind = "CorruptLog"

    def __init__(self, message: str, last_valid_seq: int):
        super().__init__(message)
        self.last_valid_seq = last_valid_seq


class BlobIntegrityError(JudgeError):
    kind = "BlobIntegrity"


class DataDirLocked(JudgeError):
    kind = "DataDirLocked"


class SandboxSystemError(JudgeError):
    """Judge-side fault during evaluation; never attributed to the contestant."""

    kind = "SystemError"


# ---------------------------------------------------------------------------
# decimal-string rationals

_DEC_RE = re.compile(r"^-?(\d+)(\.(\d{1,6}))?$")

MICRO = 1_000_000  # 10**6, the finest serialized granularity


def parse_dec(value) -> Fraction:
    """Parse a decimal string (≤ 6 fractional digits), int or float into a Fraction.

    Floats are accepted for convenience in hand-written JSON and go through
    their shortest repr, so `0.1` means exactly 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if not isinstance(value, str) or not _DEC_RE.match(value.strip()):
        raise ValidationError(f"not a decimal with <= 6 fractional digits: {value!r}")
    return Fraction(value.strip())


def dec_str(x: Fraction | int) -> str:
    """Canonical decimal form, at most 6 fractional digits, trailing zeros trimmed.

    Values that do not fit in 6 fractional digits are rounded half-even; all
    persisted objectives fit exactly by construction.
    """
    x = Fraction(x)
    n = round(x * MICRO)  # banker's rounding on Fraction, deterministic
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), MICRO)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}." + f"{frac:06d}".rstrip("0")


def ms_to_iso(ms: int) -> str:
    """UTC milliseconds to ISO-8601 with millisecond precision."""
    return datetime.fromtimestamp(ms / 1000, tz=timezone.utc).isoformat(
        timespec="milliseconds"
    )


# ---------------------------------------------------------------------------
# resource limits

@dataclass(frozen=True)
class ResourceLimits:
    cpu_seconds: Fraction
    wall_seconds: Fraction
    memory_bytes: int
    output_bytes: int
    disk_bytes: int

    def __post_init__(self):
        for name in ("cpu_seconds", "wall_seconds"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("memory_bytes", "output_bytes", "disk_bytes"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValidationError(f"{name} must be a positive integer")
        if self.wall_seconds < self.cpu_seconds:
            raise ValidationError("wall_seconds must be >= cpu_seconds")

    @classmethod
    def create(cls, cpu_seconds, memory_bytes, output_bytes, disk_bytes,
               wall_seconds=None) -> "ResourceLimits":
        cpu = parse_dec(cpu_seconds)
        # wall backstop: CPU time is the metered quantity, the wall limit only
        # exists to kill sleepers
        wall = parse_dec(wall_seconds) if wall_seconds is not None else 2 * cpu + 5
        return cls(cpu, wall, int(memory_bytes), int(output_bytes), int(disk_bytes))

    def to_json(self) -> dict:
        return {
            "cpu_seconds": dec_str(self.cpu_seconds),
            "wall_seconds": dec_str(self.wall_seconds),
            "memory_bytes": self.memory_bytes,
            "output_bytes": self.output_bytes,
            "disk_bytes": self.disk_bytes,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ResourceLimits":
        if not isinstance(doc, dict):
            raise ValidationError("limits must be an object")
        try:
            return cls.create(
                doc["cpu_seconds"],
                doc["memory_bytes"],
                doc["output_bytes"],
                doc["disk_bytes"],
                doc.get("wall_seconds"),
            )
        except KeyError as e:
            raise ValidationError(f"limits missing field {e.args[0]}") from None


MIB = 1024 * 1024

DEFAULT_TEST_LIMITS = ResourceLimits.create(
    cpu_seconds=10, memory_bytes=256 * MIB, output_bytes=64 * MIB, disk_bytes=64 * MIB
)

DEFAULT_COMPILE_LIMITS = ResourceLimits.create(
    cpu_seconds=60, memory_bytes=1024 * MIB, output_bytes=16 * MIB, disk_bytes=256 * MIB
)

STDERR_EXCERPT_BYTES = 64 * 1024


# ---------------------------------------------------------------------------
# problems, tests, submissions

@dataclass
class TestCase:
    test_id: str
    visibility: Visibility
    input: bytes
    best_known: Fraction | None = None
    limits_override: ResourceLimits | None = None

    def __post_init__(self):
        if not self.test_id:
            raise ValidationError("test_id must be nonempty")
        if self.best_known is not None and self.best_known <= 0:
            raise ValidationError("best_known must be strictly positive")


@dataclass
class ProblemSpec:
    problem_id: str
    title: str
    direction: Direction
    limits: ResourceLimits
    checker: CheckerKind
    tests: list[TestCase] = field(default_factory=list)
    phase: Phase = Phase.RUNNING
    deadline_ms: int | None = None

    def __post_init__(self):
        if not self.problem_id:
            raise ValidationError("problem_id must be nonempty")
        seen = set()
        for t in self.tests:
            if t.test_id in seen:
                raise ValidationError(f"duplicate test_id {t.test_id}")
            seen.add(t.test_id)

    def test(self, test_id: str) -> TestCase:
        for t in self.tests:
            if t.test_id == test_id:
                return t
        raise ValidationError(f"no such test {test_id}")

    def test_limits(self, test_id: str) -> ResourceLimits:
        t = self.test(test_id)
        return t.limits_override or self.limits


@dataclass
class Submission:
    submission_id: str
    problem_id: str
    contestant_id: str
    kind: SubmissionKind
    language_profile: str
    payload: bytes
    submitted_at: int  # UTC milliseconds

    def __post_init__(self):
        if not self.payload:
            raise ValidationError("payload must be nonempty")
        if self.kind is SubmissionKind.SOURCE and not self.language_profile:
            raise ValidationError("SOURCE submissions need a language_profile")


# ---------------------------------------------------------------------------
# evaluation results

@dataclass
class ResourceUsage:
    cpu_seconds: float = 0.0
    wall_seconds: float = 0.0
    peak_memory_bytes: int = 0

    def to_json(self) -> dict:
        return {
            "cpu_seconds": round(self.cpu_seconds, 6),
            "wall_seconds": round(self.wall_seconds, 6),
            "peak_memory_bytes": self.peak_memory_bytes,
        }


@dataclass
class CheckOutcome:
    feasible: bool
    objective: Fraction | None = None
    message: str = ""

    def __post_init__(self):
        if self.feasible and (self.objective is None or self.objective <= 0):
            raise ValidationError("feasible outcome requires a positive objective")


@dataclass
class TestResult:
    test_id: str
    status: TestStatus
    objective: Fraction | None
    score: Fraction
    usage: ResourceUsage = field(default_factory=ResourceUsage)

    def __post_init__(self):
        if self.status is not TestStatus.OK:
            if self.score != 0 or self.objective is not None:
                raise ValidationError("non-OK result must carry score 0 and no objective")
        else:
            if self.objective is None or not (0 < self.score <= 1):
                raise ValidationError("OK result needs an objective and score in (0,1]")


@dataclass
class EvaluationReport:
    submission_id: str
    aggregate_status: AggregateStatus
    total_score: Fraction
    public_score: Fraction
    results: list[TestResult]
    evaluated_at: int  # UTC milliseconds
