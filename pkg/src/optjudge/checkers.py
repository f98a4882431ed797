"""Built-in solution checkers.

A checker parses the solver's stdout, verifies feasibility against the test
instance and recomputes the objective from the solution structure; any cost
the solver claims is ignored.  Malformed solver output is an infeasible
outcome, never an internal error.  Malformed *instances* raise
ValidationError, which upstream treats as a judge-side fault.

Instance formats (all tokens whitespace-separated):

  Facility location (minimize):
      line 1: n_facilities n_clients
      line 2: open cost per facility (positive decimals)
      next n_clients lines: assignment cost of that client to each facility
  Solution: line 1 = open facility indices, line 2 = one facility per client.

  Orienteering (maximize):
      line 1: n start end budget
      next n lines: x y prize  (integer coordinates, positive integer prizes)
  Solution: a single line of node indices forming the route.

Per-edge Euclidean distances are rounded to 4 decimal places before they are
summed and compared to the budget, so feasibility is bit-identical across
IEEE-754 platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .types import (
    CheckerKind,
    CheckOutcome,
    ProblemSpec,
    UnknownChecker,
    ValidationError,
    parse_dec,
)


@dataclass(frozen=True)
class UflpInstance:
    open_costs: list[Fraction]
    assign_costs: list[list[Fraction]]  # [client][facility]

    @property
    def n_facilities(self) -> int:
        return len(self.open_costs)

    @property
    def n_clients(self) -> int:
        return len(self.assign_costs)


@dataclass(frozen=True)
class OrienteeringInstance:
    start: int
    end: int
    budget: Fraction
    nodes: list[tuple[int, int, int]]  # (x, y, prize)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def _tokens(data: bytes) -> list[str]:
    return data.decode("utf-8", errors="replace").split()


def parse_uflp_instance(data: bytes) -> UflpInstance:
    toks = _tokens(data)
    try:
        n_fac, n_cli = int(toks[0]), int(toks[1])
    except (IndexError, ValueError):
        raise ValidationError("instance header must be 'n_facilities n_clients'")
    if n_fac < 1 or n_cli < 1:
        raise ValidationError("need at least one facility and one client")
    need = 2 + n_fac + n_cli * n_fac
    if len(toks) != need:
        raise ValidationError(f"expected {need} tokens, got {len(toks)}")
    vals = [parse_dec(t) for t in toks[2:]]
    open_costs = vals[:n_fac]
    if any(f <= 0 for f in open_costs):
        raise ValidationError("open costs must be strictly positive")
    rows = []
    for i in range(n_cli):
        row = vals[n_fac + i * n_fac : n_fac + (i + 1) * n_fac]
        if any(c < 0 for c in row):
            raise ValidationError("assignment costs must be nonnegative")
        rows.append(row)
    return UflpInstance(open_costs, rows)


def parse_orienteering_instance(data: bytes) -> OrienteeringInstance:
    toks = _tokens(data)
    try:
        n, start, end = int(toks[0]), int(toks[1]), int(toks[2])
        budget = parse_dec(toks[3])
    except (IndexError, ValueError):
        raise ValidationError("instance header must be 'n start end budget'")
    if n < 1:
        raise ValidationError("need at least one node")
    if not (0 <= start < n and 0 <= end < n):
        raise ValidationError("start/end out of range")
    if budget <= 0:
        raise ValidationError("budget must be positive")
    if len(toks) != 4 + 3 * n:
        raise ValidationError(f"expected {4 + 3 * n} tokens, got {len(toks)}")
    nodes = []
    for i in range(n):
        try:
            x, y, p = (int(toks[4 + 3 * i + k]) for k in range(3))
        except ValueError:
            raise ValidationError("node rows must be integer 'x y prize'")
        if p <= 0:
            raise ValidationError("prizes must be strictly positive")
        nodes.append((x, y, p))
    return OrienteeringInstance(start, end, budget, nodes)


def format_uflp_instance(inst: UflpInstance) -> bytes:
    from .types import dec_str

    lines = [f"{inst.n_facilities} {inst.n_clients}"]
    lines.append(" ".join(dec_str(f) for f in inst.open_costs))
    for row in inst.assign_costs:
        lines.append(" ".join(dec_str(c) for c in row))
    return ("\n".join(lines) + "\n").encode()


def format_orienteering_instance(inst: OrienteeringInstance) -> bytes:
    from .types import dec_str

    lines = [f"{inst.n_nodes} {inst.start} {inst.end} {dec_str(inst.budget)}"]
    for x, y, p in inst.nodes:
        lines.append(f"{x} {y} {p}")
    return ("\n".join(lines) + "\n").encode()


def edge_length(a: tuple[int, int], b: tuple[int, int]) -> Fraction:
    """Euclidean distance rounded to 4 decimal places, as an exact rational."""
    dx, dy = a[0] - b[0], a[1] - b[1]
    d = math.sqrt(dx * dx + dy * dy)  # correctly rounded per IEEE-754
    return Fraction(round(d * 10000), 10000)


def _nonempty_lines(data: bytes) -> list[str]:
    return [ln for ln in data.decode("utf-8", errors="replace").splitlines() if ln.strip()]


def check_uflp(inst: UflpInstance, output: bytes) -> CheckOutcome:
    lines = _nonempty_lines(output)
    if len(lines) != 2:
        return CheckOutcome(False, message=f"expected 2 lines, got {len(lines)}")
    try:
        opened = [int(t) for t in lines[0].split()]
        assign = [int(t) for t in lines[1].split()]
    except ValueError:
        return CheckOutcome(False, message="non-integer token in solution")
    open_set = set(opened)
    if not all(0 <= j < inst.n_facilities for j in open_set):
        return CheckOutcome(False, message="facility index out of range")
    if not open_set:
        return CheckOutcome(False, message="no facility opened")
    if len(assign) != inst.n_clients:
        return CheckOutcome(
            False, message=f"expected {inst.n_clients} assignments, got {len(assign)}"
        )
    for i, j in enumerate(assign):
        if not 0 <= j < inst.n_facilities:
            return CheckOutcome(False, message=f"client {i} assigned out of range")
        if j not in open_set:
            return CheckOutcome(False, message=f"client {i} assigned to closed facility {j}")
    objective = sum((inst.open_costs[j] for j in open_set), Fraction(0))
    objective += sum((inst.assign_costs[i][j] for i, j in enumerate(assign)), Fraction(0))
    if objective <= 0:
        return CheckOutcome(False, message="nonpositive objective")
    return CheckOutcome(True, objective, "ok")


def check_orienteering(inst: OrienteeringInstance, output: bytes) -> CheckOutcome:
    lines = _nonempty_lines(output)
    if len(lines) != 1:
        return CheckOutcome(False, message=f"expected 1 line, got {len(lines)}")
    try:
        seq = [int(t) for t in lines[0].split()]
    except ValueError:
        return CheckOutcome(False, message="non-integer token in route")
    if not seq:
        return CheckOutcome(False, message="empty route")
    if not all(0 <= v < inst.n_nodes for v in seq):
        return CheckOutcome(False, message="node index out of range")
    if seq[0] != inst.start:
        return CheckOutcome(False, message=f"route must start at {inst.start}")
    if seq[-1] != inst.end:
        return CheckOutcome(False, message=f"route must end at {inst.end}")
    # a closed tour may repeat its endpoint, nothing else repeats
    body = seq[:-1] if (inst.start == inst.end and len(seq) > 1) else seq
    if len(set(body)) != len(body):
        return CheckOutcome(False, message="route repeats a node")
    length = Fraction(0)
    for a, b in zip(seq, seq[1:]):
        xa, ya, _ = inst.nodes[a]
        xb, yb, _ = inst.nodes[b]
        length += edge_length((xa, ya), (xb, yb))
    if length > inst.budget:
        return CheckOutcome(
            False, message=f"route length {float(length):.4f} exceeds budget"
        )
    objective = Fraction(sum(inst.nodes[v][2] for v in set(seq)))
    if objective <= 0:
        return CheckOutcome(False, message="nonpositive objective")
    return CheckOutcome(True, objective, "ok")


def validate_instance(checker: CheckerKind, data: bytes):
    """Parse (and thereby validate) a test input for the given checker."""
    if checker is CheckerKind.UFLP:
        return parse_uflp_instance(data)
    if checker is CheckerKind.ORIENTEERING:
        return parse_orienteering_instance(data)
    raise UnknownChecker(str(checker))


def run_checker(problem: ProblemSpec, test_input: bytes, solver_output: bytes) -> CheckOutcome:
    """Verify feasibility and recompute the objective for one test."""
    if problem.checker is CheckerKind.UFLP:
        return check_uflp(parse_uflp_instance(test_input), solver_output)
    if problem.checker is CheckerKind.ORIENTEERING:
        return check_orienteering(parse_orienteering_instance(test_input), solver_output)
    raise UnknownChecker(str(problem.checker))
