"""Reference contests: instances, exhaustive oracles and scripted solvers.

Three problems ship as fixtures, each with 4 public and 2 private tests and
three solvers (exhaustive OPT, a weak GREEDY, and BROKEN which emits an
invalid solution):

  uflp-main    facility location; GREEDY is feasible everywhere but strictly
               suboptimal on public tests, so it ranks below OPT live.
  orient-main  orienteering mirror with an exhaustive path oracle.
  uflp-adv     the adversarial split: GREEDY matches the optimum on every
               public test yet falls behind on private ones, so the live
               leader and the final private winner disagree.

Every best_known written into the fixture tree comes from the exhaustive
oracle at generation time; the generator asserts the intended OPT/GREEDY
relations instead of trusting hand arithmetic.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .checkers import (
    OrienteeringInstance,
    UflpInstance,
    edge_length,
    format_orienteering_instance,
    format_uflp_instance,
)
from .types import MIB, ResourceLimits, Visibility, dec_str


# ---------------------------------------------------------------------------
# exhaustive oracles and greedy reference algorithms

def uflp_solution_cost(inst: UflpInstance, open_set: set[int], assign: list[int]) -> Fraction:
    cost = sum((inst.open_costs[j] for j in open_set), Fraction(0))
    return cost + sum((inst.assign_costs[i][assign[i]] for i in range(inst.n_clients)), Fraction(0))


def uflp_optimum(inst: UflpInstance) -> tuple[Fraction, tuple[int, ...], list[int]]:
    """Brute force over every nonempty facility subset."""
    best = None
    for size in range(1, inst.n_facilities + 1):
        for subset in combinations(range(inst.n_facilities), size):
            assign = [
                min(subset, key=lambda j: (inst.assign_costs[i][j], j))
                for i in range(inst.n_clients)
            ]
            cost = uflp_solution_cost(inst, set(subset), assign)
            if best is None or cost < best[0]:
                best = (cost, subset, assign)
    return best


def uflp_greedy(inst: UflpInstance) -> tuple[list[int], list[int]]:
    """Open the cheapest facility, send every client there."""
    j = min(range(inst.n_facilities), key=lambda k: (inst.open_costs[k], k))
    return [j], [j] * inst.n_clients


def orienteering_path_length(inst: OrienteeringInstance, path: list[int]) -> Fraction:
    total = Fraction(0)
    for a, b in zip(path, path[1:]):
        total += edge_length(inst.nodes[a][:2], inst.nodes[b][:2])
    return total


def orienteering_path_prize(inst: OrienteeringInstance, path: list[int]) -> Fraction:
    return Fraction(sum(inst.nodes[v][2] for v in set(path)))


def orienteering_optimum(inst: OrienteeringInstance) -> tuple[Fraction, list[int]]:
    """DFS over all simple start-to-end routes within the budget (start != end)."""
    assert inst.start != inst.end, "oracle assumes open routes"
    best: list = [None]
    path = [inst.start]
    used = {inst.start}

    def rec(cur: int, length: Fraction, prize: Fraction):
        if cur == inst.end:
            if best[0] is None or prize > best[0][0]:
                best[0] = (prize, list(path))
            return
        for v in range(inst.n_nodes):
            if v in used:
                continue
            d = edge_length(inst.nodes[cur][:2], inst.nodes[v][:2])
            if length + d > inst.budget:
                continue
            used.add(v)
            path.append(v)
            rec(v, length + d, prize + inst.nodes[v][2])
            path.pop()
            used.remove(v)

    rec(inst.start, Fraction(0), Fraction(inst.nodes[inst.start][2]))
    if best[0] is None:
        raise ValueError("no feasible route; raise the budget")
    return best[0]


def orienteering_greedy(inst: OrienteeringInstance) -> list[int]:
    """Grab the richest node that still lets the route reach the end."""
    cur = inst.start
    used = {inst.start}
    length = Fraction(0)
    path = [inst.start]
    while True:
        candidates = []
        for v in range(inst.n_nodes):
            if v in used or v == inst.end:
                continue
            d1 = edge_length(inst.nodes[cur][:2], inst.nodes[v][:2])
            d2 = edge_length(inst.nodes[v][:2], inst.nodes[inst.end][:2])
            if length + d1 + d2 <= inst.budget:
                candidates.append((-inst.nodes[v][2], d1, v))
        if not candidates:
            break
        _, d1, v = min(candidates)
        length += d1
        used.add(v)
        path.append(v)
        cur = v
    path.append(inst.end)
    return path


# ---------------------------------------------------------------------------
# scripted solvers (standalone python3, stdin -> stdout)

UFLP_OPT_SOLVER = """\
#!/usr/bin/env python3
import sys
from fractions import Fraction
from itertools import combinations

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
vals = [Fraction(t) for t in toks[2:]]
f = vals[:nf]
c = [vals[nf + i * nf : nf + (i + 1) * nf] for i in range(nc)]
best = None
for size in range(1, nf + 1):
    for subset in combinations(range(nf), size):
        assign = [min(subset, key=lambda j: (c[i][j], j)) for i in range(nc)]
        cost = sum(f[j] for j in subset) + sum(c[i][assign[i]] for i in range(nc))
        if best is None or cost < best[0]:
            best = (cost, subset, assign)
print(" ".join(str(j) for j in best[1]))
print(" ".join(str(j) for j in best[2]))
"""

UFLP_GREEDY_SOLVER = """\
#!/usr/bin/env python3
import sys
from fractions import Fraction

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
f = [Fraction(t) for t in toks[2 : 2 + nf]]
j = min(range(nf), key=lambda k: (f[k], k))
print(j)
print(" ".join([str(j)] * nc))
"""

UFLP_BROKEN_SOLVER = """\
#!/usr/bin/env python3
import sys

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
print(0)
print(" ".join([str(nf - 1)] * nc))
"""

ORIENT_COMMON = """\
#!/usr/bin/env python3
import sys, math
from fractions import Fraction

toks = sys.stdin.read().split()
n, s, e = int(toks[0]), int(toks[1]), int(toks[2])
B = Fraction(toks[3])
nodes = [tuple(int(toks[4 + 3 * i + k]) for k in range(3)) for i in range(n)]

def dist(a, b):
    dx, dy = nodes[a][0] - nodes[b][0], nodes[a][1] - nodes[b][1]
    return Fraction(round(math.sqrt(dx * dx + dy * dy) * 10000), 10000)
"""

ORIENT_OPT_SOLVER = ORIENT_COMMON + """
best = [None]
path = [s]
used = {s}

def rec(cur, length, prize):
    if cur == e:
        if best[0] is None or prize > best[0][0]:
            best[0] = (prize, list(path))
        return
    for v in range(n):
        if v in used:
            continue
        d = dist(cur, v)
        if length + d > B:
            continue
        used.add(v)
        path.append(v)
        rec(v, length + d, prize + nodes[v][2])
        path.pop()
        used.remove(v)

rec(s, Fraction(0), Fraction(nodes[s][2]))
print(" ".join(map(str, best[0][1])))
"""

ORIENT_GREEDY_SOLVER = ORIENT_COMMON + """
cur = s
used = {s}
length = Fraction(0)
path = [s]
while True:
    candidates = []
    for v in range(n):
        if v in used or v == e:
            continue
        d1 = dist(cur, v)
        if length + d1 + dist(v, e) <= B:
            candidates.append((-nodes[v][2], d1, v))
    if not candidates:
        break
    _, d1, v = min(candidates)
    length += d1
    used.add(v)
    path.append(v)
    cur = v
path.append(e)
print(" ".join(map(str, path)))
"""

ORIENT_BROKEN_SOLVER = ORIENT_COMMON + """
# stops at the start node instead of reaching the required endpoint
print(s)
"""


def sleep_solver(seconds: float, answer: str) -> bytes:
    """Shell solver that prints a fixed answer, then burns wall time.

    The sleep is exec'd so the shell does not fork an extra process; on hosts
    with slow process creation that fork would dominate the makespan numbers.
    """
    lines = "\n".join(f"echo '{ln}'" for ln in answer.splitlines())
    return f"#!/bin/sh\n{lines}\nexec sleep {seconds}\n".encode()


# ---------------------------------------------------------------------------
# fixture instances

def U(open_costs, assign_costs) -> UflpInstance:
    return UflpInstance(
        [Fraction(v) for v in open_costs],
        [[Fraction(v) for v in row] for row in assign_costs],
    )


def O(start, end, budget, nodes) -> OrienteeringInstance:
    return OrienteeringInstance(start, end, Fraction(budget), [tuple(n) for n in nodes])


# greedy strictly suboptimal on pub-01, pub-02, pub-04 and prv-01
UFLP_MAIN = {
    "pub-01": U([3, 4], [[1, 2], [2, 1], [3, 1]]),
    "pub-02": U([2, 3, 5], [[1, 4, 9], [1, 5, 8], [6, 1, 2], [7, 1, 3]]),
    "pub-03": U([1, 10], [[1, 1], [1, 1]]),
    "pub-04": U(
        [4, 4, 4, 9],
        [[1, 9, 9, 2], [9, 1, 9, 2], [9, 9, 1, 2], [5, 5, 5, 1], [6, 6, 6, 1]],
    ),
    "prv-01": U([5, 5], [[1, 9], [1, 9], [9, 1], [9, 1]]),
    "prv-02": U([1, 6, 6], [[2, 1, 9], [2, 9, 1], [2, 9, 9]]),
}

# greedy equals the optimum on every public test, loses on both private ones
UFLP_ADV = {
    "pub-01": U([2, 50], [[1, 40], [1, 40]]),
    "pub-02": U([3, 30], [[2, 20], [2, 20], [2, 20]]),
    "pub-03": U([1, 8, 8], [[1, 5, 5], [1, 5, 5]]),
    "pub-04": U([5, 60], [[1, 10], [2, 10], [1, 10], [2, 10]]),
    "prv-01": U([4, 4], [[1, 30], [30, 1]]),
    "prv-02": U([2, 2, 2], [[1, 50, 50], [50, 1, 50], [50, 50, 1]]),
}

ORIENT_MAIN = {
    # greedy grabs the rich detour node and strands itself
    "pub-01": O(0, 4, 13, [(0, 0, 1), (2, 1, 6), (7, 1, 6), (5, 4, 10), (10, 0, 1)]),
    # collinear, greedy sweeps everything
    "pub-02": O(0, 3, "9.5", [(0, 0, 2), (3, 0, 5), (6, 0, 5), (9, 0, 2)]),
    "pub-03": O(0, 1, 5, [(0, 0, 1), (5, 0, 1)]),
    # symmetric star, greedy misses the cheap chain
    "pub-04": O(0, 5, 12, [(0, 0, 1), (4, 3, 4), (4, -3, 4), (2, 0, 2), (6, 0, 2), (8, 0, 1)]),
    "prv-01": O(0, 4, 15, [(0, 0, 1), (3, 1, 7), (8, 1, 7), (6, 5, 12), (11, 0, 1)]),
    "prv-02": O(0, 2, 8, [(0, 0, 3), (4, 0, 5), (7, 0, 3)]),
}

FIXTURE_LIMITS = ResourceLimits.create(
    cpu_seconds=5, memory_bytes=256 * MIB, output_bytes=1 * MIB, disk_bytes=8 * MIB
)


def _manifest(problem_id: str, title: str, direction: str, checker: str) -> dict:
    return {
        "problem_id": problem_id,
        "title": title,
        "direction": direction,
        "checker": checker,
        "limits": FIXTURE_LIMITS.to_json(),
    }


def _check_uflp_relations(problem: str, tests: dict[str, UflpInstance], adversarial: bool):
    greedy_gaps = {}
    for tid, inst in tests.items():
        opt_cost, _, _ = uflp_optimum(inst)
        g_open, g_assign = uflp_greedy(inst)
        g_cost = uflp_solution_cost(inst, set(g_open), g_assign)
        assert g_cost >= opt_cost, f"{problem}/{tid}: exhaustive search is not optimal"
        assert inst.n_facilities >= 2, f"{problem}/{tid}: broken solver needs >= 2 facilities"
        greedy_gaps[tid] = g_cost > opt_cost
    if adversarial:
        assert not any(greedy_gaps[t] for t in tests if t.startswith("pub")), \
            f"{problem}: greedy must match the optimum on public tests"
        assert any(greedy_gaps[t] for t in tests if t.startswith("prv")), \
            f"{problem}: greedy must lose on a private test"
    else:
        assert any(greedy_gaps[t] for t in tests if t.startswith("pub")), \
            f"{problem}: greedy must lose on a public test"


def _check_orient_relations(problem: str, tests: dict[str, OrienteeringInstance]):
    gaps = {}
    for tid, inst in tests.items():
        d_direct = orienteering_path_length(inst, [inst.start, inst.end])
        assert d_direct <= inst.budget, f"{problem}/{tid}: direct route must be feasible"
        opt_prize, _ = orienteering_optimum(inst)
        g_path = orienteering_greedy(inst)
        assert orienteering_path_length(inst, g_path) <= inst.budget
        g_prize = orienteering_path_prize(inst, g_path)
        assert g_prize <= opt_prize, f"{problem}/{tid}: exhaustive search is not optimal"
        gaps[tid] = g_prize < opt_prize
    assert any(gaps[t] for t in tests if t.startswith("pub")), \
        f"{problem}: greedy must lose on a public test"


def generate_fixture_contest(dest: Path) -> list[Path]:
    """Write the full fixture tree; returns the problem directories."""
    dest = Path(dest)
    problems = [
        (
            "uflp-main",
            _manifest("uflp-main", "Facility location (main)", "MINIMIZE", "UFLP"),
            UFLP_MAIN,
            format_uflp_instance,
            uflp_optimum,
            {"opt.py": UFLP_OPT_SOLVER, "greedy.py": UFLP_GREEDY_SOLVER, "broken.py": UFLP_BROKEN_SOLVER},
        ),
        (
            "uflp-adv",
            _manifest("uflp-adv", "Facility location (adversarial split)", "MINIMIZE", "UFLP"),
            UFLP_ADV,
            format_uflp_instance,
            uflp_optimum,
            {"opt.py": UFLP_OPT_SOLVER, "greedy.py": UFLP_GREEDY_SOLVER, "broken.py": UFLP_BROKEN_SOLVER},
        ),
        (
            "orient-main",
            _manifest("orient-main", "Orienteering (main)", "MAXIMIZE", "ORIENTEERING"),
            ORIENT_MAIN,
            format_orienteering_instance,
            lambda inst: orienteering_optimum(inst),
            {"opt.py": ORIENT_OPT_SOLVER, "greedy.py": ORIENT_GREEDY_SOLVER, "broken.py": ORIENT_BROKEN_SOLVER},
        ),
    ]
    _check_uflp_relations("uflp-main", UFLP_MAIN, adversarial=False)
    _check_uflp_relations("uflp-adv", UFLP_ADV, adversarial=True)
    _check_orient_relations("orient-main", ORIENT_MAIN)

    out_dirs = []
    for pid, manifest, tests, fmt, oracle, solvers in problems:
        pdir = dest / pid
        (pdir / "tests").mkdir(parents=True, exist_ok=True)
        (pdir / "solvers").mkdir(parents=True, exist_ok=True)
        (pdir / "manifest").write_text(json.dumps(manifest, indent=2) + "\n")
        for tid, inst in tests.items():
            optimum = oracle(inst)[0]
            (pdir / "tests" / f"{tid}.in").write_bytes(fmt(inst))
            meta = {
                "visibility": "public" if tid.startswith("pub") else "private",
                "best_known": dec_str(optimum),
            }
            (pdir / "tests" / f"{tid}.meta").write_text(json.dumps(meta) + "\n")
        for name, text in solvers.items():
            path = pdir / "solvers" / name
            path.write_text(text)
            path.chmod(0o755)
        out_dirs.append(pdir)
    return out_dirs


def load_fixture_problem(pdir: Path):
    """(manifest, [(test_id, visibility, input_bytes, best_known_str)]) for a fixture dir."""
    pdir = Path(pdir)
    manifest = json.loads((pdir / "manifest").read_text())
    tests = []
    for in_path in sorted((pdir / "tests").glob("*.in")):
        tid = in_path.stem
        meta = json.loads(in_path.with_suffix(".meta").read_text())
        vis = Visibility.PUBLIC if meta["visibility"] == "public" else Visibility.PRIVATE
        tests.append((tid, vis, in_path.read_bytes(), meta.get("best_known")))
    return manifest, tests


def install_fixture_problem(service, pdir: Path) -> str:
    """Create the fixture problem and upload its tests through the service."""
    manifest, tests = load_fixture_problem(pdir)
    pid = service.create_problem(manifest)
    for tid, vis, data, best_known in tests:
        service.add_test(pid, tid, vis, data, best_known)
    return pid
