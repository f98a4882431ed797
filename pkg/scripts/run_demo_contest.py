#!/usr/bin/env python3
"""Run a complete demo contest end to end.

Boots the service on a scratch data dir, installs the uflp-main fixture
problem, submits the three reference solvers as three contestants, then
prints the live board, the final private standings and the progress series.
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from optjudge.fixtures import generate_fixture_contest, install_fixture_problem
from optjudge.leaderboard import Scope
from optjudge.service import JudgeService, ServiceConfig
from optjudge.types import SubmissionKind, dec_str, ms_to_iso


def main():
    workdir = Path(tempfile.mkdtemp(prefix="judge-demo-"))
    fixtures = workdir / "fixtures"
    generate_fixture_contest(fixtures)

    svc = JudgeService(ServiceConfig(data_dir=workdir / "data", workers=5))
    svc.start()
    try:
        pid = install_fixture_problem(svc, fixtures / "uflp-main")
        solvers = fixtures / "uflp-main" / "solvers"
        for solver, who in [("opt", "alice"), ("greedy", "bob"), ("broken", "cara")]:
            sid = svc.submit(pid, who, SubmissionKind.SOURCE, "python3",
                             (solvers / f"{solver}.py").read_bytes())
            print(f"{who} submitted {solver}.py as {sid}")
        if not svc.pool.wait_idle(120):
            raise SystemExit("evaluation did not finish")

        print(f"\nlive leaderboard for {pid} (public tests):")
        for e in svc.standings(pid, Scope.PUBLIC_LIVE):
            pts = dec_str(e.relative_points) if e.relative_points is not None else "-"
            print(f"  #{e.rank} {e.contestant_id:<8} points={pts:<10} score={dec_str(e.total_score)}")

        svc.finalize(pid)
        print("\nfinal standings (private tests, frozen):")
        for row in svc.final_entries_json(pid):
            print(f"  #{row['rank']} {row['contestant_id']:<8} points={row['relative_points'] or '-':<10} "
                  f"score={row['total_score']}")

        print("\nprogress series (the Figure-1 data):")
        for p in svc.progress(pid):
            marker = "*" if p.is_new_best else " "
            print(f"  {marker} {ms_to_iso(p.submitted_at)} {p.contestant_id:<8} {dec_str(p.relative_points)}")
    finally:
        svc.stop()
    print(f"\ndata dir kept at {workdir}")


if __name__ == "__main__":
    main()
