"""`judge` command line: run the service, administer problems, submit, watch.

Client commands authenticate with JUDGE_TOKEN / --token and talk to
JUDGE_URL / --url (default http://127.0.0.1:8077).
"""

from __future__ import annotations

import base64
import json
import sys
import time
from pathlib import Path

import click
import requests

from .types import JudgeError, ms_to_iso


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


class Client:
    def __init__(self, url: str, token: str):
        self.url = url.rstrip("/")
        self.session = requests.Session()
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"

    def request(self, method: str, path: str, **kw):
        try:
            resp = self.session.request(method, self.url + path, timeout=60, **kw)
        except requests.RequestException as e:
            _fail(f"cannot reach {self.url}: {e}")
        if resp.status_code >= 400:
            try:
                err = resp.json()["error"]
                _fail(f"{err['kind']}: {err['message']} (HTTP {resp.status_code})")
            except (ValueError, KeyError):
                _fail(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()


def _client(url: str, token: str) -> Client:
    return Client(url, token)


url_option = click.option(
    "--url", envvar="JUDGE_URL", default="http://127.0.0.1:8077", show_default=True
)
token_option = click.option("--token", envvar="JUDGE_TOKEN", default="")


@click.group()
def main():
    """Evaluation service and client for optimization contests."""


# ---------------------------------------------------------------------------
# server

@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.option("--listen", default=None, help="host:port")
@click.option("--workers", type=int, default=None)
@click.option("--static-dir", type=click.Path(path_type=Path), default=None,
              help="serve a built web UI from this directory under /ui")
def serve(config_path, data_dir, listen, workers, static_dir):
    """Run the judge service."""
    from .api import create_app
    from .service import JudgeService, ServiceConfig

    if config_path is not None:
        try:
            config = ServiceConfig.load(config_path)
        except (OSError, ValueError, KeyError) as e:
            _fail(f"bad config {config_path}: {e}")
    elif data_dir is not None:
        config = ServiceConfig(data_dir=data_dir)
    else:
        _fail("need --config or --data-dir")
    if data_dir is not None:
        config.data_dir = data_dir
    if listen is not None:
        config.listen = listen
    if workers is not None:
        config.workers = workers
    if not config.tokens:
        click.echo("warning: no tokens configured, every request will be rejected", err=True)

    try:
        service = JudgeService(config)
    except JudgeError as e:
        _fail(e.message)
    service.start()
    host, _, port = config.listen.partition(":")

    import uvicorn

    app = create_app(service, static_dir=static_dir)
    click.echo(f"serving on http://{config.listen} (data dir {config.data_dir})")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8077), log_level="warning")
    finally:
        service.stop()


# ---------------------------------------------------------------------------
# organizer commands

@main.command("create-problem")
@click.argument("manifest", type=click.Path(path_type=Path, exists=True))
@url_option
@token_option
def create_problem(manifest, url, token):
    """Create a problem from a manifest document."""
    doc = json.loads(manifest.read_text())
    out = _client(url, token).request("POST", "/api/v1/problems", json=doc)
    click.echo(out["problem_id"])


@main.command("upload-test")
@click.argument("problem_id")
@click.argument("test_id")
@click.argument("input_file", type=click.Path(path_type=Path, exists=True))
@click.option("--visibility", type=click.Choice(["public", "private"]), required=True)
@click.option("--best-known", default=None)
@url_option
@token_option
def upload_test(problem_id, test_id, input_file, visibility, best_known, url, token):
    """Upload one test input (raw bytes body)."""
    params = {"visibility": visibility}
    if best_known is not None:
        params["best_known"] = best_known
    out = _client(url, token).request(
        "PUT",
        f"/api/v1/problems/{problem_id}/tests/{test_id}",
        params=params,
        data=input_file.read_bytes(),
    )
    click.echo(f"{out['test_id']} sha256={out['sha256']}")


@main.command()
@click.argument("problem_id")
@url_option
@token_option
def finalize(problem_id, url, token):
    """Finalize a contest; freezes the private standings."""
    out = _client(url, token).request("POST", f"/api/v1/problems/{problem_id}/finalize")
    click.echo(f"{problem_id} finalized with {len(out['entries'])} ranked contestants")


# ---------------------------------------------------------------------------
# contestant commands

@main.command()
@click.argument("solution", type=click.Path(path_type=Path, exists=True))
@click.option("--problem", "problem_id", required=True)
@click.option("--lang", "language_profile", default="", help="language profile for SOURCE")
@click.option("--kind", type=click.Choice(["source", "binary"]), default="source")
@url_option
@token_option
def submit(solution, problem_id, language_profile, kind, url, token):
    """Submit a solution file; prints the submission id."""
    if kind == "source" and not language_profile:
        _fail("--lang is required for source submissions")
    body = {
        "problem_id": problem_id,
        "kind": kind.upper(),
        "language_profile": language_profile,
        "payload": base64.b64encode(solution.read_bytes()).decode(),
    }
    out = _client(url, token).request("POST", "/api/v1/submissions", json=body)
    click.echo(out["submission_id"])


def _format_points(points: str | None) -> str:
    if points is None:
        return "-"
    return f"{float(points):.1f}"


def _print_report(view: dict):
    for row in view.get("public_results", []):
        line = f"  {row['test_id']}: {row.get('status', row['state'])}"
        if "objective" in row:
            line += f" objective={row['objective']}"
        if "score" in row:
            line += f" score={row['score']}"
        click.echo(line)
    priv = view.get("private_summary", {})
    if priv.get("total"):
        click.echo(f"  {priv['evaluated']}/{priv['total']} private tests evaluated")
    if view.get("compile_message"):
        click.echo(f"  {view['compile_message']}")
    click.echo(
        f"{view['aggregate_status']} total={view.get('public_score') or '0'} "
        f"points={_format_points(view.get('relative_points'))}"
    )


@main.command()
@click.argument("submission_id")
@click.option("--watch", is_flag=True, help="poll until the evaluation finishes")
@click.option("--interval", type=float, default=1.0, show_default=True)
@url_option
@token_option
def status(submission_id, watch, interval, url, token):
    """Show (or watch) a submission's redacted report."""
    client = _client(url, token)
    while True:
        view = client.request("GET", f"/api/v1/submissions/{submission_id}")
        if view["finished"]:
            _print_report(view)
            return
        states = [r["state"] for r in view.get("public_results", [])]
        done = sum(1 for s in states if s == "DONE")
        click.echo(f"evaluating... {done}/{len(states)} public tests done")
        if not watch:
            return
        time.sleep(interval)


@main.command()
@click.argument("problem_id")
@click.option("--scope", type=click.Choice(["public", "final"]), default="public", show_default=True)
@url_option
@token_option
def leaderboard(problem_id, scope, url, token):
    """Print the ranked table with relative points."""
    out = _client(url, token).request(
        "GET", f"/api/v1/problems/{problem_id}/leaderboard", params={"scope": scope}
    )
    click.echo(f"# {problem_id} [{out['scope']}] phase={out['phase']}")
    if not out["entries"]:
        click.echo("(no submissions)")
        return
    for e in out["entries"]:
        click.echo(
            f"{e['rank']:>4}  {e['contestant_id']:<20} "
            f"{_format_points(e['relative_points']):>7}  "
            f"score={e['total_score']}  at={ms_to_iso(e['achieved_at'])}"
        )


@main.command("export-progress")
@click.argument("problem_id")
@click.option("--format", "fmt", type=click.Choice(["csv", "plotdata"]), default="csv", show_default=True)
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="output file; default <problem>-progress.<ext>, '-' for stdout")
@url_option
@token_option
def export_progress(problem_id, fmt, output, url, token):
    """Export the submission-over-time series behind the progress chart."""
    out = _client(url, token).request("GET", f"/api/v1/problems/{problem_id}/progress")
    points = out["points"]
    if fmt == "csv":
        lines = ["submitted_at,contestant_id,relative_points,is_new_best"]
        for pt in points:
            lines.append(
                f"{ms_to_iso(pt['submitted_at'])},{pt['contestant_id']},"
                f"{pt['relative_points']},{'true' if pt['is_new_best'] else 'false'}"
            )
        text = "\n".join(lines) + "\n"
        default_name = f"{problem_id}-progress.csv"
    else:
        best_line = [
            {"submitted_at": pt["submitted_at"], "relative_points": pt["relative_points"]}
            for pt in points
            if pt["is_new_best"]
        ]
        text = json.dumps({"points": points, "best_line": best_line}, indent=2) + "\n"
        default_name = f"{problem_id}-progress.json"
    if output is None:
        output = Path(default_name)
    if str(output) == "-":
        click.echo(text, nl=False)
    else:
        output.write_text(text)
        click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
