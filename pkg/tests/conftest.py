import socket
import threading
import time
from pathlib import Path

import pytest

from optjudge.fixtures import generate_fixture_contest
from optjudge.service import JudgeService, ServiceConfig, TokenEntry
from optjudge.types import Role

ORG_TOKEN = "org-secret"
ALICE_TOKEN = "alice-secret"
BOB_TOKEN = "bob-secret"
CARA_TOKEN = "cara-secret"

TOKENS = [
    TokenEntry(ORG_TOKEN, Role.ORGANIZER, "org"),
    TokenEntry(ALICE_TOKEN, Role.CONTESTANT, "alice"),
    TokenEntry(BOB_TOKEN, Role.CONTESTANT, "bob"),
    TokenEntry(CARA_TOKEN, Role.CONTESTANT, "cara"),
]


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    dest = tmp_path_factory.mktemp("fixtures")
    generate_fixture_contest(dest)
    return dest


@pytest.fixture
def make_service(tmp_path):
    """Factory for started services on fresh data dirs, cleaned up at teardown."""
    services = []
    counter = [0]

    def factory(workers=4, queue_capacity=10_000, data_dir=None, start=True, clock=None):
        counter[0] += 1
        cfg = ServiceConfig(
            data_dir=data_dir or tmp_path / f"data{counter[0]}",
            workers=workers,
            queue_capacity=queue_capacity,
            tokens=list(TOKENS),
        )
        svc = JudgeService(cfg, clock=clock)
        if start:
            svc.start()
        services.append(svc)
        return svc

    yield factory
    for svc in services:
        try:
            svc.stop()
        except Exception:
            pass


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class HttpServer:
    """uvicorn in a background thread, for CLI and end-to-end tests."""

    def __init__(self, service: JudgeService, port: int | None = None):
        import uvicorn

        from optjudge.api import create_app

        self.service = service
        self.port = port or free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(
            create_app(service), host="127.0.0.1", port=self.port, log_level="error"
        )
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.monotonic() + 10
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=10)
