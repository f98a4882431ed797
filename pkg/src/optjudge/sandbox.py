"""Compiles submissions and runs untrusted programs under resource limits.

Isolation model: per-job directory, own session/process group, OS rlimits as
backstops, and a watchdog thread that polls /proc to enforce the exact CPU,
memory and wall budgets (rlimits alone are too coarse: RLIMIT_CPU is whole
seconds and RLIMIT_AS turns allocation failures into confusing crashes).
The child is pinned to a single core, so cpu_seconds <= wall_seconds holds in
the accounting.  This is not adversarial-grade containment; container or
namespace isolation can be layered on by swapping the run commands.

Child setup (rlimits, affinity) is applied by the parent onto the freshly
spawned pid instead of through a preexec_fn: avoiding preexec keeps CPython
on the vfork path, which is ~20x cheaper than fork() from a server-sized
parent on this class of kernel.  The watchdog covers the few milliseconds
before the limits land.

Known edges, accepted at desk scale: a single allocation larger than
memory_bytes + AS_HEADROOM fails inside the solver (RUNTIME_ERROR rather than
MEMORY_LIMIT), the disk cap is enforced per file via RLIMIT_FSIZE, and CPU or
memory used by forked grandchildren is not metered.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import resource
import select
import shutil
import signal
import subprocess
import threading
import time
import uuid
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

from .types import (
    DEFAULT_COMPILE_LIMITS,
    STDERR_EXCERPT_BYTES,
    ResourceLimits,
    ResourceUsage,
    SandboxSystemError,
    Submission,
    SubmissionKind,
    TestStatus,
    UnknownProfile,
    ValidationError,
)

CLK_TCK = os.sysconf("SC_CLK_TCK")
AS_HEADROOM = 768 * 1024 * 1024
# 15ms keeps enforcement well inside the contract bounds (cpu reported within
# +0.5s of the limit, reaper within wall+2s, memory overshoot < AS_HEADROOM)
# while /proc sampling stays cheap on kernels where it costs ~0.15ms a read
POLL_SECONDS = 0.015
# watchdog kills only once the sampled CPU clearly passed the limit, so the
# final rusage reading is never below it
CPU_GRACE = 0.02
# stdin payloads up to a pipe buffer are fed inline; larger ones get a thread
INLINE_STDIN_BYTES = 60 * 1024

BINARY_PROFILE_ID = "binary"


@dataclass(frozen=True)
class LanguageProfile:
    profile_id: str
    compile_command: tuple[str, ...]  # empty for interpreted languages
    run_command: tuple[str, ...]  # {exe} resolves to the artifact path
    source_filename: str
    compile_limits: ResourceLimits = DEFAULT_COMPILE_LIMITS

    def __post_init__(self):
        if not self.run_command:
            raise ValidationError(f"profile {self.profile_id}: run_command empty")


def default_profiles() -> dict[str, LanguageProfile]:
    return load_profiles_doc(
        json.loads(
            importlib_resources.files("optjudge").joinpath("data/profiles.json").read_text()
        )
    )


def load_profiles_doc(doc: dict) -> dict[str, LanguageProfile]:
    if not isinstance(doc, dict) or not isinstance(doc.get("profiles"), list):
        raise ValidationError("profile registry must be {'profiles': [...]}")
    out: dict[str, LanguageProfile] = {}
    for entry in doc["profiles"]:
        limits = (
            ResourceLimits.from_json(entry["compile_limits"])
            if entry.get("compile_limits")
            else DEFAULT_COMPILE_LIMITS
        )
        prof = LanguageProfile(
            profile_id=entry["profile_id"],
            compile_command=tuple(entry.get("compile_command", [])),
            run_command=tuple(entry["run_command"]),
            source_filename=entry.get("source_filename", "program"),
            compile_limits=limits,
        )
        out[prof.profile_id] = prof
    if BINARY_PROFILE_ID not in out:
        out[BINARY_PROFILE_ID] = LanguageProfile(
            BINARY_PROFILE_ID, (), ("{exe}",), "program"
        )
    return out


def load_profiles_file(path: Path) -> dict[str, LanguageProfile]:
    return load_profiles_doc(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ExitInfo:
    code: int | None = None
    signal: int | None = None


@dataclass
class ExecutionOutcome:
    exit: ExitInfo
    raw_status: TestStatus
    stdout: bytes
    stderr_excerpt: bytes
    usage: ResourceUsage


@dataclass(frozen=True)
class Executable:
    submission_id: str
    job_dir: Path
    artifact_path: Path
    run_command: tuple[str, ...]


@dataclass
class CompileFailure:
    message: str
    stderr_excerpt: bytes = b""


# one status per run even when several limits trip in the same run
_PRECEDENCE = (
    TestStatus.OUTPUT_LIMIT,
    TestStatus.MEMORY_LIMIT,
    TestStatus.TIME_LIMIT,
    TestStatus.WALL_LIMIT,
    TestStatus.RUNTIME_ERROR,
)


def resolve_status(violations: set[TestStatus]) -> TestStatus:
    for status in _PRECEDENCE:
        if status in violations:
            return status
    raise ValueError("no violation to resolve")


def _read_proc(pid: int) -> tuple[float, int] | None:
    """(cpu_seconds, vm_size_bytes) of a live process, None once it is gone."""
    try:
        with open(f"/proc/{pid}/stat", "rb") as f:
            fields = f.read().rsplit(b") ", 1)[1].split()
        cpu = (int(fields[11]) + int(fields[12])) / CLK_TCK  # utime + stime
        vms = 0
        with open(f"/proc/{pid}/status", "rb") as f:
            for line in f:
                if line.startswith(b"VmSize:"):
                    vms = int(line.split()[1]) * 1024
                    break
        return cpu, vms
    except (OSError, IndexError, ValueError):
        return None


def _kill_group(pid: int):
    try:
        os.killpg(pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


class Sandbox:
    def __init__(self, jobs_root: Path, profiles: dict[str, LanguageProfile] | None = None):
        self.jobs_root = Path(jobs_root)
        self.jobs_root.mkdir(parents=True, exist_ok=True)
        self.profiles = profiles if profiles is not None else default_profiles()
        self._cpu_slots = itertools.cycle(sorted(os.sched_getaffinity(0)))
        self._slot_lock = threading.Lock()

    def profile(self, profile_id: str) -> LanguageProfile:
        try:
            return self.profiles[profile_id]
        except KeyError:
            raise UnknownProfile(profile_id) from None

    # ------------------------------------------------------------------
    # prepare / probe

    def prepare(self, submission: Submission) -> Executable | CompileFailure:
        try:
            job_dir = self.jobs_root / f"sub-{submission.submission_id}-{uuid.uuid4().hex[:8]}"
            job_dir.mkdir(parents=True, exist_ok=False)
        except OSError as e:
            raise SandboxSystemError(f"cannot provision job directory: {e}")

        if submission.kind is SubmissionKind.BINARY:
            profile = self.profile(BINARY_PROFILE_ID)
            artifact = job_dir / profile.source_filename
            artifact.write_bytes(submission.payload)
            artifact.chmod(0o755)
        else:
            profile = self.profile(submission.language_profile)
            src = job_dir / profile.source_filename
            src.write_bytes(submission.payload)
            if profile.compile_command:
                artifact = job_dir / "program"
                cmd = tuple(
                    tok.replace("{src}", str(src)).replace("{out}", str(artifact))
                    for tok in profile.compile_command
                )
                outcome = self._run(cmd, cwd=job_dir, stdin_data=b"", limits=profile.compile_limits)
                failed = (
                    outcome.raw_status is not TestStatus.OK
                    or outcome.exit.code != 0
                    or not artifact.exists()
                )
                if failed:
                    shutil.rmtree(job_dir, ignore_errors=True)
                    return CompileFailure(
                        f"compilation failed ({outcome.raw_status.value})",
                        outcome.stderr_excerpt,
                    )
                artifact.chmod(0o755)
            else:
                artifact = src

        run_command = tuple(tok.replace("{exe}", str(artifact)) for tok in profile.run_command)
        executable = Executable(submission.submission_id, job_dir, artifact, run_command)
        if not self.probe(executable):
            shutil.rmtree(job_dir, ignore_errors=True)
            return CompileFailure("probe failed: artifact cannot be launched")
        return executable

    def probe(self, executable: Executable) -> bool:
        """Launchability check only; exit codes and timeouts do not matter."""

        def pre():
            # exec failure must surface as OSError here, so no wrapper chain
            resource.setrlimit(resource.RLIMIT_CPU, (1, 2))
            resource.setrlimit(resource.RLIMIT_AS, (64 * 1024 * 1024 + AS_HEADROOM,) * 2)
            resource.setrlimit(resource.RLIMIT_CORE, (0, 0))

        try:
            p = subprocess.Popen(
                executable.run_command,
                stdin=subprocess.DEVNULL,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                cwd=executable.job_dir,
                preexec_fn=pre,
                start_new_session=True,
                env=self._child_env(executable.job_dir),
            )
        except OSError:
            return False
        _kill_group(p.pid)
        try:
            p.wait(timeout=5)
        except subprocess.TimeoutExpired:
            p.kill()
            p.wait()
        return True

    # ------------------------------------------------------------------
    # execution

    def execute(self, executable: Executable, test_input: bytes, limits: ResourceLimits) -> ExecutionOutcome:
        run_dir = self.jobs_root / f"run-{uuid.uuid4().hex}"
        try:
            run_dir.mkdir(parents=True, exist_ok=False)
        except OSError as e:
            raise SandboxSystemError(f"cannot provision run directory: {e}")
        try:
            return self._run(executable.run_command, cwd=run_dir, stdin_data=test_input, limits=limits)
        finally:
            shutil.rmtree(run_dir, ignore_errors=True)

    def cleanup(self, executable: Executable):
        shutil.rmtree(executable.job_dir, ignore_errors=True)

    def _child_env(self, cwd: Path) -> dict[str, str]:
        return {
            "PATH": "/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin",
            "HOME": str(cwd),
            "TMPDIR": str(cwd),
            "LANG": "C.UTF-8",
        }

    def _run(self, cmd: tuple[str, ...], cwd: Path, stdin_data: bytes, limits: ResourceLimits) -> ExecutionOutcome:
        cpu_limit = float(limits.cpu_seconds)
        wall_limit = float(limits.wall_seconds)
        cpu_ceil = math.ceil(cpu_limit)
        with self._slot_lock:
            pin_cpu = next(self._cpu_slots)

        try:
            p = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                cwd=cwd,
                start_new_session=True,
                env=self._child_env(cwd),
            )
        except OSError as e:
            raise SandboxSystemError(f"spawn failed: {e}")

        # limits are applied onto the running child instead of via preexec_fn:
        # that keeps CPython on the cheap vfork path, and the watchdog covers
        # the few-ms window before they land
        try:
            resource.prlimit(p.pid, resource.RLIMIT_CPU, (cpu_ceil + 1, cpu_ceil + 2))
            resource.prlimit(p.pid, resource.RLIMIT_AS, (limits.memory_bytes + AS_HEADROOM,) * 2)
            resource.prlimit(p.pid, resource.RLIMIT_FSIZE, (limits.disk_bytes,) * 2)
            resource.prlimit(p.pid, resource.RLIMIT_CORE, (0, 0))
            os.sched_setaffinity(p.pid, {pin_cpu})
        except (ProcessLookupError, PermissionError, OSError):
            pass  # child already gone; wait4 below settles it

        violations: set[TestStatus] = set()
        vlock = threading.Lock()

        def violate(status: TestStatus):
            with vlock:
                violations.add(status)
            _kill_group(p.pid)

        start = time.monotonic()
        stop = threading.Event()
        abandon = threading.Event()

        def feed_stdin():
            try:
                p.stdin.write(stdin_data)
                p.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            finally:
                try:
                    p.stdin.close()
                except OSError:
                    pass

        stdin_thread = None
        if len(stdin_data) <= INLINE_STDIN_BYTES:
            feed_stdin()  # fits the pipe buffer, cannot block
        else:
            stdin_thread = threading.Thread(target=feed_stdin, daemon=True)
            stdin_thread.start()

        stdout_buf = bytearray()
        stderr_buf = bytearray()

        def drain_pipes():
            out_fd, err_fd = p.stdout.fileno(), p.stderr.fileno()
            open_fds = {out_fd, err_fd}
            overflowed = False
            while open_fds:
                try:
                    ready, _, _ = select.select(list(open_fds), [], [], 0.05)
                except OSError:
                    return
                if not ready:
                    if abandon.is_set():
                        return
                    continue
                for fd in ready:
                    try:
                        chunk = os.read(fd, 65536)
                    except OSError:
                        open_fds.discard(fd)
                        continue
                    if not chunk:
                        open_fds.discard(fd)
                        continue
                    if fd == out_fd:
                        room = limits.output_bytes - len(stdout_buf)
                        if room > 0:
                            stdout_buf.extend(chunk[:room])
                        if len(chunk) > room and not overflowed:
                            overflowed = True
                            violate(TestStatus.OUTPUT_LIMIT)
                    else:
                        room = STDERR_EXCERPT_BYTES - len(stderr_buf)
                        if room > 0:
                            stderr_buf.extend(chunk[:room])

        def watchdog():
            while not stop.wait(POLL_SECONDS):
                if time.monotonic() - start > wall_limit:
                    violate(TestStatus.WALL_LIMIT)
                    return
                sample = _read_proc(p.pid)
                if sample is None:
                    return
                cpu, vms = sample
                if vms > limits.memory_bytes:
                    violate(TestStatus.MEMORY_LIMIT)
                    return
                if cpu >= cpu_limit + CPU_GRACE:
                    violate(TestStatus.TIME_LIMIT)
                    return

        drain_thread = threading.Thread(target=drain_pipes, daemon=True)
        drain_thread.start()
        watchdog_thread = threading.Thread(target=watchdog, daemon=True)
        watchdog_thread.start()

        try:
            _, status, ru = os.wait4(p.pid, 0)
        except OSError as e:
            _kill_group(p.pid)
            stop.set()
            abandon.set()
            raise SandboxSystemError(f"wait failed: {e}")
        wall = time.monotonic() - start
        stop.set()

        # the readers normally hit EOF the moment the group dies; the grace
        # join only matters if an orphan still holds the pipes open
        drain_thread.join(timeout=1.0)
        if drain_thread.is_alive():
            _kill_group(p.pid)
            abandon.set()
            drain_thread.join(timeout=1.0)
        if stdin_thread is not None:
            stdin_thread.join(timeout=1.0)

        if os.WIFSIGNALED(status):
            exit_info = ExitInfo(signal=os.WTERMSIG(status))
            p.returncode = -os.WTERMSIG(status)
        else:
            exit_info = ExitInfo(code=os.WEXITSTATUS(status))
            p.returncode = os.WEXITSTATUS(status)
        for f in (p.stdin, p.stdout, p.stderr):
            try:
                f.close()
            except OSError:
                pass

        cpu = ru.ru_utime + ru.ru_stime
        usage = ResourceUsage(
            cpu_seconds=cpu,
            wall_seconds=wall,
            peak_memory_bytes=ru.ru_maxrss * 1024,
        )

        with vlock:
            seen = set(violations)
        if not seen:
            if exit_info.signal == signal.SIGXCPU or cpu > cpu_limit:
                seen.add(TestStatus.TIME_LIMIT)  # rlimit backstop beat the watchdog
            elif exit_info.signal is not None or exit_info.code != 0:
                seen.add(TestStatus.RUNTIME_ERROR)
        raw = resolve_status(seen) if seen else TestStatus.OK
        return ExecutionOutcome(
            exit=exit_info,
            raw_status=raw,
            stdout=bytes(stdout_buf),
            stderr_excerpt=bytes(stderr_buf),
            usage=usage,
        )
