"""HTTP job service: submit a theorem, poll until the search finishes.

    POST   /prove       {"name", "hypotheses", "target", "total_time_s"?} -> 202 {"job_id"}
    GET    /jobs/<id>   -> {"status", "proof"?, "error"?, "elapsed_s"}
    DELETE /jobs/<id>   cancel a queued or running job
    GET    /jobs        all jobs plus the number currently running

Statuses move queued -> running -> proved | timeout | exhausted | error; a
queued job that is cancelled goes straight to error.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

from .core import (
    EnvError,
    ProofResult,
    ProofSearchError,
    Proved,
    TheoremSpec,
)
from .env.base import DEFAULT_TACTIC_TIMEOUT, ProverEnv
from .generator import TacticGenerator
from .schedule import DynamicScheduleConfig, ScheduleConfig
from .search import DEFAULT_TOTAL_TIME, SearchCancelled, SearchConfig, clamp_tactic_timeout, prove

log = logging.getLogger(__name__)

TERMINAL = frozenset({"proved", "timeout", "exhausted", "error"})
MAX_BODY = 1 << 20


@dataclass
class ProofJob:
    id: str
    spec: TheoremSpec
    total_time: float
    status: str = "queued"
    result: ProofResult | None = None
    submitted_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None
    cancel: threading.Event = field(default_factory=threading.Event)

    def to_dict(self) -> dict:
        out = {"job_id": self.id, "name": self.spec.name, "status": self.status}
        if isinstance(self.result, Proved):
            out["proof"] = list(self.result.tactics)
        if isinstance(self.result, EnvError):
            out["error"] = self.result.message
        if self.started_at is None:
            out["elapsed_s"] = 0.0
        else:
            out["elapsed_s"] = (self.finished_at or time.time()) - self.started_at
        return out


class JobManager:
    def __init__(self, env_factory: Callable[[], ProverEnv], gen: TacticGenerator, *,
                 schedule: ScheduleConfig | None = None, max_jobs: int = 2,
                 default_total_time: float = DEFAULT_TOTAL_TIME,
                 per_tactic_timeout: float = DEFAULT_TACTIC_TIMEOUT,
                 validator: Callable[[TheoremSpec], None] | None = None,
                 persist_path=None):
        if max_jobs < 1:
            raise ValueError("max_jobs must be >= 1")
        self.env_factory = env_factory
        self.gen = gen
        self.schedule = schedule or DynamicScheduleConfig()
        self.max_jobs = max_jobs
        self.default_total_time = default_total_time
        self.per_tactic_timeout = per_tactic_timeout
        self.validator = validator
        self.persist_path = persist_path
        self.jobs: dict[str, ProofJob] = {}
        self.running = 0
        self.peak_running = 0
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_jobs, thread_name_prefix="prove")

    def submit(self, spec: TheoremSpec, total_time: float | None = None) -> str:
        if self.validator is not None:
            self.validator(spec)
        job = ProofJob(uuid.uuid4().hex[:12], spec, total_time or self.default_total_time)
        with self._lock:
            self.jobs[job.id] = job
        self._pool.submit(self._run, job)
        return job.id

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            job = self.jobs.get(job_id)
            return None if job is None else job.to_dict()

    def list(self) -> dict:
        with self._lock:
            return {
                "running": self.running,
                "max_jobs": self.max_jobs,
                "jobs": [j.to_dict() for j in self.jobs.values()],
            }

    def cancel(self, job_id: str) -> dict | None:
        with self._lock:
            job = self.jobs.get(job_id)
            if job is None:
                return None
            if job.status == "queued":
                self._finish(job, EnvError("cancelled before start"))
            elif job.status == "running":
                job.cancel.set()
            return job.to_dict()

    def wait(self, job_id: str, timeout: float = 60.0, poll: float = 0.01) -> dict:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            info = self.get(job_id)
            if info and info["status"] in TERMINAL:
                return info
            time.sleep(poll)
        raise TimeoutError(f"job {job_id} still running after {timeout}s")

    def _finish(self, job: ProofJob, result: ProofResult) -> None:
        # caller holds the lock
        job.result = result
        job.status = result.status
        job.finished_at = time.time()
        if self.persist_path is not None:
            with open(self.persist_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(job.to_dict(), ensure_ascii=False) + "\n")

    def _run(self, job: ProofJob) -> None:
        with self._lock:
            if job.status != "queued":
                return
            job.status = "running"
            job.started_at = time.time()
            self.running += 1
            self.peak_running = max(self.peak_running, self.running)
        try:
            cfg = SearchConfig(
                schedule=self.schedule,
                total_time=job.total_time,
                per_tactic_timeout=clamp_tactic_timeout(job.total_time, self.per_tactic_timeout),
            )
            env = self.env_factory()
            try:
                result, _ = prove(job.spec, env, self.gen, cfg, cancel=job.cancel)
            finally:
                env.close()
        except SearchCancelled:
            result = EnvError("cancelled")
        except Exception as exc:  # a job must never take the worker down
            log.exception("job %s crashed", job.id)
            result = EnvError(f"internal error: {exc}")
        with self._lock:
            self.running -= 1
            self._finish(job, result)

    def shutdown(self) -> None:
        with self._lock:
            for job in self.jobs.values():
                if job.status == "queued":
                    self._finish(job, EnvError("service shutting down"))
                job.cancel.set()
        self._pool.shutdown(wait=True)


class _Handler(BaseHTTPRequestHandler):
    manager: JobManager  # set on the subclass built by make_server

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, payload) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _job_id(self) -> str | None:
        parts = self.path.rstrip("/").split("/")
        if len(parts) == 3 and parts[1] == "jobs" and parts[2]:
            return parts[2]
        return None

    def do_GET(self):
        if self.path.rstrip("/") == "/jobs":
            return self._send(HTTPStatus.OK, self.manager.list())
        job_id = self._job_id()
        info = self.manager.get(job_id) if job_id else None
        if info is None:
            return self._send(HTTPStatus.NOT_FOUND, {"error": "unknown job"})
        self._send(HTTPStatus.OK, info)

    def do_DELETE(self):
        job_id = self._job_id()
        info = self.manager.cancel(job_id) if job_id else None
        if info is None:
            return self._send(HTTPStatus.NOT_FOUND, {"error": "unknown job"})
        self._send(HTTPStatus.OK, info)

    def do_POST(self):
        if self.path.rstrip("/") != "/prove":
            return self._send(HTTPStatus.NOT_FOUND, {"error": "unknown endpoint"})
        ctype = self.headers.get("Content-Type", "").split(";")[0].strip().lower()
        if ctype != "application/json":
            return self._send(HTTPStatus.UNSUPPORTED_MEDIA_TYPE,
                              {"error": "content type must be application/json"})
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            return self._send(HTTPStatus.REQUEST_ENTITY_TOO_LARGE, {"error": "body too large"})
        try:
            data = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(data, dict):
                raise ValueError("body must be a JSON object")
            spec = TheoremSpec.from_dict(data)
            total = data.get("total_time_s")
            if total is not None:
                if isinstance(total, bool) or not isinstance(total, (int, float)) or total <= 0:
                    raise ValueError("total_time_s must be a positive number")
                total = float(total)
            job_id = self.manager.submit(spec, total)
        except (ValueError, UnicodeDecodeError, ProofSearchError) as exc:
            return self._send(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
        self._send(HTTPStatus.ACCEPTED, {"job_id": job_id})


def make_server(manager: JobManager, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"manager": manager})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(manager: JobManager, host: str = "127.0.0.1", port: int = 8000) -> None:
    server = make_server(manager, host, port)
    log.info("listening on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        manager.shutdown()
