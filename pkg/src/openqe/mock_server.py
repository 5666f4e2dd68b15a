"""Deterministic stand-in for an OpenAI-compatible chat-completions endpoint.

Fixture directory layout::

    responses.json   {"<fingerprint>": "<assistant content>", ...}
    schedule.json    optional list of HTTP statuses served, in order, to the
                     first requests before normal responses resume

The fingerprint is :func:`fingerprint` of the request's model and messages.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path


def fingerprint(model: str, messages: list[dict]) -> str:
    payload = json.dumps({"model": model, "messages": messages}, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def completion_body(content: str, model: str, finish_reason: str = "stop") -> dict:
    return {
        "id": "mock-" + hashlib.sha256(content.encode("utf-8")).hexdigest()[:12],
        "object": "chat.completion",
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content},
                     "finish_reason": finish_reason}],
        "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
    }


class MockServer:
    """Threaded HTTP server; use as a context manager or call :meth:`stop`."""

    def __init__(self, responses: dict[str, str], port: int = 0, host: str = "127.0.0.1",
                 fallback: str | None = None, schedule: list[int] | None = None):
        self.responses = dict(responses)
        self.fallback = fallback
        self.schedule = list(schedule or [])
        self.hits = 0
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        self._httpd = ThreadingHTTPServer((host, port), self._handler())
        self._httpd.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        host = self._httpd.server_address[0]
        return f"http://{host}:{self.port}/v1"

    def _handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status: int, body: dict):
                data = json.dumps(body, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                try:
                    request = json.loads(self.rfile.read(length))
                except ValueError:
                    self._send(400, {"error": {"message": "invalid JSON"}})
                    return
                if not self.path.rstrip("/").endswith("/chat/completions"):
                    self._send(404, {"error": {"message": f"unknown path {self.path}"}})
                    return
                with server._lock:
                    server.hits += 1
                    server.requests.append(request)
                    status = server.schedule.pop(0) if server.schedule else 200
                if status != 200:
                    self._send(status, {"error": {"message": f"scripted failure {status}"}})
                    return
                model = request.get("model", "")
                fp = fingerprint(model, request.get("messages", []))
                content = server.responses.get(fp, server.fallback)
                if content is None:
                    self._send(404, {"error": {"message": f"no fixture for fingerprint {fp}"}})
                    return
                self._send(200, completion_body(content, model))

        return Handler

    def start(self) -> "MockServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, kwargs={"poll_interval": 0.05},
                                        daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "MockServer":
        return self if self._thread else self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def load_fixtures(fixture_dir) -> tuple[dict[str, str], list[int]]:
    root = Path(fixture_dir)
    responses_path = root / "responses.json"
    responses = json.loads(responses_path.read_text(encoding="utf-8")) if responses_path.exists() else {}
    schedule_path = root / "schedule.json"
    schedule = json.loads(schedule_path.read_text(encoding="utf-8")) if schedule_path.exists() else []
    return responses, schedule


def mock_serve(fixture_dir, port: int = 0, fallback: str | None = None, host: str = "127.0.0.1") -> MockServer:
    """Start a mock server on ``port`` (0 picks a free one). Raises OSError if the port is taken."""
    responses, schedule = load_fixtures(fixture_dir)
    return MockServer(responses, port=port, host=host, fallback=fallback, schedule=schedule).start()
