"""HTTP prediction oracle: a local stand-in for a remotely hosted classifier.

Protocol (label-only; score vectors are never exposed):
    POST /predict   body {"features": [d reals]}   -> {"label": int}
    GET  /stats     -> {"queries": int}            (server-side counter)
    GET  /health    -> {"status": "ok"}
Errors come back as {"error": code, "message": text} with a 4xx status and do
not increment the counter. Feature vectors are never logged.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .models import Model


class OracleServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, model: Model, budget: int | None = None, latency_ms: float = 0.0):
        self.model = model
        self.budget = budget
        self.latency_ms = latency_ms
        self.queries = 0
        self.counter_lock = threading.Lock()
        super().__init__(address, _OracleRequestHandler)


class _OracleRequestHandler(BaseHTTPRequestHandler):
    server: OracleServer

    def log_message(self, fmt, *args):  # keep request bodies out of logs
        pass

    def _reply(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/stats":
            with self.server.counter_lock:
                queries = self.server.queries
            self._reply(200, {"queries": queries})
        elif self.path == "/health":
            self._reply(200, {"status": "ok"})
        else:
            self._reply(404, {"error": "not-found", "message": self.path})

    def do_POST(self):
        if self.path != "/predict":
            self._reply(404, {"error": "not-found", "message": self.path})
            return
        if self.server.latency_ms > 0:
            time.sleep(self.server.latency_ms / 1000.0)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length))
        except (ValueError, json.JSONDecodeError):
            self._reply(400, {"error": "bad-request", "message": "body is not valid JSON"})
            return
        features = body.get("features") if isinstance(body, dict) else None
        if not isinstance(features, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in features
        ):
            self._reply(400, {"error": "bad-request", "message": "expected {'features': [reals]}"})
            return
        model = self.server.model
        if len(features) != model.dim:
            self._reply(
                422,
                {
                    "error": "bad-dimension",
                    "message": f"expected {model.dim} features, got {len(features)}",
                },
            )
            return
        with self.server.counter_lock:
            if self.server.budget is not None and self.server.queries >= self.server.budget:
                self._reply(
                    429,
                    {"error": "budget-exhausted", "message": f"budget {self.server.budget} spent"},
                )
                return
            self.server.queries += 1
        label = int(model.predict(features))
        self._reply(200, {"label": label})


def start_server(
    model: Model,
    host: str = "127.0.0.1",
    port: int = 0,
    budget: int | None = None,
    latency_ms: float = 0.0,
) -> tuple[OracleServer, threading.Thread]:
    """Start an oracle server on a background thread; port 0 picks a free one."""
    server = OracleServer((host, port), model, budget=budget, latency_ms=latency_ms)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread


def server_url(server: OracleServer) -> str:
    host, port = server.server_address[:2]
    return f"http://{host}:{port}"
