"""A tiny HTTP endpoint replaying canned policy responses, for integration
tests and for exercising the external-policy wiring without a real model.

Each POST consumes the next canned entry. An entry is either a body string
(served with status 200) or a (status, body) pair. When the script runs out
it keeps serving the last entry.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _Script:
    def __init__(self, entries):
        self.entries = [e if isinstance(e, tuple) else (200, e) for e in entries]
        if not self.entries:
            raise ValueError("mock endpoint needs at least one canned response")
        self.lock = threading.Lock()
        self.served = 0
        self.auth_headers: list[str | None] = []

    def next(self, auth: str | None = None) -> tuple[int, str]:
        with self.lock:
            i = min(self.served, len(self.entries) - 1)
            self.served += 1
            self.auth_headers.append(auth)
            return self.entries[i]


class _Handler(BaseHTTPRequestHandler):
    script: _Script

    def do_POST(self):  # noqa: N802 - http.server API
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        status, body = self.script.next(self.headers.get("Authorization"))
        payload = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "text/plain; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, fmt, *args):
        pass  # keep test output clean


@contextmanager
def serve_responses(entries):
    """Context manager yielding (url, script) for a scripted endpoint."""
    script = _Script(list(entries))
    handler = type("ScriptedHandler", (_Handler,), {"script": script})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}/", script
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
