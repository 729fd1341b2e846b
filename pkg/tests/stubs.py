"""In-process HTTP stubs for the chat and embeddings backends.

A single threaded server answers both ``/v1/chat/completions`` and
``/v1/embeddings``. Tests queue one-shot behaviors (failures, malformed
bodies) or rely on the defaults: chat echoes the last user message back,
embeddings come from the deterministic hash embedder so remote and local
providers agree vector-for-vector.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from biorag.embedding import embed_deterministic


class StubState:
    """Behavior knobs plus a log of every payload received."""

    def __init__(self, dimension: int = 16):
        self.dimension = dimension
        self.requests: list[tuple[str, dict]] = []
        self.chat_queue: list[tuple] = []
        self.embed_queue: list[tuple] = []
        self.chat_default: tuple = ("echo",)
        self.embed_default: tuple = ("hash",)
        self.lock = threading.Lock()

    def pop_behavior(self, which: str) -> tuple:
        with self.lock:
            queue = self.chat_queue if which == "chat" else self.embed_queue
            if queue:
                return queue.pop(0)
            return self.chat_default if which == "chat" else self.embed_default

    def chat_requests(self) -> list[dict]:
        with self.lock:
            return [p for path, p in self.requests if path.endswith("/chat/completions")]

    def embed_requests(self) -> list[dict]:
        with self.lock:
            return [p for path, p in self.requests if path.endswith("/embeddings")]


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):  # keep test output clean
        pass

    def _send(self, status: int, body: bytes, content_type: str = "application/json"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, json.dumps(obj).encode("utf-8"))

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            payload = {}
        state: StubState = self.server.state  # type: ignore[attr-defined]
        with state.lock:
            state.requests.append((self.path, payload))
        if self.path.endswith("/chat/completions"):
            self._chat(payload, state)
        elif self.path.endswith("/embeddings"):
            self._embed(payload, state)
        else:
            self._send_json(404, {"error": "no such route"})

    def _chat(self, payload: dict, state: StubState) -> None:
        behavior = state.pop_behavior("chat")
        kind = behavior[0]
        if kind == "status":
            self._send_json(behavior[1], {"error": behavior[2] if len(behavior) > 2 else "stub"})
            return
        if kind == "malformed":
            self._send(200, b"this is not json")
            return
        if kind == "no_choices":
            self._send_json(200, {"choices": []})
            return
        if kind == "empty":
            content = ""
        elif kind == "text":
            content = behavior[1]
        else:  # echo
            users = [m for m in payload.get("messages", []) if m.get("role") == "user"]
            content = users[-1]["content"] if users else ""
        self._send_json(200, {
            "id": "stub-1",
            "object": "chat.completion",
            "model": payload.get("model", "stub"),
            "choices": [
                {"index": 0, "message": {"role": "assistant", "content": content}}
            ],
        })

    def _embed(self, payload: dict, state: StubState) -> None:
        behavior = state.pop_behavior("embed")
        kind = behavior[0]
        if kind == "status":
            self._send_json(behavior[1], {"error": behavior[2] if len(behavior) > 2 else "stub"})
            return
        if kind == "malformed":
            self._send(200, b"{not json")
            return
        inputs = payload.get("input", [])
        if isinstance(inputs, str):
            inputs = [inputs]
        dim = state.dimension + 1 if kind == "wrong_dim" else state.dimension
        data = [
            {
                "object": "embedding",
                "index": i,
                "embedding": [float(x) for x in embed_deterministic(text, dim)],
            }
            for i, text in enumerate(inputs)
        ]
        if kind == "short" and data:
            data = data[:-1]
        if kind == "reversed":
            data = list(reversed(data))
        self._send_json(200, {"object": "list", "data": data})


@contextmanager
def run_stub(dimension: int = 16):
    """Start the stub on an ephemeral port; yields (state, base_url)."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    server.state = StubState(dimension=dimension)  # type: ignore[attr-defined]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server.state, f"http://127.0.0.1:{server.server_port}"  # type: ignore[attr-defined]
    finally:
        server.shutdown()
        thread.join(timeout=5)
        server.server_close()
