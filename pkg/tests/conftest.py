"""Shared fixtures: throwaway HTTP servers speaking the wire contracts."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from parakit.corpus import bundled_selection_fixture
from parakit.embeddings import EMBEDDING_DIM


class JsonHandler(BaseHTTPRequestHandler):
    """Base handler: JSON in, JSON out, no request logging."""

    def log_message(self, *args):
        pass

    def read_json(self):
        length = int(self.headers.get("Content-Length", 0))
        return json.loads(self.rfile.read(length))

    def send_json(self, payload, status=200):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def embed_handler(vector_for):
    """Handler class for /v1/embed backed by a text -> vector function."""

    class Handler(JsonHandler):
        def do_POST(self):
            request = self.read_json()
            self.send_json({"vectors": [vector_for(t) for t in request["texts"]]})

    return Handler


def generate_handler(completions_for):
    """Handler class for /v1/generate backed by a request -> completions function."""

    class Handler(JsonHandler):
        def do_POST(self):
            request = self.read_json()
            self.send_json({"completions": completions_for(request)})

    return Handler


@pytest.fixture
def http_server():
    """Factory starting throwaway HTTP servers; all shut down at teardown."""
    servers = []

    def start(handler_class) -> str:
        server = ThreadingHTTPServer(("127.0.0.1", 0), handler_class)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_port}"

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()


def engineered_vector_for(fixture: dict):
    """text -> vector function reproducing the fixture's similarity scores.

    The original maps to the first basis vector; candidate i maps to
    sim_i * e0 + sqrt(1 - sim_i^2) * e_(i+1), a unit vector whose cosine
    against the original is exactly sim_i. Unknown texts map to the last
    basis vector.
    """
    original = fixture["original"]
    by_text = {c["text"]: (i, c["similarity"]) for i, c in enumerate(fixture["candidates"])}

    def vector_for(text: str) -> list[float]:
        vec = np.zeros(EMBEDDING_DIM)
        if text == original:
            vec[0] = 1.0
        elif text in by_text:
            i, sim = by_text[text]
            vec[0] = sim
            vec[i + 1] = (1.0 - sim * sim) ** 0.5
        else:
            vec[EMBEDDING_DIM - 1] = 1.0
        return vec.tolist()

    return vector_for


@pytest.fixture
def selection_fixture() -> dict:
    return bundled_selection_fixture()


@pytest.fixture
def engineered_embed_url(http_server, selection_fixture) -> str:
    """Embedding endpoint whose cosines reproduce the fixture similarities."""
    return http_server(embed_handler(engineered_vector_for(selection_fixture)))
