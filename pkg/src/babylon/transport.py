"""Chat-completions and embeddings transports (HTTP, canned, recording)."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path
from typing import Callable, Protocol

import httpx

from babylon.errors import TransportError

API_KEY_ENV = "BABYLON_API_KEY"


def request_hash(body: dict) -> str:
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def completion_text(response: dict) -> str:
    try:
        return response["choices"][0]["message"]["content"] or ""
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed completion payload: {exc!r}") from exc


def completion_payload(text: str) -> dict:
    return {"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]}


class Transport(Protocol):
    def post(self, body: dict) -> dict: ...


class HttpTransport:
    """POST JSON bodies to an OpenAI-compatible endpoint."""

    def __init__(self, url: str, api_key: str | None = None, timeout: float = 60.0, client: httpx.Client | None = None):
        self.url = url
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)

    def post(self, body: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self._client.post(self.url, json=body, headers=headers)
            resp.raise_for_status()
            return resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise TransportError(f"{self.url}: {exc}") from exc


class CannedTransport:
    """Replay responses from a JSONL file of ``{"hash", "response"}`` records.

    Unknown requests raise :class:`TransportError`; ``misses`` keeps their hashes.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.responses: dict[str, dict] = {}
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    item = json.loads(line)
                    self.responses[item["hash"]] = item["response"]
        self.served: list[str] = []
        self.misses: list[str] = []
        self._lock = threading.Lock()

    def post(self, body: dict) -> dict:
        key = request_hash(body)
        with self._lock:
            if key not in self.responses:
                self.misses.append(key)
                raise TransportError(f"no canned response for request {key[:12]}")
            self.served.append(key)
            return self.responses[key]


class RecordingTransport:
    """Answer with ``responder(body)`` and append each exchange to a JSONL file."""

    def __init__(self, responder: Callable[[dict], dict], path):
        self.responder = responder
        self.path = Path(path)
        self._lock = threading.Lock()

    def post(self, body: dict) -> dict:
        response = self.responder(body)
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"hash": request_hash(body), "request": body, "response": response},
                                sort_keys=True, ensure_ascii=False) + "\n")
        return response
