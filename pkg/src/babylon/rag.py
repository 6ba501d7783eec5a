"""Vector store of normal logs, inner-product retrieval and anomaly verdicts."""

from __future__ import annotations

import json
import logging
import re
import threading
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from babylon import kernels
from babylon.errors import BabylonError, EmbedError, EmptyStore, TransportError
from babylon.transport import Transport, completion_text

logger = logging.getLogger(__name__)

ANOMALY_QUESTION = "Is the new log entry normal or abnormal, given the provided examples of normal logs?"
DEFAULT_TOP_K = 5
DEFAULT_TAU = 0.80
# scores closer than this are ties; equal cosines of different vectors can differ in the last bit
TIE_EPS = 1e-12


class EmbeddingProvider(Protocol):
    dim: int

    def raw(self, text: str) -> Sequence[float]: ...


class HashedProvider:
    """Bag of tokens hashed into ``dim`` buckets with 64-bit FNV-1a.

    Bucket of a token is ``fnv1a_64(token.encode('utf-8')) % dim``; each
    occurrence adds 1.0 to its bucket.
    """

    def __init__(self, dim: int = 1024):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim

    def bucket(self, token: str) -> int:
        return kernels.fnv1a_64(token) % self.dim

    def raw(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for tok in text.split():
            vec[self.bucket(tok)] += 1.0
        return vec


class RemoteProvider:
    """OpenAI-compatible embeddings endpoint: ``{model, input: [text]}``."""

    def __init__(self, transport: Transport, model: str = "text-embedding-ada-002", dim: int = 1536):
        self.transport = transport
        self.model = model
        self.dim = dim

    def raw(self, text: str) -> list[float]:
        try:
            resp = self.transport.post({"model": self.model, "input": [text]})
            return resp["data"][0]["embedding"]
        except (TransportError, KeyError, IndexError, TypeError) as exc:
            raise EmbedError(f"embedding request failed: {exc}") from exc


def embed(text: str, provider: EmbeddingProvider) -> np.ndarray:
    """Unit-length embedding of ``text``."""
    if not text.strip():
        raise EmbedError("cannot embed blank text")
    vec = np.asarray(provider.raw(text), dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != provider.dim:
        raise EmbedError(f"expected dimension {provider.dim}, got {vec.shape}")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise EmbedError("embedding has zero or non-finite norm")
    return vec / norm


def embedding_similarity(provider: EmbeddingProvider):
    """Cosine of embedded token sequences, usable for demonstration selection."""

    def similarity(a: Sequence[str], b: Sequence[str]) -> float:
        if not a or not b:
            return 0.0
        return float(embed(" ".join(a), provider) @ embed(" ".join(b), provider))

    return similarity


@dataclass(frozen=True)
class VectorStoreEntry:
    entry_id: int
    text: str
    vector: np.ndarray


@dataclass
class RetrievalResult:
    entries: list[tuple[VectorStoreEntry, float]]

    @property
    def top_score(self) -> float:
        return self.entries[0][1] if self.entries else float("-inf")

    def __len__(self):
        return len(self.entries)


class VectorStore:
    """Flat in-memory store; exhaustive inner-product scan.

    Readers may run concurrently; ``add`` takes the write lock.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._texts: list[str] = []
        self._matrix = np.zeros((0, dim))
        self._pending: list[np.ndarray] = []
        self._lock = threading.RLock()

    def __len__(self):
        return len(self._texts)

    def add(self, text: str, vector: np.ndarray) -> int:
        if not text.strip():
            raise ValueError("entry text is blank")
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise ValueError(f"vector dimension {vector.shape} != {self.dim}")
        if abs(np.linalg.norm(vector) - 1.0) > 1e-6:
            raise ValueError("stored vectors must be unit length")
        with self._lock:
            self._texts.append(text)
            self._pending.append(vector)
            return len(self._texts) - 1

    def add_text(self, text: str, provider: EmbeddingProvider) -> int:
        return self.add(text, embed(text, provider))

    @property
    def matrix(self) -> np.ndarray:
        with self._lock:
            if self._pending:
                self._matrix = np.vstack([self._matrix, np.stack(self._pending)])
                self._pending = []
            return self._matrix

    def entry(self, entry_id: int) -> VectorStoreEntry:
        """Original text and vector for an id (the decode step is a lookup)."""
        return VectorStoreEntry(entry_id, self._texts[entry_id], self.matrix[entry_id])

    def retrieve(self, query: np.ndarray, top_k: int = DEFAULT_TOP_K) -> RetrievalResult:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        matrix = self.matrix
        if matrix.shape[0] == 0:
            raise EmptyStore("vector store is empty")
        scores = matrix @ np.asarray(query, dtype=np.float64)
        k = min(top_k, scores.shape[0])
        # descending score, ties by ascending id
        order = np.argsort(-scores, kind="stable")
        ranked = scores[order]
        tier = np.concatenate(([0], np.cumsum(ranked[:-1] - ranked[1:] > TIE_EPS)))
        order = order[np.lexsort((order, tier))][:k]
        return RetrievalResult([(self.entry(int(i)), float(scores[i])) for i in order])

    def to_dict(self) -> dict:
        m = self.matrix
        return {
            "dim": self.dim,
            "entries": [{"id": i, "text": t, "vector": m[i].tolist()} for i, t in enumerate(self._texts)],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: dict) -> "VectorStore":
        store = cls(int(doc["dim"]))
        for item in sorted(doc["entries"], key=lambda e: e["id"]):
            store.add(item["text"], np.asarray(item["vector"], dtype=np.float64))
        return store

    @classmethod
    def load(cls, path) -> "VectorStore":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def retrieve(store: VectorStore, query: np.ndarray, top_k: int = DEFAULT_TOP_K) -> RetrievalResult:
    return store.retrieve(query, top_k)


def build_anomaly_prompt(query_log: str, retrieved: RetrievalResult) -> str:
    if not retrieved.entries:
        raise ValueError("need at least one retrieved normal log")
    lines = ["Examples of normal log entries:"]
    for i, (entry, _) in enumerate(retrieved.entries, 1):
        lines.append(f"{i}. {entry.text}")
    lines += ["", "New log entry:", query_log, "", ANOMALY_QUESTION]
    return "\n".join(lines)


class Label(str, Enum):
    NORMAL = "Normal"
    ABNORMAL = "Abnormal"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class AnomalyVerdict:
    label: Label
    explanation: str
    top_score: float | None = None
    line_id: int | None = None

    def to_dict(self) -> dict:
        return {
            "line_id": self.line_id,
            "label": self.label.value,
            "explanation": self.explanation,
            "top_score": None if self.top_score is None else round(self.top_score, 6),
        }


_ABNORMAL = re.compile("abnormal", re.IGNORECASE)
_NORMAL = re.compile("normal", re.IGNORECASE)


def parse_verdict(text: str) -> Label:
    # "abnormal" contains "normal", so it is checked first
    if _ABNORMAL.search(text):
        return Label.ABNORMAL
    if _NORMAL.search(text):
        return Label.NORMAL
    return Label.UNDETERMINED


class LLMBackend(Protocol):
    def ask(self, prompt: str, retrieved: RetrievalResult | None = None) -> str: ...


class KeywordStub:
    """Says "abnormal" when the best retrieval score is below ``tau``."""

    def __init__(self, tau: float = DEFAULT_TAU):
        self.tau = tau

    def ask(self, prompt, retrieved=None):
        if retrieved is None:
            return "normal"
        if retrieved.top_score < self.tau:
            return f"abnormal: closest normal example scores {retrieved.top_score:.3f} < {self.tau:.2f}"
        return f"normal: closest normal example scores {retrieved.top_score:.3f}"


class EchoStub:
    """Returns a fixed text; stands in for a narrative model."""

    def __init__(self, text: str = "OK"):
        self.text = text

    def ask(self, prompt, retrieved=None):
        return self.text


class ChatBackend:
    def __init__(self, transport: Transport, model: str = "gpt-3.5-turbo-0613", temperature: float = 0.0):
        self.transport = transport
        self.model = model
        self.temperature = temperature

    def ask(self, prompt, retrieved=None):
        body = {"model": self.model, "temperature": self.temperature,
                "messages": [{"role": "user", "content": prompt}]}
        return completion_text(self.transport.post(body))


def classify(query_log, store: VectorStore, backend: LLMBackend, provider: EmbeddingProvider,
             top_k: int = DEFAULT_TOP_K) -> AnomalyVerdict:
    """Verdict for one log (a ``LogRecord`` or plain text) against the normal-log store."""
    text = getattr(query_log, "content", query_log)
    line_id = getattr(query_log, "line_id", None)
    retrieved = store.retrieve(embed(text, provider), top_k)
    prompt = build_anomaly_prompt(text, retrieved)
    try:
        answer = backend.ask(prompt, retrieved)
    except (BabylonError, OSError) as exc:
        return AnomalyVerdict(Label.UNDETERMINED, f"backend error: {exc}", retrieved.top_score, line_id)
    return AnomalyVerdict(parse_verdict(answer), answer, retrieved.top_score, line_id)


def build_store(texts, provider: EmbeddingProvider) -> tuple[VectorStore, list[str]]:
    """Store of the given normal logs; texts that fail to embed are skipped and reported."""
    store = VectorStore(provider.dim)
    skipped = []
    for text in texts:
        try:
            store.add_text(text, provider)
        except EmbedError as exc:
            logger.warning("skipping store entry: %s", exc)
            skipped.append(text)
    return store, skipped


def interpret(outcomes, verdicts=(), backend: LLMBackend | None = None, top: int = 10) -> tuple[str, dict]:
    """Text report and JSON document for a parse run and optional verdicts."""
    sizes: Counter = Counter()
    templates: dict[int, str] = {}
    for o in outcomes:
        cid = o["cluster_id"] if isinstance(o, dict) else o.cluster_id
        templates[cid] = o["template"] if isinstance(o, dict) else o.template_text
        sizes[cid] += 1
    ranked = sorted(sizes.items(), key=lambda kv: (-kv[1], kv[0]))
    verdicts = [v.to_dict() if isinstance(v, AnomalyVerdict) else dict(v) for v in verdicts]
    anomalies = [v for v in verdicts if v["label"] == Label.ABNORMAL.value]

    doc = {
        "census": {"lines": sum(sizes.values()), "clusters": len(sizes)},
        "top_templates": [{"cluster_id": cid, "count": n, "template": templates[cid]} for cid, n in ranked[:top]],
        "anomalies": anomalies if verdicts else None,
        "narrative": None,
    }
    lines = [
        "# Log summary",
        f"lines: {doc['census']['lines']}",
        f"clusters: {doc['census']['clusters']}",
        "",
        "## Top templates",
    ]
    lines += [f"{t['count']:>7}  [{t['cluster_id']}] {t['template']}" for t in doc["top_templates"]]
    if verdicts:
        lines += ["", "## Anomalies", f"flagged: {len(anomalies)} of {len(verdicts)}"]
        lines += [f"line {a['line_id']}: {a['explanation']}" for a in anomalies]
    if backend is not None:
        summary_prompt = "Summarize these log statistics for an operator:\n" + "\n".join(lines)
        try:
            doc["narrative"] = backend.ask(summary_prompt)
            lines += ["", "## Narrative", doc["narrative"]]
        except (BabylonError, OSError) as exc:
            lines += ["", f"(narrative omitted: {exc})"]
    return "\n".join(lines) + "\n", doc
