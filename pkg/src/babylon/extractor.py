"""Log template extraction backends and few-shot prompt construction."""

from __future__ import annotations

import ipaddress
import logging
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from babylon.errors import AlignmentError, MissingTruth, TransportError
from babylon.ingest import Dataset, LogRecord
from babylon.parse_core.syntax import PLACEHOLDER, derive_syntax_template
from babylon.transport import Transport, completion_text

logger = logging.getLogger(__name__)


class Backend(str, Enum):
    REMOTE = "remote"
    HEURISTIC = "heuristic"
    ORACLE = "oracle"


# (variable type, example token); the content is ours, only the count is fixed
DEFAULT_SEEDS: tuple[tuple[str, str], ...] = (
    ("timestamp", "2023-10-05T14:48:00.123Z"),
    ("IPv4 address", "192.168.10.24"),
    ("IPv6 address", "fe80::1ff:fe23:4567:890a"),
    ("port", "8080"),
    ("file path", "/var/log/hadoop/hdfs/datanode.log"),
    ("URL", "https://api.example.com/v1/items?id=42"),
    ("hex identifier", "0x7f3a9c2e"),
    ("UUID", "3f2b8c1e-9d4a-4e7b-8a1c-5f6e7d8c9b0a"),
    ("integer counter", "1048576"),
    ("duration", "250ms"),
)

INSTRUCTIONS = (
    "You convert a raw log message into its log template.\n"
    "1. Find the parts of the message that change between occurrences of the same event.\n"
    "2. Give each of those variable parts a type, for example timestamp, IP address, port, "
    "file path, URL, identifier, number, duration or error code.\n"
    f"3. On the last line write only the template: the message with every variable part "
    f"replaced by {PLACEHOLDER} and all other text left exactly as it is."
)


@dataclass
class ExtractorConfig:
    k_demonstrations: int = 3
    seed_examples: Sequence[tuple[str, str]] = DEFAULT_SEEDS
    temperature: float = 0.0
    max_retries: int = 2
    backend: Backend = Backend.HEURISTIC
    model: str = "gpt-3.5-turbo-0613"

    def __post_init__(self):
        self.backend = Backend(self.backend)
        if self.k_demonstrations < 0:
            raise ValueError("k_demonstrations must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class Demonstration:
    content: str
    template: str


@dataclass
class ExtractionPrompt:
    instructions: str
    demonstrations: list[Demonstration]
    seeds: Sequence[tuple[str, str]]
    query: str

    def sections(self) -> list[str]:
        out = [self.instructions]
        if self.seeds:
            lines = ["Variable types with examples:"]
            lines += [f"- {kind}: {example}" for kind, example in self.seeds]
            out.append("\n".join(lines))
        for d in self.demonstrations:
            out.append(f"Log: {d.content}\nTemplate: {d.template}")
        out.append(f"Query log: {self.query}")
        return out

    def render(self) -> str:
        return "\n\n".join(self.sections())

    def messages(self) -> list[dict]:
        parts = self.sections()
        return [
            {"role": "system", "content": parts[0]},
            {"role": "user", "content": "\n\n".join(parts[1:])},
        ]


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def jaccard_similarity(a: Sequence[str], b: Sequence[str]) -> float:
    return _jaccard(frozenset(a), frozenset(b))


def select_demonstrations(query_tokens: Sequence[str], state, k: int,
                          labeled: Sequence[tuple[str, str]] = (),
                          similarity: Callable[[Sequence[str], Sequence[str]], float] = jaccard_similarity,
                          ) -> list[Demonstration]:
    """Top-``k`` clusters by similarity to one member of each (token-set Jaccard by default).

    ``labeled`` adds (content, template) pairs ranked after clusters on ties.
    """
    if k <= 0:
        return []
    scored = []
    order = 0
    if state is not None:
        for cid in sorted(state.clusters):
            c = state.clusters[cid]
            if not c.member_ids:
                continue
            rep = state.member_tokens[c.member_ids[0]]
            scored.append((-similarity(query_tokens, rep), order, Demonstration(" ".join(rep), c.template)))
            order += 1
    for content, template in labeled:
        scored.append((-similarity(query_tokens, content.split()), order, Demonstration(content, template)))
        order += 1
    scored.sort(key=lambda s: (s[0], s[1]))
    return [d for _, _, d in scored[:k]]


def build_prompt(query: str, demos: Sequence[Demonstration], cfg: ExtractorConfig) -> ExtractionPrompt:
    return ExtractionPrompt(INSTRUCTIONS, list(demos), tuple(cfg.seed_examples), query)


_HEX = re.compile(r"(?:0[xX])?[0-9a-fA-F]{4,}")


def _is_ip(token: str) -> bool:
    try:
        ipaddress.ip_address(token)
    except ValueError:
        return False
    return True


def heuristic_token(token: str) -> str:
    """Template fragment for one raw token."""
    if "=" in token:
        key, _, value = token.partition("=")
        if not key:
            return PLACEHOLDER
        return f"{key}={PLACEHOLDER}" if value else token
    if any(ch.isdigit() for ch in token) or "/" in token or _is_ip(token) or _HEX.fullmatch(token):
        return PLACEHOLDER
    return token


def heuristic_template(tokens: Sequence[str]) -> str:
    out: list[str] = []
    for tok in tokens:
        frag = heuristic_token(tok)
        if frag == PLACEHOLDER and out and out[-1] == PLACEHOLDER:
            continue
        out.append(frag)
    return " ".join(out)


def parse_response(text: str) -> str:
    """Template from a model reply: the last non-empty line, minus a label or code fence."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and ln.strip() != "```"]
    if not lines:
        return ""
    line = lines[-1]
    if line.lower().startswith("template:"):
        line = line[len("template:"):].strip()
    return line.strip("`").strip()


@dataclass
class DegradationEvent:
    line_id: int
    source: str
    reason: str


class Extractor:
    backend: Backend

    def __init__(self):
        self._calls = 0
        self._lock = threading.Lock()
        self.events: list[DegradationEvent] = []

    @property
    def calls(self) -> int:
        return self._calls

    def extract(self, record: LogRecord, state=None) -> str:
        with self._lock:
            self._calls += 1
        template = self._extract(record, state)
        derive_syntax_template(template, record.tokens)  # raises AlignmentError
        return template

    def _extract(self, record: LogRecord, state) -> str:
        raise NotImplementedError


def count_calls(extractor: Extractor) -> int:
    return extractor.calls


class HeuristicExtractor(Extractor):
    backend = Backend.HEURISTIC

    def _extract(self, record, state):
        return heuristic_template(record.tokens)


class OracleExtractor(Extractor):
    """Hands back ground-truth templates; for tests and upper-bound runs."""

    backend = Backend.ORACLE

    def __init__(self, truth: Mapping[tuple[str, int], str] | None):
        super().__init__()
        self.truth = truth

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "OracleExtractor":
        if dataset.truth is None:
            raise MissingTruth(f"dataset {dataset.name!r} has no ground truth")
        return cls({(dataset.name, gt.line_id): gt.event_template for gt in dataset.truth})

    def _extract(self, record, state):
        if self.truth is None:
            raise MissingTruth("oracle extractor has no ground truth")
        try:
            return self.truth[record.key]
        except KeyError:
            raise MissingTruth(f"no ground truth for {record.key}") from None


class RemoteExtractor(Extractor):
    """Chat-completions extraction with retry on unaligned answers.

    After ``max_retries`` failed retries (bad alignment or transport errors) the
    heuristic template is used and a degradation event is recorded.
    """

    backend = Backend.REMOTE

    def __init__(self, transport: Transport, cfg: ExtractorConfig | None = None,
                 labeled: Sequence[tuple[str, str]] = (), similarity=jaccard_similarity):
        super().__init__()
        self.transport = transport
        self.cfg = cfg or ExtractorConfig(backend=Backend.REMOTE)
        self.labeled = list(labeled)
        self.similarity = similarity

    def request_body(self, messages: list[dict]) -> dict:
        return {"model": self.cfg.model, "temperature": self.cfg.temperature, "messages": messages}

    def _extract(self, record, state):
        demos = select_demonstrations(record.tokens, state, self.cfg.k_demonstrations, self.labeled,
                                      self.similarity)
        messages = build_prompt(record.content, demos, self.cfg).messages()
        reason = "no attempts"
        for attempt in range(self.cfg.max_retries + 1):
            try:
                reply = completion_text(self.transport.post(self.request_body(messages)))
            except TransportError as exc:
                reason = f"transport: {exc}"
                logger.warning("line %s attempt %d: %s", record.line_id, attempt, reason)
                continue
            template = parse_response(reply)
            try:
                derive_syntax_template(template, record.tokens)
                return template
            except AlignmentError:
                reason = f"unaligned template {template!r}"
                logger.info("line %s attempt %d: %s", record.line_id, attempt, reason)
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": (
                    f"The last line of your answer does not fit the log message token by token. "
                    f"Keep every constant word of the query log and use {PLACEHOLDER} only for "
                    f"variable parts. Answer again with the template on the last line."
                )},
            ]
        self.events.append(DegradationEvent(record.line_id, record.source, reason))
        return heuristic_template(record.tokens)


def make_extractor(cfg: ExtractorConfig, *, dataset: Dataset | None = None,
                   transport: Transport | None = None, labeled=()) -> Extractor:
    if cfg.backend is Backend.HEURISTIC:
        return HeuristicExtractor()
    if cfg.backend is Backend.ORACLE:
        if dataset is None or dataset.truth is None:
            raise MissingTruth("oracle extractor needs a dataset with ground truth")
        return OracleExtractor.from_dataset(dataset)
    if transport is None:
        raise ValueError("remote extractor needs a transport")
    return RemoteExtractor(transport, cfg, labeled)
