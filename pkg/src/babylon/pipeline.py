"""Streaming parse loop: match, extract, pool lookup, merge, create."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from babylon.errors import AlignmentError, BabylonError
from babylon.extractor import Extractor
from babylon.ingest import Dataset, LogRecord
from babylon.parse_core import ParserState, Strict, check_merge, derive_syntax_template

logger = logging.getLogger(__name__)

_SEP = "\x1f"


class Action(str, Enum):
    STRICT = "StrictMatched"
    POOL = "PoolMatched"
    MERGED = "Merged"
    CREATED = "Created"


@dataclass(frozen=True)
class ParseOutcome:
    record: LogRecord
    cluster_id: int
    template_text: str
    action: Action

    def to_dict(self, template: str | None = None) -> dict:
        return {
            "line_id": self.record.line_id,
            "cluster_id": self.cluster_id,
            "template": self.template_text if template is None else template,
            "action": self.action.value,
        }


@dataclass
class DeadLetter:
    record: LogRecord
    error: str


class PartialMatchCache:
    """Merge candidates per exact token sequence, dropped when a listed cluster changes."""

    def __init__(self):
        self._entries: dict[str, list[int]] = {}
        self._by_cluster: dict[int, set[str]] = {}

    @staticmethod
    def key(tokens: Sequence[str]) -> str:
        return _SEP.join(tokens)

    def get(self, tokens: Sequence[str]) -> list[int]:
        return self._entries.get(self.key(tokens), [])

    def put(self, tokens: Sequence[str], cluster_ids: list[int]) -> None:
        k = self.key(tokens)
        self._entries[k] = list(cluster_ids)
        for cid in cluster_ids:
            self._by_cluster.setdefault(cid, set()).add(k)

    def invalidate_cluster(self, cluster_id: int) -> None:
        for k in self._by_cluster.pop(cluster_id, ()):
            ids = self._entries.pop(k, ())
            for other in ids:
                if other != cluster_id:
                    self._by_cluster.get(other, set()).discard(k)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, tokens) -> bool:
        return self.key(tokens) in self._entries


@dataclass
class RunSummary:
    records: int
    clusters: int
    extractor_calls: int
    dead_letters: int
    actions: dict[str, int]
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "records": self.records,
            "clusters": self.clusters,
            "extractor_calls": self.extractor_calls,
            "dead_letters": self.dead_letters,
            "actions": dict(self.actions),
            "wall_time_s": round(self.wall_time, 6),
        }


class Pipeline:
    """One logical writer over a :class:`ParserState`.

    With ``debug=True`` the state is audited after every record and any
    violation raises ``AssertionError``.
    """

    def __init__(self, extractor: Extractor, state: ParserState | None = None,
                 debug: bool = False, min_literal_ratio: float = 0.5):
        self.extractor = extractor
        self.state = state if state is not None else ParserState()
        self.cache = PartialMatchCache()
        self.dead_letters: list[DeadLetter] = []
        self.debug = debug
        self.min_literal_ratio = min_literal_ratio

    def process_log(self, record: LogRecord) -> ParseOutcome | None:
        try:
            outcome = self._process(record)
        except (BabylonError, AlignmentError) as exc:
            logger.warning("dead letter %s: %s", record.key, exc)
            self.dead_letters.append(DeadLetter(record, str(exc)))
            outcome = None
        if self.debug:
            problems = self.state.audit()
            if problems:
                raise AssertionError(f"after line {record.line_id}: " + "; ".join(problems))
        return outcome

    def _process(self, record: LogRecord) -> ParseOutcome:
        state = self.state
        tokens = record.tokens
        placed = state.placement.get(record.key)
        if placed is not None:
            # re-ingestion: its cluster already holds a strictly matching syntax template
            c = state.clusters[placed]
            return ParseOutcome(record, placed, c.template, Action.STRICT)

        match = state.search(tokens)
        if isinstance(match, Strict):
            c = state.clusters[match.cluster_id]
            state.add_member(c, record.key, tokens)
            return ParseOutcome(record, c.cluster_id, c.template, Action.STRICT)

        template = self.extractor.extract(record, state)

        pooled = state.pool.get(template)
        if pooled is not None:
            c = state.clusters[pooled]
            state.attach_syntax(c, derive_syntax_template(template, tokens))
            state.add_member(c, record.key, tokens)
            return ParseOutcome(record, c.cluster_id, c.template, Action.POOL)

        candidates = self.cache.get(tokens)
        if not candidates:
            candidates = [c.cluster_id for c in state.find_loose_matches(tokens)]
            self.cache.put(tokens, candidates)
        for cid in candidates:
            c = state.clusters[cid]
            merged = check_merge(tokens, c, set(state.members_of(c)), self.min_literal_ratio)
            if merged is None:
                continue
            owner = state.pool.get(merged)
            if owner is not None and owner != cid:
                continue
            state.retemplate(c, merged, extra=tokens)
            state.add_member(c, record.key, tokens)
            self.cache.invalidate_cluster(cid)
            return ParseOutcome(record, cid, merged, Action.MERGED)

        c = state.create_cluster(template, derive_syntax_template(template, tokens), record.key, tokens)
        return ParseOutcome(record, c.cluster_id, c.template, Action.CREATED)

    def run_stream(self, records: Dataset | Iterable[LogRecord]) -> tuple[list[ParseOutcome], RunSummary]:
        if isinstance(records, Dataset):
            records = records.records
        start = time.perf_counter()
        calls_before = self.extractor.calls
        dead_before = len(self.dead_letters)
        outcomes = []
        actions = {a.value: 0 for a in Action}
        n = 0
        for record in records:
            n += 1
            out = self.process_log(record)
            if out is not None:
                outcomes.append(out)
                actions[out.action.value] += 1
        summary = RunSummary(
            records=n,
            clusters=len(self.state.clusters),
            extractor_calls=self.extractor.calls - calls_before,
            dead_letters=len(self.dead_letters) - dead_before,
            actions=actions,
            wall_time=time.perf_counter() - start,
        )
        return outcomes, summary

    def outcome_lines(self, outcomes: Iterable[ParseOutcome]) -> list[str]:
        """JSONL rows carrying each cluster's final template."""
        rows = []
        for o in outcomes:
            c = self.state.clusters.get(o.cluster_id)
            template = c.template if c is not None else o.template_text
            rows.append(json.dumps(o.to_dict(template), sort_keys=True, ensure_ascii=False))
        return rows
