"""Log clusters, template pool and matching over the prefix tree."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from babylon import kernels
from babylon.errors import AlignmentError
from babylon.parse_core.syntax import (
    WILDCARD,
    Literal,
    SyntaxTemplate,
    Wildcard,
    derive_syntax_template,
    fragment_regex,
    render_template,
)
from babylon.parse_core.tree import ParseTree

MemberKey = tuple[str, int]


@dataclass
class LogCluster:
    cluster_id: int
    template: str
    syntax_templates: dict[int, list[SyntaxTemplate]] = field(default_factory=dict)
    member_ids: list[MemberKey] = field(default_factory=list)
    embedding: list[float] | None = None

    def add_syntax(self, syntax: SyntaxTemplate) -> bool:
        bucket = self.syntax_templates.setdefault(syntax.arity, [])
        if syntax in bucket:
            return False
        bucket.append(syntax)
        return True

    def iter_syntax(self) -> Iterable[SyntaxTemplate]:
        for bucket in self.syntax_templates.values():
            yield from bucket

    def strictly_matches(self, tokens: Sequence[str]) -> bool:
        return any(st.matches(tokens) for st in self.syntax_templates.get(len(tokens), ()))

    def loosely_matches(self, tokens: Sequence[str]) -> bool:
        return any(st.loose_matches(tokens) for st in self.syntax_templates.get(len(tokens), ()))

    def best_overlap(self, tokens: Sequence[str]) -> tuple[int, SyntaxTemplate | None]:
        """Highest literal overlap among same-arity syntax templates (first wins ties)."""
        best, best_st = -1, None
        for st in self.syntax_templates.get(len(tokens), ()):
            ov = kernels.literal_overlap(st.mask, tokens)
            if ov > best:
                best, best_st = ov, st
        return best, best_st


@dataclass(frozen=True)
class Strict:
    cluster_id: int


@dataclass(frozen=True)
class Loose:
    cluster_ids: tuple[int, ...]


@dataclass(frozen=True)
class NoMatch:
    pass


MatchResult = Union[Strict, Loose, NoMatch]
NO_MATCH = NoMatch()


def classify_candidates(tokens: Sequence[str], clusters: Iterable[LogCluster]) -> MatchResult:
    """Strict / loose / no-match over an explicit set of candidate clusters."""
    strict: list[int] = []
    loose: list[tuple[int, int]] = []
    for c in clusters:
        best = -1
        for st in c.syntax_templates.get(len(tokens), ()):
            if not st.loose_matches(tokens):
                continue
            if st.matches(tokens):
                strict.append(c.cluster_id)
                break
            best = max(best, st.literal_count)
        else:
            if best >= 0:
                loose.append((best, c.cluster_id))
    if strict:
        return Strict(min(strict))
    if loose:
        loose.sort(key=lambda p: (-p[0], p[1]))
        return Loose(tuple(cid for _, cid in loose))
    return NO_MATCH


def search(tree: ParseTree, tokens: Sequence[str], clusters: dict[int, LogCluster]) -> MatchResult:
    if not tokens:
        return NO_MATCH
    ids = tree.candidates(tokens)
    return classify_candidates(tokens, (clusters[cid] for cid in ids))


def find_loose_matches(tokens: Sequence[str], clusters: dict[int, LogCluster]) -> list[LogCluster]:
    """Merge candidates: every cluster with a same-arity syntax template.

    Positions align one to one; literals that disagree with the log are the
    ones a merge would turn into wildcards. Ordered by literal overlap, then id.
    """
    scored = []
    for c in clusters.values():
        ov, st = c.best_overlap(tokens)
        if st is not None:
            scored.append((-ov, c.cluster_id, c))
    scored.sort(key=lambda s: (s[0], s[1]))
    return [c for _, _, c in scored]


def generalize_syntax(syntax: SyntaxTemplate, tokens: Sequence[str]) -> list:
    out = []
    for tok, raw in zip(syntax.tokens, tokens):
        if isinstance(tok, Literal):
            out.append(tok if tok.text == raw else WILDCARD)
        elif tok.pattern is not None and fragment_regex(tok.pattern).fullmatch(raw):
            out.append(tok)
        else:
            out.append(WILDCARD)
    return out


def check_merge(
    tokens: Sequence[str],
    cluster: LogCluster,
    members: Iterable[Sequence[str]] = (),
    min_literal_ratio: float = 0.5,
) -> str | None:
    """Merged template for ``tokens`` joining ``cluster``, or None.

    Literals of the best-aligned syntax template that differ from the log become
    wildcards. The merge holds if at least one literal survives and survivors
    make up ``min_literal_ratio`` of the arity. ``members`` (token lists of the
    cluster's current logs) must all still align with the merged template.
    """
    _, best = cluster.best_overlap(tokens)
    if best is None:
        return None
    merged = generalize_syntax(best, tokens)
    survivors = sum(1 for t in merged if isinstance(t, Literal))
    if survivors < 1 or survivors / len(merged) < min_literal_ratio:
        return None
    text = render_template(merged)
    try:
        derive_syntax_template(text, tokens)
        for m in members:
            derive_syntax_template(text, m)
    except AlignmentError:
        return None
    return text


class ParserState:
    """Clusters, template pool, prefix tree and the token store for members."""

    def __init__(self):
        self.clusters: dict[int, LogCluster] = {}
        self.pool: dict[str, int] = {}
        self.tree = ParseTree()
        self.member_tokens: dict[MemberKey, tuple[str, ...]] = {}
        self.placement: dict[MemberKey, int] = {}
        self._next_id = 1

    def __len__(self):
        return len(self.clusters)

    def search(self, tokens: Sequence[str]) -> MatchResult:
        return search(self.tree, tokens, self.clusters)

    def find_loose_matches(self, tokens: Sequence[str]) -> list[LogCluster]:
        return find_loose_matches(tokens, self.clusters)

    def members_of(self, cluster: LogCluster) -> Iterable[tuple[str, ...]]:
        return (self.member_tokens[k] for k in cluster.member_ids)

    def attach_syntax(self, cluster: LogCluster, syntax: SyntaxTemplate) -> None:
        cluster.add_syntax(syntax)
        self.tree.insert(syntax, cluster.cluster_id)

    def add_member(self, cluster: LogCluster, key: MemberKey, tokens: Sequence[str]) -> None:
        if key in self.placement:
            raise ValueError(f"{key} already placed in cluster {self.placement[key]}")
        cluster.member_ids.append(key)
        self.member_tokens[key] = tuple(tokens)
        self.placement[key] = cluster.cluster_id

    def create_cluster(self, template: str, syntax: SyntaxTemplate, key: MemberKey, tokens) -> LogCluster:
        if template in self.pool:
            raise ValueError(f"template already pooled: {template!r}")
        cluster = LogCluster(self._next_id, template)
        self._next_id += 1
        self.clusters[cluster.cluster_id] = cluster
        self.attach_syntax(cluster, syntax)
        self.pool[template] = cluster.cluster_id
        self.add_member(cluster, key, tokens)
        return cluster

    def retemplate(self, cluster: LogCluster, template: str, extra: Sequence[str] | None = None) -> None:
        """Replace a cluster's template and rebuild its syntax templates from members.

        ``extra`` is a token list about to join the cluster.
        """
        if self.pool.get(cluster.template) == cluster.cluster_id:
            del self.pool[cluster.template]
        cluster.template = template
        self.pool[template] = cluster.cluster_id
        for st in cluster.iter_syntax():
            self.tree.remove(st, cluster.cluster_id)
        cluster.syntax_templates = {}
        shapes = dict.fromkeys(self.members_of(cluster))
        if extra is not None:
            shapes[tuple(extra)] = None
        for toks in shapes:
            self.attach_syntax(cluster, derive_syntax_template(template, toks))

    def snapshot(self) -> "ParserState":
        return copy.deepcopy(self)

    # -- consistency -------------------------------------------------------

    def audit(self) -> list[str]:
        return audit_consistency(self)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        clusters = []
        for cid in sorted(self.clusters):
            c = self.clusters[cid]
            clusters.append({
                "id": c.cluster_id,
                "template": c.template,
                "syntax_templates": {
                    str(arity): [st.to_json() for st in bucket]
                    for arity, bucket in sorted(c.syntax_templates.items())
                },
                "member_ids": [list(k) for k in c.member_ids],
                "member_tokens": [list(self.member_tokens[k]) for k in c.member_ids],
            })
        return {"clusters": clusters, "pool": dict(sorted(self.pool.items())), "next_id": self._next_id}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ParserState":
        state = cls()
        for item in doc["clusters"]:
            c = LogCluster(int(item["id"]), item["template"])
            state.clusters[c.cluster_id] = c
            for arity in sorted(item["syntax_templates"], key=int):
                for st_json in item["syntax_templates"][arity]:
                    state.attach_syntax(c, SyntaxTemplate.from_json(st_json))
            toks = item.get("member_tokens") or [None] * len(item["member_ids"])
            for (source, line_id), t in zip(item["member_ids"], toks):
                key = (source, int(line_id))
                c.member_ids.append(key)
                state.placement[key] = c.cluster_id
                if t is not None:
                    state.member_tokens[key] = tuple(t)
        state.pool = {k: int(v) for k, v in doc["pool"].items()}
        state._next_id = int(doc.get("next_id", max(state.clusters, default=0) + 1))
        return state

    @classmethod
    def from_json(cls, text: str) -> "ParserState":
        return cls.from_dict(json.loads(text))


def audit_consistency(state: ParserState) -> list[str]:
    """Every violated structural invariant, one message per violation."""
    problems: list[str] = []
    clusters = state.clusters
    seen_refs: set[tuple[tuple, int]] = set()
    for path, cid in state.tree.iter_refs():
        seen_refs.add((path, cid))
        if cid not in clusters:
            problems.append(f"tree: node {path!r} points at missing cluster {cid}")
    for cid, c in clusters.items():
        if c.cluster_id != cid:
            problems.append(f"cluster {cid}: registered under wrong id {c.cluster_id}")
        for arity, bucket in c.syntax_templates.items():
            for st in bucket:
                if st.arity != arity:
                    problems.append(f"cluster {cid}: arity-{st.arity} syntax template stored under {arity}")
                if (st.mask, cid) not in seen_refs:
                    problems.append(f"cluster {cid}: syntax template {st} unreachable in tree")
        if state.pool.get(c.template) != cid:
            problems.append(f"pool: template {c.template!r} of cluster {cid} maps to {state.pool.get(c.template)}")
        keys = set()
        for key in c.member_ids:
            if key in keys:
                problems.append(f"cluster {cid}: duplicate member {key}")
            keys.add(key)
            if state.placement.get(key) != cid:
                problems.append(f"cluster {cid}: member {key} placed in {state.placement.get(key)}")
            toks = state.member_tokens.get(key)
            if toks is None:
                problems.append(f"cluster {cid}: no tokens stored for member {key}")
            elif not c.strictly_matches(toks):
                problems.append(f"cluster {cid}: member {key} matches no syntax template")
    for path, cid in seen_refs:
        c = clusters.get(cid)
        if c is not None and not any(st.mask == path for st in c.syntax_templates.get(len(path), ())):
            problems.append(f"tree: stale pointer to cluster {cid} at {path!r}")
    for text, cid in state.pool.items():
        c = clusters.get(cid)
        if c is None:
            problems.append(f"pool: {text!r} points at missing cluster {cid}")
        elif c.template != text:
            problems.append(f"pool: {text!r} points at cluster {cid} whose template is {c.template!r}")
    return problems
