"""Small builders shared by tests."""

import random

from babylon.ingest import Dataset, GroundTruthEntry, LogRecord
from babylon.parse_core import LogCluster, Literal, ParserState, SyntaxTemplate, render_template


def state_with(*masks_per_cluster, members=None):
    """ParserState holding one cluster per argument; each argument is a list of masks."""
    state = ParserState()
    for masks in masks_per_cluster:
        if isinstance(masks[0], (str, type(None))):
            masks = [masks]
        sts = [SyntaxTemplate.from_mask(m) for m in masks]
        cid = state._next_id
        state._next_id += 1
        c = LogCluster(cid, render_template(sts[0].tokens))
        state.clusters[cid] = c
        state.pool[c.template] = cid
        for st_ in sts:
            state.attach_syntax(c, st_)
    return state


def to_entries(st_):
    return [("L", t.text) if isinstance(t, Literal) else ("W", t.pattern) for t in st_.tokens]


def brute_view(state):
    return {cid: [to_entries(s) for s in c.iter_syntax()] for cid, c in state.clusters.items()}


def as_tuple(result):
    from babylon.parse_core import Loose, Strict
    if isinstance(result, Strict):
        return ("strict", result.cluster_id)
    if isinstance(result, Loose):
        return ("loose", list(result.cluster_ids))
    return ("none",)


WORDS = ["user", "open", "port", "session", "closed", "for", "block", "size", "from", "to"]


def random_corpus(rng: random.Random, max_logs=30, max_templates=6, source="r"):
    """Logs drawn from a few random templates over a tiny vocabulary.

    Variable slots produce numbers, names, key=value pairs or paths so that
    the heuristic extractor sees a mix of variables and colliding literals.
    """
    templates = []
    for _ in range(rng.randint(1, max_templates)):
        n = rng.randint(1, 5)
        templates.append([rng.choice(WORDS + ["<v>"]) for _ in range(n)])

    def slot():
        kind = rng.randrange(5)
        if kind == 0:
            return str(rng.randint(0, 99))
        if kind == 1:
            return rng.choice(["alice", "bob", "carol"])
        if kind == 2:
            return f"size={rng.randint(0, 9)}"
        if kind == 3:
            return f"/var/{rng.choice(WORDS)}"
        return rng.choice(WORDS)

    records = []
    for i in range(1, rng.randint(1, max_logs) + 1):
        tpl = rng.choice(templates)
        toks = []
        for piece in tpl:
            if piece == "<v>":
                toks.extend(slot() for _ in range(rng.choice([1, 1, 1, 2])))
            else:
                toks.append(piece)
        records.append(LogRecord.from_content(i, source, " ".join(toks)))
    return records


def dataset_from_pairs(name, pairs):
    records = [LogRecord.from_content(i, name, c) for i, (c, _) in enumerate(pairs, 1)]
    truth = [GroundTruthEntry(i, c, f"E{i}", t) for i, (c, t) in enumerate(pairs, 1)]
    return Dataset(name, records, truth)
