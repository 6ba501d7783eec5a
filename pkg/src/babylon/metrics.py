"""Grouping and template accuracy against ground truth.

Groupings map ``line_id -> group key``. Parsed keys are cluster ids; truth keys
are ground-truth template texts. Template texts are compared after collapsing
whitespace runs and trimming.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Hashable, Iterable, Mapping

from babylon.errors import CoverageError, MissingTruth
from babylon.parse_core.syntax import canonical

Grouping = Mapping[int, Hashable]

TABLE_COLUMNS = ("GA", "PA", "FGA", "FTA", "GGD", "PGD")


def _check_cover(a: Mapping, b: Mapping) -> None:
    if a.keys() != b.keys():
        missing = sorted(set(b) - set(a))[:5]
        extra = sorted(set(a) - set(b))[:5]
        raise CoverageError(f"line ids differ (missing {missing}, unexpected {extra})")


def groups_of(assignment: Grouping) -> dict[Hashable, frozenset]:
    buckets: dict[Hashable, set] = defaultdict(set)
    for line_id, key in assignment.items():
        buckets[key].add(line_id)
    return {k: frozenset(v) for k, v in buckets.items()}


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def grouping_accuracy(parsed: Grouping, truth: Grouping) -> float:
    _check_cover(parsed, truth)
    pg, tg = groups_of(parsed), groups_of(truth)
    correct = sum(len(members) for key, members in pg.items()
                  if tg[truth[next(iter(members))]] == members)
    return _ratio(correct, len(parsed))


def parsing_accuracy(parsed_templates: Mapping[int, str], truth_templates: Mapping[int, str]) -> float:
    _check_cover(parsed_templates, truth_templates)
    correct = sum(1 for i, t in parsed_templates.items() if canonical(t) == canonical(truth_templates[i]))
    return _ratio(correct, len(parsed_templates))


def _exact_groups(parsed: Grouping, truth: Grouping):
    """Parsed groups whose member set equals some truth group, as (parsed key, truth key)."""
    tg = groups_of(truth)
    out = []
    for key, members in groups_of(parsed).items():
        tkey = truth[next(iter(members))]
        if tg[tkey] == members:
            out.append((key, tkey))
    return out


def fga(parsed: Grouping, truth: Grouping) -> tuple[float, float, float]:
    _check_cover(parsed, truth)
    n_p, n_g = len(set(parsed.values())), len(set(truth.values()))
    n_c = len(_exact_groups(parsed, truth))
    p, r = _ratio(n_c, n_p), _ratio(n_c, n_g)
    return p, r, harmonic(p, r)


def _group_template(members, parsed_templates) -> str | None:
    texts = {canonical(parsed_templates[i]) for i in members}
    return texts.pop() if len(texts) == 1 else None


def fta_pta_rta(parsed_templates: Mapping[int, str], parsed: Grouping, truth: Grouping) -> tuple[float, float, float]:
    """(PTA, RTA, FTA). A parsed template is correct when its group equals a
    truth group and its text equals that group's template."""
    _check_cover(parsed, truth)
    _check_cover(parsed_templates, truth)
    pg = groups_of(parsed)
    correct = 0
    for pkey, tkey in _exact_groups(parsed, truth):
        if _group_template(pg[pkey], parsed_templates) == canonical(str(tkey)):
            correct += 1
    pta = _ratio(correct, len(pg))
    rta = _ratio(correct, len(set(truth.values())))
    return pta, rta, harmonic(pta, rta)


def _components(parsed: Grouping, truth: Grouping) -> int:
    """Connected components of the parsed-group / truth-group overlap graph."""
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for line_id in parsed:
        a, b = ("p", parsed[line_id]), ("t", truth[line_id])
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return sum(1 for x in parent if find(x) == x)


def granularity_distances(parsed: Grouping, parsed_templates: Mapping[int, str], truth: Grouping) -> tuple[int, int]:
    """(GGD, PGD).

    GGD is the fewest merge/split operations (merge two groups, or split one
    group in two) turning the parsed partition into the truth partition. Inside
    each connected component of the overlap graph, merging everything and then
    splitting out the truth groups takes ``p + t - 2`` steps, and no single
    operation lowers that sum by more than one, so the total is
    ``|P| + |T| - 2 * components``.

    PGD adds one template fix per truth group whose members do not all carry
    that group's template text.
    """
    _check_cover(parsed, truth)
    _check_cover(parsed_templates, truth)
    n_p, n_t = len(set(parsed.values())), len(set(truth.values()))
    ggd = n_p + n_t - 2 * _components(parsed, truth) if parsed else 0
    fixes = 0
    for tkey, members in groups_of(truth).items():
        if _group_template(members, parsed_templates) != canonical(str(tkey)):
            fixes += 1
    return ggd, ggd + fixes


@dataclass
class MetricsReport:
    ga: float = 0.0
    pa: float = 0.0
    fga: float = 0.0
    fta: float = 0.0
    pta: float = 0.0
    rta: float = 0.0
    p_ga: float = 0.0
    r_ga: float = 0.0
    ggd: int = 0
    pgd: int = 0
    n_g: int = 0
    n_p: int = 0
    n_c: int = 0

    @property
    def ca(self) -> float:
        return self.ga

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self, name: str = "run") -> str:
        head = f"{'Dataset':<16}" + "".join(f"{c:>8}" for c in TABLE_COLUMNS)
        row = (f"{name:<16}{self.ga:>8.3f}{self.pa:>8.3f}{self.fga:>8.3f}{self.fta:>8.3f}"
               f"{self.ggd:>8d}{self.pgd:>8d}")
        return head + "\n" + row + "\n"


def compute(parsed: Grouping, parsed_templates: Mapping[int, str], truth: Grouping) -> MetricsReport:
    _check_cover(parsed, truth)
    if not parsed:
        return MetricsReport()
    truth_templates = {i: str(k) for i, k in truth.items()}
    p_ga, r_ga, f_ga = fga(parsed, truth)
    pta, rta, fta = fta_pta_rta(parsed_templates, parsed, truth)
    ggd, pgd = granularity_distances(parsed, parsed_templates, truth)
    return MetricsReport(
        ga=grouping_accuracy(parsed, truth),
        pa=parsing_accuracy(parsed_templates, truth_templates),
        fga=f_ga, fta=fta, pta=pta, rta=rta, p_ga=p_ga, r_ga=r_ga,
        ggd=ggd, pgd=pgd,
        n_g=len(set(truth.values())),
        n_p=len(set(parsed.values())),
        n_c=len(_exact_groups(parsed, truth)),
    )


def outcome_maps(outcomes: Iterable) -> tuple[dict[int, int], dict[int, str]]:
    """Grouping and per-line template from outcomes (objects or JSON rows).

    A cluster's template is the last one seen for it, so in-memory outcomes
    reflect later merges.
    """
    grouping: dict[int, int] = {}
    latest: dict[int, str] = {}
    for o in outcomes:
        if isinstance(o, dict):
            line_id, cid, text = int(o["line_id"]), int(o["cluster_id"]), o["template"]
        else:
            line_id, cid, text = o.record.line_id, o.cluster_id, o.template_text
        if line_id in grouping:
            raise CoverageError(f"line {line_id} appears twice")
        grouping[line_id] = cid
        latest[cid] = text
    return grouping, {i: latest[c] for i, c in grouping.items()}


def evaluate(outcomes: Iterable, truth) -> MetricsReport:
    """Metrics for parse outcomes against a dataset with ground truth."""
    if truth.truth is None:
        raise MissingTruth(f"dataset {truth.name!r} has no ground truth")
    grouping, templates = outcome_maps(outcomes)
    truth_grouping = {gt.line_id: gt.event_template for gt in truth.truth}
    return compute(grouping, templates, truth_grouping)
