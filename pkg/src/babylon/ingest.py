"""Loading raw logs and loghub-style structured CSVs."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from babylon.errors import EmptyContent, MissingTruth, RowError, SchemaError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("LineId", "Content", "EventId", "EventTemplate")


def tokenize(content: str) -> list[str]:
    """Split on runs of whitespace; no masking, no case folding."""
    tokens = content.split()
    if not tokens:
        raise EmptyContent("log content is blank")
    return tokens


@dataclass(frozen=True)
class LogRecord:
    line_id: int
    source: str
    content: str
    tokens: tuple[str, ...]

    @classmethod
    def from_content(cls, line_id: int, source: str, content: str) -> "LogRecord":
        return cls(line_id, source, content, tuple(tokenize(content)))

    @property
    def key(self) -> tuple[str, int]:
        return (self.source, self.line_id)


@dataclass(frozen=True)
class GroundTruthEntry:
    line_id: int
    content: str
    event_id: str
    event_template: str


@dataclass
class Dataset:
    name: str
    records: list[LogRecord]
    truth: list[GroundTruthEntry] | None = None
    skipped_blank: int = 0
    _truth_by_id: dict[int, GroundTruthEntry] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.truth is not None:
            if len(self.truth) != len(self.records):
                raise ValueError("truth and records differ in length")
            for rec, gt in zip(self.records, self.truth):
                if rec.line_id != gt.line_id:
                    raise ValueError(f"line id mismatch: {rec.line_id} != {gt.line_id}")

    def __len__(self):
        return len(self.records)

    def truth_for(self, line_id: int) -> GroundTruthEntry:
        if self.truth is None:
            raise MissingTruth(f"dataset {self.name!r} has no ground truth")
        if self._truth_by_id is None:
            self._truth_by_id = {gt.line_id: gt for gt in self.truth}
        return self._truth_by_id[line_id]


def _source_name(path: Path) -> str:
    name = path.name
    for suffix in ("_2k.log_structured.csv", ".log_structured.csv", ".csv", ".log"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def load_structured_csv(path, source: str | None = None) -> Dataset:
    path = Path(path)
    source = source or _source_name(path)
    records, truth = [], []
    with open(path, newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise SchemaError(column)
        for row in reader:
            lineno = reader.line_num
            try:
                line_id = int(row["LineId"])
            except (TypeError, ValueError):
                raise RowError(lineno, f"bad LineId {row.get('LineId')!r}") from None
            content = row["Content"]
            if content is None or row["EventTemplate"] is None:
                raise RowError(lineno, "too few fields")
            if not content.strip():
                raise RowError(lineno, "blank Content")
            records.append(LogRecord.from_content(line_id, source, content))
            truth.append(GroundTruthEntry(line_id, content, row["EventId"], row["EventTemplate"]))
    return Dataset(source, records, truth)


def load_raw_log(path, source: str | None = None) -> Dataset:
    path = Path(path)
    source = source or _source_name(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    text = raw.decode("utf-8", errors="replace")
    records = []
    skipped = 0
    # splitlines() would also break on \x0b, \x1c etc.; logs only use \n / \r\n
    for line in text.split("\n"):
        if line.endswith("\r"):
            line = line[:-1]
        if not line.strip():
            skipped += 1
            continue
        records.append(LogRecord.from_content(len(records) + 1, source, line))
    if text.endswith("\n") or not text:
        skipped -= 1  # the empty string after the final newline is not a line
    if skipped:
        logger.info("skipped %d blank lines in %s", skipped, path)
    return Dataset(source, records, None, skipped_blank=skipped)


def load_dataset(path, source: str | None = None) -> Dataset:
    """Structured CSV by extension, plain text otherwise."""
    if str(path).endswith(".csv"):
        return load_structured_csv(path, source)
    return load_raw_log(path, source)


def write_structured_csv(dataset: Dataset, path) -> None:
    if dataset.truth is None:
        raise MissingTruth(dataset.name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REQUIRED_COLUMNS)
        for gt in dataset.truth:
            writer.writerow([gt.line_id, gt.content, gt.event_id, gt.event_template])


def sample_icl_pairs(dataset: Dataset, n: int = 32, fraction: float = 0.10) -> list[tuple[str, str]]:
    """Pick ``n`` labelled (content, template) pairs from the head of a dataset.

    Candidates are the first ``floor(fraction * len)`` records, one per distinct
    template (first occurrence), sorted by token count. Picks are taken at evenly
    spaced ranks so the result is deterministic and spans the length range.
    """
    if dataset.truth is None:
        raise MissingTruth(f"dataset {dataset.name!r} has no ground truth")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    head = int(fraction * len(dataset.records))
    seen = set()
    candidates = []
    for rec, gt in zip(dataset.records[:head], dataset.truth[:head]):
        if gt.event_template in seen:
            continue
        seen.add(gt.event_template)
        candidates.append((len(rec.tokens), rec.content, gt.event_template))
    candidates.sort(key=lambda c: c[0])  # stable: ties keep file order
    m = len(candidates)
    if m <= n:
        picks = range(m)
    else:
        picks = [i * m // n for i in range(n)]
    return [(candidates[i][1], candidates[i][2]) for i in picks]
