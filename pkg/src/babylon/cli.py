"""Command-line entry point: ``babylon {parse,evaluate,detect,report}``.

Exit codes: 0 success, 1 unexpected failure, 2 usage error or missing input,
3 line-id coverage mismatch, 4 empty vector store.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

from babylon.errors import BabylonError, CoverageError, EmptyStore, MissingTruth
from babylon.extractor import Backend, ExtractorConfig, make_extractor
from babylon.ingest import Dataset, load_dataset, sample_icl_pairs
from babylon.metrics import evaluate
from babylon.parse_core import ParserState
from babylon.pipeline import Pipeline
from babylon import rag
from babylon.transport import CannedTransport, HttpTransport

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("babylon")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COVERAGE, EXIT_EMPTY_STORE = 0, 1, 2, 3, 4
ENV_PREFIX = "BABYLON_"


@dataclass
class AppConfig:
    extractor: str = "heuristic"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo-0613"
    temperature: float = 0.0
    k: int = 3
    max_retries: int = 2
    timeout: float = 60.0
    icl_pairs: int = 0
    embedding: str = "hashed"
    embed_endpoint: str = "https://api.openai.com/v1/embeddings"
    embed_model: str = "text-embedding-ada-002"
    dim: int = 1024
    top_k: int = 5
    tau: float = 0.80
    detector: str = "stub"
    narrator: str = "none"
    narrative_text: str = "OK"
    input: str | None = None
    truth: str | None = None
    normal: str | None = None
    store: str | None = None
    verdicts: str | None = None
    fixtures: str | None = None
    state: str | None = None
    out: str = "out"

    def validate(self) -> None:
        if self.extractor not in {b.value for b in Backend}:
            raise ValueError(f"unknown extractor {self.extractor!r}")
        if self.embedding not in ("hashed", "remote"):
            raise ValueError(f"unknown embedding provider {self.embedding!r}")
        if self.detector not in ("stub", "remote"):
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.narrator not in ("none", "echo", "remote"):
            raise ValueError(f"unknown narrator {self.narrator!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.k < 0 or self.max_retries < 0 or self.icl_pairs < 0:
            raise ValueError("k, max_retries and icl_pairs must be >= 0")
        if self.top_k < 1 or self.dim < 1:
            raise ValueError("top_k and dim must be >= 1")

    @classmethod
    def resolve(cls, flags: dict, config_file: str | None = None, env=os.environ) -> "AppConfig":
        """Flags > config file > environment > defaults."""
        values: dict = {}
        types = {f.name: f.type for f in fields(cls)}
        for name in types:
            raw = env.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = _coerce(cls, name, raw)
        if config_file:
            with open(config_file, "rb") as fh:
                doc = tomllib.load(fh)
            doc = doc.get("babylon", doc)
            for name, value in doc.items():
                key = name.replace("-", "_")
                if key not in types:
                    raise ValueError(f"unknown config key {name!r}")
                values[key] = value
        for name, value in flags.items():
            if name in types and value is not None:
                values[name] = value
        cfg = cls(**values)
        cfg.validate()
        return cfg


def _coerce(cls, name, raw: str):
    default = {f.name: f.default for f in fields(cls)}[name]
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in rows)


def _read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _chat_transport(cfg: AppConfig):
    if cfg.fixtures:
        return CannedTransport(cfg.fixtures)
    return HttpTransport(cfg.endpoint, timeout=cfg.timeout)


def _require(path: str | None, what: str) -> Path:
    if not path:
        raise FileNotFoundError(f"no {what} given")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return p


def cmd_parse(cfg: AppConfig) -> int:
    dataset = load_dataset(_require(cfg.input, "input"))
    truth_ds = None
    if cfg.truth:
        truth_ds = load_dataset(_require(cfg.truth, "truth file"))
        if truth_ds.truth is None:
            raise MissingTruth(f"{cfg.truth} has no EventTemplate column")
        # key ground truth by the input's source name
        truth_ds = Dataset(dataset.name, [dataclasses.replace(r, source=dataset.name) for r in truth_ds.records],
                           truth_ds.truth)
    elif dataset.truth is not None:
        truth_ds = dataset

    ext_cfg = ExtractorConfig(k_demonstrations=cfg.k, temperature=cfg.temperature,
                              max_retries=cfg.max_retries, backend=cfg.extractor, model=cfg.model)
    labeled = sample_icl_pairs(truth_ds, cfg.icl_pairs) if cfg.icl_pairs and truth_ds else ()
    transport = _chat_transport(cfg) if ext_cfg.backend is Backend.REMOTE else None
    extractor = make_extractor(ext_cfg, dataset=truth_ds, transport=transport, labeled=labeled)

    pipeline = Pipeline(extractor)
    outcomes, summary = pipeline.run_stream(dataset)
    out = Path(cfg.out)
    write_atomic(out / "outcomes.jsonl", "".join(line + "\n" for line in pipeline.outcome_lines(outcomes)))
    doc = summary.to_dict()
    doc["dataset"] = dataset.name
    doc["skipped_blank"] = dataset.skipped_blank
    doc["dead_letter_lines"] = [d.record.line_id for d in pipeline.dead_letters]
    doc["degradations"] = [dataclasses.asdict(e) for e in extractor.events]
    write_atomic(out / "summary.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if cfg.state:
        write_atomic(cfg.state, pipeline.state.to_json() + "\n")
    print(f"{summary.records} lines -> {summary.clusters} clusters, "
          f"{summary.extractor_calls} extractor calls, {summary.dead_letters} dead letters")
    return EXIT_OK


def cmd_evaluate(cfg: AppConfig) -> int:
    outcomes_path = _require(cfg.input or str(Path(cfg.out) / "outcomes.jsonl"), "outcomes file")
    truth = load_dataset(_require(cfg.truth, "truth file"))
    report = evaluate(_read_jsonl(outcomes_path), truth)
    out = Path(cfg.out)
    write_atomic(out / "metrics.json", report.to_json() + "\n")
    table = report.table(truth.name)
    write_atomic(out / "metrics.txt", table)
    print(table, end="")
    return EXIT_OK


def _provider(cfg: AppConfig):
    if cfg.embedding == "hashed":
        return rag.HashedProvider(cfg.dim)
    return rag.RemoteProvider(HttpTransport(cfg.embed_endpoint, timeout=cfg.timeout), cfg.embed_model, cfg.dim)


def cmd_detect(cfg: AppConfig) -> int:
    queries = load_dataset(_require(cfg.input, "input"))
    provider = _provider(cfg)
    if cfg.store and Path(cfg.store).exists() and not cfg.normal:
        store = rag.VectorStore.load(cfg.store)
    else:
        normal = load_dataset(_require(cfg.normal, "normal-logs file"))
        store, _ = rag.build_store((r.content for r in normal.records), provider)
        if cfg.store:
            write_atomic(cfg.store, json.dumps(store.to_dict()) + "\n")
    if len(store) == 0:
        raise EmptyStore("vector store is empty")
    if cfg.detector == "stub":
        backend = rag.KeywordStub(cfg.tau)
    else:
        backend = rag.ChatBackend(_chat_transport(cfg), cfg.model, cfg.temperature)
    verdicts = [rag.classify(r, store, backend, provider, cfg.top_k).to_dict() for r in queries.records]
    write_atomic(Path(cfg.out) / "verdicts.jsonl", _jsonl(verdicts))
    flagged = sum(1 for v in verdicts if v["label"] == rag.Label.ABNORMAL.value)
    print(f"{len(verdicts)} logs checked, {flagged} abnormal")
    return EXIT_OK


def cmd_report(cfg: AppConfig) -> int:
    outcomes = _read_jsonl(_require(cfg.input or str(Path(cfg.out) / "outcomes.jsonl"), "outcomes file"))
    verdicts = _read_jsonl(_require(cfg.verdicts, "verdicts file")) if cfg.verdicts else ()
    backend = None
    if cfg.narrator == "echo":
        backend = rag.EchoStub(cfg.narrative_text)
    elif cfg.narrator == "remote":
        backend = rag.ChatBackend(_chat_transport(cfg), cfg.model, cfg.temperature)
    text, doc = rag.interpret(outcomes, verdicts, backend)
    out = Path(cfg.out)
    write_atomic(out / "report.txt", text)
    write_atomic(out / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(text, end="")
    return EXIT_OK


COMMANDS = {"parse": cmd_parse, "evaluate": cmd_evaluate, "detect": cmd_detect, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="babylon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML file with [babylon] keys")
        p.add_argument("--input")
        p.add_argument("--truth")
        p.add_argument("--out")
        if name == "parse":
            p.add_argument("--extractor", choices=[b.value for b in Backend])
            p.add_argument("--k", type=int)
            p.add_argument("--max-retries", dest="max_retries", type=int)
            p.add_argument("--icl-pairs", dest="icl_pairs", type=int)
            p.add_argument("--state")
        if name in ("parse", "detect", "report"):
            p.add_argument("--endpoint")
            p.add_argument("--model")
            p.add_argument("--temperature", type=float)
            p.add_argument("--fixtures", help="JSONL of canned chat responses")
        if name == "detect":
            p.add_argument("--normal", help="normal logs used to build the store")
            p.add_argument("--store", help="store JSON to load, or to write when --normal is given")
            p.add_argument("--top-k", dest="top_k", type=int)
            p.add_argument("--tau", type=float)
            p.add_argument("--detector", choices=["stub", "remote"])
            p.add_argument("--embedding", choices=["hashed", "remote"])
            p.add_argument("--dim", type=int)
        if name == "report":
            p.add_argument("--verdicts")
            p.add_argument("--narrator", choices=["none", "echo", "remote"])
            p.add_argument("--narrative-text", dest="narrative_text")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = AppConfig.resolve(flags, args.config)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"babylon: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg)
    except FileNotFoundError as exc:
        print(f"babylon: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CoverageError as exc:
        print(f"babylon: coverage mismatch: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except EmptyStore as exc:
        print(f"babylon: {exc}", file=sys.stderr)
        return EXIT_EMPTY_STORE
    except (BabylonError, OSError, ValueError) as exc:
        print(f"babylon: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
