"""Streaming log template mining and retrieval-based anomaly checks."""

from babylon.ingest import Dataset, GroundTruthEntry, LogRecord, load_raw_log, load_structured_csv, tokenize
from babylon.parse_core import LogCluster, ParserState, SyntaxTemplate, derive_syntax_template
from babylon.pipeline import Action, ParseOutcome, Pipeline

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Dataset",
    "GroundTruthEntry",
    "LogCluster",
    "LogRecord",
    "ParseOutcome",
    "ParserState",
    "Pipeline",
    "SyntaxTemplate",
    "derive_syntax_template",
    "load_raw_log",
    "load_structured_csv",
    "tokenize",
]
