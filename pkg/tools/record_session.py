"""Record a 50-line remote extraction session for the replay test.

A scripted responder stands in for the chat endpoint. It answers with a short
variable analysis followed by the ground-truth template, except that the third
distinct query always gets an answer with no usable template (so extraction
falls back to the heuristic) and the fifth distinct query gets a bad first
answer and a good one on retry.

Writes tests/data/remote_session.jsonl (hash, request, response per exchange)
and tests/data/remote_session_expected.json (outcomes, degradation events and
the order of request hashes).
"""

import dataclasses
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from babylon.extractor import ExtractorConfig, RemoteExtractor  # noqa: E402
from babylon.ingest import load_dataset  # noqa: E402
from babylon.pipeline import Pipeline  # noqa: E402
from babylon.transport import RecordingTransport, completion_payload, request_hash  # noqa: E402

DATA = ROOT / "tests" / "data"
SOURCE = DATA / "Mixed_2k.log_structured.csv"
LINES = 50
ALWAYS_BAD, BAD_ONCE = 3, 5


def session_records():
    ds = load_dataset(SOURCE)
    return ds, ds.records[:LINES]


class Responder:
    def __init__(self, truth):
        self.truth = truth
        self.order: list[str] = []

    def __call__(self, body):
        user = body["messages"][1]["content"]
        query = user.rsplit("Query log: ", 1)[1]
        if query not in self.order:
            self.order.append(query)
        rank = self.order.index(query) + 1
        first_attempt = len(body["messages"]) == 2
        if rank == ALWAYS_BAD or (rank == BAD_ONCE and first_attempt):
            return completion_payload("I cannot tell which parts of this message vary.")
        return completion_payload(f"Variables: the changing values are typed and masked.\n{self.truth[query]}")


def main():
    ds, records = session_records()
    truth = {r.content: gt.event_template for r, gt in zip(ds.records, ds.truth)}
    log_path = DATA / "remote_session.jsonl"
    log_path.unlink(missing_ok=True)
    transport = RecordingTransport(Responder(truth), log_path)
    extractor = RemoteExtractor(transport, ExtractorConfig(backend="remote"))
    pipeline = Pipeline(extractor, debug=True)
    outcomes, summary = pipeline.run_stream(records)
    exchanges = [json.loads(x) for x in log_path.read_text().splitlines()]
    expected = {
        "lines": LINES,
        "outcomes": pipeline.outcome_lines(outcomes),
        "events": [dataclasses.asdict(e) for e in extractor.events],
        "extractor_calls": summary.extractor_calls,
        "request_hashes": [x["hash"] for x in exchanges],
    }
    assert all(x["hash"] == request_hash(x["request"]) for x in exchanges)
    (DATA / "remote_session_expected.json").write_text(json.dumps(expected, indent=1) + "\n")
    print(f"{len(exchanges)} exchanges, {summary.extractor_calls} extractions, {len(extractor.events)} fallbacks")


if __name__ == "__main__":
    main()
