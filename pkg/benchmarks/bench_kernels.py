"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Micro benchmarks call both kernel modules directly. The end-to-end rows run a
heuristic parse and a hashed embedding pass over the Mixed fixture in a child
process, once per backend, since the backend is chosen at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit
from pathlib import Path

from babylon import _pykernels
from babylon.parse_core import ParseTree, SyntaxTemplate

try:
    from babylon import _ckernels
except ImportError:
    _ckernels = None

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

E2E = """
import time
from babylon import kernels
from babylon.extractor import HeuristicExtractor
from babylon.ingest import load_dataset
from babylon.pipeline import Pipeline
from babylon.rag import HashedProvider, build_store
ds = load_dataset({path!r})
best_parse = best_embed = float("inf")
for _ in range({repeat}):
    t = time.perf_counter(); Pipeline(HeuristicExtractor()).run_stream(ds); best_parse = min(best_parse, time.perf_counter() - t)
    t = time.perf_counter(); build_store((r.content for r in ds.records), HashedProvider()); best_embed = min(best_embed, time.perf_counter() - t)
print(kernels.BACKEND, best_parse, best_embed)
"""


def workloads(mod):
    mask = ("User", None, "login", None, "from", None, "port", None)
    tokens = ("User", "alice", "login", "ok", "from", "10.0.0.1", "port", "22")
    tree = ParseTree()
    for i in range(200):
        tree.insert(SyntaxTemplate.from_mask([f"t{i % 20}", None, "x", None if i % 2 else f"y{i}"]), i)
    query = ("t3", "q", "x", "y3")
    line = "081109 203615 148 INFO dfs.DataNode$PacketResponder: PacketResponder 1 for block blk_38865049064139660 terminating"
    return {
        "loose_match": lambda: mod.loose_match(mask, tokens),
        "literal_overlap": lambda: mod.literal_overlap(mask, tokens),
        "generalize": lambda: mod.generalize(mask, tokens),
        "walk (200 paths)": lambda: mod.walk(tree.root, query),
        "fnv1a_64 (token)": lambda: mod.fnv1a_64(line),
    }


def micro(repeat, number=20000):
    rows = []
    py = workloads(_pykernels)
    cy = workloads(_ckernels) if _ckernels else {}
    for name, fn in py.items():
        t_py = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
        t_cy = min(timeit.repeat(cy[name], number=number, repeat=repeat)) / number if cy else None
        rows.append((name, t_py * 1e6, None if t_cy is None else t_cy * 1e6, "us/call"))
    return rows


def end_to_end(repeat):
    results = {}
    code = E2E.format(path=str(DATA / "Mixed_2k.log_structured.csv"), repeat=repeat)
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("BABYLON_PURE_PYTHON", None)
        if pure:
            env["BABYLON_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, parse, emb = out.stdout.split()
        results["python" if pure else backend] = (float(parse), float(emb))
    py = results["python"]
    cy = results.get("cython")
    return [
        ("parse 2k lines", py[0] * 1e3, cy[0] * 1e3 if cy else None, "ms"),
        ("embed 2k lines", py[1] * 1e3, cy[1] * 1e3 if cy else None, "ms"),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rows = micro(args.repeat) + end_to_end(args.repeat)
    print(f"{'workload':<20}{'python':>12}{'cython':>12}{'speedup':>10}  unit")
    for name, py, cy, unit in rows:
        cy_s = f"{cy:12.3f}" if cy is not None else f"{'n/a':>12}"
        sp = f"{py / cy:9.2f}x" if cy else f"{'':>10}"
        print(f"{name:<20}{py:12.3f}{cy_s}{sp}  {unit}")
    if _ckernels is None:
        print("compiled extension not built; only the fallback was measured")


if __name__ == "__main__":
    main()
