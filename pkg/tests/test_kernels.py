from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from babylon import _pykernels, kernels
from babylon.parse_core import ParseTree, SyntaxTemplate

try:
    from babylon import _ckernels
except ImportError:  # extension not built
    _ckernels = None

IMPLS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])
words = st.sampled_from(["a", "b", "c", "10", "x=1"])
masks = st.lists(st.one_of(st.none(), words), max_size=6)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@given(masks, st.lists(words, max_size=6))
def test_compiled_matches_python(mask, tokens):
    for name in ("loose_match", "literal_overlap"):
        assert getattr(_ckernels, name)(mask, tokens) == getattr(_pykernels, name)(mask, tokens)
    if len(mask) == len(tokens):
        assert _ckernels.generalize(mask, tokens) == _pykernels.generalize(mask, tokens)


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@given(st.text(max_size=30))
def test_compiled_hash_matches_python(text):
    assert _ckernels.fnv1a_64(text) == _pykernels.fnv1a_64(text)


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__)
def test_fnv1a_known_vectors(impl):
    # published FNV-1a 64-bit test vectors
    assert impl.fnv1a_64("") == 0xCBF29CE484222325
    assert impl.fnv1a_64("a") == 0xAF63DC4C8601EC8C
    assert impl.fnv1a_64("foobar") == 0x85944171F73967E8


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__)
def test_walk_follows_literal_and_wildcard(impl):
    tree = ParseTree()
    tree.insert(SyntaxTemplate.from_mask(["a", None]), 1)
    tree.insert(SyntaxTemplate.from_mask(["a", "b"]), 2)
    tree.insert(SyntaxTemplate.from_mask([None, None]), 3)
    assert impl.walk(tree.root, ["a", "b"]) == {1, 2, 3}
    assert impl.walk(tree.root, ["a", "z"]) == {1, 3}
    assert impl.walk(tree.root, ["q"]) == set()


def test_env_forces_fallback_and_results_agree(tmp_path):
    import os
    import subprocess
    import sys

    code = ("from babylon import kernels; from babylon.extractor import HeuristicExtractor; "
            "from babylon.ingest import load_dataset; from babylon.pipeline import Pipeline; "
            "import sys; p = Pipeline(HeuristicExtractor()); o, _ = p.run_stream(load_dataset(sys.argv[1])); "
            "print(kernels.BACKEND); print('\\n'.join(p.outcome_lines(o)))")
    path = str(Path(__file__).parent / "data" / "Mixed_2k.log_structured.csv")
    outs = {}
    for pure in ("1", ""):
        env = dict(os.environ, BABYLON_PURE_PYTHON=pure)
        run = subprocess.run([sys.executable, "-c", code, path], env=env, capture_output=True, text=True, check=True)
        backend, _, body = run.stdout.partition("\n")
        outs[backend] = body
    assert "python" in outs
    assert len(set(outs.values())) == 1


def test_benchmark_runs():
    import subprocess
    import sys

    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    run = subprocess.run([sys.executable, str(script), "--repeat", "1"], capture_output=True, text=True, check=True)
    assert "walk" in run.stdout and "parse 2k lines" in run.stdout
