"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``BABYLON_PURE_PYTHON=1`` to force the fallback.
"""

import os

from babylon import _pykernels

if os.environ.get("BABYLON_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from babylon import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

loose_match = _impl.loose_match
literal_overlap = _impl.literal_overlap
generalize = _impl.generalize
walk = _impl.walk
fnv1a_64 = _impl.fnv1a_64

__all__ = ["BACKEND", "loose_match", "literal_overlap", "generalize", "walk", "fnv1a_64"]
