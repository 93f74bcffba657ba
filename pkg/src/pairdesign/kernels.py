"""Kernel backend selection.

The Cython extension is used when it was built; otherwise the numpy
versions take over. Set ``PAIRDESIGN_PURE_PYTHON=1`` to force the
fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("PAIRDESIGN_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"


def _prepare(codes, first, second):
    return (
        np.ascontiguousarray(codes, dtype=np.int8),
        np.ascontiguousarray(first, dtype=np.int64),
        np.ascontiguousarray(second, dtype=np.int64),
    )


def pair_gram(codes, first, second):
    return _impl.pair_gram(*_prepare(codes, first, second))


def column_nonzero_counts(codes, first, second):
    return _impl.column_nonzero_counts(*_prepare(codes, first, second))
