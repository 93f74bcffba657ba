"""Numpy implementations of the compiled kernels, used when the extension is absent."""
import numpy as np


def pair_gram(codes, first, second):
    """Integer sum of difference-vector outer products over the listed pairs."""
    # entries are -2, 0 or 2, so a float64 (BLAS) product is exact well past 2^40 pairs
    diff = codes[first].astype(np.float64) - codes[second]
    return np.rint(diff.T @ diff).astype(np.int64)


def column_nonzero_counts(codes, first, second):
    """Per column, the number of pairs whose difference vector is nonzero there."""
    return np.count_nonzero(codes[first] != codes[second], axis=0).astype(np.int64)
