"""Brute-force reference computations.

Nothing here uses the closed-form block values. Information matrices are
built by summing outer products of difference vectors over explicitly
enumerated pairs. The entries of those outer products are -4, 0 or 4, so
each group of equally weighted pairs is summed in integers and scaled
once. Determinants and inverses use a plain LU factorization.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from .errors import CapacityError, DomainError, SingularDesignError
from .measures import DepthDesign, PairDesign
from .model import (
    ModelSpec,
    interaction_columns,
    orbit_indices,
    orbit_size,
    pair_indices,
    profile_codes,
)

ORACLE_MAX_K = 8
PIVOT_TOL = 1e-12


def _scaled(gram: np.ndarray, w: Fraction) -> np.ndarray:
    """gram * w with one correctly rounded division per entry (Python ints avoid overflow)."""
    exact = gram.astype(object) * w.numerator
    return np.array([x / w.denominator for x in exact.ravel()], dtype=float).reshape(gram.shape)


def _check_cap(K: int) -> None:
    if K > ORACLE_MAX_K:
        raise CapacityError(f"the brute-force oracle is limited to K <= {ORACLE_MAX_K}, got K={K}")


def orbit_gram(K: int, d: int) -> np.ndarray:
    """Integer sum of outer products of difference vectors over all pairs of depth d."""
    _check_cap(K)
    first, second = orbit_indices(K, d)
    return kernels.pair_gram(profile_codes(K), first, second)


def brute_force_info(design: PairDesign | DepthDesign, spec: ModelSpec) -> np.ndarray:
    """Information matrix by exhaustive outer-product summation."""
    if design.K != spec.K:
        raise DomainError(f"design has K={design.K} but the model has K={spec.K}")
    _check_cap(spec.K)
    if isinstance(design, DepthDesign):
        groups = {}
        for d in design.support:
            w = design.exact[d] if design.exact is not None else Fraction(design.weights[d])
            groups[d] = w / orbit_size(spec.K, d)
        M = np.zeros((spec.p, spec.p))
        for d, w in groups.items():
            M += _scaled(orbit_gram(spec.K, d), w)
        return M
    by_weight = defaultdict(list)
    for pair, w in design.support.items():
        key = design.exact[pair] if design.exact is not None else Fraction(w)
        by_weight[key].append(pair)
    codes = profile_codes(spec.K)
    M = np.zeros((spec.p, spec.p))
    for w, pairs in sorted(by_weight.items()):
        first, second = pair_indices(pairs)
        gram = kernels.pair_gram(codes, first, second)
        M += _scaled(gram, w)
    return M


@dataclass(frozen=True)
class OrbitCensus:
    """Counts over the pairs of one orbit X_d.

    ``column_nonzero[c]`` counts pairs whose difference vector is nonzero in
    column c. ``patterns[c][m]`` counts pairs that differ in exactly m of the
    attributes behind column c.
    """

    K: int
    d: int
    n_pairs: int
    column_nonzero: tuple[int, ...]
    patterns: tuple[tuple[int, ...], ...]

    def block_counts(self) -> tuple[set[int], set[int], set[int]]:
        """Distinct nonzero counts within each parameter block."""
        spec = ModelSpec(self.K)
        return tuple(set(self.column_nonzero[s]) for s in spec.block_slices())


def census(K: int, d: int) -> OrbitCensus:
    """Enumerate X_d and tabulate which columns each pair activates."""
    _check_cap(K)
    first, second = orbit_indices(K, d)
    codes = profile_codes(K)
    nonzero = kernels.column_nonzero_counts(codes, first, second)
    shifts = np.arange(K - 1, -1, -1, dtype=np.int64)
    differs = ((first ^ second)[:, None] >> shifts[None, :]) & 1
    patterns = []
    for cols in interaction_columns(K):
        m = differs[:, list(cols)].sum(axis=1)
        patterns.append(tuple(int(x) for x in np.bincount(m, minlength=len(cols) + 1)))
    return OrbitCensus(K, d, len(first), tuple(int(x) for x in nonzero), tuple(patterns))


def _c(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n and n >= 0 else 0


def census_closed_form(K: int, d: int) -> dict[str, int]:
    """Counting formulas for how often a column of each block is nonzero on X_d."""
    out = {"main": _c(K - 1, d - 1) * 2**K}
    if K >= 2:
        out["first-order"] = 2 * _c(K - 2, d - 1) * 2**K
    if K >= 3:
        out["second-order"] = (_c(K - 3, d - 3) + 3 * _c(K - 3, d - 1)) * 2**K
    return out


def pattern_closed_form(K: int, d: int, order: int) -> tuple[int, ...]:
    """Pairs of X_d differing in exactly m of a fixed set of ``order`` attributes, m = 0..order."""
    return tuple(_c(order, m) * _c(K - order, d - m) * 2**K for m in range(order + 1))


# --- dense linear algebra --------------------------------------------------------


def lu_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """LU with partial pivoting: returns (packed LU, row permutation, sign, singular)."""
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1
    singular = False
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) < PIVOT_TOL:
            singular = True
            continue
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
            sign = -sign
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return a, perm, sign, singular


def dense_det(m: np.ndarray) -> float:
    lu, _, sign, singular = lu_factor(m)
    if singular:
        return 0.0
    return float(sign * np.prod(np.diag(lu)))


def dense_slogdet(m: np.ndarray) -> tuple[int, float]:
    """(sign, ln|det|); sign 0 and -inf for a singular matrix."""
    lu, _, sign, singular = lu_factor(m)
    if singular:
        return 0, -np.inf
    diag = np.diag(lu)
    sign *= int(np.prod(np.sign(diag)))
    return sign, float(np.sum(np.log(np.abs(diag))))


def dense_inverse(m: np.ndarray) -> np.ndarray:
    lu, perm, _, singular = lu_factor(m)
    if singular:
        raise SingularDesignError("matrix is singular (pivot below 1e-12)")
    n = lu.shape[0]
    x = np.eye(n)[perm]
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1 :] @ x[i + 1 :]) / lu[i, i]
    return x


def oracle_variance(design: PairDesign | DepthDesign, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Variance d^T M^-1 d for every ordered pair, with M from the oracle.

    Returns (depths, variances), both indexed by pair in (first, second)
    profile-index order.
    """
    M = brute_force_info(design, spec)
    Minv = dense_inverse(M)
    codes = profile_codes(spec.K).astype(float)
    n = 2**spec.K
    first = np.repeat(np.arange(n), n)
    second = np.tile(np.arange(n), n)
    D = codes[first] - codes[second]
    variances = np.einsum("ij,jk,ik->i", D, Minv, D)
    depths = np.array([bin(x).count("1") for x in (first ^ second)])
    return depths, variances
