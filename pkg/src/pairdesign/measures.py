"""Approximate designs over comparison depths and their information matrices.

An invariant design is uniform on each orbit X_d (pairs differing in
exactly d attributes) and is therefore described by the K depth weights
alone. Its information matrix is diagonal with one value per parameter
block; these values come from closed forms and need no enumeration.
Information is always normalized per observation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DomainError
from .model import (
    ModelSpec,
    PairedComparison,
    check_enumerable,
    difference_vector,
    enumerate_orbit,
    orbit_size,
    pair_indices,
    profile_codes,
)

WEIGHT_TOL = 1e-12
BLOCK_NAMES = ("main", "first-order", "second-order")


class UndersizedDesignWarning(UserWarning):
    """Sample size is smaller than the number of support pairs."""


class DiagonalInfo(NamedTuple):
    """Diagonal values of the information matrix, one per parameter block."""

    h1: float
    h2: float
    h3: float

    def singular_blocks(self, spec: ModelSpec) -> list[str]:
        return [
            name
            for name, h, size in zip(BLOCK_NAMES, self, spec.blocks)
            if size > 0 and h <= 0
        ]


def _check_weights(weights: Mapping, what: str) -> None:
    total = math.fsum(float(w) for w in weights.values())
    if any(float(w) < 0 for w in weights.values()):
        raise DomainError(f"{what} weights must be nonnegative")
    if abs(total - 1.0) > WEIGHT_TOL:
        raise DomainError(f"{what} weights sum to {total!r}, not 1")


@dataclass(frozen=True)
class DepthDesign:
    """Invariant design: weight ``weights[d]`` spread uniformly over the orbit X_d.

    Rational weights (``Fraction`` or ``int``) are kept in ``exact``
    alongside their float values.
    """

    K: int
    weights: dict[int, float]
    exact: dict[int, Fraction] | None = field(default=None, compare=False)

    def __post_init__(self):
        spec = ModelSpec(self.K)
        raw = dict(self.weights)
        for d, w in raw.items():
            if not isinstance(d, (int, np.integer)) or not 0 <= d <= spec.K:
                raise DomainError(f"depth {d!r} out of range 1..{spec.K}")
            if d == 0 and w != 0:
                raise DomainError("depth 0 carries no information and cannot hold weight")
        raw = {int(d): w for d, w in raw.items() if d != 0}
        if not raw:
            raise DomainError("a design needs at least one depth")
        exact = self.exact
        if exact is None and all(isinstance(w, Rational) for w in raw.values()):
            exact = {d: Fraction(w) for d, w in raw.items()}
        if exact is not None:
            exact = {int(d): Fraction(w) for d, w in exact.items() if w != 0}
            if sum(exact.values()) != 1:
                raise DomainError(f"exact weights sum to {sum(exact.values())}, not 1")
            raw = {d: float(exact.get(d, 0)) for d in raw}
        _check_weights(raw, "depth")
        object.__setattr__(self, "K", spec.K)
        object.__setattr__(self, "weights", dict(sorted((d, float(w)) for d, w in raw.items())))
        object.__setattr__(self, "exact", exact)

    @classmethod
    def point(cls, K: int, d: int) -> "DepthDesign":
        """Uniform design on the single orbit X_d."""
        return cls(K, {d: Fraction(1)})

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.K)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(d for d, w in self.weights.items() if w > 0)

    def weight(self, d: int) -> float:
        return self.weights.get(d, 0.0)

    def mix(self, other: "DepthDesign", lam: float) -> "DepthDesign":
        """The mixture lam * self + (1 - lam) * other."""
        if other.K != self.K:
            raise DomainError("cannot mix designs for different K")
        if not 0 <= lam <= 1:
            raise DomainError("mixing coefficient must lie in [0, 1]")
        depths = set(self.weights) | set(other.weights)
        if isinstance(lam, Rational) and self.exact is not None and other.exact is not None:
            lam = Fraction(lam)
            return DepthDesign(
                self.K,
                {d: lam * self.exact.get(d, 0) + (1 - lam) * other.exact.get(d, 0) for d in depths},
            )
        mixed = {d: lam * self.weight(d) + (1 - lam) * other.weight(d) for d in depths}
        total = math.fsum(mixed.values())
        return DepthDesign(self.K, {d: w / total for d, w in mixed.items()})


@dataclass(frozen=True)
class PairDesign:
    """Arbitrary approximate design: a probability measure on ordered pairs."""

    K: int
    support: dict[PairedComparison, float]
    exact: dict[PairedComparison, Fraction] | None = field(default=None, compare=False)

    def __post_init__(self):
        spec = ModelSpec(self.K)
        if not self.support:
            raise DomainError("a pair design needs a nonempty support")
        for pair in self.support:
            if pair.K != spec.K:
                raise DomainError(f"pair {pair} does not have K={spec.K} attributes")
        _check_weights(self.support, "pair")

    def pairs(self) -> list[PairedComparison]:
        return list(self.support)


@dataclass(frozen=True)
class ExactDesign:
    """N paired comparisons, with repetition."""

    K: int
    pairs: tuple[PairedComparison, ...]
    undersized: bool = False

    def __post_init__(self):
        if len(self.pairs) < 1:
            raise DomainError("an exact design needs N >= 1")
        object.__setattr__(self, "pairs", tuple(self.pairs))

    @property
    def N(self) -> int:
        return len(self.pairs)

    def design_matrix(self) -> np.ndarray:
        """N x p matrix of difference vectors."""
        spec = ModelSpec(self.K)
        if spec.K <= 16:
            codes = profile_codes(spec.K).astype(float)
            first, second = pair_indices(self.pairs)
            return codes[first] - codes[second]
        return np.array([difference_vector(pc, spec) for pc in self.pairs])

    def info_matrix(self) -> np.ndarray:
        """Per-observation information (1/N) * sum of single-pair information."""
        X = self.design_matrix()
        return X.T @ X / self.N


def h_values_exact(d: int, K: int) -> tuple[Fraction, Fraction, Fraction]:
    if K < 3:
        raise DomainError(f"closed-form block values need K >= 3, got K={K}")
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    return (
        Fraction(4 * d, K),
        Fraction(8 * d * (K - d), K * (K - 1)),
        Fraction(4 * d * (3 * K * K - 6 * d * K + 4 * d * d - 3 * K + 2), K * (K - 1) * (K - 2)),
    )


def h_values(d: int, K: int) -> DiagonalInfo:
    """Diagonal information values of the uniform design on X_d."""
    if K < 3:
        raise DomainError(f"closed-form block values need K >= 3, got K={K}")
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    # integer numerators and denominators first; a single division each
    return DiagonalInfo(
        4 * d / K,
        8 * d * (K - d) / (K * (K - 1)),
        4 * d * (3 * K * K - 6 * d * K + 4 * d * d - 3 * K + 2) / (K * (K - 1) * (K - 2)),
    )


def info_diagonal(design: DepthDesign) -> DiagonalInfo:
    """Block values of an invariant design: the weighted sum of per-depth values."""
    acc = [[], [], []]
    for d, w in design.weights.items():
        for r, h in enumerate(h_values(d, design.K)):
            acc[r].append(w * h)
    return DiagonalInfo(*(math.fsum(a) for a in acc))


def info_diagonal_exact(design: DepthDesign) -> tuple[Fraction, Fraction, Fraction]:
    if design.exact is None:
        raise DomainError("design has no exact rational weights")
    acc = [Fraction(0)] * 3
    for d, w in design.exact.items():
        acc = [a + w * h for a, h in zip(acc, h_values_exact(d, design.K))]
    return tuple(acc)


def info_matrix_full(design: PairDesign, spec: ModelSpec) -> np.ndarray:
    """Weighted sum of single-pair information matrices over the design's support."""
    if design.K != spec.K:
        raise DomainError(f"design has K={design.K} but the model has K={spec.K}")
    pairs = design.pairs()
    weights = np.array([design.support[pc] for pc in pairs], dtype=float)
    if spec.K <= 16:
        codes = profile_codes(spec.K).astype(float)
        first, second = pair_indices(pairs)
        X = codes[first] - codes[second]
    else:
        X = np.array([difference_vector(pc, spec) for pc in pairs])
    return (X * weights[:, None]).T @ X


def log_det(design: DepthDesign) -> float:
    """ln det M of an invariant design; ``-inf`` flags a singular matrix."""
    spec = design.spec
    info = info_diagonal(design)
    if info.singular_blocks(spec):
        return -math.inf
    return math.fsum(size * math.log(h) for size, h in zip(spec.blocks, info) if size)


def depth_to_pair_design(design: DepthDesign) -> PairDesign:
    """Spread each depth weight uniformly over the pairs of its orbit."""
    spec = design.spec
    check_enumerable(spec.K)
    support: dict[PairedComparison, float] = {}
    exact: dict[PairedComparison, Fraction] | None = {} if design.exact is not None else None
    for d in design.support:
        n_d = orbit_size(spec.K, d)
        w = design.weights[d] / n_d
        for pair in enumerate_orbit(spec, d):
            support[pair] = w
            if exact is not None:
                exact[pair] = design.exact[d] / n_d
    return PairDesign(spec.K, support, exact)


def _apportion(quotas: Sequence[Fraction], N: int) -> list[int]:
    """Largest-remainder rounding of quotas summing to N; ties go to the earlier entry."""
    counts = [math.floor(q) for q in quotas]
    left = N - sum(counts)
    order = sorted(range(len(quotas)), key=lambda t: (-(quotas[t] - counts[t]), t))
    for t in order[:left]:
        counts[t] += 1
    return counts


def realize_exact(design: DepthDesign | PairDesign, N: int) -> ExactDesign:
    """Round an approximate design to N comparisons (Hamilton apportionment).

    Support pairs are ordered by depth, then lexicographically; that order
    breaks ties between equal remainders.
    """
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    if isinstance(design, DepthDesign):
        design = depth_to_pair_design(design)
        pairs = sorted(design.support, key=lambda pc: (pc.depth, pc.first.levels, pc.second.levels))
    else:
        pairs = design.pairs()
    if design.exact is not None:
        weights = [design.exact[pc] for pc in pairs]
    else:
        weights = [Fraction(design.support[pc]) for pc in pairs]
    # float weights need not sum to exactly 1
    total = sum(weights)
    quotas = [N * w / total for w in weights]
    counts = _apportion(quotas, N)
    undersized = N < len(pairs)
    if undersized:
        warnings.warn(
            f"N={N} is smaller than the support size {len(pairs)}; "
            "the exact design cannot cover every support pair",
            UndersizedDesignWarning,
            stacklevel=2,
        )
    realized = tuple(pc for pc, c in zip(pairs, counts) for _ in range(c))
    return ExactDesign(design.K, realized, undersized)
