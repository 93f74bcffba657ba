"""Profiles, effect coding and the second-order interactions regression vector.

Profiles carry raw levels (1 or 2); coding to +1/-1 happens only when a
regression vector is built. Columns are ordered main effects first, then
first-order interactions (k < l) and second-order interactions
(k < l < m), each in lexicographic order of the attribute indices.

Profiles are numbered by reading the levels as binary digits with the
first attribute most significant (level 1 -> 0, level 2 -> 1), so the
integer order of profile indices is the lexicographic order of the level
tuples.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_MAX_ENUM_K = 20


def max_enumeration_k() -> int:
    """Largest K for which orbits may be enumerated (env ``PAIRDESIGN_MAX_K``)."""
    raw = os.environ.get("PAIRDESIGN_MAX_K")
    if raw is None:
        return DEFAULT_MAX_ENUM_K
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"PAIRDESIGN_MAX_K must be an integer, got {raw!r}") from exc
    if value < 1:
        raise DomainError("PAIRDESIGN_MAX_K must be positive")
    return value


def check_enumerable(K: int) -> None:
    cap = max_enumeration_k()
    if K > cap:
        raise CapacityError(
            f"K={K} exceeds the enumeration cap of {cap} (set PAIRDESIGN_MAX_K to raise it)"
        )


@dataclass(frozen=True)
class ModelSpec:
    """Number of attributes plus the derived parameter block sizes."""

    K: int

    def __post_init__(self):
        if isinstance(self.K, bool) or not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise DomainError(f"K must be an integer >= 1, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))

    @property
    def p1(self) -> int:
        return self.K

    @property
    def p2(self) -> int:
        return comb(self.K, 2)

    @property
    def p3(self) -> int:
        return comb(self.K, 3)

    @property
    def p(self) -> int:
        return self.p1 + self.p2 + self.p3

    @property
    def blocks(self) -> tuple[int, int, int]:
        return (self.p1, self.p2, self.p3)

    def block_slices(self) -> tuple[slice, slice, slice]:
        p1, p2 = self.p1, self.p2
        return (slice(0, p1), slice(p1, p1 + p2), slice(p1 + p2, self.p))


@dataclass(frozen=True)
class Profile:
    """Level assignment in {1, 2}^K for one alternative."""

    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(x) for x in self.levels)
        if not levels:
            raise DomainError("a profile needs at least one attribute")
        bad = [x for x in levels if x not in (1, 2)]
        if bad:
            raise DomainError(f"levels must be 1 or 2, got {bad[0]!r}")
        object.__setattr__(self, "levels", levels)

    @property
    def K(self) -> int:
        return len(self.levels)

    @property
    def index(self) -> int:
        idx = 0
        for level in self.levels:
            idx = (idx << 1) | (level - 1)
        return idx

    @classmethod
    def from_index(cls, K: int, index: int) -> "Profile":
        if not 0 <= index < 2**K:
            raise DomainError(f"profile index {index} out of range for K={K}")
        return cls(tuple(((index >> (K - 1 - k)) & 1) + 1 for k in range(K)))

    def __len__(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class PairedComparison:
    """Ordered pair (first, second) of profiles; ``depth`` is cached on creation."""

    first: Profile
    second: Profile
    depth: int = field(init=False, compare=False)

    def __post_init__(self):
        first = self.first if isinstance(self.first, Profile) else Profile(self.first)
        second = self.second if isinstance(self.second, Profile) else Profile(self.second)
        if first.K != second.K:
            raise DomainError(
                f"profiles of a pair must have equal length ({first.K} != {second.K})"
            )
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)
        object.__setattr__(
            self, "depth", sum(a != b for a, b in zip(first.levels, second.levels))
        )

    @property
    def K(self) -> int:
        return self.first.K

    def swapped(self) -> "PairedComparison":
        return PairedComparison(self.second, self.first)


def effect_code(level: int) -> int:
    """Effect coding: level 1 -> +1, level 2 -> -1."""
    if level == 1:
        return 1
    if level == 2:
        return -1
    raise DomainError(f"level must be 1 or 2, got {level!r}")


@lru_cache(maxsize=None)
def interaction_columns(K: int) -> tuple[tuple[int, ...], ...]:
    """Attribute index tuples behind each regression column, in column order."""
    cols: list[tuple[int, ...]] = [(k,) for k in range(K)]
    cols.extend(combinations(range(K), 2))
    cols.extend(combinations(range(K), 3))
    return tuple(cols)


def _check_profile(profile: Profile, spec: ModelSpec) -> None:
    if profile.K != spec.K:
        raise DomainError(f"profile has {profile.K} attributes but the model has K={spec.K}")


def regression_vector(profile: Profile, spec: ModelSpec) -> np.ndarray:
    """The p-dimensional regression vector f(i) of a profile."""
    if not isinstance(profile, Profile):
        profile = Profile(profile)
    _check_profile(profile, spec)
    g = [effect_code(level) for level in profile.levels]
    out = np.empty(spec.p, dtype=float)
    for col, idx in enumerate(interaction_columns(spec.K)):
        prod = 1
        for k in idx:
            prod *= g[k]
        out[col] = prod
    return out


def difference_vector(pair: PairedComparison, spec: ModelSpec) -> np.ndarray:
    """f(first) - f(second); entries are -2, 0 or +2."""
    _check_profile(pair.first, spec)
    _check_profile(pair.second, spec)
    return regression_vector(pair.first, spec) - regression_vector(pair.second, spec)


def comparison_depth(pair: PairedComparison) -> int:
    """Number of attributes in which the two profiles differ."""
    return sum(a != b for a, b in zip(pair.first.levels, pair.second.levels))


def orbit_size(K: int, d: int) -> int:
    """Number of ordered pairs with comparison depth exactly d."""
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    return 2**K * comb(K, d)


def _depth_masks(K: int, d: int) -> list[int]:
    masks = []
    for positions in combinations(range(K), d):
        mask = 0
        for k in positions:
            mask |= 1 << (K - 1 - k)
        masks.append(mask)
    return sorted(masks)


def enumerate_orbit(spec: ModelSpec, d: int) -> Iterator[PairedComparison]:
    """Stream every ordered pair of depth d in lexicographic (first, second) order."""
    K = spec.K
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    check_enumerable(K)
    masks = _depth_masks(K, d)
    profiles = [Profile.from_index(K, i) for i in range(2**K)] if K <= 16 else None
    for i in range(2**K):
        partners = sorted(i ^ m for m in masks)
        first = profiles[i] if profiles else Profile.from_index(K, i)
        for j in partners:
            second = profiles[j] if profiles else Profile.from_index(K, j)
            yield PairedComparison(first, second)


def orbit_indices(K: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Profile indices (first, second) of the depth-d orbit, same order as enumerate_orbit."""
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    check_enumerable(K)
    masks = np.array(_depth_masks(K, d), dtype=np.int64)
    first = np.arange(2**K, dtype=np.int64)
    second = np.sort(first[:, None] ^ masks[None, :], axis=1)
    first = np.repeat(first, len(masks))
    return first, second.reshape(-1)


@lru_cache(maxsize=16)
def profile_codes(K: int) -> np.ndarray:
    """Regression vectors of all 2^K profiles as an int8 matrix (row = profile index)."""
    check_enumerable(K)
    idx = np.arange(2**K, dtype=np.int64)
    shifts = np.arange(K - 1, -1, -1, dtype=np.int64)
    g = (1 - 2 * ((idx[:, None] >> shifts[None, :]) & 1)).astype(np.int8)
    spec = ModelSpec(K)
    codes = np.empty((2**K, spec.p), dtype=np.int8)
    for col, cols in enumerate(interaction_columns(K)):
        codes[:, col] = np.prod(g[:, list(cols)], axis=1, dtype=np.int8)
    codes.setflags(write=False)
    return codes


def pair_indices(pairs: Sequence[PairedComparison]) -> tuple[np.ndarray, np.ndarray]:
    first = np.fromiter((pc.first.index for pc in pairs), dtype=np.int64, count=len(pairs))
    second = np.fromiter((pc.second.index for pc in pairs), dtype=np.int64, count=len(pairs))
    return first, second
