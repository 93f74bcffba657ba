"""Variance functions, equivalence-theorem certification and D-optimal depth weights.

For an invariant design the variance function depends on a pair only
through its comparison depth d. A design is D-optimal iff v(d) <= p for
every d, with equality on its support. The partial derivative of
ln det M with respect to the weight of depth d is exactly v(d), which the
weight optimizer below relies on.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .errors import CertificationError, DomainError, SingularDesignError
from .measures import (
    BLOCK_NAMES,
    DepthDesign,
    DiagonalInfo,
    h_values,
    h_values_exact,
    info_diagonal,
    info_diagonal_exact,
    log_det,
)
from .model import ModelSpec

KW_TOL = 1e-9
EQUALITY_TOL = 1e-6
TIE_TOL = 1e-10
ANALYTIC_TOL = 1e-6
MAX_RATIONAL_DENOMINATOR = 10**6


def _cubic(d: int, K: int) -> int:
    return 3 * K * K - 6 * d * K + 4 * d * d - 3 * K + 2


def _variance_from_info(d: int, K: int, info: DiagonalInfo) -> float:
    singular = info.singular_blocks(ModelSpec(K))
    if singular:
        raise SingularDesignError(
            f"information matrix is singular in the {singular[0]} block", block=singular[0]
        )
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    h1, h2, h3 = info
    return 4 * d * (1 / h1 + (K - d) / h2 + _cubic(d, K) / (6 * h3))


def variance_function(d: int, design: DepthDesign) -> float:
    """v(d) of an invariant design, from its three block values."""
    return _variance_from_info(d, design.K, info_diagonal(design))


def variance_function_exact(d: int, design: DepthDesign) -> Fraction:
    K = design.K
    h1, h2, h3 = info_diagonal_exact(design)
    if 0 in (h1, h2, h3):
        raise SingularDesignError("information matrix is singular")
    return 4 * d * (1 / h1 + Fraction(K - d) / h2 + Fraction(_cubic(d, K)) / (6 * h3))


def variance_single_depth(d: int, d_prime: int, K: int) -> float:
    """v(d) of the uniform design on the single depth ``d_prime``."""
    spec = ModelSpec(K)
    if K < 3:
        raise DomainError(f"K must be >= 3, got {K}")
    if not 1 <= d_prime <= K:
        raise DomainError(f"design depth {d_prime} out of range 1..{K}")
    if not 0 <= d <= K:
        raise DomainError(f"depth {d} out of range 0..{K}")
    if d_prime == K:
        raise SingularDesignError(
            f"depth {K} carries no first-order interaction information", block="first-order"
        )
    denom = _cubic(d_prime, K)
    if denom == 0:
        raise SingularDesignError(
            f"depth {d_prime} carries no second-order interaction information",
            block="second-order",
        )
    return (d / d_prime) * (
        spec.p1 + spec.p2 * (K - d) / (K - d_prime) + spec.p3 * _cubic(d, K) / denom
    )


@dataclass(frozen=True)
class VarianceProfile:
    """v(d) for d = 0..K together with the equivalence-theorem verdict."""

    K: int
    p: int
    values: tuple[float, ...]
    certified: bool
    kw_max: float
    equality_depths: tuple[int, ...]

    @property
    def normalized(self) -> tuple[float, ...]:
        return tuple(v / self.p for v in self.values)


def kw_certify(design: DepthDesign, tol: float = KW_TOL) -> VarianceProfile:
    """Evaluate v(d)/p on every depth and check max_d v(d)/p <= 1 + tol."""
    spec = design.spec
    info = info_diagonal(design)
    values = tuple(_variance_from_info(d, spec.K, info) for d in range(spec.K + 1))
    ratios = [v / spec.p for v in values]
    kw_max = max(ratios)
    return VarianceProfile(
        K=spec.K,
        p=spec.p,
        values=values,
        certified=kw_max <= 1 + tol,
        kw_max=kw_max,
        equality_depths=tuple(d for d, r in enumerate(ratios) if abs(r - 1) <= EQUALITY_TOL),
    )


def kw_certify_exact(design: DepthDesign) -> bool:
    """Rational-arithmetic check: v(d) <= p everywhere and v(d) == p on the support."""
    if design.exact is None:
        return False
    spec = design.spec
    try:
        values = [variance_function_exact(d, design) for d in range(spec.K + 1)]
    except SingularDesignError:
        return False
    return all(v <= spec.p for v in values) and all(values[d] == spec.p for d in design.exact)


def optimal_depth_main(K: int) -> int:
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    return K


def optimal_depth_first_order(K: int) -> frozenset[int]:
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    if K % 2 == 0:
        return frozenset({K // 2})
    return frozenset({(K - 1) // 2, (K + 1) // 2})


def optimal_depth_second_order(K: int) -> frozenset[int]:
    if K < 3:
        raise DomainError(f"K must be >= 3, got {K}")
    return frozenset({1, 3}) if K == 3 else frozenset({K})


@dataclass(frozen=True)
class AnalyticWeight:
    d_star: int
    w_K: float
    exact: Fraction | None = None


def analytic_weight(K: int) -> AnalyticWeight | None:
    """Closed-form weight on depth K for the two-depth design {K, d*}, K = 4..10.

    The formulas are evaluated as published; no numeric correction is applied
    here (see ``checked_analytic_weight``).
    """
    if K in (5, 7, 9):
        root = math.sqrt(
            K**6 - 12 * K**5 + 64 * K**4 - 198 * K**3 + 448 * K**2 - 636 * K + 369
        )
        num = 2 * K**3 - 6 * K**2 + 7 * K - K * root + 15
        den = -(K**4) + 2 * K**3 - 2 * K**2 + 10 * K + 15
        return AnalyticWeight((K - 1) // 2, num / den)
    if K in (4, 6):
        exact = Fraction(K * K - 6 * K + 11, K * K + 5)
        return AnalyticWeight(K // 2, float(exact), exact)
    if K in (8, 10):
        root = math.sqrt(K**4 - 10 * K**3 + 37 * K**2 - 60 * K + 180)
        num = K**3 + 5 * K + (K - K * K) * root + 30
        den = -(K**4) + K**3 + K**2 + 5 * K + 30
        return AnalyticWeight(K // 2 - 1, num / den)
    return None


def checked_analytic_weight(K: int) -> AnalyticWeight | None:
    """``analytic_weight`` cross-checked against the numeric optimizer.

    If the two disagree by more than 1e-6 the numeric weight is returned
    and a ``RuntimeWarning`` is emitted.
    """
    aw = analytic_weight(K)
    if aw is None:
        return None
    numeric = optimize_weights(K, {K, aw.d_star})[K]
    if abs(numeric - aw.w_K) > ANALYTIC_TOL:
        warnings.warn(
            f"closed-form weight for K={K} ({aw.w_K:.12g}) disagrees with the numeric "
            f"optimum ({numeric:.12g}); using the numeric value",
            RuntimeWarning,
            stacklevel=2,
        )
        return AnalyticWeight(aw.d_star, numeric)
    return aw


# --- weight optimization -------------------------------------------------------


class _Face:
    """ln det M restricted to mixtures of a fixed list of depths (pure floats)."""

    def __init__(self, K: int, depths: tuple[int, ...]):
        spec = ModelSpec(K)
        self.K = K
        self.p = spec.p
        self.depths = depths
        self.sizes = spec.blocks
        self.H = [tuple(h_values(d, K)) for d in depths]

    def info(self, w):
        return [
            math.fsum(wi * h[r] for wi, h in zip(w, self.H)) for r in range(3)
        ]

    def singular_everywhere(self) -> bool:
        return any(
            size > 0 and all(h[r] == 0 for h in self.H) for r, size in enumerate(self.sizes)
        )

    def logdet(self, w) -> float:
        hh = self.info(w)
        if any(size > 0 and x <= 0 for size, x in zip(self.sizes, hh)):
            return -math.inf
        return math.fsum(size * math.log(x) for size, x in zip(self.sizes, hh) if size)

    def grad(self, w) -> list[float]:
        """d ln det / d w_d, i.e. v(d) at the mixture w."""
        hh = self.info(w)
        return [
            math.fsum(size * h[r] / hh[r] for r, size in enumerate(self.sizes) if size)
            for h in self.H
        ]


def _stationary_pair(face: _Face) -> list[float] | None:
    """Interior maximizer of a two-depth face, by bisection on the derivative."""
    ha, hb = face.H

    def slope(t):
        total = 0.0
        for r, size in enumerate(face.sizes):
            if not size:
                continue
            x = t * ha[r] + (1 - t) * hb[r]
            diff = ha[r] - hb[r]
            if x <= 0:
                if diff == 0:
                    continue
                return math.copysign(math.inf, diff)
            total += size * diff / x
        return total

    if slope(0.0) <= 0 or slope(1.0) >= 0:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        s = slope(mid)
        if s == 0:
            lo = hi = mid
            break
        if s > 0:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller derivative magnitude
    t = lo if abs(slope(lo)) <= abs(slope(hi)) else hi
    return [t, 1.0 - t]


def _stationary_triple(face: _Face) -> list[float] | None:
    """Stationary point of a three-depth face via damped Newton on the affine hull.

    Newton is allowed to leave the simplex (ln det stays defined while all
    block values are positive); the point is accepted only if it lands in
    the closed simplex, so degenerate optima with a zero weight survive.
    """
    w = [1 / 3] * 3
    f = face.logdet(w)
    sizes = face.sizes
    for _ in range(200):
        hh = face.info(w)
        g = face.grad(w)
        G = (g[0] - g[2], g[1] - g[2])
        if max(abs(G[0]), abs(G[1])) <= 1e-13 * face.p:
            break
        # Hessian of ln det in the weights, then reduced to (x, y) with w3 = 1 - x - y
        Hf = [
            [
                -math.fsum(
                    size * face.H[a][r] * face.H[b][r] / hh[r] ** 2
                    for r, size in enumerate(sizes)
                    if size
                )
                for b in range(3)
            ]
            for a in range(3)
        ]
        A = Hf[0][0] - 2 * Hf[0][2] + Hf[2][2]
        B = Hf[0][1] - Hf[0][2] - Hf[1][2] + Hf[2][2]
        C = Hf[1][1] - 2 * Hf[1][2] + Hf[2][2]
        det = A * C - B * B
        if det <= 0 or not math.isfinite(det):
            return None
        sx = -(C * G[0] - B * G[1]) / det
        sy = -(-B * G[0] + A * G[1]) / det
        slope = G[0] * sx + G[1] * sy
        step = 1.0
        while step > 1e-12:
            cand = [w[0] + step * sx, w[1] + step * sy]
            cand.append(1 - cand[0] - cand[1])
            fc = face.logdet(cand)
            if fc >= f + 1e-4 * step * slope or (fc >= f and step * max(abs(sx), abs(sy)) < 1e-9):
                break
            step /= 2
        else:
            break
        w, f = cand, fc
        if min(w) < -0.5 or max(w) > 1.5:
            return None
    g = face.grad(w)
    if max(abs(g[0] - g[2]), abs(g[1] - g[2])) > 1e-9 * face.p:
        return None
    if min(w) < -1e-12:
        return None
    w = [max(x, 0.0) for x in w]
    s = math.fsum(w)
    return [x / s for x in w]


def _optimize(K: int, depths: Iterable[int]) -> tuple[dict[int, float], float]:
    """Maximize ln det over mixtures of ``depths``; returns (weights, logdet).

    ln det is concave in the weights, so its maximum over the simplex is a
    stationary point of the face whose relative interior contains it.
    Every face is solved and the best stationary point wins; on ties the
    support with fewer depths is kept.
    """
    depths = tuple(sorted(set(depths)))
    if not depths:
        raise DomainError("need at least one depth")
    if len(depths) > 3:
        raise DomainError("at most three depths are supported")
    if K < 3:
        raise DomainError(f"K must be >= 3, got {K}")
    for d in depths:
        if not 1 <= d <= K:
            raise DomainError(f"depth {d} out of range 1..{K}")
    best: tuple[float, int, dict[int, float]] | None = None
    for size in range(1, len(depths) + 1):
        for sub in combinations(depths, size):
            face = _Face(K, sub)
            if face.singular_everywhere():
                continue
            if size == 1:
                w = [1.0]
            elif size == 2:
                w = _stationary_pair(face)
            else:
                w = _stationary_triple(face)
            if w is None:
                continue
            val = face.logdet(w)
            if not math.isfinite(val):
                continue
            nsupp = sum(1 for x in w if x > 0)
            if best is None or val > best[0] + TIE_TOL or (
                val >= best[0] - TIE_TOL and nsupp < best[1]
            ):
                weights = {d: 0.0 for d in depths}
                weights.update(dict(zip(sub, w)))
                best = (val, nsupp, weights)
    if best is None:
        raise SingularDesignError(
            f"every mixture of depths {list(depths)} has a singular information matrix"
        )
    return best[2], best[0]


def optimize_weights(K: int, depths: Iterable[int]) -> dict[int, float]:
    """D-optimal weights over the simplex on at most three given depths."""
    return _optimize(K, depths)[0]


# --- D-optimal designs ---------------------------------------------------------


@dataclass(frozen=True)
class OptimalDesignResult:
    design: DepthDesign
    logdet: float
    kw_max: float
    certified: bool
    support_depths: tuple[int, ...]
    profile: VarianceProfile = field(repr=False)
    exact_certified: bool = False


def _rationalize(K: int, weights: dict[int, float]) -> DepthDesign | None:
    support = [d for d, w in weights.items() if w > 0]
    exact = {d: Fraction(weights[d]).limit_denominator(MAX_RATIONAL_DENOMINATOR) for d in support}
    last = support[-1]
    exact[last] = 1 - sum(v for d, v in exact.items() if d != last)
    if exact[last] <= 0:
        return None
    candidate = DepthDesign(K, dict(exact))
    return candidate if kw_certify_exact(candidate) else None


def k3_optimal_design() -> DepthDesign:
    """The K = 3 optimum: weights 3/7, 3/7, 1/7 on depths 1, 2, 3."""
    return DepthDesign(3, {1: Fraction(3, 7), 2: Fraction(3, 7), 3: Fraction(1, 7)})


def candidate_supports(K: int) -> list[tuple[int, ...]]:
    """Depth sets allowed for a D-optimal design with K >= 4 attributes.

    Two-depth sets come first so ties resolve towards smaller supports.
    """
    two = [(d, K) for d in range(1, K)]
    two += [(d, d + 1) for d in range(1, K - 1)]
    three = [(d, d + 1, K) for d in range(1, K - 1)]
    return two + three


def _finish(design: DepthDesign) -> OptimalDesignResult:
    profile = kw_certify(design)
    return OptimalDesignResult(
        design=design,
        logdet=log_det(design),
        kw_max=profile.kw_max,
        certified=profile.certified,
        support_depths=design.support,
        profile=profile,
        exact_certified=kw_certify_exact(design),
    )


def search_d_optimal(K: int) -> DepthDesign:
    """Best design over all candidate supports, without the K = 3 shortcut."""
    if K < 3:
        raise DomainError(f"K must be >= 3, got {K}")
    supports = [(1, 2, 3)] if K == 3 else candidate_supports(K)
    best: tuple[float, int, dict[int, float]] | None = None
    for depths in supports:
        try:
            weights, val = _optimize(K, depths)
        except SingularDesignError:
            continue
        nsupp = sum(1 for w in weights.values() if w > 0)
        if best is None or val > best[0] + TIE_TOL or (
            val >= best[0] - TIE_TOL and nsupp < best[1]
        ):
            best = (val, nsupp, weights)
    assert best is not None
    weights = {d: w for d, w in best[2].items() if w > 0}
    exact = _rationalize(K, weights)
    if exact is not None:
        return exact
    total = math.fsum(weights.values())
    return DepthDesign(K, {d: w / total for d, w in weights.items()})


def d_optimal_design(K: int) -> OptimalDesignResult:
    """Certified D-optimal invariant design for K >= 3 binary attributes."""
    if isinstance(K, bool) or not isinstance(K, int) or K < 3:
        raise DomainError(f"K must be an integer >= 3, got {K!r}")
    design = k3_optimal_design() if K == 3 else search_d_optimal(K)
    result = _finish(design)
    if not result.certified:
        raise CertificationError(
            f"design for K={K} failed certification (max v/p = {result.kw_max!r})",
            profile=result.profile,
        )
    return result


def conjectured_depth(K: int) -> int:
    """Intermediate depth predicted for K >= 4 (not assumed anywhere)."""
    if K % 2:
        return (K - 1) // 2
    if K in (4, 6):
        return K // 2
    return K // 2 - 1


@dataclass(frozen=True)
class ProbeRecord:
    K: int
    support: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()
    expected_depth: int = 0
    matches: bool = False
    certified: bool = False
    kw_max: float = math.nan
    error: str | None = None


def conjecture_probe(K_max: int, K_min: int = 4) -> list[ProbeRecord]:
    """Compute the optimum for each K and compare its support with {d*, K}.

    A failure for one K is recorded and the sweep continues.
    """
    if K_max < 4:
        raise DomainError(f"K_max must be >= 4, got {K_max}")
    records = []
    for K in range(max(K_min, 4), K_max + 1):
        expected = conjectured_depth(K)
        try:
            res = d_optimal_design(K)
        except (CertificationError, SingularDesignError, DomainError) as exc:
            records.append(ProbeRecord(K, expected_depth=expected, error=str(exc)))
            continue
        support = res.support_depths
        records.append(
            ProbeRecord(
                K=K,
                support=support,
                weights=tuple(res.design.weights[d] for d in support),
                expected_depth=expected,
                matches=support == (expected, K),
                certified=res.certified,
                kw_max=res.kw_max,
            )
        )
    return records


__all__ = [
    "AnalyticWeight",
    "BLOCK_NAMES",
    "OptimalDesignResult",
    "ProbeRecord",
    "VarianceProfile",
    "analytic_weight",
    "candidate_supports",
    "checked_analytic_weight",
    "conjecture_probe",
    "conjectured_depth",
    "d_optimal_design",
    "kw_certify",
    "kw_certify_exact",
    "optimal_depth_first_order",
    "optimal_depth_main",
    "optimal_depth_second_order",
    "optimize_weights",
    "search_d_optimal",
    "k3_optimal_design",
    "variance_function",
    "variance_function_exact",
    "variance_single_depth",
]
