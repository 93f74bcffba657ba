"""Optimal depths/weights and normalized variance profiles for a range of K."""
from __future__ import annotations

from dataclasses import dataclass

from .optimality import d_optimal_design


@dataclass(frozen=True)
class WeightRow:
    K: int
    w_K: float
    d_star: int
    w_d_star: float
    support: tuple[int, ...]


def weight_rows(ks=range(4, 11)) -> list[WeightRow]:
    rows = []
    for K in ks:
        res = d_optimal_design(K)
        support = res.support_depths
        inner = [d for d in support if d != K]
        d_star = min(inner) if inner else K
        rows.append(
            WeightRow(
                K=K,
                w_K=res.design.weight(K),
                d_star=d_star,
                w_d_star=res.design.weight(d_star),
                support=support,
            )
        )
    return rows


def variance_rows(ks=range(4, 11)) -> dict[int, tuple[float, ...]]:
    """v(d)/p at d = 1..K of the D-optimal design, per K."""
    return {K: d_optimal_design(K).profile.normalized[1:] for K in ks}
