"""Synthetic paired-comparison responses and least-squares recovery.

Responses follow Y = (f(i) - f(j))^T beta + eps with i.i.d. normal errors.
Replication r draws from its own stream, derived from (seed, r), so one
replication can be regenerated alone and the result does not depend on
how replications are batched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularDesignError
from .measures import ExactDesign
from .model import ModelSpec


@dataclass(frozen=True)
class SimulationConfig:
    beta: tuple[float, ...]
    sigma: float
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        beta = tuple(float(b) for b in np.ravel(self.beta))
        object.__setattr__(self, "beta", beta)
        # sigma = 0 is accepted as the noiseless limit
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise DomainError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")


def _stream(seed: int, replication: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replication,)))


def _check(design: ExactDesign, cfg: SimulationConfig) -> ModelSpec:
    spec = ModelSpec(design.K)
    if len(cfg.beta) != spec.p:
        raise DomainError(f"beta has length {len(cfg.beta)}, expected p={spec.p}")
    return spec


def mean_responses(design: ExactDesign, beta) -> np.ndarray:
    return design.design_matrix() @ np.asarray(beta, dtype=float)


def simulate_responses(design: ExactDesign, cfg: SimulationConfig, replication: int = 0) -> np.ndarray:
    """One vector of N responses for the given replication index."""
    _check(design, cfg)
    noise = _stream(cfg.seed, replication).standard_normal(design.N)
    return mean_responses(design, cfg.beta) + cfg.sigma * noise


@dataclass(frozen=True)
class LeastSquaresFit:
    beta_hat: np.ndarray
    covariance: np.ndarray
    sigma2_hat: float


def _normal_matrix(X: np.ndarray) -> np.ndarray:
    XtX = X.T @ X
    if np.linalg.matrix_rank(XtX) < XtX.shape[0]:
        raise SingularDesignError("design does not identify all parameters")
    return XtX


def least_squares(design: ExactDesign, responses) -> LeastSquaresFit:
    """OLS on the difference-vector design matrix.

    The covariance estimate is sigma2_hat * (N M)^-1 with sigma2_hat the
    residual sum of squares over N - p (NaN when N <= p).
    """
    X = design.design_matrix()
    y = np.asarray(responses, dtype=float)
    if y.shape != (design.N,):
        raise DomainError(f"expected {design.N} responses, got shape {y.shape}")
    XtX = _normal_matrix(X)
    beta_hat = np.linalg.solve(XtX, X.T @ y)
    resid = y - X @ beta_hat
    dof = design.N - X.shape[1]
    sigma2 = float(resid @ resid / dof) if dof > 0 else float("nan")
    return LeastSquaresFit(beta_hat, sigma2 * np.linalg.inv(XtX), sigma2)


def replicate_estimates(design: ExactDesign, cfg: SimulationConfig) -> np.ndarray:
    """beta_hat for every replication, shape (replications, p)."""
    _check(design, cfg)
    X = design.design_matrix()
    XtX = _normal_matrix(X)
    noise = np.stack([_stream(cfg.seed, r).standard_normal(design.N) for r in range(cfg.replications)])
    Y = (X @ np.asarray(cfg.beta))[None, :] + cfg.sigma * noise
    return np.linalg.solve(XtX, X.T @ Y.T).T


@dataclass(frozen=True)
class MonteCarloSummary:
    beta: np.ndarray
    beta_hat_mean: np.ndarray
    empirical_cov: np.ndarray
    theoretical_cov: np.ndarray
    frobenius_rel_error: float
    generalized_variance: float
    theoretical_generalized_variance: float
    max_bias_z: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "beta_hat_mean": self.beta_hat_mean.tolist(),
            "frobenius_rel_error": self.frobenius_rel_error,
            "generalized_variance": self.generalized_variance,
            "theoretical_generalized_variance": self.theoretical_generalized_variance,
            "max_bias_z": self.max_bias_z,
        }


def monte_carlo(design: ExactDesign, cfg: SimulationConfig) -> MonteCarloSummary:
    """Compare the spread of replicated estimates with sigma^2 (N M)^-1."""
    est = replicate_estimates(design, cfg)
    X = design.design_matrix()
    theory = cfg.sigma**2 * np.linalg.inv(X.T @ X)
    beta = np.asarray(cfg.beta)
    mean = est.mean(axis=0)
    if cfg.replications > 1:
        emp = np.cov(est, rowvar=False)
        se = np.sqrt(np.diag(emp) / cfg.replications)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, np.abs(mean - beta) / se, 0.0)
        max_z = float(z.max())
    else:
        emp = np.zeros_like(theory)
        max_z = float("nan")
    norm = np.linalg.norm(theory)
    rel = float(np.linalg.norm(emp - theory) / norm) if norm > 0 else 0.0
    return MonteCarloSummary(
        beta=beta,
        beta_hat_mean=mean,
        empirical_cov=emp,
        theoretical_cov=theory,
        frobenius_rel_error=rel,
        generalized_variance=float(np.linalg.det(emp)),
        theoretical_generalized_variance=float(np.linalg.det(theory)),
        max_bias_z=max_z,
    )
