"""Exact (non-approximate) t-SNE for visualizing region feature vectors in 2-D.

Gaussian input affinities with per-point bandwidth found by bisection,
Student-t output affinities, and momentum gradient descent with the classic
per-parameter gains and early exaggeration.  Everything is seeded and
deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

__all__ = ["tsne", "tsne_trace", "conditional_affinities", "input_affinities",
           "kl_divergence", "kl_gradient"]

_EPS = 1e-12
_EXAGGERATION = 12.0
_EXAGGERATION_ITERS = 250
_LEARNING_RATE = 200.0
_MOMENTUM_EARLY = 0.5
_MOMENTUM_LATE = 0.8


def standardize(x: np.ndarray) -> np.ndarray:
    """Zero mean, unit variance per dimension; constant dimensions stay 0."""
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean(axis=0)
    std = centered.std(axis=0)
    return centered / np.where(std > 0, std, 1.0)


def _sq_distances(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def conditional_affinities(d2: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-row Gaussian conditionals whose entropy matches log(perplexity).

    The bandwidth of each row is found by bisection on the precision beta.
    """
    n = d2.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    for i in range(n):
        row = np.delete(d2[i], i)
        beta_lo, beta_hi = 0.0, np.inf
        beta = 1.0
        for _ in range(64):
            expo = np.exp(-row * beta)
            total = expo.sum()
            if total <= 0:
                entropy = 0.0
                probs = np.full(row.shape, 1.0 / row.size)
            else:
                probs = expo / total
                entropy = float(beta * (row * probs).sum() + np.log(total))
            if abs(entropy - target) < 1e-7:
                break
            if entropy > target:
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == np.inf else (beta_lo + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = (beta_lo + beta_hi) / 2.0
        p_cond[i] = np.insert(probs, i, 0.0)
    return p_cond


def input_affinities(x: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized joint probabilities with per-point bandwidth matched to perplexity."""
    n = x.shape[0]
    p_cond = conditional_affinities(_sq_distances(x), perplexity)
    p = (p_cond + p_cond.T) / (2.0 * n)
    return np.maximum(p, _EPS)


def _student_t(y: np.ndarray):
    num = 1.0 / (1.0 + _sq_distances(y))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return np.maximum(q, _EPS), num


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) of the joint input and output affinities at embedding y."""
    q, _ = _student_t(y)
    mask = ~np.eye(p.shape[0], dtype=bool)
    return float((p[mask] * np.log(p[mask] / q[mask])).sum())


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P || Q) with respect to the embedding points."""
    q, num = _student_t(y)
    pq = (p - q) * num
    return 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)


def _validate(x: np.ndarray, perplexity: float) -> tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 4:
        raise ParameterError("t-SNE needs at least 4 input rows")
    if not np.isfinite(x).all():
        raise ParameterError("t-SNE input contains non-finite values")
    if perplexity <= 0:
        raise ParameterError("perplexity must be positive")
    return x, min(perplexity, (x.shape[0] - 1) / 3.0)


def tsne_trace(x: np.ndarray, perplexity: float = 30.0, iterations: int = 1000,
               seed: int = 0):
    """Run t-SNE and report the embedding plus initial / final KL divergence.

    Returns:
        (embedding (n, 2), kl_initial, kl_final)
    """
    x, perp = _validate(x, perplexity)
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    p = input_affinities(standardize(x), perp)

    rng = np.random.RandomState(seed)
    y = rng.normal(0.0, 1e-4, size=(x.shape[0], 2))
    kl_initial = kl_divergence(p, y)

    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(iterations):
        p_eff = p * _EXAGGERATION if it < _EXAGGERATION_ITERS else p
        grad = kl_gradient(p_eff, y)
        momentum = _MOMENTUM_EARLY if it < _EXAGGERATION_ITERS else _MOMENTUM_LATE
        agree = np.sign(grad) == np.sign(velocity)
        gains = np.where(agree, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        velocity = momentum * velocity - _LEARNING_RATE * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    return y, kl_initial, kl_divergence(p, y)


def tsne(x: np.ndarray, perplexity: float = 30.0, iterations: int = 1000,
         seed: int = 0) -> np.ndarray:
    """2-D embedding of the feature rows (deterministic for a fixed seed)."""
    y, _, _ = tsne_trace(x, perplexity, iterations, seed)
    return y
