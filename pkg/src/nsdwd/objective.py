"""Softmax frequency-matching objectives with exact first- and second-order info.

Two objective kinds share one interface:

* ``SOFTMAX_UNIGRAM`` -- ``f(theta) = KL(p || softmax(theta))`` over all d
  logits. Shift-invariant, so the minimizer is a line ``log p + c``.
* ``ADDITIVE_LOGISTIC`` -- the same KL after pinning the last logit to zero,
  parameterized by the first ``d - 1`` logits. Strictly convex with the
  unique minimizer ``log(p_k / p_d)``.

Parameters are plain float64 arrays. The Hessian is never materialized on
the hot path; ``hvp`` applies ``diag(q) - q q^T`` in O(d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import TokenDistribution


class ObjectiveKind(Enum):
    SOFTMAX_UNIGRAM = "softmax_unigram"
    ADDITIVE_LOGISTIC = "additive_logistic"


def softmax_stable(theta: np.ndarray) -> np.ndarray:
    """Softmax with max-subtraction; no overflow for any finite input."""
    theta = np.asarray(theta, dtype=np.float64)
    shifted = theta - theta.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def log_sum_exp(theta: np.ndarray) -> float:
    peak = float(theta.max())
    return peak + math.log(float(np.exp(theta - peak).sum()))


def alt_transform(theta: np.ndarray) -> np.ndarray:
    """Probabilities from ``d - 1`` free logits with a zero appended as the last."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.size < 1:
        raise ValueError("need at least one free logit (d >= 2)")
    return softmax_stable(np.append(theta, 0.0))


def alt_inverse(p: np.ndarray) -> np.ndarray:
    """Unique logits with zero last entry mapping to ``p``: ``log(p_k / p_d)``."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("need a probability vector of length >= 2")
    if np.any(p <= 0.0):
        raise ValueError("every probability must be strictly positive")
    return np.log(p[:-1] / p[-1])


@dataclass(frozen=True, eq=False)
class ObjectiveHandle:
    """An evaluable objective bound to a token distribution."""

    kind: ObjectiveKind
    dist: TokenDistribution
    param_dim: int
    p_log_p: float  # sum_k p_k log p_k, fixed term of the KL

    @property
    def d(self) -> int:
        return self.dist.d


def make_objective(kind: ObjectiveKind, dist: TokenDistribution) -> ObjectiveHandle:
    if kind is ObjectiveKind.ADDITIVE_LOGISTIC and dist.d < 2:
        raise ValueError("the additive-logistic objective requires d >= 2")
    param_dim = dist.d if kind is ObjectiveKind.SOFTMAX_UNIGRAM else dist.d - 1
    p_log_p = float(np.dot(dist.probs, np.log(dist.probs)))
    return ObjectiveHandle(kind=kind, dist=dist, param_dim=param_dim, p_log_p=p_log_p)


def _check_dim(obj: ObjectiveHandle, vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (obj.param_dim,):
        raise ValueError(f"{name} must have shape ({obj.param_dim},), got {vec.shape}")
    return vec


def probability_map(obj: ObjectiveHandle, theta: np.ndarray) -> np.ndarray:
    """Model probabilities over all d classes at ``theta``."""
    theta = _check_dim(obj, theta, "theta")
    if obj.kind is ObjectiveKind.SOFTMAX_UNIGRAM:
        return softmax_stable(theta)
    return alt_transform(theta)


def loss(obj: ObjectiveHandle, theta: np.ndarray) -> float:
    """``KL(p || q(theta))``, nonnegative, zero exactly when ``q = p``."""
    value, _ = loss_and_gradient(obj, theta)
    return value


def gradient(obj: ObjectiveHandle, theta: np.ndarray) -> np.ndarray:
    """``q(theta) - p``, restricted to the first d-1 coordinates for the ALT kind."""
    _, grad = loss_and_gradient(obj, theta)
    return grad


def loss_and_gradient(obj: ObjectiveHandle, theta: np.ndarray) -> tuple[float, np.ndarray]:
    """One fused softmax pass; the optimizer loop calls this every iteration.

    The KL value is computed in log-sum-exp form, which stays finite even
    when some model probabilities underflow to zero.
    """
    theta = _check_dim(obj, theta, "theta")
    p = obj.dist.probs
    if obj.kind is ObjectiveKind.SOFTMAX_UNIGRAM:
        full = theta
        inner = float(np.dot(p, theta))
    else:
        full = np.append(theta, 0.0)
        inner = float(np.dot(p[:-1], theta))

    peak = float(full.max())
    weights = np.exp(full - peak)
    total = float(weights.sum())
    value = peak + math.log(total) - inner + obj.p_log_p
    if value < 0.0:  # KL >= 0; tiny negatives are cancellation noise
        value = 0.0

    q = weights / total
    grad = q - p if obj.kind is ObjectiveKind.SOFTMAX_UNIGRAM else q[:-1] - p[:-1]
    return value, grad


def hessian_from_probs(q: np.ndarray) -> np.ndarray:
    """Dense ``diag(q) - q q^T`` for a normalized probability vector.

    Positive semi-definite with zero row sums. Intended for analysis and
    tests at small d; use `hvp` on the optimization path.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.size < 1:
        raise ValueError("q must be a nonempty vector")
    if np.any(q < 0.0):
        raise ValueError("q entries must be nonnegative")
    if abs(float(q.sum()) - 1.0) > 1e-10:
        raise ValueError("q must sum to 1 within 1e-10")
    return np.diag(q) - np.outer(q, q)


def hvp(obj: ObjectiveHandle, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hessian-vector product ``(q * v) - q (q . v)`` in O(d).

    For the ALT kind the product uses the first ``d - 1`` coordinates of the
    probability map, matching its ``(d-1) x (d-1)`` Hessian block.
    """
    v = _check_dim(obj, v, "v")
    q = probability_map(obj, theta)
    if obj.kind is ObjectiveKind.ADDITIVE_LOGISTIC:
        q = q[:-1]
    return q * v - q * float(np.dot(q, v))


def minimizer(obj: ObjectiveHandle) -> np.ndarray:
    """A parameter vector attaining zero loss (the mean-log-shifted one for unigram)."""
    p = obj.dist.probs
    if obj.kind is ObjectiveKind.ADDITIVE_LOGISTIC:
        return alt_inverse(p)
    logs = np.log(p)
    return logs - logs.mean()
