"""Independent oracles shared across test modules.

These deliberately avoid the library's closed forms: brute-force searches,
finite differences, and dense eigensolves against which the implementation
is checked.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(fn, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Minimize a unimodal function on [lo, hi] to within tol."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    return (a + b) / 2.0


def brute_min_norm(probs: np.ndarray, norm_ord) -> float:
    """Minimal norm over the zero-loss line ``log p + c`` by 1-D search over c."""
    logs = np.log(probs)
    span = 2.0 * math.log(len(probs)) + 1.0

    def objective(c: float) -> float:
        return float(np.linalg.norm(logs + c, ord=norm_ord))

    best_c = golden_section(objective, -span, span, tol=1e-8)
    return objective(best_c)


def fd_gradient(fn, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite difference of a scalar function, coordinate by coordinate."""
    grad = np.empty_like(theta)
    for k in range(theta.size):
        bump = np.zeros_like(theta)
        bump[k] = h
        grad[k] = (fn(theta + bump) - fn(theta - bump)) / (2.0 * h)
    return grad


def kl_direct(p: np.ndarray, q: np.ndarray) -> float:
    """KL divergence by literal summation of p_k log(p_k / q_k)."""
    return math.fsum(float(pk * math.log(pk / qk)) for pk, qk in zip(p, q))
