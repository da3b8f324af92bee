"""Closed-form constants of the softmax frequency-matching problem.

Everything the convergence bounds need lives here: minimal-norm solutions
under both geometries, the variance of log-rank, sampled smoothness
estimates for the softmax Hessian family ``diag(q) - q q^T``, the
two-spike curve that pins the l2 lower bound, the pair-family machinery
behind the d/2 diagonal-domination bound, and the complexity constant
``8 L ||theta*||^2`` itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .distributions import TokenDistribution
from .errors import PowerIterationError
from .objective import ObjectiveKind, alt_inverse, softmax_stable
from .optimizers import NormKind

THETA_STAR_MATERIALIZE_LIMIT = 1_000_000


@dataclass(frozen=True, eq=False)
class MinNormSolution:
    """A zero-loss parameter vector of minimal norm, ``log p`` shifted by ``shift``."""

    norm_kind: NormKind
    shift: float
    norm_value: float
    theta_star: np.ndarray | None


def _log_probs(dist: TokenDistribution) -> np.ndarray:
    # TokenDistribution guarantees strictly positive entries.
    return np.log(dist.probs)


def _materialize(logs: np.ndarray, shift: float) -> np.ndarray | None:
    if logs.size > THETA_STAR_MATERIALIZE_LIMIT:
        return None
    return logs + shift


def min_norm_inf(dist: TokenDistribution) -> MinNormSolution:
    """Minimal l-infinity norm over the solution line ``log p + c``.

    The extreme entries of ``log p`` decide the norm, so the optimal shift
    centers them: ``c = -(max + min)/2`` and the norm is half the spread.
    For the rank power law this is ``log(d)/2``.
    """
    logs = _log_probs(dist)
    hi = float(logs.max())
    lo = float(logs.min())
    shift = -(hi + lo) / 2.0
    return MinNormSolution(
        norm_kind=NormKind.LINF,
        shift=shift,
        norm_value=(hi - lo) / 2.0,
        theta_star=_materialize(logs, shift),
    )


def min_norm_l2(dist: TokenDistribution) -> MinNormSolution:
    """Minimal l2 norm over the solution line: center ``log p`` at its mean.

    For the rank power law the value is ``sqrt(d * V_d)`` with ``V_d`` the
    variance of ``log k`` under a uniform rank.
    """
    logs = _log_probs(dist)
    shift = -float(logs.mean())
    centered = logs + shift
    return MinNormSolution(
        norm_kind=NormKind.L2,
        shift=shift,
        norm_value=float(np.linalg.norm(centered)),
        theta_star=_materialize(logs, shift),
    )


def var_log_uniform(d: int) -> float:
    """``V_d``: variance of ``log k`` for ``k`` uniform on ``{1..d}``.

    Uses exact compensated sums; the value is Theta(1), tending to 1.
    """
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    logs = np.log(np.arange(1, d + 1, dtype=np.float64))
    s1 = math.fsum(logs.tolist())
    s2 = math.fsum((logs * logs).tolist())
    return s2 / d - (s1 / d) ** 2


class AltMinNorm(NamedTuple):
    theta_star: np.ndarray
    linf: float
    l2: float


def min_norm_alt(dist: TokenDistribution) -> AltMinNorm:
    """Norms of the unique additive-logistic minimizer ``log(p_k / p_d)``.

    For the rank power law: l-infinity norm ``log d`` and l2 norm
    ``sqrt(sum_{k<d} log(k/d)^2)``.
    """
    if dist.d < 2:
        raise ValueError("the additive-logistic objective requires d >= 2")
    theta_star = alt_inverse(dist.probs)
    return AltMinNorm(
        theta_star=theta_star,
        linf=float(np.max(np.abs(theta_star))),
        l2=float(np.linalg.norm(theta_star)),
    )


class SCurvePoint(NamedTuple):
    s: float
    lambda1: float
    lambda2: float


def s_curve(t: float, d: int) -> SCurvePoint:
    """Top-two softmax mass along the two-spike logits ``(t, t, -t, ..., -t)``.

    ``s = e^t / (2 e^t + (d-2) e^{-t})`` is also the larger eigenvalue of the
    leading 2x2 Hessian block; the smaller one is ``s - 2 s^2``. As ``t``
    grows, ``s`` tends to 1/2, which forces the l2 smoothness constant of
    the objective to be at least 1/2.
    """
    if d < 3:
        raise ValueError(f"the two-spike construction needs d >= 3, got {d}")
    s = 1.0 / (2.0 + (d - 2) * math.exp(-2.0 * t))
    return SCurvePoint(s=s, lambda1=s, lambda2=s - 2.0 * s * s)


def _alt_curve_probs(d: int) -> np.ndarray:
    # Two-spike logits in the d-1 free coordinates; last logit pinned to 0.
    theta = np.full(d - 1, -40.0)
    theta[:2] = 40.0
    return softmax_stable(np.append(theta, 0.0))[:-1]


def _candidate_probs(d: int, n_samples: int, seed: int, kind: ObjectiveKind) -> list[np.ndarray]:
    """Deterministic specials plus Dirichlet(1,..,1) draws.

    For the ALT kind the vectors live in the open sub-simplex of dimension
    d-1 (entries of the probability map without its pinned last class).
    """
    rng = np.random.default_rng(seed)
    samples = rng.dirichlet(np.ones(d), size=n_samples) if n_samples > 0 else np.empty((0, d))
    if kind is ObjectiveKind.SOFTMAX_UNIGRAM:
        candidates = [np.full(d, 1.0 / d)]
        if d >= 3:
            spike = np.full(d, -40.0)
            spike[:2] = 40.0
            candidates.append(softmax_stable(spike))
        candidates.extend(samples)
        return candidates
    if d < 2:
        raise ValueError("the additive-logistic kind requires d >= 2")
    candidates = [np.full(d - 1, 1.0 / d)]
    if d >= 3:
        candidates.append(_alt_curve_probs(d))
    candidates.extend(row[:-1] for row in samples)
    return candidates


def hessian_lambda_max(
    q: np.ndarray,
    rng: np.random.Generator | None = None,
    max_iter: int = 10_000,
    tol: float = 1e-13,
) -> float:
    """Largest eigenvalue of ``diag(q) - q q^T`` by power iteration, O(d) per step.

    ``q`` may be a sub-probability vector (ALT Hessian blocks). Raises
    `PowerIterationError` if the Rayleigh quotient has not settled after
    ``max_iter`` iterations.
    """
    q = np.asarray(q, dtype=np.float64)
    rng = rng or np.random.default_rng(0)
    v = rng.standard_normal(q.size)
    v /= np.linalg.norm(v)
    previous = math.inf
    for _ in range(max_iter):
        w = q * v - q * float(np.dot(q, v))
        lam = float(np.dot(v, w))
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        if abs(lam - previous) <= tol * max(1.0, abs(lam)):
            return lam
        previous = lam
        v = w / norm_w
    raise PowerIterationError(f"power iteration did not converge in {max_iter} iterations")


def estimate_l2_smoothness(
    d: int,
    n_samples: int,
    seed: int,
    kind: ObjectiveKind = ObjectiveKind.SOFTMAX_UNIGRAM,
) -> float:
    """Sampled supremum of the Hessian's largest eigenvalue.

    Maximizes over Dirichlet draws, the uniform vector, and the two-spike
    curve at t = 40, whose analytic eigenvalue ``s(40)`` is within 1e-29 of
    the true limit 1/2. The result certifies the lower half of the proven
    window [1/2, 1] numerically; it never exceeds 1/2 because no softmax
    Hessian does.
    """
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    rng = np.random.default_rng(seed + 1)
    best = max(
        hessian_lambda_max(q, rng=rng) for q in _candidate_probs(d, n_samples, seed, kind)
    )
    if d >= 3:
        if kind is ObjectiveKind.SOFTMAX_UNIGRAM:
            best = max(best, s_curve(40.0, d).lambda1)
        else:
            # ALT analogue of s(t) with the pinned class in the denominator.
            best = max(best, 1.0 / (2.0 + (d - 3) * math.exp(-80.0) + math.exp(-40.0)))
    return best


def best_sign_quadratic(q: np.ndarray) -> float:
    """Max of ``u^T (diag(q) - q q^T) u`` over sign vectors ``u`` in {+-1}^n.

    Since every ``u_k^2 = 1`` the value is ``sum(q) - (q . u)^2``, so the
    best ``u`` balances the two sign classes. Exhaustive over all sign
    patterns for n <= 20; greedy balancing (largest weight to the lighter
    side) above that.
    """
    q = np.asarray(q, dtype=np.float64)
    total = float(q.sum())
    if q.size <= 20:
        # All achievable q.u values, up to global sign: fold in one entry at a time.
        sums = np.array([q[0]])
        for weight in q[1:]:
            sums = np.concatenate([sums + weight, sums - weight])
        imbalance = float(np.min(np.abs(sums)))
    else:
        diff = 0.0
        for weight in sorted(q.tolist(), reverse=True):
            diff = diff - weight if diff > 0 else diff + weight
        imbalance = abs(diff)
    return total - imbalance * imbalance


def estimate_linf_smoothness(
    d: int,
    n_samples: int,
    seed: int,
    kind: ObjectiveKind = ObjectiveKind.SOFTMAX_UNIGRAM,
) -> float:
    """Sampled supremum of the Hessian quadratic over the l-infinity unit ball.

    Sign vertices attain the supremum, so each candidate ``q`` contributes
    ``sum(q) - min_u (q . u)^2``. Even d reaches 1 exactly through the
    uniform vector; odd d approaches 1 along the two-spike curve.
    """
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return max(best_sign_quadratic(q) for q in _candidate_probs(d, n_samples, seed, kind))


def pair_probs(d: int, i: int, j: int) -> np.ndarray:
    """Boundary probability vector with mass 1/2 on classes ``i`` and ``j``."""
    if not (0 <= i < j < d):
        raise ValueError(f"need 0 <= i < j < d, got i={i}, j={j}, d={d}")
    q = np.zeros(d)
    q[i] = q[j] = 0.5
    return q


def pair_condition(alpha_i: float, alpha_j: float) -> bool:
    """Whether ``diag(alpha_i, alpha_j)`` dominates the 2x2 pair Hessian block.

    The block is ``[[1/4, -1/4], [-1/4, 1/4]]``; domination means both
    shifted entries ``alpha - 1/4`` are nonnegative with product >= 1/16.
    """
    bi = alpha_i - 0.25
    bj = alpha_j - 0.25
    return bi >= 0.0 and bj >= 0.0 and bi * bj >= 0.0625


def diag_dominates_pair(alpha: np.ndarray, i: int, j: int) -> bool:
    """Whether ``diag(alpha)`` dominates the Hessian at ``pair_probs`` (i, j)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    off_pair = np.delete(alpha, [i, j])
    return bool(np.all(off_pair >= 0.0)) and pair_condition(float(alpha[i]), float(alpha[j]))


def half_certificate_min_eig(d: int) -> float:
    """Smallest eigenvalue of ``diag(1/2) - H(q^{(i,j)})`` over all pairs.

    The constant-1/2 diagonal meets every pair constraint with equality, so
    this is zero up to roundoff; it has trace d/2, witnessing that the
    lower bound is attained by the pair family.
    """
    from .objective import hessian_from_probs

    worst = math.inf
    base = np.full(d, 0.5)
    for i in range(d):
        for j in range(i + 1, d):
            gap = np.diag(base) - hessian_from_probs(pair_probs(d, i, j))
            worst = min(worst, float(np.linalg.eigvalsh(gap)[0]))
    return worst


def min_trace_grid_search(d: int, step: float = 1.0 / 64.0, upper: float = 1.5) -> float:
    """Smallest trace of a diagonal matrix on the grid meeting all pair constraints.

    Brute force over ``alpha in [0, upper]^d`` with the given step; supports
    d in {2, 3, 4}. The constant-1/2 point is on the grid, so the result is
    exactly d/2 if no grid point does better.
    """
    if not 2 <= d <= 4:
        raise ValueError(f"grid search supports 2 <= d <= 4, got {d}")
    n = int(round(upper / step)) + 1
    vals = np.arange(n) * step
    b = vals - 0.25
    feasible_pair = (b[:, None] >= 0.0) & (b[None, :] >= 0.0) & (np.outer(b, b) >= 0.0625)

    if d == 2:
        trace = vals[:, None] + vals[None, :]
        return float(trace[feasible_pair].min())

    trace3 = vals[:, None, None] + vals[None, :, None] + vals[None, None, :]
    mask23 = feasible_pair[:, :, None]
    mask24 = feasible_pair[:, None, :]
    mask34 = feasible_pair[None, :, :]
    if d == 3:
        mask = mask23 & mask24 & mask34
        return float(trace3[mask].min())

    best = math.inf
    tail_mask = mask23 & mask24 & mask34
    for i1 in range(n):
        row = feasible_pair[i1]
        mask = row[:, None, None] & row[None, :, None] & row[None, None, :] & tail_mask
        if mask.any():
            best = min(best, float(vals[i1] + trace3[mask].min()))
    return best


def adaptive_smoothness_lower_bound(d: int) -> float:
    """``d/2``: no diagonal matrix of smaller trace dominates every Hessian.

    Each pair vector ``q^{(i,j)}`` forces ``alpha_i + alpha_j >= 1``;
    averaging over all pairs gives the trace bound. For the ALT objective
    the same family inside its d-1 free coordinates gives ``(d-1)/2``.
    """
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return d / 2.0


def complexity(L: float, min_norm: float) -> float:
    """``8 * L * min_norm**2``, the constant of the O(1/T) convergence bound."""
    if L <= 0.0:
        raise ValueError(f"L must be positive, got {L}")
    if min_norm < 0.0:
        raise ValueError(f"min_norm must be nonnegative, got {min_norm}")
    return 8.0 * L * min_norm * min_norm


# Proven smoothness window of the softmax Hessian family; the same constants
# hold for the ALT sub-block (d >= 3).
L2_SMOOTH_LOWER = 0.5
L2_SMOOTH_UPPER = 1.0
LINF_SMOOTH = 1.0


@dataclass(frozen=True)
class AnalysisReport:
    """All closed-form constants for one distribution and objective kind."""

    d: int
    objective: str
    l2_smooth_lower: float
    l2_smooth_upper: float
    linf_smooth: float
    min_norm_l2: float
    min_norm_linf: float
    vd: float
    complexity_l2: float
    complexity_linf: float
    adaptive_lower_bound: float

    def __post_init__(self):
        if self.l2_smooth_lower > self.l2_smooth_upper:
            raise ValueError("l2 smoothness lower bound exceeds upper bound")
        for got, want in (
            (self.complexity_l2, complexity(self.l2_smooth_upper, self.min_norm_l2)),
            (self.complexity_linf, complexity(self.linf_smooth, self.min_norm_linf)),
        ):
            if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                raise ValueError("complexity fields are inconsistent with L and min-norm")

    def min_norm(self, kind: NormKind) -> float:
        return self.min_norm_l2 if kind is NormKind.L2 else self.min_norm_linf

    def complexity_for(self, kind: NormKind) -> float:
        return self.complexity_l2 if kind is NormKind.L2 else self.complexity_linf

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(**data)

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_json(cls, path: str | Path) -> "AnalysisReport":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def table(self) -> str:
        rows = [
            ("d", self.d),
            ("objective", self.objective),
            ("L2 smoothness (proven window)", f"[{self.l2_smooth_lower}, {self.l2_smooth_upper}]"),
            ("Linf smoothness", self.linf_smooth),
            ("min ||theta*||_2", self.min_norm_l2),
            ("min ||theta*||_inf", self.min_norm_linf),
            ("V_d = Var[log k]", self.vd),
            ("complexity C_2 = 8 L ||theta*||_2^2", self.complexity_l2),
            ("complexity C_inf = 8 L ||theta*||_inf^2", self.complexity_linf),
            ("C_inf / C_2", self.complexity_linf / self.complexity_l2 if self.complexity_l2 else math.nan),
            ("diagonal adaptive smoothness >=", self.adaptive_lower_bound),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def build_report(
    dist: TokenDistribution, kind: ObjectiveKind = ObjectiveKind.SOFTMAX_UNIGRAM
) -> AnalysisReport:
    """Assemble the closed-form constants; no sampling involved."""
    if kind is ObjectiveKind.SOFTMAX_UNIGRAM:
        norm_l2 = min_norm_l2(dist).norm_value
        norm_linf = min_norm_inf(dist).norm_value
        param_dim = dist.d
    else:
        alt = min_norm_alt(dist)
        norm_l2, norm_linf = alt.l2, alt.linf
        param_dim = dist.d - 1
    return AnalysisReport(
        d=dist.d,
        objective=kind.value,
        l2_smooth_lower=L2_SMOOTH_LOWER,
        l2_smooth_upper=L2_SMOOTH_UPPER,
        linf_smooth=LINF_SMOOTH,
        min_norm_l2=norm_l2,
        min_norm_linf=norm_linf,
        vd=var_log_uniform(dist.d),
        complexity_l2=complexity(L2_SMOOTH_UPPER, norm_l2),
        complexity_linf=complexity(LINF_SMOOTH, norm_linf),
        adaptive_lower_bound=param_dim / 2.0,
    )
