"""Normalized steepest descent with decoupled weight decay, plus GD/Adam baselines.

The core update is ``x_{t+1} = (1 - lam * eta_t) x_t - eta_t * direction(g_t)``
where the direction is the unit-norm steepest vector for the chosen geometry
(``g / ||g||_2`` for l2, ``sign(g)`` for l-infinity) and the step size follows
the harmonic schedule ``eta_t = coeff / (lam * (t + 1))``.

Every run produces a `RunLog`: one record per visited iterate (t = 0..T) with
loss, gradient norms, parameter norms, and the scheduled step size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ZeroGradientError
from .objective import ObjectiveHandle, loss_and_gradient

GRAD_CONVERGENCE_TOL = 1e-14
DEFAULT_LR_GRID = tuple(10.0**k for k in range(-3, 3))


class NormKind(Enum):
    L2 = "l2"
    LINF = "linf"


@dataclass(frozen=True)
class NormGeometry:
    """Norm, dual norm, and unit-norm steepest direction for l2 or l-infinity."""

    kind: NormKind

    def norm(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if self.kind is NormKind.L2:
            return float(np.linalg.norm(x))
        return float(np.max(np.abs(x))) if x.size else 0.0

    def dual_norm(self, g: np.ndarray) -> float:
        g = np.asarray(g, dtype=np.float64)
        if self.kind is NormKind.L2:
            return float(np.linalg.norm(g))
        return float(np.sum(np.abs(g)))

    def steepest_direction(self, g: np.ndarray) -> np.ndarray:
        """Unit-norm vector maximizing ``<g, u>``; ``sign(0) = 0`` componentwise."""
        g = np.asarray(g, dtype=np.float64)
        if not np.any(g):
            raise ZeroGradientError("steepest direction undefined for a zero gradient")
        if self.kind is NormKind.L2:
            # Scale by the largest entry first so the sum of squares cannot
            # underflow for subnormal-range gradients.
            scaled = g / np.max(np.abs(g))
            return scaled / np.linalg.norm(scaled)
        return np.sign(g)


L2 = NormGeometry(NormKind.L2)
LINF = NormGeometry(NormKind.LINF)
GEOMETRIES = {NormKind.L2: L2, NormKind.LINF: LINF}


def schedule_eta(t: int, lam: float, eta_coeff: float = 2.0) -> float:
    """Harmonic step size ``eta_coeff / (lam * (t + 1))`` for 0-indexed ``t``."""
    if lam <= 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return eta_coeff / (lam * (t + 1))


def nsdwd_step(
    x: np.ndarray, g: np.ndarray, lam: float, eta: float, geometry: NormGeometry
) -> np.ndarray:
    """``(1 - lam * eta) x - eta * direction(g)``; a zero gradient only decays ``x``."""
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    if lam < 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    decayed = (1.0 - lam * eta) * x
    g = np.asarray(g, dtype=np.float64)
    if not np.any(g):
        return decayed
    return decayed - eta * geometry.steepest_direction(g)


@dataclass(frozen=True)
class NSDWDConfig:
    geometry: NormGeometry
    lam: float
    T: int
    eta_coeff: float = 2.0
    theta0: np.ndarray | None = None

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.T < 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.eta_coeff <= 0.0:
            raise ValueError(f"eta_coeff must be positive, got {self.eta_coeff}")


class BaselineVariant(Enum):
    GD = "gd"
    ADAM = "adam"


@dataclass(frozen=True)
class BaselineConfig:
    variant: BaselineVariant
    lr: float
    T: int
    weight_decay: float = 0.0
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    theta0: np.ndarray | None = None

    def __post_init__(self):
        if self.lr < 0.0:
            raise ValueError(f"lr must be nonnegative, got {self.lr}")
        if self.T < 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be nonnegative, got {self.weight_decay}")


CSV_HEADER = "t,loss,grad_l2,grad_linf,param_l2,param_linf,eta"


@dataclass
class RunLog:
    """Per-iteration records of one optimizer run plus its config echo.

    A full run has exactly ``T + 1`` records (t = 0..T). A run stopped early
    because the gradient vanished has fewer, with ``converged_at`` set.
    """

    t: np.ndarray
    loss: np.ndarray
    grad_l2: np.ndarray
    grad_linf: np.ndarray
    param_l2: np.ndarray
    param_linf: np.ndarray
    eta: np.ndarray
    config: dict
    wall_time_s: float = 0.0
    converged_at: int | None = None
    final_theta: np.ndarray | None = None

    @property
    def n_records(self) -> int:
        return int(self.t.size)

    @property
    def final_loss(self) -> float:
        return float(self.loss[-1])

    def to_csv(self, path: str | Path) -> None:
        lines = [CSV_HEADER]
        for i in range(self.n_records):
            lines.append(
                ",".join(
                    [str(int(self.t[i]))]
                    + [
                        repr(float(col[i]))
                        for col in (
                            self.loss,
                            self.grad_l2,
                            self.grad_linf,
                            self.param_l2,
                            self.param_linf,
                            self.eta,
                        )
                    ]
                )
            )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path, config: dict | None = None) -> "RunLog":
        lines = Path(path).read_text().strip().splitlines()
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError(f"{path}: expected header {CSV_HEADER!r}")
        rows = [line.split(",") for line in lines[1:]]
        cols = list(zip(*rows)) if rows else [[]] * 7
        return cls(
            t=np.array([int(v) for v in cols[0]], dtype=np.int64),
            loss=np.array([float(v) for v in cols[1]]),
            grad_l2=np.array([float(v) for v in cols[2]]),
            grad_linf=np.array([float(v) for v in cols[3]]),
            param_l2=np.array([float(v) for v in cols[4]]),
            param_linf=np.array([float(v) for v in cols[5]]),
            eta=np.array([float(v) for v in cols[6]]),
            config=config or {},
        )


class _Recorder:
    def __init__(self):
        self.rows: list[tuple[float, ...]] = []

    def add(self, t: int, f: float, g: np.ndarray, theta: np.ndarray, eta: float) -> None:
        self.rows.append(
            (
                t,
                f,
                float(np.linalg.norm(g)),
                float(np.max(np.abs(g))) if g.size else 0.0,
                float(np.linalg.norm(theta)),
                float(np.max(np.abs(theta))) if theta.size else 0.0,
                eta,
            )
        )

    def build(self, config: dict, wall: float, converged_at: int | None, theta: np.ndarray) -> RunLog:
        cols = np.array(self.rows, dtype=np.float64).T
        return RunLog(
            t=cols[0].astype(np.int64),
            loss=cols[1],
            grad_l2=cols[2],
            grad_linf=cols[3],
            param_l2=cols[4],
            param_linf=cols[5],
            eta=cols[6],
            config=config,
            wall_time_s=wall,
            converged_at=converged_at,
            final_theta=theta,
        )


def _initial_theta(obj: ObjectiveHandle, theta0: np.ndarray | None) -> np.ndarray:
    if theta0 is None:
        return np.zeros(obj.param_dim)
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != (obj.param_dim,):
        raise ValueError(f"theta0 must have shape ({obj.param_dim},), got {theta0.shape}")
    return theta0.copy()


def run_nsdwd(obj: ObjectiveHandle, cfg: NSDWDConfig) -> RunLog:
    """Run normalized steepest descent with weight decay for ``cfg.T`` steps.

    Deterministic; raises `DivergenceError` if the loss turns non-finite.
    Gradients with ``||g||_inf < 1e-14`` stop the run early as converged.
    """
    theta = _initial_theta(obj, cfg.theta0)
    config = {
        "method": "nsdwd",
        "geometry": cfg.geometry.kind.value,
        "lambda": cfg.lam,
        "eta_coeff": cfg.eta_coeff,
        "T": cfg.T,
        "theta0": "zeros" if cfg.theta0 is None else np.asarray(cfg.theta0).tolist(),
        "objective": obj.kind.value,
        "d": obj.d,
        "param_dim": obj.param_dim,
        "distribution_source": obj.dist.source.value,
    }
    recorder = _Recorder()
    converged_at: int | None = None
    start = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(cfg.T + 1):
            f, g = loss_and_gradient(obj, theta)
            if not math.isfinite(f):
                raise DivergenceError(t)
            eta = schedule_eta(t, cfg.lam, cfg.eta_coeff)
            recorder.add(t, f, g, theta, eta)
            if t == cfg.T:
                break
            if float(np.max(np.abs(g))) < GRAD_CONVERGENCE_TOL:
                converged_at = t
                break
            theta = nsdwd_step(theta, g, cfg.lam, eta, cfg.geometry)
    return recorder.build(config, time.perf_counter() - start, converged_at, theta)


@dataclass
class AdamMoments:
    """Bias-corrected first/second moments of the deterministic Adam update."""

    m: np.ndarray
    v: np.ndarray
    count: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamMoments":
        return cls(m=np.zeros(dim), v=np.zeros(dim))

    def direction(self, g: np.ndarray, betas: tuple[float, float], eps: float) -> np.ndarray:
        beta1, beta2 = betas
        self.count += 1
        self.m = beta1 * self.m + (1.0 - beta1) * g
        self.v = beta2 * self.v + (1.0 - beta2) * g * g
        m_hat = self.m / (1.0 - beta1**self.count)
        v_hat = self.v / (1.0 - beta2**self.count)
        return m_hat / (np.sqrt(v_hat) + eps)


def run_baseline(obj: ObjectiveHandle, cfg: BaselineConfig) -> RunLog:
    """Full-batch GD or Adam with a constant step size.

    Weight decay, when enabled, is decoupled: multiplicative shrinkage by
    ``(1 - lr * weight_decay)`` before the step, as in the NSD-WD update.
    """
    theta = _initial_theta(obj, cfg.theta0)
    config = {
        "method": cfg.variant.value,
        "lr": cfg.lr,
        "T": cfg.T,
        "weight_decay": cfg.weight_decay,
        "theta0": "zeros" if cfg.theta0 is None else np.asarray(cfg.theta0).tolist(),
        "objective": obj.kind.value,
        "d": obj.d,
        "param_dim": obj.param_dim,
        "distribution_source": obj.dist.source.value,
    }
    if cfg.variant is BaselineVariant.ADAM:
        config["betas"] = list(cfg.betas)
        config["eps"] = cfg.eps
        moments = AdamMoments.zeros(obj.param_dim)

    recorder = _Recorder()
    start = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(cfg.T + 1):
            f, g = loss_and_gradient(obj, theta)
            if not math.isfinite(f):
                raise DivergenceError(t)
            recorder.add(t, f, g, theta, cfg.lr)
            if t == cfg.T:
                break
            if cfg.weight_decay > 0.0:
                theta = (1.0 - cfg.lr * cfg.weight_decay) * theta
            if cfg.variant is BaselineVariant.GD:
                theta = theta - cfg.lr * g
            else:
                theta = theta - cfg.lr * moments.direction(g, cfg.betas, cfg.eps)
    return recorder.build(config, time.perf_counter() - start, None, theta)


def grid_search_lr(
    obj: ObjectiveHandle,
    variant: BaselineVariant,
    T: int,
    grid: tuple[float, ...] = DEFAULT_LR_GRID,
    weight_decay: float = 0.0,
) -> tuple[float, dict[float, float]]:
    """Pick the constant step size with the best final loss over ``grid``.

    Diverged runs score ``inf``. Ties resolve to the smaller step size.
    Returns the winner and the per-step-size final losses for the record.
    """
    results: dict[float, float] = {}
    for lr in sorted(grid):
        try:
            log = run_baseline(obj, BaselineConfig(variant=variant, lr=lr, T=T, weight_decay=weight_decay))
            results[lr] = log.final_loss
        except DivergenceError:
            results[lr] = math.inf
    best = min(results, key=lambda lr: (results[lr], lr))
    return best, results
