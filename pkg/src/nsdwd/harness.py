"""Experiment orchestration: JSON configs in, CSV run logs and a manifest out.

An experiment is one objective over one distribution and a list of
optimizers. Each optimizer produces a ``<name>.csv`` run log (schema
``t,loss,grad_l2,grad_linf,param_l2,param_linf,eta``), a ``<name>.config.json``
sidecar echoing its resolved configuration, and a ``<name>.theta.csv``
checkpoint of the final parameters (schema ``index,value``). The manifest
binds the files to their configs and to the closed-form constants used to
resolve weight decay, and records the convergence-bound constants so that
verification and plotting never recompute them.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .analysis import AnalysisReport, build_report
from .distributions import DistributionSource, TokenDistribution, ingest_corpus_path, power_law_distribution
from .errors import ConfigMismatchError, DivergenceError
from .objective import ObjectiveKind, make_objective, minimizer, loss as objective_loss
from .optimizers import (
    GEOMETRIES,
    BaselineConfig,
    BaselineVariant,
    NSDWDConfig,
    NormKind,
    RunLog,
    grid_search_lr,
    run_baseline,
    run_nsdwd,
)

FSTAR_TOLERANCE = 1e-10
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class DistributionSpec:
    """Either a synthetic power law of size ``d`` or a counted corpus file."""

    kind: str  # "power_law" | "corpus"
    d: int | None = None
    path: str | None = None
    max_vocab: int | None = None

    def __post_init__(self):
        if self.kind == "power_law":
            if self.d is None or self.d < 1:
                raise ValueError("power_law distribution needs a positive d")
        elif self.kind == "corpus":
            if not self.path:
                raise ValueError("corpus distribution needs a path")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def build(self) -> TokenDistribution:
        if self.kind == "power_law":
            return power_law_distribution(self.d)
        return ingest_corpus_path(self.path, max_vocab=self.max_vocab)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.d is not None:
            out["d"] = self.d
        if self.path is not None:
            out["path"] = self.path
        if self.max_vocab is not None:
            out["max_vocab"] = self.max_vocab
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        return cls(
            kind=data.get("kind", ""),
            d=data.get("d"),
            path=data.get("path"),
            max_vocab=data.get("max_vocab"),
        )


@dataclass(frozen=True)
class OptimizerSpec:
    """One optimizer entry of an experiment.

    ``method`` is ``nsdwd`` (needs ``geometry`` and a ``lam`` rule: a number
    or ``"optimal"`` for ``1 / min ||theta*||``) or a baseline ``gd`` /
    ``adam`` (needs an ``lr`` rule: a number or ``"grid"``).
    """

    name: str
    method: str
    T: int
    geometry: str | None = None
    lam: float | str | None = None
    eta_coeff: float = 2.0
    lr: float | str | None = None
    weight_decay: float = 0.0
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    theta0: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("optimizer entries need a name")
        if self.T < 0:
            raise ValueError(f"{self.name}: T must be nonnegative")
        if self.method == "nsdwd":
            if self.geometry not in ("l2", "linf"):
                raise ValueError(f"{self.name}: nsdwd needs geometry 'l2' or 'linf'")
            if self.lam is None or (isinstance(self.lam, str) and self.lam != "optimal"):
                raise ValueError(f"{self.name}: lambda must be a positive number or 'optimal'")
            if isinstance(self.lam, (int, float)) and self.lam <= 0:
                raise ValueError(f"{self.name}: lambda must be positive")
        elif self.method in ("gd", "adam"):
            if self.lr is None or (isinstance(self.lr, str) and self.lr != "grid"):
                raise ValueError(f"{self.name}: lr must be a nonnegative number or 'grid'")
            if isinstance(self.lr, (int, float)) and self.lr < 0:
                raise ValueError(f"{self.name}: lr must be nonnegative")
        else:
            raise ValueError(f"{self.name}: unknown method {self.method!r}")

    def to_dict(self) -> dict:
        out = {"name": self.name, "method": self.method, "T": self.T}
        if self.method == "nsdwd":
            out["geometry"] = self.geometry
            out["lambda"] = self.lam
            out["eta_coeff"] = self.eta_coeff
        else:
            out["lr"] = self.lr
            out["weight_decay"] = self.weight_decay
            if self.method == "adam":
                out["betas"] = list(self.betas)
                out["eps"] = self.eps
        if self.theta0 is not None:
            out["theta0"] = list(self.theta0)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerSpec":
        return cls(
            name=data.get("name", ""),
            method=data.get("method", ""),
            T=data.get("T", -1),
            geometry=data.get("geometry"),
            lam=data.get("lambda"),
            eta_coeff=data.get("eta_coeff", 2.0),
            lr=data.get("lr"),
            weight_decay=data.get("weight_decay", 0.0),
            betas=tuple(data.get("betas", (0.9, 0.999))),
            eps=data.get("eps", 1e-8),
            theta0=tuple(data["theta0"]) if data.get("theta0") is not None else None,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    objective: ObjectiveKind
    distribution: DistributionSpec
    optimizers: tuple[OptimizerSpec, ...]
    seed: int = 0
    out_dir: str = "out"

    def __post_init__(self):
        names = [spec.name for spec in self.optimizers]
        if len(set(names)) != len(names):
            raise ValueError("optimizer names must be unique")

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.value,
            "distribution": self.distribution.to_dict(),
            "optimizers": [spec.to_dict() for spec in self.optimizers],
            "seed": self.seed,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(
            objective=ObjectiveKind(data.get("objective", "")),
            distribution=DistributionSpec.from_dict(data.get("distribution", {})),
            optimizers=tuple(OptimizerSpec.from_dict(o) for o in data.get("optimizers", [])),
            seed=data.get("seed", 0),
            out_dir=data.get("out_dir", "out"),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def write_theta_csv(theta: np.ndarray, path: str | Path) -> None:
    """Parameter checkpoint: ``index,value`` rows, index 0-based."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "value"])
        for idx, value in enumerate(np.asarray(theta, dtype=np.float64)):
            writer.writerow([str(idx), repr(float(value))])


def read_theta_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["index", "value"]:
            raise ValueError(f"{path}: expected header index,value")
        values = [float(row[1]) for row in reader]
    return np.array(values, dtype=np.float64)


def _corollary_constant(
    kind: ObjectiveKind, geometry: NormKind, report: AnalysisReport
) -> float | None:
    """The literal constant of the harmonic-schedule corollary, power law only.

    Sign descent keeps the explicit constant; the l2 forms drop or halve it
    (``d`` for the unigram objective, half the explicit constant for ALT).
    """
    d = report.d
    if geometry is NormKind.LINF:
        return 2.0 * math.log(d) ** 2 if kind is ObjectiveKind.SOFTMAX_UNIGRAM else 8.0 * math.log(d) ** 2
    if kind is ObjectiveKind.SOFTMAX_UNIGRAM:
        return float(d)
    return report.complexity_l2 / 2.0


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every optimizer, write CSVs and sidecars, and return the manifest.

    Deterministic and idempotent for a fixed config. A diverging optimizer
    is recorded in the manifest and does not stop the other runs. The zero
    loss value is checked at a materialized minimizer before any run.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dist = cfg.distribution.build()
    obj = make_objective(cfg.objective, dist)
    report = build_report(dist, cfg.objective)

    fstar = objective_loss(obj, minimizer(obj))
    if not fstar < FSTAR_TOLERANCE:
        raise RuntimeError(f"loss at the materialized minimizer is {fstar}, expected < {FSTAR_TOLERANCE}")

    run_entries = []
    for spec in cfg.optimizers:
        entry: dict = {"name": spec.name, "method": spec.method, "T": spec.T}
        theta0 = np.array(spec.theta0) if spec.theta0 is not None else None
        try:
            if spec.method == "nsdwd":
                kind = NormKind(spec.geometry)
                lam = 1.0 / report.min_norm(kind) if spec.lam == "optimal" else float(spec.lam)
                log = run_nsdwd(
                    obj,
                    NSDWDConfig(
                        geometry=GEOMETRIES[kind],
                        lam=lam,
                        T=spec.T,
                        eta_coeff=spec.eta_coeff,
                        theta0=theta0,
                    ),
                )
                entry.update(
                    {
                        "geometry": spec.geometry,
                        "lambda": lam,
                        "lambda_rule": spec.lam if isinstance(spec.lam, str) else "explicit",
                        "eta_coeff": spec.eta_coeff,
                        "bound": {
                            "C_theorem": report.complexity_for(kind),
                            "L": report.linf_smooth if kind is NormKind.LINF else report.l2_smooth_upper,
                            "min_norm": report.min_norm(kind),
                            "C_corollary": (
                                _corollary_constant(cfg.objective, kind, report)
                                if dist.source is DistributionSource.POWER_LAW
                                else None
                            ),
                        },
                    }
                )
            else:
                variant = BaselineVariant(spec.method)
                if spec.lr == "grid":
                    lr, grid_losses = grid_search_lr(obj, variant, spec.T, weight_decay=spec.weight_decay)
                    entry["grid"] = {repr(k): v for k, v in grid_losses.items()}
                    entry["lr_rule"] = "grid"
                else:
                    lr = float(spec.lr)
                    entry["lr_rule"] = "explicit"
                log = run_baseline(
                    obj,
                    BaselineConfig(
                        variant=variant,
                        lr=lr,
                        T=spec.T,
                        weight_decay=spec.weight_decay,
                        betas=spec.betas,
                        eps=spec.eps,
                        theta0=theta0,
                    ),
                )
                entry["lr"] = lr
        except DivergenceError as err:
            entry.update({"diverged": True, "diverged_at": err.t})
            run_entries.append(entry)
            continue

        csv_name = f"{spec.name}.csv"
        sidecar_name = f"{spec.name}.config.json"
        theta_name = f"{spec.name}.theta.csv"
        log.to_csv(out_dir / csv_name)
        (out_dir / sidecar_name).write_text(json.dumps(log.config, indent=2) + "\n")
        write_theta_csv(log.final_theta, out_dir / theta_name)
        entry.update(
            {
                "diverged": False,
                "csv": csv_name,
                "config_sidecar": sidecar_name,
                "theta_checkpoint": theta_name,
                "final_loss": log.final_loss,
                "wall_time_s": log.wall_time_s,
                "converged_at": log.converged_at,
            }
        )
        run_entries.append(entry)

    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "analysis": report.to_dict(),
        "fstar_at_minimizer": fstar,
        "runs": run_entries,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


class BoundForm(Enum):
    """Denominator convention of the convergence bound being checked."""

    THEOREM_T2 = "theorem"  # explicit constant over (t + 2)
    COROLLARY_T1 = "corollary"  # literal corollary constant over (t + 1)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    C: float
    worst_ratio: float
    passed: bool
    first_violation_t: int | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundReport:
    form: BoundForm
    checks: tuple[BoundCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> dict:
        return {"form": self.form.value, "checks": [c.to_dict() for c in self.checks]}


def _check_log_against_report(name: str, log: RunLog, report: AnalysisReport) -> NormKind:
    cfg = log.config
    if cfg.get("method") != "nsdwd":
        raise ConfigMismatchError(f"{name}: bound verification applies to nsdwd runs only")
    if cfg.get("theta0") != "zeros":
        raise ConfigMismatchError(f"{name}: bounds assume theta0 = 0")
    if cfg.get("objective") != report.objective or cfg.get("d") != report.d:
        raise ConfigMismatchError(f"{name}: run objective does not match the analysis report")
    kind = NormKind(cfg["geometry"])
    lam = float(cfg["lambda"])
    optimal = 1.0 / report.min_norm(kind)
    if not math.isclose(lam, optimal, rel_tol=1e-9):
        raise ConfigMismatchError(
            f"{name}: lambda {lam} does not match 1/min-norm {optimal} from the report"
        )
    return kind


def verify_bounds(
    run_logs: Mapping[str, RunLog], report: AnalysisReport, form: BoundForm
) -> BoundReport:
    """Check ``loss(theta_t) <= C / (t + offset)`` at every logged iterate.

    ``THEOREM_T2`` uses the explicit constant ``8 L min||theta*||^2`` over
    ``t + 2``; ``COROLLARY_T1`` uses the literal corollary constants (power
    law only) over ``t + 1``. A check passes when the worst ratio stays
    below ``1 + 1e-9``.
    """
    checks = []
    for name, log in run_logs.items():
        kind = _check_log_against_report(name, log, report)
        if form is BoundForm.THEOREM_T2:
            C = report.complexity_for(kind)
            denom = log.t.astype(np.float64) + 2.0
        else:
            if log.config.get("distribution_source") != DistributionSource.POWER_LAW.value:
                raise ConfigMismatchError(
                    f"{name}: corollary constants are defined for power-law data only"
                )
            C = _corollary_constant(ObjectiveKind(log.config["objective"]), kind, report)
            denom = log.t.astype(np.float64) + 1.0
        ratios = log.loss * denom / C
        worst = float(ratios.max())
        violations = np.nonzero(ratios > 1.0 + BOUND_SLACK)[0]
        checks.append(
            BoundCheck(
                name=name,
                C=C,
                worst_ratio=worst,
                passed=worst <= 1.0 + BOUND_SLACK,
                first_violation_t=int(log.t[violations[0]]) if violations.size else None,
            )
        )
    return BoundReport(form=form, checks=tuple(checks))


def load_manifest_runs(manifest_path: str | Path) -> tuple[dict, dict[str, RunLog]]:
    """Load a manifest and the run logs of its completed bound-carrying runs."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    logs: dict[str, RunLog] = {}
    for entry in manifest["runs"]:
        if entry.get("diverged") or entry.get("method") != "nsdwd":
            continue
        config = json.loads((base / entry["config_sidecar"]).read_text())
        logs[entry["name"]] = RunLog.from_csv(base / entry["csv"], config=config)
    return manifest, logs


def verify_manifest(manifest_path: str | Path, form: BoundForm = BoundForm.THEOREM_T2) -> BoundReport:
    manifest, logs = load_manifest_runs(manifest_path)
    report = AnalysisReport.from_dict(manifest["analysis"])
    return verify_bounds(logs, report, form)
