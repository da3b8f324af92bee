"""Render loss curves from experiment CSV logs, with optional bound overlays.

This package is a pure consumer of the optimizer harness's on-disk outputs:
run-log CSVs (``t,loss,...``) and the experiment manifest JSON. It never
recomputes any constant; bound overlays use exactly the ``C`` values the
manifest records.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

RUN_CSV_PREFIX = "t,loss"


def read_run_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Iteration and loss columns of a run log; validates the shared schema."""
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines or not lines[0].startswith(RUN_CSV_PREFIX):
        raise ValueError(f"{path}: expected a run-log CSV with header '{RUN_CSV_PREFIX},...'")
    t, loss = [], []
    for line in lines[1:]:
        cells = line.split(",")
        t.append(int(cells[0]))
        loss.append(float(cells[1]))
    return np.array(t), np.array(loss)


@dataclass(frozen=True)
class BoundOverlay:
    """A dashed ``C / (t + offset)`` reference curve."""

    label: str
    C: float
    denominator_offset: int = 2


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: tuple[str, ...]
    labels: tuple[str, ...]
    out_path: str
    bounds: tuple[BoundOverlay, ...] = ()
    log_y: bool = True
    title: str | None = None

    def __post_init__(self):
        if not self.csv_paths:
            raise ValueError("need at least one input CSV")
        if len(self.labels) < len(self.csv_paths):
            raise ValueError(
                f"{len(self.csv_paths)} inputs but only {len(self.labels)} labels"
            )


def build_figure(spec: PlotSpec):
    """Assemble the figure; separated from saving so tests can inspect it."""
    curves = [read_run_csv(path) for path in spec.csv_paths]

    log_y = spec.log_y
    if log_y and any(np.any(loss <= 0.0) for _, loss in curves):
        warnings.warn("nonpositive loss values: falling back to a linear y-axis")
        log_y = False

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (t, loss), label in zip(curves, spec.labels):
        ax.plot(t, loss, label=label)
    for overlay in spec.bounds:
        t_max = max(int(t[-1]) for t, _ in curves)
        t_grid = np.arange(t_max + 1)
        ax.plot(
            t_grid,
            overlay.C / (t_grid + overlay.denominator_offset),
            linestyle="--",
            alpha=0.7,
            label=overlay.label,
        )
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iteration t")
    ax.set_ylabel("loss")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    return fig


def render_loss_curves(spec: PlotSpec) -> Path:
    """Write the figure to ``spec.out_path``; format follows the extension."""
    fig = build_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def spec_from_manifest(
    manifest_path: str | Path,
    out_path: str | Path,
    labels: tuple[str, ...] | None = None,
    with_bounds: bool = True,
    bound_form: str = "theorem",
    log_y: bool = True,
    title: str | None = None,
) -> PlotSpec:
    """Build a PlotSpec from a manifest's completed runs.

    Bound overlays come straight from the recorded constants: ``C_theorem``
    over (t+2) or ``C_corollary`` over (t+1). Runs without a recorded
    constant (baselines, corpus corollaries) simply get no overlay.
    """
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    base = manifest_path.parent

    csv_paths: list[str] = []
    run_labels: list[str] = []
    bounds: list[BoundOverlay] = []
    for entry in manifest["runs"]:
        if entry.get("diverged"):
            continue
        csv_paths.append(str(base / entry["csv"]))
        run_labels.append(entry["name"])
        bound = entry.get("bound") or {}
        if with_bounds:
            key = "C_theorem" if bound_form == "theorem" else "C_corollary"
            C = bound.get(key)
            if C is not None:
                offset = 2 if bound_form == "theorem" else 1
                bounds.append(
                    BoundOverlay(
                        label=f"{entry['name']} bound {C:.3g}/(t+{offset})",
                        C=C,
                        denominator_offset=offset,
                    )
                )
    if labels is not None:
        if len(labels) < len(csv_paths):
            raise ValueError(f"{len(csv_paths)} curves but only {len(labels)} labels")
        run_labels = list(labels[: len(csv_paths)])
    return PlotSpec(
        csv_paths=tuple(csv_paths),
        labels=tuple(run_labels),
        out_path=str(out_path),
        bounds=tuple(bounds),
        log_y=log_y,
        title=title,
    )
