"""Loss-curve rendering for nsdwd experiment manifests and CSV run logs."""

from .plotting import (
    BoundOverlay,
    PlotSpec,
    build_figure,
    read_run_csv,
    render_loss_curves,
    spec_from_manifest,
)

__version__ = "0.1.0"
