#!/usr/bin/env python3
"""Full optimizer comparison on the synthetic power law: GD and Adam baselines
(step sizes grid-searched over {1e-3..1e2}) against both weight-decay
steepest-descent geometries. Baseline step sizes land in the manifest, so
the comparison is reproducible from the logs alone."""

import argparse
import json
import sys
from pathlib import Path

from nsdwd import ExperimentConfig, run_experiment

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    data = json.loads((REPO / "configs" / "fig1_synthetic.json").read_text())
    if args.out is not None:
        data["out_dir"] = str(args.out)
    cfg = ExperimentConfig.from_dict(data)

    manifest = run_experiment(cfg)
    print(f"outputs in {cfg.out_dir}")
    for entry in manifest["runs"]:
        line = f"  {entry['name']}: final loss {entry['final_loss']:.3e}"
        if "lr" in entry:
            line += f" (lr {entry['lr']:g}, {entry['lr_rule']})"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
