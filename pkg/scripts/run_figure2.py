#!/usr/bin/env python3
"""Sign descent vs normalized GD, both with weight decay, on the power law.

Runs the shipped main-comparison config, checks the convergence bounds in
both denominator forms, and prints a compact summary. The resulting
manifest is plottable with the companion figures package:

    nsdwd-plot --manifest out/fig2_d1000/manifest.json --out fig2.png
"""

import argparse
import json
import sys
from pathlib import Path

from nsdwd import BoundForm, ExperimentConfig, run_experiment, verify_manifest

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=1000, choices=[10, 100, 1000])
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    data = json.loads((REPO / "configs" / f"fig2_d{args.d}.json").read_text())
    if args.out is not None:
        data["out_dir"] = str(args.out)
    cfg = ExperimentConfig.from_dict(data)

    manifest = run_experiment(cfg)
    print(f"outputs in {cfg.out_dir}")
    for entry in manifest["runs"]:
        print(
            f"  {entry['name']}: final loss {entry['final_loss']:.3e}, "
            f"lambda {entry['lambda']:.4f}, C {entry['bound']['C_theorem']:.2f}"
        )

    ok = True
    for form in (BoundForm.THEOREM_T2, BoundForm.COROLLARY_T1):
        report = verify_manifest(Path(cfg.out_dir) / "manifest.json", form)
        ok &= report.passed
        for check in report.checks:
            print(
                f"  [{form.value}] {check.name}: worst ratio {check.worst_ratio:.4f} "
                f"{'ok' if check.passed else 'VIOLATED'}"
            )
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
