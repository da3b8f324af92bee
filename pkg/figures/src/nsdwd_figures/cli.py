"""``nsdwd-plot``: render an experiment manifest's loss curves to an image."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plotting import render_loss_curves, spec_from_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsdwd-plot", description=__doc__)
    parser.add_argument("--manifest", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True, help="output image (.png, .pdf, .svg)")
    parser.add_argument(
        "--label", action="append", default=None, help="curve label, repeat per run"
    )
    parser.add_argument("--no-bounds", action="store_true", help="skip the dashed bound overlays")
    parser.add_argument("--form", choices=["theorem", "corollary"], default="theorem")
    parser.add_argument("--linear", action="store_true", help="linear instead of log y-axis")
    parser.add_argument("--title", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_manifest(
            args.manifest,
            args.out,
            labels=tuple(args.label) if args.label else None,
            with_bounds=not args.no_bounds,
            bound_form=args.form,
            log_y=not args.linear,
            title=args.title,
        )
        out = render_loss_curves(spec)
    except (OSError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def entrypoint() -> None:
    sys.exit(main())
