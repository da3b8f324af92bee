"""Command-line interface.

Subcommands: ``gen-dist``, ``ingest``, ``analyze``, ``run``, ``verify``,
``report``. Exit codes: 0 success, 1 validation or I/O error, 2 bound
verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, distributions, harness
from .errors import EmptyCorpusError
from .objective import ObjectiveKind


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsdwd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dist", help="write a synthetic power-law distribution CSV")
    p.add_argument("--d", type=int, required=True, help="vocabulary size")
    p.add_argument("--out", type=Path, default=None, help="output CSV (default stdout)")

    p = sub.add_parser("ingest", help="count tokens from a UTF-8 corpus into a distribution CSV")
    p.add_argument("--input", default="-", help="corpus file path, or - for stdin")
    p.add_argument("--max-vocab", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="output CSV (default stdout)")

    p = sub.add_parser("analyze", help="print the closed-form constants for a distribution")
    p.add_argument("--d", type=int, default=None, help="power-law vocabulary size")
    p.add_argument("--corpus", type=Path, default=None, help="corpus file instead of --d")
    p.add_argument("--max-vocab", type=int, default=None)
    p.add_argument(
        "--objective",
        choices=[k.value for k in ObjectiveKind],
        default=ObjectiveKind.SOFTMAX_UNIGRAM.value,
    )
    p.add_argument("--json", type=Path, default=None, help="also write the report as JSON")
    p.add_argument("--estimate", action="store_true", help="run the sampled smoothness estimators")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", type=Path, default=None, help="override the output directory")

    p = sub.add_parser("verify", help="check convergence bounds against a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument(
        "--form",
        choices=[f.value for f in harness.BoundForm],
        default=harness.BoundForm.THEOREM_T2.value,
    )

    p = sub.add_parser("report", help="summarize a manifest")
    p.add_argument("--manifest", type=Path, required=True)

    return parser


def _cmd_gen_dist(args) -> int:
    dist = distributions.power_law_distribution(args.d)
    if args.out is None:
        distributions.write_distribution_csv(dist, sys.stdout)
    else:
        distributions.write_distribution_csv(dist, args.out)
    return 0


def _cmd_ingest(args) -> int:
    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        data = Path(args.input).read_bytes()
    dist = distributions.ingest_corpus(data, max_vocab=args.max_vocab)
    if args.out is None:
        distributions.write_distribution_csv(dist, sys.stdout)
    else:
        distributions.write_distribution_csv(dist, args.out)
    print(f"d={dist.d} zipf_exponent={distributions.zipf_fit_exponent(dist):.4f}" if dist.d >= 2
          else f"d={dist.d}", file=sys.stderr)
    return 0


def _build_dist(args) -> distributions.TokenDistribution:
    if (args.d is None) == (args.corpus is None):
        raise ValueError("provide exactly one of --d or --corpus")
    if args.d is not None:
        return distributions.power_law_distribution(args.d)
    return distributions.ingest_corpus_path(args.corpus, max_vocab=args.max_vocab)


def _cmd_analyze(args) -> int:
    dist = _build_dist(args)
    kind = ObjectiveKind(args.objective)
    report = analysis.build_report(dist, kind)
    print(report.table())
    if args.estimate:
        l2 = analysis.estimate_l2_smoothness(dist.d, args.samples, args.seed, kind)
        linf = analysis.estimate_linf_smoothness(dist.d, args.samples, args.seed, kind)
        print(f"sampled L2 smoothness estimate    {l2}")
        print(f"sampled Linf smoothness estimate  {linf}")
    if args.json is not None:
        report.to_json(args.json)
    return 0


def _cmd_run(args) -> int:
    cfg = harness.ExperimentConfig.from_json(args.config)
    if args.seed is not None or args.out is not None:
        data = cfg.to_dict()
        if args.seed is not None:
            data["seed"] = args.seed
        if args.out is not None:
            data["out_dir"] = str(args.out)
        cfg = harness.ExperimentConfig.from_dict(data)
    manifest = harness.run_experiment(cfg)
    print(f"wrote {Path(cfg.out_dir) / 'manifest.json'}")
    for entry in manifest["runs"]:
        if entry.get("diverged"):
            print(f"  {entry['name']}: DIVERGED at t={entry['diverged_at']}")
        else:
            print(f"  {entry['name']}: final loss {entry['final_loss']:.6g}")
    return 0


def _cmd_verify(args) -> int:
    form = harness.BoundForm(args.form)
    bound_report = harness.verify_manifest(args.manifest, form)
    offset = 2 if form is harness.BoundForm.THEOREM_T2 else 1
    for check in bound_report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = (
            f"{status} {check.name}: loss(t) <= {check.C:.6g}/(t+{offset}), "
            f"worst ratio {check.worst_ratio:.6g}"
        )
        if check.first_violation_t is not None:
            line += f", first violation at t={check.first_violation_t}"
        print(line)
    return 0 if bound_report.passed else 2


def _cmd_report(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    cfg = manifest["config"]
    print(f"objective: {cfg['objective']}")
    print(f"distribution: {cfg['distribution']}")
    print(f"seed: {manifest['seed']}")
    print(f"loss at minimizer: {manifest['fstar_at_minimizer']:.3g}")
    print("analysis:")
    for key, value in manifest["analysis"].items():
        print(f"  {key}: {value}")
    print("runs:")
    for entry in manifest["runs"]:
        if entry.get("diverged"):
            print(f"  {entry['name']} ({entry['method']}): diverged at t={entry['diverged_at']}")
            continue
        line = f"  {entry['name']} ({entry['method']}): final loss {entry['final_loss']:.6g}"
        if "lambda" in entry:
            line += f", lambda={entry['lambda']:.6g} ({entry['lambda_rule']})"
        if "lr" in entry:
            line += f", lr={entry['lr']:.6g} ({entry.get('lr_rule', 'explicit')})"
        print(line)
        if entry.get("bound"):
            print(f"    bound constants: {entry['bound']}")
        if entry.get("grid"):
            print(f"    lr grid final losses: {entry['grid']}")
    return 0


_HANDLERS = {
    "gen-dist": _cmd_gen_dist,
    "ingest": _cmd_ingest,
    "analyze": _cmd_analyze,
    "run": _cmd_run,
    "verify": _cmd_verify,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ValueError, EmptyCorpusError, UnicodeDecodeError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
