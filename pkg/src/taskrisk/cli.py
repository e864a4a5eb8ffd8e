"""Command-line entry point.

    taskrisk <subcommand> --config <path> [--out <dir>] [--seed <int>]

Subcommands: ingest, adequacy, factors, cluster, classify, trends, run,
plot. Each stage consumes the previous stage's emitted tables, so partial
reruns work. Exit codes: 0 success, 2 validation/configuration error,
3 numeric or convergence error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, pipeline
from .adequacy import BARTLETT_P_GUIDANCE, KMO_GUIDANCE
from .config import load_config
from .errors import NumericalError, ValidationError
from .kernels import BACKEND

SUBCOMMANDS = ("ingest", "adequacy", "factors", "cluster", "classify", "trends", "run", "plot")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskrisk",
        description="Detect vulnerable occupations from task-attribute data.",
    )
    parser.add_argument("--version", action="version", version=f"taskrisk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "run" else "run the full pipeline")
        p.add_argument("--config", required=True, help="pipeline configuration (JSON)")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="override configured seeds")
        if name == "plot":
            p.add_argument(
                "--kind",
                choices=("all", "scree", "kscan"),
                default="all",
                help="which plot(s) to regenerate",
            )
    return parser


def _apply_overrides(config, args) -> None:
    if args.seed is not None:
        if args.seed < 0:
            raise ValidationError("--seed must be a non-negative integer")
        config.parallel_analysis.seed = args.seed
        config.clustering.seed = args.seed
    if args.out is not None:
        config.output_dir = args.out


def _dispatch(args) -> None:
    config = load_config(args.config)
    _apply_overrides(config, args)
    out = Path(config.output_dir)

    if args.command == "run":
        manifest = pipeline.run_pipeline(config, out)
        print(f"pipeline complete: {len(manifest.outputs)} artifacts in {out}")
        for warning in manifest.warnings:
            print(f"warning: {warning}")
        return

    out.mkdir(parents=True, exist_ok=True)
    if args.command == "ingest":
        matrix, catalog, dropped = pipeline.stage_ingest(config, out)
        counts = catalog.category_counts()
        print(
            f"ingested {matrix.shape[0]} occupations x {matrix.shape[1]} attributes "
            f"(catalog: {counts}); dropped {len(dropped)}"
        )
    elif args.command == "adequacy":
        result = pipeline.stage_adequacy(config, out)
        print(
            f"bartlett chi2 = {result.bartlett_statistic:.4f} "
            f"(df {result.bartlett_df}, p = {result.bartlett_p:.3g}); "
            f"kmo = {result.kmo_overall:.4f}"
        )
        print(
            f"advisory: conventional adequacy is KMO >= {KMO_GUIDANCE} "
            f"and Bartlett p < {BARTLETT_P_GUIDANCE}"
        )
    elif args.command == "factors":
        pa, solution = pipeline.stage_factors(config, out)
        fit = solution.fit
        print(
            f"parallel analysis suggests {pa.suggested_factors} factor(s); "
            f"extracted {solution.n_factors} "
            f"(TLI {fit.tli:.4f}, RMSR {fit.rmsr:.4f}, RMSEA {fit.rmsea:.4f}, "
            f"BIC {fit.bic:.2f})"
        )
    elif args.command == "cluster":
        _, solution, best_k = pipeline.stage_cluster(config, out)
        print(
            f"selected k = {best_k} (mean silhouette {solution.mean_silhouette:.4f}, "
            f"cost_z {solution.cost_z:.4f})"
        )
    elif args.command == "classify":
        report = pipeline.stage_classify(config, out)
        print(
            f"vulnerable clusters {sorted(report.vulnerable_clusters)}: "
            f"{len(report.vulnerable_occupations)} occupations"
        )
    elif args.command == "trends":
        trend = pipeline.stage_trends(config, out)
        ratio = trend.ratio_vulnerable_to_nonvulnerable
        shown = f"{ratio:.4f}" if ratio is not None else "undefined"
        print(f"vulnerable/non-vulnerable growth ratio = {shown}")
    elif args.command == "plot":
        if args.kind in ("all", "scree"):
            _, rows = pipeline.tables.read_table(out / "scree.csv")
            pipeline.emit_plot(
                [[float(c) for c in r] for r in rows], "scree", out / "scree.svg"
            )
        if args.kind in ("all", "kscan"):
            _, rows = pipeline.tables.read_table(out / "kscan.csv")
            pipeline.emit_plot(
                [[float(c) for c in r] for r in rows], "silhouette_scan", out / "kscan.svg"
            )
        print(f"plots written to {out}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
