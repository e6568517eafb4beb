"""Command-line entry point: ``culturesel simulate|fit|report|recover|check``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

from .bayes import BiasClass, FitRow, aggregate_report, bayes_factors, classify
from .config import ConfigError, RunConfig, load_config
from .csvio import SchemaError, fmt, read_fits, read_log, read_quality, write_fits, write_log, write_quality, write_report
from .fit import ParameterGrid, extract_data_structures, fit_all
from .model import ModelError, ProductionRecord, QualityTable
from .oracles import run_checks
from .sim import simulate

log = logging.getLogger("culturesel")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "threshold", None) is not None:
        cfg.threshold = args.threshold
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    return cfg.resolved()


def fit_rows(
    records: list[ProductionRecord],
    quality: QualityTable,
    grid: ParameterGrid,
    threshold: float,
    workers: int = 1,
    shuffle_seed: int | None = None,
) -> list[FitRow]:
    structures = extract_data_structures(records)
    results = fit_all(structures, grid, quality, workers=workers, shuffle_seed=shuffle_seed)
    rows = []
    for ds, res in zip(structures, results):
        bfs = bayes_factors(res.subfamily_maxima)
        rows.append(FitRow(ds.society, ds.concept, res.best[0], res.best[1], bfs, classify(bfs, threshold)))
    return rows


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sim_cfg = cfg.sim_config()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    records, quality, _ = simulate(sim_cfg)
    write_log(out / "log.csv", records)
    write_quality(out / "quality.csv", quality)
    (out / "truth.txt").write_text(cfg.to_text())
    log.info("wrote %d records to %s", len(records), out / "log.csv")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config(args)
    grid = cfg.grid()
    records = read_log(args.log)
    quality = read_quality(args.quality) if args.quality else QualityTable()
    if any(b > 0.0 for b in grid.content_values):
        missing = sorted({r.variant for r in records} - set(quality))
        if missing:
            print("variants missing from quality file: " + ", ".join(missing), file=sys.stderr)
            return EXIT_RUNTIME
    rows = fit_rows(records, quality, grid, cfg.threshold, workers=args.workers)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_fits(out / "fits.csv", rows)
    log.info("wrote %d fits to %s", len(rows), out / "fits.csv")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args)
    rows = read_fits(args.fits, cfg.innovation)
    if not rows:
        print(f"{args.fits}: no fits to report", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report(out, aggregate_report(rows, cfg.grid()))
    return EXIT_OK


RECOVERY_HEADER = [
    "replicate",
    "seed",
    "n_structures",
    "memory_within_step",
    "conformity_within_step",
    "content_within_step",
    "conformity_negative",
    "conformity_positive",
    "content_positive",
    "biased_rate",
] + [f"rate_{cls.value}" for cls in BiasClass]


def recovery_stats(rows: list[FitRow], cfg: RunConfig, grid: ParameterGrid) -> dict[str, float]:
    n = len(rows)
    sizes = list(grid.memory_sizes)
    true_m = min(range(len(sizes)), key=lambda i: (abs(sizes[i] - cfg.memory_size), i))
    a_step = max((b - a for a, b in zip(grid.conformity_values, grid.conformity_values[1:])), default=0.0)
    b_step = max((b - a for a, b in zip(grid.content_values, grid.content_values[1:])), default=0.0)
    classes = Counter(r.bias_class for r in rows)
    stats = {
        "n_structures": n,
        "memory_within_step": sum(abs(sizes.index(r.best.memory_size) - true_m) <= 1 for r in rows) / n,
        "conformity_within_step": sum(abs(r.best.conformity - cfg.conformity) <= a_step + 1e-9 for r in rows) / n,
        "content_within_step": sum(abs(r.best.content - cfg.content) <= b_step + 1e-9 for r in rows) / n,
        "conformity_negative": sum(r.best.conformity < 0 for r in rows) / n,
        "conformity_positive": sum(r.best.conformity > 0 for r in rows) / n,
        "content_positive": sum(r.best.content > 0 for r in rows) / n,
        "biased_rate": 1.0 - classes.get(BiasClass.DRIFT, 0) / n,
    }
    for cls in BiasClass:
        stats[f"rate_{cls.value}"] = classes.get(cls, 0) / n
    return stats


def cmd_recover(args) -> int:
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    cfg = _config(args)
    grid = cfg.grid()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    per_rep = []
    for rep in range(args.replicates):
        seed = cfg.seed + rep
        records, quality, _ = simulate(replace(cfg.sim_config(), seed=seed))
        rows = fit_rows(records, quality, grid, cfg.threshold, workers=args.workers)
        per_rep.append({"replicate": rep + 1, "seed": seed, **recovery_stats(rows, cfg, grid)})

    with open(out / "recovery.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECOVERY_HEADER)
        for stats in per_rep:
            writer.writerow([stats[k] if isinstance(stats[k], int) else fmt(stats[k]) for k in RECOVERY_HEADER])

    lines = [f"replicates = {args.replicates}"]
    for key in RECOVERY_HEADER[3:]:
        mean = sum(s[key] for s in per_rep) / len(per_rep)
        lines.append(f"mean_{key} = {fmt(mean)}")
    text = "\n".join(lines) + "\n"
    (out / "recovery.txt").write_text(cfg.to_text() + "\n" + text)
    print(text, end="")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    try:
        problems = cfg.grid_problems()
    except ConfigError as exc:
        problems = [str(exc)]
    ok = True
    for res in run_checks(problems):
        status = "PASS" if res.passed else "FAIL"
        detail = f"  ({res.detail})" if res.detail else ""
        print(f"{status} {res.name}: max deviation {res.deviation:.3g} (tolerance {res.tolerance:g}){detail}")
        ok &= res.passed
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="culturesel", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic production log")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="grid-fit every data-structure of a log")
    p.add_argument("--log", required=True)
    p.add_argument("--quality")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--threshold", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="summarize fits.csv into histogram and class tables")
    p.add_argument("--fits", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("recover", help="simulate, fit and score parameter recovery")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("check", help="run the built-in oracle checks")
    p.add_argument("--config")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
