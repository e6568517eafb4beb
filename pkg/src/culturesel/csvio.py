"""CSV readers and writers for logs, quality tables, fits and reports."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

from .bayes import BayesFactors, BiasClass, FitRow, Report
from .model import ModelParams, ProductionRecord, QualityTable

LOG_HEADER = ["society", "round", "game", "order", "concept", "director", "matcher", "variant"]
QUALITY_HEADER = ["variant", "quality"]
FITS_HEADER = [
    "society",
    "concept",
    "memory_size",
    "conformity",
    "content",
    "max_loglik",
    "bf_conformity",
    "bf_content",
    "bf_any",
    "class",
]


class SchemaError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def fmt(x: float) -> str:
    return f"{x:.6g}"


def _write(path: Path, header: list[str], rows: Iterable[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _read(path: Path, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first != header:
            raise SchemaError(path, 1, f"expected header {','.join(header)}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(path, reader.line_num, f"expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, row


def write_log(path, log: Iterable[ProductionRecord]) -> None:
    _write(
        path,
        LOG_HEADER,
        ([r.society, r.round, r.game, r.order, r.concept, r.director, r.matcher, r.variant] for r in log),
    )


def read_log(path) -> list[ProductionRecord]:
    records = []
    seen: set[int] = set()
    for line, row in _read(path, LOG_HEADER):
        try:
            rec = ProductionRecord(row[0], int(row[1]), int(row[2]), int(row[3]), row[4], row[5], row[6], row[7])
        except ValueError as exc:
            raise SchemaError(path, line, str(exc)) from None
        if rec.order in seen:
            raise SchemaError(path, line, f"duplicate order {rec.order}")
        seen.add(rec.order)
        records.append(rec)
    records.sort(key=lambda r: r.order)
    return records


def write_quality(path, quality: QualityTable) -> None:
    _write(path, QUALITY_HEADER, ([v, repr(q)] for v, q in quality.items()))


def read_quality(path) -> QualityTable:
    table = QualityTable()
    for line, (variant, raw) in _read(path, QUALITY_HEADER):
        try:
            table[variant] = float(raw)
        except ValueError as exc:
            raise SchemaError(path, line, str(exc)) from None
    return table


def write_fits(path, rows: Iterable[FitRow]) -> None:
    _write(
        path,
        FITS_HEADER,
        (
            [
                r.society,
                r.concept,
                r.best.memory_size,
                fmt(r.best.conformity),
                fmt(r.best.content),
                fmt(r.max_loglik),
                fmt(r.bfs.bf_conformity),
                fmt(r.bfs.bf_content),
                fmt(r.bfs.bf_any),
                r.bias_class.value,
            ]
            for r in rows
        ),
    )


def read_fits(path, innovation: float = 0.01) -> list[FitRow]:
    rows = []
    for line, row in _read(path, FITS_HEADER):
        try:
            rows.append(
                FitRow(
                    society=row[0],
                    concept=row[1],
                    best=ModelParams(int(row[2]), float(row[3]), float(row[4]), innovation),
                    max_loglik=float(row[5]),
                    bfs=BayesFactors(float(row[6]), float(row[7]), float(row[8])),
                    bias_class=BiasClass(row[9]),
                )
            )
        except ValueError as exc:
            raise SchemaError(path, line, str(exc)) from None
    return rows


def write_report(out_dir, report: Report) -> None:
    out = Path(out_dir)
    _write(out / "hist_memory.csv", ["memory_size", "count"], ([k, v] for k, v in report.hist_memory.items()))
    _write(out / "hist_conformity.csv", ["conformity", "count"], ([fmt(k), v] for k, v in report.hist_conformity.items()))
    _write(out / "hist_content.csv", ["content", "count"], ([fmt(k), v] for k, v in report.hist_content.items()))
    _write(
        out / "classes.csv",
        ["class", "count", "percent"],
        ([cls.value, report.class_counts[cls], fmt(report.class_percent[cls])] for cls in report.class_counts),
    )
    lines = [
        f"n_structures = {report.n_structures}",
        f"median_bf_conformity = {fmt(report.median_bf_conformity)}",
        f"median_bf_content = {fmt(report.median_bf_content)}",
        f"median_bf_any = {fmt(report.median_bf_any)}",
        f"percent_content_bias = {fmt(report.percent_content_bias)}",
    ]
    lines += [f"percent_{cls.value} = {fmt(report.class_percent[cls])}" for cls in report.class_counts]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
