"""Best-account Bayes factors, five-way bias classification and the
per-corpus summary report."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .fit import SUBFAMILIES, FitResult, ParameterGrid
from .model import ModelParams

DEFAULT_THRESHOLD = 19.0


class BiasClass(enum.Enum):
    CONTENT_ONLY = "ContentOnly"
    CONFORMITY_ONLY = "ConformityOnly"
    BOTH = "Both"
    SOME_BIAS = "SomeBias"
    DRIFT = "Drift"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BayesFactors:
    bf_conformity: float
    bf_content: float
    bf_any: float


def _ratio(log_num: float, log_den: float) -> float:
    if log_num == log_den:
        return 1.0
    diff = log_num - log_den
    if math.isnan(diff):
        raise ValueError("Bayes factor undefined: both maxima are -inf")
    try:
        return math.exp(diff)
    except OverflowError:
        return math.inf


def bayes_factors(subfamily_maxima: Mapping[str, float]) -> BayesFactors:
    """Ratio of the best likelihood with a bias to the best likelihood without it."""
    missing = [k for k in SUBFAMILIES if k not in subfamily_maxima]
    if missing:
        raise KeyError("missing subfamily maxima: " + ", ".join(missing))
    m = subfamily_maxima
    return BayesFactors(
        bf_conformity=_ratio(m["alpha_nonzero"], m["alpha0"]),
        bf_content=_ratio(m["beta_nonzero"], m["beta0"]),
        bf_any=_ratio(m["all"], m["drift"]),
    )


def classify(bfs: BayesFactors, threshold: float = DEFAULT_THRESHOLD) -> BiasClass:
    if threshold <= 1.0:
        raise ValueError("threshold must exceed 1")
    conformity = bfs.bf_conformity >= threshold
    content = bfs.bf_content >= threshold
    if conformity and content:
        return BiasClass.BOTH
    if content:
        return BiasClass.CONTENT_ONLY
    if conformity:
        return BiasClass.CONFORMITY_ONLY
    if bfs.bf_any >= threshold:
        return BiasClass.SOME_BIAS
    return BiasClass.DRIFT


@dataclass(frozen=True)
class FitRow:
    """One fitted data-structure, as stored in ``fits.csv``."""

    society: str
    concept: str
    best: ModelParams
    max_loglik: float
    bfs: BayesFactors
    bias_class: BiasClass


def lower_median(values: Sequence[float]) -> float:
    """Order statistic at 1-based index ceil(n/2)."""
    if not values:
        raise ValueError("median of an empty sequence")
    ordered = sorted(values)
    return ordered[math.ceil(len(ordered) / 2) - 1]


@dataclass
class Report:
    n_structures: int
    hist_memory: dict[int, int]
    hist_conformity: dict[float, int]
    hist_content: dict[float, int]
    class_counts: dict[BiasClass, int]
    class_percent: dict[BiasClass, float]
    median_bf_conformity: float
    median_bf_content: float
    median_bf_any: float
    percent_content_bias: float


def _histogram(values, bins) -> dict:
    counts = Counter(values)
    return {b: counts.get(b, 0) for b in sorted(set(bins) | set(counts))}


def aggregate_report(fits: Iterable, grid: ParameterGrid | None = None) -> Report:
    """Summarize fitted data-structures.

    ``fits`` holds :class:`FitRow` objects or ``(FitResult, BayesFactors,
    BiasClass)`` triples. Histogram bins cover every value of ``grid`` (when
    given) plus any observed value, so empty bins are reported too.
    """
    rows: list[tuple[ModelParams, BayesFactors, BiasClass]] = []
    for item in fits:
        if isinstance(item, FitRow):
            rows.append((item.best, item.bfs, item.bias_class))
        else:
            result, bfs, cls = item
            best = result.best[0] if isinstance(result, FitResult) else result
            rows.append((best, bfs, cls))
    if not rows:
        raise ValueError("cannot aggregate an empty list of fits")

    n = len(rows)
    counts = Counter(cls for _, _, cls in rows)
    class_counts = {cls: counts.get(cls, 0) for cls in BiasClass}
    return Report(
        n_structures=n,
        hist_memory=_histogram([p.memory_size for p, _, _ in rows], grid.memory_sizes if grid else ()),
        hist_conformity=_histogram([p.conformity for p, _, _ in rows], grid.conformity_values if grid else ()),
        hist_content=_histogram([p.content for p, _, _ in rows], grid.content_values if grid else ()),
        class_counts=class_counts,
        class_percent={cls: 100.0 * c / n for cls, c in class_counts.items()},
        median_bf_conformity=lower_median([b.bf_conformity for _, b, _ in rows]),
        median_bf_content=lower_median([b.bf_content for _, b, _ in rows]),
        median_bf_any=lower_median([b.bf_any for _, b, _ in rows]),
        percent_content_bias=100.0 * sum(p.content > 0.0 for p, _, _ in rows) / n,
    )
