"""Brute-force checks that are independent of the vectorized fitter.

Used by the ``check`` subcommand and by the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fit import DataStructure, ParameterGrid, default_grid, extract_data_structures, grid_log_likelihood
from .model import (
    ExposureEvent,
    ModelParams,
    ProductionRecord,
    Source,
    build_window,
    choice_distribution,
    event_log_likelihood,
)
from .sim import SimConfig, simulate


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def random_window(rng: np.random.Generator, max_events: int = 6, max_variants: int = 4) -> list[ExposureEvent]:
    n = int(rng.integers(1, max_events + 1))
    k = int(rng.integers(1, max_variants + 1))
    return [
        ExposureEvent(Source.SELF if rng.random() < 0.5 else Source.OTHER, f"v{int(rng.integers(k))}", i)
        for i in range(n)
    ]


def random_point(rng: np.random.Generator, grid: ParameterGrid) -> ModelParams:
    return ModelParams(
        int(rng.choice(grid.memory_sizes)),
        float(rng.choice(grid.conformity_values)),
        float(rng.choice(grid.content_values)),
        float(rng.choice([0.0, grid.innovation, 0.2])),
    )


def window_normalization(n_windows: int = 100, n_points: int = 20, seed: int = 0) -> float:
    """Largest deviation from 1 of the outcome-space total over random windows."""
    rng = np.random.default_rng(seed)
    grid = default_grid()
    worst = 0.0
    for _ in range(n_windows):
        window = random_window(rng)
        quality = {f"v{i}": float(rng.uniform(0.05, 1.0)) for i in range(4)}
        for _ in range(n_points):
            dist = choice_distribution(window, random_point(rng, grid), quality)
            total = sum(dist.in_window.values()) + dist.innovate_mass
            worst = max(worst, abs(total - 1.0))
    return worst


def sequence_probability_total(
    roles: Sequence[tuple[str, str]],
    params: ModelParams,
    quality: Mapping[str, float],
    fresh_quality: float = 0.5,
) -> float:
    """Sum the probability of every outcome sequence for a fixed role stream.

    At each production the outcomes are the director's windowed variants plus
    one innovation branch producing a brand-new token; windows are replayed
    along each branch. An empty window forces an innovation.
    """
    quality = dict(quality)

    def walk(step: int, memory: dict[str, tuple], fresh: int) -> float:
        if step == len(roles):
            return 1.0
        director, matcher = roles[step]
        window = memory.get(director, ())

        def cont(variant: str, new_fresh: int) -> float:
            mem = dict(memory)
            mem[director] = (window + (ExposureEvent(Source.SELF, variant, step),))[-params.memory_size :]
            other = memory.get(matcher, ())
            mem[matcher] = (other + (ExposureEvent(Source.OTHER, variant, step),))[-params.memory_size :]
            return walk(step + 1, mem, new_fresh)

        token = f"fresh{fresh}"
        quality.setdefault(token, fresh_quality)
        if not window:
            return cont(token, fresh + 1)
        dist = choice_distribution(list(window), params, quality)
        total = sum(p * cont(v, fresh) for v, p in dist.in_window.items() if p > 0.0)
        if dist.innovate_mass > 0.0:
            total += dist.innovate_mass * cont(token, fresh + 1)
        return total

    return walk(0, {}, 0)


def enumeration_normalization(n_streams: int = 6, seed: int = 1) -> float:
    rng = np.random.default_rng(seed)
    grid = ParameterGrid((2, 3), (-1.0, -0.4, 0.0, 0.6, 1.0), (0.0, 0.5, 1.0), 0.05)
    worst = 0.0
    for _ in range(n_streams):
        people = ["a", "b", "c"]
        roles = []
        for _ in range(int(rng.integers(4, 9))):
            d, m = rng.choice(3, size=2, replace=False)
            roles.append((people[d], people[m]))
        for point in grid:
            if rng.random() > 0.25:
                continue
            total = sequence_probability_total(roles, grid.params(point), {})
            worst = max(worst, abs(total - 1.0))
    return worst


def scalar_log_likelihood(ds: DataStructure, params: ModelParams, quality: Mapping[str, float]) -> float:
    """Reference likelihood built directly from ``build_window``."""
    total = 0.0
    records = list(ds.records)
    for rec in records:
        window = build_window(records, rec.director, rec.concept, rec.order, params.memory_size)
        if window:
            total += event_log_likelihood(rec, window, params, quality)
    return total


def _tiny_log(seed: int = 3) -> tuple[list[ProductionRecord], dict]:
    cfg = SimConfig(
        true_params=ModelParams(2, -0.4, 0.5, 0.05),
        n_societies=1,
        n_participants=4,
        n_concepts=2,
        games_per_pair=2,
        seed=seed,
    )
    log, quality, _ = simulate(cfg)
    return log, quality


def route_agreement(seed: int = 3) -> float:
    """Largest gap between the vectorized surface and the scalar reference."""
    log, quality = _tiny_log(seed)
    grid = ParameterGrid((1, 2, 4), (-1.0, -0.5, 0.0, 0.5, 1.0), (0.0, 0.3, 1.0), 0.05)
    worst = 0.0
    for ds in extract_data_structures(log):
        fit = grid_log_likelihood(ds, grid, quality)
        for point, value in fit.table.items():
            ref = scalar_log_likelihood(ds, grid.params(point), quality)
            if math.isinf(ref) or math.isinf(value):
                gap = 0.0 if ref == value else math.inf
            else:
                gap = abs(ref - value)
            worst = max(worst, gap)
    return worst


def subset_dominance(seed: int = 3) -> float:
    """Largest amount by which any subfamily maximum beats the overall maximum."""
    log, quality = _tiny_log(seed)
    worst = 0.0
    for ds in extract_data_structures(log):
        fit = grid_log_likelihood(ds, default_grid(), quality)
        top = fit.subfamily_maxima["all"]
        for value in fit.subfamily_maxima.values():
            worst = max(worst, value - top)
    return worst


def run_checks(grid_problems: Sequence[str] = ()) -> list[CheckResult]:
    results = [
        CheckResult("window_normalization", window_normalization(), 1e-9),
        CheckResult("sequence_enumeration", enumeration_normalization(), 1e-9),
        CheckResult("vectorized_vs_scalar", route_agreement(), 1e-9),
        CheckResult("subset_dominance", subset_dominance(), 0.0),
        CheckResult("default_grid_size", float(abs(len(default_grid()) - 484)), 0.0),
    ]
    results.append(
        CheckResult("grid_invariants", float(len(grid_problems)), 0.0, "; ".join(grid_problems))
    )
    return results
