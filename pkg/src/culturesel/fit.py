"""Grid-search maximum likelihood over (memory size, conformity, content).

The log is split into one data-structure per (society, concept). For every
memory size the data-structure is replayed once to collect, for each scored
production, the candidate variants of the director's window with their
self/other exposure counts. The likelihood surface over all (conformity,
content) pairs at that memory size is then evaluated in one vectorized pass.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .model import ModelParams, ProductionRecord, UnknownQualityError, VariantId, ZeroProbabilityError

GridPoint = tuple[int, float, float]

SUBFAMILIES = ("all", "alpha0", "alpha_nonzero", "beta0", "beta_nonzero", "drift")


@dataclass(frozen=True)
class DataStructure:
    society: str
    concept: str
    records: tuple[ProductionRecord, ...]

    def __post_init__(self):
        orders = [r.order for r in self.records]
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise ValueError("data-structure records must have strictly increasing order")
        for r in self.records:
            if r.society != self.society or r.concept != self.concept:
                raise ValueError(f"record {r.order} does not belong to ({self.society}, {self.concept})")

    def __len__(self) -> int:
        return len(self.records)


def frange(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive arithmetic range, rounded so that grid values compare exactly."""
    n = round((hi - lo) / step)
    if n < 0 or not math.isclose(lo + n * step, hi, abs_tol=1e-9):
        raise ValueError(f"step {step} does not divide [{lo}, {hi}]")
    return [round(lo + i * step, 10) + 0.0 for i in range(n + 1)]


def grid_violations(memory_sizes, conformity_values, content_values, innovation) -> list[str]:
    problems = []
    for name, values in (
        ("memory_sizes", memory_sizes),
        ("conformity_values", conformity_values),
        ("content_values", content_values),
    ):
        if not values:
            problems.append(f"{name} is empty")
        elif any(b <= a for a, b in zip(values, values[1:])):
            problems.append(f"{name} must be strictly increasing without duplicates")
    if any(int(m) != m or m < 1 for m in memory_sizes):
        problems.append("memory_sizes must be integers >= 1")
    if any(not -1.0 <= a <= 1.0 for a in conformity_values):
        problems.append("conformity_values must lie in [-1, 1]")
    if any(not 0.0 <= b <= 1.0 for b in content_values):
        problems.append("content_values must lie in [0, 1]")
    if 0.0 not in conformity_values:
        problems.append("conformity_values must contain 0.0 (drift point)")
    if 0.0 not in content_values:
        problems.append("content_values must contain 0.0 (drift point)")
    if not 0.0 <= innovation < 1.0:
        problems.append("innovation must lie in [0, 1)")
    return problems


@dataclass(frozen=True)
class ParameterGrid:
    memory_sizes: tuple[int, ...]
    conformity_values: tuple[float, ...]
    content_values: tuple[float, ...]
    innovation: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "memory_sizes", tuple(int(m) for m in self.memory_sizes))
        object.__setattr__(self, "conformity_values", tuple(float(a) + 0.0 for a in self.conformity_values))
        object.__setattr__(self, "content_values", tuple(float(b) + 0.0 for b in self.content_values))
        problems = grid_violations(self.memory_sizes, self.conformity_values, self.content_values, self.innovation)
        if problems:
            raise ValueError("invalid parameter grid: " + "; ".join(problems))

    def __len__(self) -> int:
        return len(self.memory_sizes) * len(self.conformity_values) * len(self.content_values)

    def __iter__(self) -> Iterator[GridPoint]:
        for m in self.memory_sizes:
            for a in self.conformity_values:
                for b in self.content_values:
                    yield (m, a, b)

    def params(self, point: GridPoint) -> ModelParams:
        return ModelParams(point[0], point[1], point[2], self.innovation)


def default_grid() -> ParameterGrid:
    """4 memory sizes x 11 conformity values x 11 content values = 484 points."""
    return ParameterGrid(
        memory_sizes=(2, 4, 8, 16),
        conformity_values=tuple(frange(-1.0, 1.0, 0.2)),
        content_values=tuple(frange(0.0, 1.0, 0.1)),
        innovation=0.01,
    )


@dataclass
class FitResult:
    best: tuple[ModelParams, float]
    table: dict[GridPoint, float]
    subfamily_maxima: dict[str, float]
    n_scored_events: dict[int, int] = field(default_factory=dict)


def extract_data_structures(log: Iterable[ProductionRecord]) -> list[DataStructure]:
    key = lambda r: (r.society, r.concept)  # noqa: E731
    ordered = sorted(log, key=lambda r: (r.society, r.concept, r.order))
    return [DataStructure(s, c, tuple(group)) for (s, c), group in groupby(ordered, key=key)]


@dataclass
class _Events:
    """Per-memory-size summary of the scored productions of a data-structure."""

    self_counts: np.ndarray  # (E, K)
    other_counts: np.ndarray  # (E, K)
    quality: np.ndarray  # (E, K), 0 in padding
    n_candidates: np.ndarray  # (E,)
    chosen: np.ndarray  # (E,) candidate index of the produced variant
    n_innovations: int
    candidates: set[VariantId]

    @property
    def n_scored(self) -> int:
        return len(self.chosen) + self.n_innovations


def _collect_events(ds: DataStructure, M: int, quality: Mapping[VariantId, float], need_quality: bool) -> _Events:
    memory: dict[str, deque] = {}
    rows = []
    n_innov = 0
    seen: set[VariantId] = set()
    for rec in ds.records:
        window = memory.setdefault(rec.director, deque(maxlen=M))
        if window:
            cands: dict[VariantId, list[int]] = {}
            for is_self, v in window:
                counts = cands.setdefault(v, [0, 0])
                counts[0 if is_self else 1] += 1
            seen.update(cands)
            if rec.variant in cands:
                rows.append((cands, list(cands).index(rec.variant)))
            else:
                n_innov += 1
        window.append((True, rec.variant))
        memory.setdefault(rec.matcher, deque(maxlen=M)).append((False, rec.variant))

    if need_quality:
        missing = [v for v in seen if v not in quality]
        if missing:
            raise UnknownQualityError(missing)

    E = len(rows)
    K = max((len(c) for c, _ in rows), default=1)
    self_c = np.zeros((E, K))
    other_c = np.zeros((E, K))
    q = np.zeros((E, K))
    ncand = np.zeros(E)
    chosen = np.zeros(E, dtype=int)
    for e, (cands, idx) in enumerate(rows):
        for k, (v, (n_self, n_other)) in enumerate(cands.items()):
            self_c[e, k] = n_self
            other_c[e, k] = n_other
            q[e, k] = quality[v] if need_quality else 1.0
        ncand[e] = len(cands)
        chosen[e] = idx
    return _Events(self_c, other_c, q, ncand, chosen, n_innov, seen)


def _surface(ev: _Events, alphas: np.ndarray, betas: np.ndarray, innovation: float) -> np.ndarray:
    """Log-likelihood for every (alpha, beta) pair at one memory size; shape (A, B)."""
    if ev.n_innovations and innovation == 0.0:
        raise ZeroProbabilityError("zero-probability event: innovation observed with innovation mass 0")
    base = ev.n_innovations * math.log(innovation) if ev.n_innovations else 0.0
    out = np.full((len(alphas), len(betas)), base)
    E = len(ev.chosen)
    if E == 0:
        return out
    rows = np.arange(E)
    q_chosen = ev.quality[rows, ev.chosen]
    p_quality = q_chosen / ev.quality.sum(axis=1)
    keep = 1.0 - innovation
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, a in enumerate(alphas):
            weights = (1.0 + a) * ev.other_counts + (1.0 - a) * ev.self_counts
            total = weights.sum(axis=1)
            p_freq = np.where(total > 0.0, weights[rows, ev.chosen] / total, 1.0 / ev.n_candidates)
            p_win = (1.0 - betas)[:, None] * p_freq[None, :] + betas[:, None] * p_quality[None, :]
            out[i] += np.log(keep * p_win).sum(axis=1)
    return out


def _subfamily_maxima(table: Mapping[GridPoint, float]) -> dict[str, float]:
    tests = {
        "all": lambda m, a, b: True,
        "alpha0": lambda m, a, b: a == 0.0,
        "alpha_nonzero": lambda m, a, b: a != 0.0,
        "beta0": lambda m, a, b: b == 0.0,
        "beta_nonzero": lambda m, a, b: b != 0.0,
        "drift": lambda m, a, b: a == 0.0 and b == 0.0,
    }
    maxima = {}
    for name, test in tests.items():
        values = [ll for point, ll in table.items() if test(*point)]
        maxima[name] = max(values) if values else -math.inf
    return maxima


def _tie_key(item: tuple[GridPoint, float]):
    (m, a, b), ll = item
    return (-ll, abs(a), b, m, m, a, b)


def best_fit(table: Mapping[GridPoint, float], innovation: float = 0.01) -> tuple[ModelParams, float]:
    """Maximum-likelihood grid point.

    Ties go to the smaller ``|alpha|``, then smaller ``beta``, then smaller
    memory size, then grid order; the winner does not depend on the order of
    ``table``.
    """
    if not table:
        raise ValueError("cannot select a best fit from an empty table")
    (m, a, b), ll = min(table.items(), key=_tie_key)
    return ModelParams(m, a, b, innovation), ll


def grid_log_likelihood(
    ds: DataStructure,
    grid: ParameterGrid,
    quality: Mapping[VariantId, float] | None = None,
    shuffle_seed: int | None = None,
) -> FitResult:
    """Evaluate the log-likelihood of ``ds`` at every grid point.

    Productions made with an empty memory window are skipped. ``shuffle_seed``
    permutes the evaluation order of memory sizes and parameter values, which
    must not change the result.
    """
    quality = quality or {}
    need_quality = any(b > 0.0 for b in grid.content_values)
    memory_sizes = list(grid.memory_sizes)
    alphas = np.array(grid.conformity_values)
    betas = np.array(grid.content_values)
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        rng.shuffle(memory_sizes)
        alphas = rng.permutation(alphas)
        betas = rng.permutation(betas)

    entries: list[tuple[GridPoint, float]] = []
    n_scored: dict[int, int] = {}
    for M in memory_sizes:
        ev = _collect_events(ds, M, quality, need_quality)
        n_scored[M] = ev.n_scored
        surface = _surface(ev, alphas, betas, grid.innovation)
        for i, a in enumerate(alphas):
            for j, b in enumerate(betas):
                entries.append(((M, float(a), float(b)), float(surface[i, j])))

    table = dict(entries)
    return FitResult(
        best=best_fit(table, grid.innovation),
        table=table,
        subfamily_maxima=_subfamily_maxima(table),
        n_scored_events=dict(sorted(n_scored.items())),
    )


def _fit_one(args) -> FitResult:
    return grid_log_likelihood(*args)


def fit_all(
    structures: Sequence[DataStructure],
    grid: ParameterGrid,
    quality: Mapping[VariantId, float] | None = None,
    workers: int = 1,
    shuffle_seed: int | None = None,
) -> list[FitResult]:
    """Fit every data-structure; results keep the input order."""
    jobs = [(ds, grid, quality, None if shuffle_seed is None else shuffle_seed + i) for i, ds in enumerate(structures)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_fit_one, jobs))
    return [_fit_one(job) for job in jobs]
