"""Synthetic micro-society interaction logs.

Each society plays a circle-method round robin. Within a round every pair
plays ``games_per_pair`` games, swapping director and matcher roles after each
game, and in every game the director draws one sign per concept.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ExposureEvent,
    ModelParams,
    ProductionRecord,
    QualityTable,
    Source,
    choice_distribution,
)

Schedule = list[list[tuple[int, int]]]


@dataclass(frozen=True)
class SimConfig:
    true_params: ModelParams = field(default_factory=lambda: ModelParams(4, 0.0, 0.0, 0.01))
    n_societies: int = 4
    n_participants: int = 8
    n_concepts: int = 16
    games_per_pair: int = 6
    innovation_rate: float | None = None  # None: same as true_params.innovation
    quality_range: tuple[float, float] = (0.05, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_societies < 1:
            raise ValueError("n_societies must be >= 1")
        if self.n_participants < 2 or self.n_participants % 2:
            raise ValueError("n_participants must be even")
        if self.n_concepts < 1:
            raise ValueError("n_concepts must be >= 1")
        if self.games_per_pair < 1:
            raise ValueError("games_per_pair must be >= 1")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("innovation_rate must lie in [0, 1)")
        q_min, q_max = self.quality_range
        if not 0.0 < q_min < q_max <= 1.0:
            raise ValueError("quality_range must satisfy 0 < q_min < q_max <= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def epsilon(self) -> float:
        if self.innovation_rate is None:
            return self.true_params.innovation
        return self.innovation_rate

    @property
    def records_per_society(self) -> int:
        n = self.n_participants
        return (n - 1) * (n // 2) * self.games_per_pair * self.n_concepts

    @property
    def n_records(self) -> int:
        return self.n_societies * self.records_per_society


def round_robin_schedule(n: int) -> Schedule:
    """Circle-method round robin over participants ``0..n-1``.

    Participant 0 stays fixed while the rest rotate one seat per round. Each
    pair is reported as ``(low, high)`` and pairs within a round are sorted.
    """
    if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
        raise ValueError(f"round robin needs an even number of participants >= 2, got {n!r}")
    seats = list(range(n))
    rounds: Schedule = []
    for _ in range(n - 1):
        pairs = [tuple(sorted((seats[i], seats[n - 1 - i]))) for i in range(n // 2)]
        rounds.append(sorted(pairs))
        seats = [seats[0], seats[-1]] + seats[1:-1]
    return rounds


def participant_id(i: int, n: int) -> str:
    return f"p{i + 1:0{len(str(n))}d}"


def concept_id(c: int, n: int) -> str:
    return f"c{c + 1:0{len(str(n))}d}"


def society_id(s: int, n: int) -> str:
    return f"s{s + 1:0{len(str(n))}d}"


def _sample(rng: np.random.Generator, probs: dict[str, float]) -> str:
    total = sum(probs.values())
    u = rng.random() * total
    acc = 0.0
    last = None
    for v, p in probs.items():
        if p <= 0.0:
            continue
        acc += p
        last = v
        if u < acc:
            return v
    return last


def _simulate_society(config: SimConfig, s: int) -> tuple[list[ProductionRecord], dict[str, float]]:
    params = config.true_params
    n = config.n_participants
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, s]))
    q_min, q_max = config.quality_range
    sid = society_id(s, config.n_societies)
    pids = [participant_id(i, n) for i in range(n)]
    cids = [concept_id(c, config.n_concepts) for c in range(config.n_concepts)]

    memory = {(p, c): deque(maxlen=params.memory_size) for p in pids for c in cids}
    invented: dict[tuple[str, str], int] = {}
    quality: dict[str, float] = {}
    records: list[ProductionRecord] = []
    order = s * config.records_per_society

    def invent(director: str, concept: str) -> str:
        k = invented.get((director, concept), 0) + 1
        invented[(director, concept)] = k
        token = f"{sid}-{director}-{concept}-{k}"
        # (q_min, q_max]
        quality[token] = float(q_max - (q_max - q_min) * rng.random())
        return token

    for r, pairs in enumerate(round_robin_schedule(n), start=1):
        for lo, hi in pairs:
            for g in range(1, config.games_per_pair + 1):
                d, m = (lo, hi) if g % 2 == 1 else (hi, lo)
                director, matcher = pids[d], pids[m]
                for concept in cids:
                    window = memory[(director, concept)]
                    if not window or rng.random() < config.epsilon:
                        variant = invent(director, concept)
                    else:
                        dist = choice_distribution(list(window), params, quality)
                        variant = _sample(rng, dist.in_window)
                    order += 1
                    records.append(ProductionRecord(sid, r, g, order, concept, director, matcher, variant))
                    window.append(ExposureEvent(Source.SELF, variant, order))
                    memory[(matcher, concept)].append(ExposureEvent(Source.OTHER, variant, order))
    return records, quality


def simulate(config: SimConfig, workers: int = 1) -> tuple[list[ProductionRecord], QualityTable, ModelParams]:
    """Generate a production log, the quality of every variant in it and the
    generating parameters. Societies draw from independent RNG streams keyed
    on ``(seed, society index)``, so ``workers`` never changes the output."""
    indices = range(config.n_societies)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda s: _simulate_society(config, s), indices))
    else:
        parts = [_simulate_society(config, s) for s in indices]
    log: list[ProductionRecord] = []
    quality = QualityTable()
    for records, q in parts:
        log.extend(records)
        quality.update(q)
    return log, quality, config.true_params
