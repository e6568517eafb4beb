"""Variant-choice model: memory windows, the biased choice distribution and
per-event log-likelihoods.

A participant's memory for a concept is the last ``M`` exposures to it, each
either something they drew themselves (``SELF``) or something they saw a
partner draw (``OTHER``). The next production is drawn from a mixture of a
source-weighted frequency distribution over the windowed variants (conformity
axis) and a quality-proportional distribution over the same candidates
(content axis). A fixed mass ``innovation`` is reserved for variants outside
the window.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

VariantId = str


class ModelError(ValueError):
    """Base class for model evaluation failures."""


class UndefinedDistributionError(ModelError):
    pass


class UnknownQualityError(ModelError):
    def __init__(self, missing: Iterable[VariantId]):
        self.missing = sorted(set(missing))
        super().__init__("unknown quality for variant(s): " + ", ".join(self.missing))


class ZeroProbabilityError(ModelError):
    pass


class Source(enum.Enum):
    SELF = "self"
    OTHER = "other"


@dataclass(frozen=True)
class ProductionRecord:
    """One sign production: ``director`` drew ``variant`` for ``matcher``."""

    society: str
    round: int
    game: int
    order: int
    concept: str
    director: str
    matcher: str
    variant: VariantId

    def __post_init__(self):
        if self.director == self.matcher:
            raise ValueError(f"director and matcher are both {self.director!r}")
        if not self.variant:
            raise ValueError("variant token must be non-empty")
        if self.round < 1 or self.game < 1:
            raise ValueError("round and game are 1-based")


@dataclass(frozen=True)
class ExposureEvent:
    source: Source
    variant: VariantId
    order: int = 0


@dataclass(frozen=True)
class ModelParams:
    memory_size: int
    conformity: float
    content: float
    innovation: float = 0.01

    def __post_init__(self):
        if isinstance(self.memory_size, bool) or int(self.memory_size) != self.memory_size or self.memory_size < 1:
            raise ValueError(f"memory_size must be an integer >= 1, got {self.memory_size!r}")
        if not -1.0 <= self.conformity <= 1.0:
            raise ValueError(f"conformity must lie in [-1, 1], got {self.conformity!r}")
        if not 0.0 <= self.content <= 1.0:
            raise ValueError(f"content must lie in [0, 1], got {self.content!r}")
        if not 0.0 <= self.innovation < 1.0:
            raise ValueError(f"innovation must lie in [0, 1), got {self.innovation!r}")


class QualityTable(dict):
    """Mapping from variant token to intrinsic value in (0, 1]."""

    def __init__(self, *args, **kwargs):
        super().__init__()
        for key, value in dict(*args, **kwargs).items():
            self[key] = value

    def __setitem__(self, key: VariantId, value: float) -> None:
        value = float(value)
        if not 0.0 < value <= 1.0:
            raise ValueError(f"quality of {key!r} must lie in (0, 1], got {value!r}")
        super().__setitem__(key, value)

    def update(self, *args, **kwargs) -> None:
        for key, value in dict(*args, **kwargs).items():
            self[key] = value


@dataclass(frozen=True)
class ChoiceDistribution:
    in_window: dict[VariantId, float]
    innovate_mass: float

    def total(self) -> float:
        return math.fsum(self.in_window.values()) + self.innovate_mass


def build_window(
    log: Sequence[ProductionRecord],
    observer: str,
    concept: str,
    before_order: int,
    M: int,
) -> list[ExposureEvent]:
    """Return the last ``M`` exposures of ``observer`` to ``concept`` strictly
    before ``before_order``, oldest first. ``log`` must be sorted by order."""
    if M < 1:
        raise ValueError("M must be >= 1")
    window: list[ExposureEvent] = []
    for rec in log:
        if rec.order >= before_order:
            break
        if rec.concept != concept:
            continue
        if rec.director == observer:
            window.append(ExposureEvent(Source.SELF, rec.variant, rec.order))
        elif rec.matcher == observer:
            window.append(ExposureEvent(Source.OTHER, rec.variant, rec.order))
    return window[-M:]


def source_weight(source: Source, conformity: float) -> float:
    return 1.0 + conformity if source is Source.OTHER else 1.0 - conformity


def choice_distribution(
    window: Sequence[ExposureEvent],
    params: ModelParams,
    quality: Mapping[VariantId, float] | None = None,
) -> ChoiceDistribution:
    if not window:
        raise UndefinedDistributionError("undefined distribution: empty memory window")

    weights: dict[VariantId, float] = {}
    for event in window:
        weights[event.variant] = weights.get(event.variant, 0.0) + source_weight(event.source, params.conformity)
    candidates = list(weights)

    total = math.fsum(weights.values())
    if total == 0.0:
        # every weight vanished (alpha = +-1 on a single-source window)
        freq = {v: 1.0 / len(candidates) for v in candidates}
    else:
        freq = {v: weights[v] / total for v in candidates}

    beta = params.content
    if beta > 0.0:
        quality = quality or {}
        missing = [v for v in candidates if v not in quality]
        if missing:
            raise UnknownQualityError(missing)
        qsum = math.fsum(quality[v] for v in candidates)
        win = {v: (1.0 - beta) * freq[v] + beta * (quality[v] / qsum) for v in candidates}
    else:
        win = freq

    keep = 1.0 - params.innovation
    return ChoiceDistribution({v: keep * p for v, p in win.items()}, params.innovation)


def event_log_likelihood(
    record: ProductionRecord,
    window: Sequence[ExposureEvent],
    params: ModelParams,
    quality: Mapping[VariantId, float] | None = None,
) -> float:
    """Log-probability of ``record.variant`` given the director's window.

    A variant absent from the window counts as an innovation and scores
    ``log(innovation)``. Returns ``-inf`` for an in-window variant with zero
    mass (e.g. a partner's variant under a fully egocentric bias).
    """
    dist = choice_distribution(window, params, quality)
    if record.variant in dist.in_window:
        p = dist.in_window[record.variant]
        return math.log(p) if p > 0.0 else -math.inf
    if params.innovation == 0.0:
        raise ZeroProbabilityError(
            f"zero-probability event: variant {record.variant!r} is outside the window and innovation is 0"
        )
    return math.log(params.innovation)
