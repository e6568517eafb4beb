"""Simulate micro-society sign production and fit conformity/content-biased
variant-choice models by grid maximum likelihood."""

from .bayes import BayesFactors, BiasClass, FitRow, Report, aggregate_report, bayes_factors, classify
from .fit import (
    DataStructure,
    FitResult,
    ParameterGrid,
    best_fit,
    default_grid,
    extract_data_structures,
    fit_all,
    grid_log_likelihood,
)
from .model import (
    ChoiceDistribution,
    ExposureEvent,
    ModelParams,
    ProductionRecord,
    QualityTable,
    Source,
    build_window,
    choice_distribution,
    event_log_likelihood,
)
from .sim import SimConfig, round_robin_schedule, simulate

__version__ = "0.1.0"
