"""Search spaces, search strategies and the model-selection driver."""
from .optimize import OptimizationError, OptimizationResult, build_model, optimize, run_trial
from .search import (STRATEGIES, Annealer, CategoricalEstimator, ParzenEstimator, RandomSearch,
                     TPESearch, Trial, anneal, best_trial, make_searcher, tpe_suggest)
from .space import (DOMAIN_KINDS, Choice, DomainError, Fix, LogUniform, Normal, QUniform, Uniform,
                    grid_expand, sample)

__all__ = [
    "Fix", "Choice", "Uniform", "LogUniform", "QUniform", "Normal", "DOMAIN_KINDS",
    "DomainError", "grid_expand", "sample", "STRATEGIES", "Trial", "best_trial", "Annealer",
    "anneal", "ParzenEstimator", "CategoricalEstimator", "tpe_suggest", "TPESearch",
    "RandomSearch", "make_searcher", "optimize", "OptimizationResult", "OptimizationError",
    "build_model", "run_trial",
]
