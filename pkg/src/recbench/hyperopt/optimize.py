"""Model selection: run a search strategy over (train, validation) fold pairs."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..metrics import METRICS, MetricRequest, evaluate_model
from ..recommenders import make_model
from ..utils import derive_seed, fmean, log_stage, make_rng
from .search import Trial, best_trial, make_searcher
from .space import grid_expand, sample


class OptimizationError(RuntimeError):
    """No trial of a model succeeded."""


@dataclass
class OptimizationResult:
    best: Trial
    trials: list
    model: object = None
    tuned_on: str = "validation"
    errors: list = field(default_factory=list)


def build_model(name, params, seed):
    model = make_model(name, **params)
    if "random_state" in model.get_params():
        model.set_params(random_state=seed)
    return model


def tuning_folds(fold):
    """(train, validation) pairs for one test fold plus where they came from.

    Without a validation split the test fold itself is used.
    """
    if fold.validation_folds:
        return [(v.train, v.validation) for v in fold.validation_folds], "validation"
    return [(fold.train, fold.test)], "test"


def score_fold(model, train, valid, metric, cutoff, relevance_threshold):
    """Validation objective (maximised; error metrics are negated)."""
    report, _ = evaluate_model(model, train, valid, [MetricRequest(metric)], [cutoff],
                               top_k=cutoff, relevance_threshold=relevance_threshold)
    value = report.value(metric, cutoff)
    if value is None:
        return math.nan
    return -value if METRICS[metric].lower_is_better else float(value)


def run_trial(name, params, index, seed, folds, metric, cutoff, relevance_threshold):
    try:
        scores = []
        for train, valid in folds:
            model = build_model(name, params, seed).fit(train)
            scores.append(score_fold(model, train, valid, metric, cutoff, relevance_threshold))
        objective = fmean(scores)
        error = None if not math.isnan(objective) else f"{metric}@{cutoff} undefined"
        return Trial(dict(params), objective, scores, seed, index, error)
    except Exception as e:  # a failing configuration must not stop the search
        return Trial(dict(params), math.nan, [], seed, index, f"{type(e).__name__}: {e}")


def optimize(model_config, fold, seed=42, relevance_threshold=0.0, workers=1,
             keep_model=True) -> OptimizationResult:
    """Tune one model on the tuning folds of ``fold`` (a test fold).

    Grid runs the full product; random/annealing/tpe run exactly
    ``hyper_max_evals`` trials.  Grid and random trials are independent and
    may run on ``workers`` threads; results do not depend on the count.
    With ``keep_model`` the best configuration's fit on the first tuning
    train set is returned alongside.
    """
    name = model_config.name
    meta = model_config.meta
    space = model_config.params
    metric, cutoff = meta.validation_metric_name, meta.validation_cutoff
    folds, tuned_on = tuning_folds(fold)
    single = meta.hyper_opt_alg == "grid" and len(grid_expand(space)) == 1
    if single:
        tuned_on = "none"  # nothing to select
    if tuned_on == "test":
        log_stage("TUNE", "%s: no validation split configured; tuning on the TEST fold "
                  "(results are optimistically biased)", name, level=30)

    def seed_of(k):
        return derive_seed(seed, name, k)

    def job(args):
        k, params = args
        return run_trial(name, params, k, seed_of(k), folds, metric, cutoff, relevance_threshold)

    alg = meta.hyper_opt_alg
    if alg in ("grid", "random"):
        if alg == "grid":
            assignments = grid_expand(space)
        else:
            rng = make_rng(seed, name, "search")
            assignments = [sample(space, rng) for _ in range(meta.hyper_max_evals)]
        if workers > 1 and len(assignments) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(job, enumerate(assignments)))
        else:
            trials = [job(a) for a in enumerate(assignments)]
    else:
        searcher = make_searcher(alg, space, make_rng(seed, name, "search"))
        trials = []
        for k in range(meta.hyper_max_evals):
            params = searcher.ask()
            t = job((k, params))
            searcher.tell(params, t.objective if t.ok else -math.inf)
            trials.append(t)

    for t in trials:
        if t.ok:
            log_stage("TUNE", "%s trial %d %s: %s@%d = %.6f", name, t.index, t.params,
                      metric, cutoff, t.objective)
        else:
            log_stage("TUNE", "%s trial %d %s failed: %s", name, t.index, t.params, t.error,
                      level=30)
    best = best_trial(trials)
    if best is None:
        raise OptimizationError(f"{name}: all {len(trials)} trials failed; first error: "
                                f"{trials[0].error if trials else 'no trials'}")
    log_stage("TUNE", "%s best: trial %d %s (%s@%d = %.6f)", name, best.index, best.params,
              metric, cutoff, best.objective)
    model = None
    if keep_model:
        model = build_model(name, best.params, best.seed).fit(folds[0][0])
    return OptimizationResult(best, trials, model, tuned_on,
                              [t.error for t in trials if t.error])
