"""End-to-end experiment driver.

load -> side information -> prefilters -> split -> per model (tune, test) ->
significance tests.  Per-model failures are recorded and the run continues;
only data or split problems abort.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .config import ExperimentConfig
from .dataset import Dataset, load_attributes, load_clusters, load_dataset
from .hyperopt import OptimizationError, build_model, optimize
from .hyperopt.search import Trial
from .metrics import METRICS, MetricReport, MetricRequest, MetricValue, evaluate_model
from .prefiltering import apply_prefilters
from .splitting import (SplitPlan, ValidationFold, dump_splits, fixed_split_from_pairs,
                        load_fixed_union, split_dataset, split_once)
from .stats import pairwise_tests
from .utils import derive_seed, fmean, log_stage

_ITEM_FAIRNESS = ("ItemMADrating", "ItemMADranking")


class ExperimentError(RuntimeError):
    """Data or split level failure that stops the whole run."""


@dataclass
class ModelResult:
    name: str
    best: Optional[Trial] = None
    trials: list = field(default_factory=list)
    report: Optional[MetricReport] = None
    lists: object = None
    tuned_on: str = "validation"
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    models: dict
    tests: list
    seed: int
    dataset_summary: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def succeeded(self):
        return [m for m in self.models.values() if m.ok]


def prepare_data(config: ExperimentConfig) -> Dataset:
    """Load, attach side information and prefilter; for fixed splits the union."""
    data = config.data
    try:
        if data.strategy == "fixed":
            ds, _, _ = load_fixed_union(config.resolve(data.train_path),
                                        config.resolve(data.test_path))
            ds = Dataset(ds.users, ds.items, ds.ratings, ds.timestamps, ds.user_ids,
                         ds.item_ids, None, config.dataset_name)
        else:
            ds = load_dataset(config.resolve(data.dataset_path), name=config.dataset_name)
        if data.side_information is not None:
            ds = load_attributes(config.resolve(data.side_information.attribute_path), ds)
    except (OSError, ValueError) as e:
        raise ExperimentError(str(e)) from e
    if config.prefiltering:
        ds = apply_prefilters(ds, config.prefiltering)
    if ds.n_interactions == 0:
        raise ExperimentError("no interactions left after prefiltering")
    return ds


def make_splits(config: ExperimentConfig, ds: Dataset) -> SplitPlan:
    try:
        if config.data.strategy == "fixed":
            _, train_pairs, test_pairs = load_fixed_union(config.resolve(config.data.train_path),
                                                          config.resolve(config.data.test_path))
            plan = fixed_split_from_pairs(ds, train_pairs, test_pairs)
            if config.splitting.validation is not None:
                for f, fold in enumerate(plan.folds):
                    inner = split_once(fold.train, config.splitting.validation,
                                       derive_seed(config.random_seed, "validation-split", f))
                    fold.validation_folds = [ValidationFold(v.train, v.test) for v in inner.folds]
            for f, fold in enumerate(plan.folds):
                if fold.train.n_interactions == 0 or fold.test.n_interactions == 0:
                    raise ExperimentError(f"fold {f}: empty train or test partition")
            return plan
        return split_dataset(ds, config.splitting, seed=config.random_seed)
    except ExperimentError:
        raise
    except ValueError as e:
        raise ExperimentError(str(e)) from e


def metric_requests(config: ExperimentConfig, ds: Dataset):
    reqs = [MetricRequest(m) for m in config.evaluation.simple_metrics]
    for cm in config.evaluation.complex_metrics:
        clusters = None
        if METRICS[cm.metric].complex:
            raw = load_clusters(config.resolve(cm.clustering_file))
            ids = ds.item_index if cm.metric in _ITEM_FAIRNESS else ds.user_index
            clusters = {ids[e]: g for e, g in raw.items() if e in ids}
            if not clusters:
                log_stage("EVAL", "%s: clustering file matches no %s", cm.label,
                          "items" if cm.metric in _ITEM_FAIRNESS else "users",
                          level=logging.WARNING)
        reqs.append(MetricRequest(cm.metric, cm.label, clusters))
    return reqs


def _merge_reports(reports):
    """Pool several test folds: per-user keys become (fold, user)."""
    if len(reports) == 1:
        return reports[0]
    out = MetricReport(evaluated_users=sum(r.evaluated_users for r in reports),
                       skipped_users=sum(r.skipped_users for r in reports))
    for key in reports[0].values:
        vals = [r.values[key] for r in reports]
        if vals[0].per_user is not None:
            pooled = {(f, u): x for f, v in enumerate(vals) for u, x in v.per_user.items()}
            value = fmean(pooled.values()) if pooled else None
            out.values[key] = MetricValue(value, pooled, sum(v.excluded for v in vals))
        else:
            present = [v.value for v in vals if v.value is not None]
            out.values[key] = MetricValue(fmean(present) if present else None, None,
                                          sum(v.excluded for v in vals))
    return out


def run_model(model_config, plan: SplitPlan, config: ExperimentConfig, requests,
              workers=1) -> ModelResult:
    name = model_config.name
    ev = config.evaluation
    res = ModelResult(name)
    try:
        opt = optimize(model_config, plan.folds[0], seed=config.random_seed,
                       relevance_threshold=ev.relevance_threshold, workers=workers)
    except OptimizationError as e:
        res.error = str(e)
        log_stage("TUNE", "%s failed: %s", name, e, level=logging.ERROR)
        return res
    res.best, res.trials, res.tuned_on = opt.best, opt.trials, opt.tuned_on
    reports = []
    try:
        for f, fold in enumerate(plan.folds):
            if f == 0:
                model = opt.model
            else:
                fit_on = fold.validation_folds[0].train if fold.validation_folds else fold.train
                model = build_model(name, opt.best.params, opt.best.seed).fit(fit_on)
            report, lists = evaluate_model(model, fold.train, fold.test, requests, ev.cutoffs,
                                           top_k=config.top_k,
                                           relevance_threshold=ev.relevance_threshold)
            reports.append(report)
            if f == 0:
                res.lists = lists
    except Exception as e:  # isolate the failure to this model
        res.error = f"{type(e).__name__}: {e}"
        log_stage("EVAL", "%s failed on test: %s", name, res.error, level=logging.ERROR)
        return res
    res.report = _merge_reports(reports)
    for k in ev.cutoffs:
        shown = ", ".join(f"{m}={res.report.value(m, k):.6g}"
                          if res.report.value(m, k) is not None else f"{m}=NA"
                          for m in ev.metric_labels)
        log_stage("EVAL", "%s @%d: %s", name, k, shown)
    return res


def run_experiment(config: ExperimentConfig, workers=1, dump_splits_to=None) -> ExperimentResult:
    """Execute a validated configuration and collect everything the reports need."""
    t0 = time.perf_counter()
    timing = {}
    ds = prepare_data(config)
    plan = make_splits(config, ds)
    timing["data"] = time.perf_counter() - t0
    if dump_splits_to:
        dump_splits(plan, dump_splits_to)
        log_stage("SPLIT", "splits written to %s", dump_splits_to)
    try:
        requests = metric_requests(config, ds)
    except ValueError as e:
        raise ExperimentError(str(e)) from e
    models = {}
    for name, mc in config.models.items():
        t = time.perf_counter()
        models[name] = run_model(mc, plan, config, requests, workers=workers)
        timing[name] = time.perf_counter() - t
    ok = {n: m.report for n, m in models.items() if m.ok}
    tests = []
    ev = config.evaluation
    if (ev.wilcoxon_test or ev.paired_ttest) and len(ok) >= 2:
        tests = pairwise_tests(ok, wilcoxon=ev.wilcoxon_test, ttest=ev.paired_ttest)
        log_stage("STATS", "%d pairwise test results", len(tests))
    timing["total"] = time.perf_counter() - t0
    return ExperimentResult(config, models, tests, config.random_seed, ds.summary(), timing)
