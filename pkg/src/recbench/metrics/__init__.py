"""Evaluation metrics.

:func:`evaluate` computes any subset of the registered metrics at several
cutoffs from a single ranked list per user (cutoffs are prefixes).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..utils import fmean
from .base import (METRICS, EvalContext, MetricInfo, MetricReport, MetricValue,
                   canonical_metric, long_tail_mask)
from .families import (FAIRNESS_VARIANTS, accuracy_metrics, bias_metrics, coverage_metrics,
                       diversity_metrics, error_metrics, exposure_counts, fairness_base_values,
                       fairness_metric, gini_index, mean_absolute_difference, ndcg_at_k,
                       novelty_metrics, shannon_entropy)

_LIST_FAMILIES = {
    "accuracy": accuracy_metrics,
    "coverage": coverage_metrics,
    "novelty": novelty_metrics,
    "diversity": diversity_metrics,
    "bias": bias_metrics,
}


@dataclass(frozen=True)
class MetricRequest:
    """One metric column: ``label`` is what reports show.

    Fairness metrics carry ``clusters`` (dense index -> group).
    """

    name: str
    label: Optional[str] = None
    clusters: Optional[dict] = None

    @property
    def column(self):
        return self.label or self.name


def evaluate(lists, ctx: EvalContext, requests, cutoffs, predict=None, test=None) -> MetricReport:
    """Compute every requested metric at every cutoff.

    ``predict(users, items)`` and ``test`` (a Dataset) feed the error family;
    metrics that cannot be computed are reported with value ``None``.
    """
    requests = [r if isinstance(r, MetricRequest) else MetricRequest(r) for r in requests]
    report = MetricReport(evaluated_users=len(ctx.relevant), skipped_users=ctx.skipped_users)
    families = {METRICS[r.name].family for r in requests}
    errors = None
    if "error" in families:
        if predict is None or test is None:
            errors = ({"MAE": None, "MSE": None, "RMSE": None}, 0)
        else:
            errors = error_metrics(predict(test.users, test.items), test.ratings)
    for k in cutoffs:
        computed = {fam: fn(lists, ctx, k) for fam, fn in _LIST_FAMILIES.items() if fam in families}
        for r in requests:
            info = METRICS[r.name]
            if info.family == "error":
                report.values[(r.column, k)] = MetricValue(errors[0][r.name], excluded=errors[1])
            elif info.family == "fairness":
                value, excluded = fairness_metric(r.name, lists, ctx, k, r.clusters or {})
                report.values[(r.column, k)] = MetricValue(value, excluded=excluded)
            else:
                raw = computed[info.family][r.name]
                if info.user_averaged:
                    per_user = {u: raw[u] for u in sorted(raw)}
                    value = fmean(per_user.values()) if per_user else None
                    report.values[(r.column, k)] = MetricValue(value, per_user)
                else:
                    report.values[(r.column, k)] = MetricValue(raw)
    return report


def evaluate_model(model, train, test, requests, cutoffs, top_k=None, relevance_threshold=0.0):
    """Rank for every evaluated test user with a fitted model and score the lists.

    Items in ``train`` are withheld even when the model was fitted on a
    subset of it.  Returns ``(report, lists)``; lists are ``top_k`` long
    (default: the largest cutoff).
    """
    ctx = EvalContext.build(train, test, relevance_threshold)
    top_k = top_k or max(cutoffs)
    lists = model.recommend(users=ctx.users, top_k=top_k, exclude=train.to_csr())
    report = evaluate(lists, ctx, requests, cutoffs, predict=model.predict, test=test)
    return report, lists


__all__ = [
    "evaluate_model",
    "METRICS", "MetricInfo", "MetricReport", "MetricValue", "MetricRequest", "EvalContext",
    "canonical_metric", "evaluate", "long_tail_mask", "accuracy_metrics", "error_metrics",
    "coverage_metrics", "novelty_metrics", "diversity_metrics", "bias_metrics",
    "fairness_metric", "fairness_base_values", "mean_absolute_difference", "ndcg_at_k",
    "gini_index", "shannon_entropy", "exposure_counts", "FAIRNESS_VARIANTS",
]
