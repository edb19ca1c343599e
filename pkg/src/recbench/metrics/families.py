"""Metric families over top-k lists.

List arguments are :class:`~recbench.recommenders.RecommendationLists` (or
any object with ``items``/``scores`` dicts keyed by dense user index).
User-averaged families return ``{metric: {user: value}}``; the others
return ``{metric: value}`` with ``None`` where a metric is undefined.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..utils import fmean

_EMPTY = np.empty(0, dtype=np.int64)


def _list(lists, u, k):
    items = lists.items.get(u)
    return _EMPTY if items is None else np.asarray(items[:k], dtype=np.int64)


def _scores(lists, u, k):
    s = lists.scores.get(u)
    return np.empty(0) if s is None else np.asarray(s[:k], dtype=np.float64)


def _discount(rank):
    return 1.0 / math.log2(rank + 1)


def ndcg_at_k(items, relevant, k):
    dcg = math.fsum(_discount(r) for r, i in enumerate(items[:k].tolist(), 1) if i in relevant)
    ideal = math.fsum(_discount(r) for r in range(1, min(k, len(relevant)) + 1))
    return dcg / ideal if ideal > 0 else 0.0


def accuracy_metrics(lists, ctx, k) -> dict:
    out = {m: {} for m in ("Precision", "Recall", "F1", "HitRate", "MRR", "MAP", "nDCG")}
    for u in ctx.users:
        R = ctx.relevant[u]
        L = _list(lists, u, k).tolist()
        hit_ranks = [r for r, i in enumerate(L, 1) if i in R]
        hits = len(hit_ranks)
        p = hits / k
        rec = hits / len(R)
        out["Precision"][u] = p
        out["Recall"][u] = rec
        out["F1"][u] = 2 * p * rec / (p + rec) if p + rec > 0 else 0.0
        out["HitRate"][u] = 1.0 if hits else 0.0
        out["MRR"][u] = 1.0 / hit_ranks[0] if hits else 0.0
        out["MAP"][u] = math.fsum((n + 1) / r for n, r in enumerate(hit_ranks)) / min(k, len(R))
        out["nDCG"][u] = ndcg_at_k(np.asarray(L, dtype=np.int64), R, k)
    return out


def error_metrics(predictions, truths) -> dict:
    """MAE/MSE/RMSE over pairs with a prediction; nan predictions are skipped.

    Returns ``({metric: value or None}, n_skipped)``.
    """
    pred = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truths, dtype=np.float64)
    ok = ~np.isnan(pred)
    skipped = int((~ok).sum())
    if not ok.any():
        return {"MAE": None, "MSE": None, "RMSE": None}, skipped
    e = pred[ok] - truth[ok]
    mse = math.fsum((e * e).tolist()) / len(e)
    return {"MAE": math.fsum(np.abs(e).tolist()) / len(e), "MSE": mse,
            "RMSE": math.sqrt(mse)}, skipped


def coverage_metrics(lists, ctx, k) -> dict:
    seen = set()
    nonempty = 0
    lengths = []
    for u in ctx.users:
        L = _list(lists, u, k)
        seen.update(L.tolist())
        nonempty += len(L) > 0
        lengths.append(len(L))
    return {"ItemCoverage": float(len(seen)), "UserCoverage": float(nonempty),
            "NumRetrieved": fmean(lengths) if lengths else 0.0}


def novelty_metrics(lists, ctx, k) -> dict:
    counts = ctx.item_popularity.astype(np.float64)
    top = counts.max() if len(counts) else 0.0
    pop = counts / top if top > 0 else np.zeros_like(counts)
    total = max(counts.sum(), 1.0)
    info = -np.log2(np.maximum(counts, 1.0) / total)
    out = {"EPC": {}, "EFD": {}}
    for u in ctx.users:
        L = _list(lists, u, k)
        if len(L) == 0:
            continue
        out["EPC"][u] = fmean((1.0 - pop[L]).tolist())
        out["EFD"][u] = fmean(info[L].tolist())
    return out


def exposure_counts(lists, ctx, k):
    counts = np.zeros(ctx.catalog_size, dtype=np.int64)
    for u in ctx.users:
        np.add.at(counts, _list(lists, u, k), 1)
    return counts


def gini_index(counts):
    n = len(counts)
    total = counts.sum()
    if n < 2 or total == 0:
        return None
    p = np.sort(np.asarray(counts, dtype=np.float64)) / total
    j = np.arange(1, n + 1)
    return math.fsum(((2 * j - n - 1) * p).tolist()) / (n - 1)


def shannon_entropy(counts):
    total = counts.sum()
    if len(counts) < 2 or total == 0:
        return None
    p = counts[counts > 0] / total
    return -math.fsum((p * np.log2(p)).tolist())


def diversity_metrics(lists, ctx, k) -> dict:
    c = exposure_counts(lists, ctx, k)
    return {"Gini": gini_index(c), "ShannonEntropy": shannon_entropy(c)}


def bias_metrics(lists, ctx, k) -> dict:
    counts = ctx.item_popularity.astype(np.float64)
    tail = ctx.long_tail
    out = {"ARP": {}, "APLT": {}, "ACLT": {}}
    for u in ctx.users:
        L = _list(lists, u, k)
        if len(L) == 0:
            continue
        out["ARP"][u] = fmean(counts[L].tolist())
        n_tail = int(tail[L].sum())
        out["APLT"][u] = n_tail / len(L)
        out["ACLT"][u] = float(n_tail)
    return out


FAIRNESS_VARIANTS = ("UserMADrating", "UserMADranking", "ItemMADrating", "ItemMADranking")


def mean_absolute_difference(group_means) -> float:
    """Mean |a - b| over unordered pairs of group means; None with fewer than two groups."""
    names = sorted(group_means)
    if len(names) < 2:
        return None
    return fmean(abs(group_means[a] - group_means[b])
                 for a, b in itertools.combinations(names, 2))


def fairness_base_values(variant, lists, ctx, k) -> dict:
    """Per-entity quantity whose cluster means are compared."""
    base = {}
    if variant == "UserMADrating":
        for u in ctx.users:
            s = _scores(lists, u, k)
            if len(s):
                base[u] = fmean(s.tolist())
    elif variant == "UserMADranking":
        for u in ctx.users:
            if len(_list(lists, u, k)):
                base[u] = ndcg_at_k(_list(lists, u, k), ctx.relevant[u], k)
    elif variant in ("ItemMADrating", "ItemMADranking"):
        received = {}
        for u in ctx.users:
            L = _list(lists, u, k).tolist()
            S = _scores(lists, u, k).tolist()
            for r, (i, s) in enumerate(zip(L, S), 1):
                received.setdefault(i, []).append(s if variant == "ItemMADrating" else _discount(r))
        base = {i: fmean(v) for i, v in received.items()}
    else:
        raise ValueError(f"unknown fairness variant {variant!r}")
    return base


def fairness_metric(variant, lists, ctx, k, clusters):
    """MAD of the per-entity base quantity between clusters.

    ``clusters`` maps dense user (or item) index to a group label.  Returns
    ``(value or None, n_excluded_entities)``.
    """
    base = fairness_base_values(variant, lists, ctx, k)
    groups = {}
    excluded = 0
    for e in sorted(base):
        g = clusters.get(e)
        if g is None:
            excluded += 1
            continue
        groups.setdefault(g, []).append(base[e])
    return mean_absolute_difference({g: fmean(v) for g, v in groups.items()}), excluded
