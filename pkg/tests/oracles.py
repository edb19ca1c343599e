"""Brute-force reference implementations used as test oracles.

Written directly from the metric definitions with plain loops and no code
shared with the package.
"""
import itertools
import math


def _top(lst, k):
    return list(lst[:k])


def accuracy(lst, rel, k):
    top = _top(lst, k)
    hits = [r + 1 for r, i in enumerate(top) if i in rel]
    p = len(hits) / k
    rc = len(hits) / len(rel)
    f1 = 0.0 if p + rc == 0 else 2 * p * rc / (p + rc)
    mrr = 1.0 / hits[0] if hits else 0.0
    ap = 0.0
    for r in hits:
        ap += sum(1 for i in top[:r] if i in rel) / r
    ap /= min(k, len(rel))
    dcg = sum(1.0 / math.log2(r + 1) for r in hits)
    idcg = sum(1.0 / math.log2(r + 1) for r in range(1, min(k, len(rel)) + 1))
    return {"Precision": p, "Recall": rc, "F1": f1, "HitRate": float(bool(hits)), "MRR": mrr,
            "MAP": ap, "nDCG": dcg / idcg}


def errors(pred, truth):
    pairs = [(p, t) for p, t in zip(pred, truth) if not math.isnan(p)]
    if not pairs:
        return {"MAE": None, "MSE": None, "RMSE": None}
    mae = sum(abs(p - t) for p, t in pairs) / len(pairs)
    mse = sum((p - t) ** 2 for p, t in pairs) / len(pairs)
    return {"MAE": mae, "MSE": mse, "RMSE": math.sqrt(mse)}


def short_head(counts):
    """Items with fewer than ceil(0.2 n) items strictly more popular."""
    n = len(counts)
    head = math.ceil(0.2 * n - 1e-9)
    return {i for i in range(n) if sum(1 for c in counts if c > counts[i]) < head}


def gini(exposure):
    n = len(exposure)
    total = sum(exposure)
    if n < 2 or total == 0:
        return None
    diff = sum(abs(a - b) for a in exposure for b in exposure)
    return diff / (2 * (n - 1) * total)


def entropy(exposure):
    total = sum(exposure)
    if len(exposure) < 2 or total == 0:
        return None
    return -sum((c / total) * math.log2(c / total) for c in exposure if c > 0)


def mad(groups):
    """groups: label -> list of values."""
    means = {g: sum(v) / len(v) for g, v in groups.items() if v}
    if len(means) < 2:
        return None
    pairs = list(itertools.combinations(sorted(means), 2))
    return sum(abs(means[a] - means[b]) for a, b in pairs) / len(pairs)


def all_metrics(lists, scores, relevant, counts, k, pred=None, truth=None,
                user_clusters=None, item_clusters=None):
    """Every registered metric for one instance.

    lists/scores: user -> ranked item list / score list; relevant: evaluated
    user -> set; counts: train interaction count per item (catalog order).
    """
    users = sorted(relevant)
    out = {}
    acc = {u: accuracy(lists.get(u, []), relevant[u], k) for u in users}
    for m in ("Precision", "Recall", "F1", "HitRate", "MRR", "MAP", "nDCG"):
        out[m] = sum(acc[u][m] for u in users) / len(users) if users else None
    out.update(errors(pred or [], truth or []))
    tops = {u: _top(lists.get(u, []), k) for u in users}
    out["ItemCoverage"] = float(len({i for u in users for i in tops[u]}))
    out["UserCoverage"] = float(sum(1 for u in users if tops[u]))
    out["NumRetrieved"] = sum(len(tops[u]) for u in users) / len(users) if users else 0.0
    nonempty = [u for u in users if tops[u]]
    mx = max(counts) if counts else 0
    total = max(sum(counts), 1)

    def mean_over(fn):
        vals = [sum(fn(i) for i in tops[u]) / len(tops[u]) for u in nonempty]
        return sum(vals) / len(vals) if vals else None

    out["EPC"] = mean_over(lambda i: 1 - (counts[i] / mx if mx else 0.0))
    out["EFD"] = mean_over(lambda i: -math.log2(max(counts[i], 1) / total))
    exposure = [0] * len(counts)
    for u in users:
        for i in tops[u]:
            exposure[i] += 1
    out["Gini"] = gini(exposure)
    out["ShannonEntropy"] = entropy(exposure)
    head = short_head(counts)
    out["ARP"] = mean_over(lambda i: counts[i])
    out["APLT"] = mean_over(lambda i: 0 if i in head else 1)
    aclt = [sum(1 for i in tops[u] if i not in head) for u in nonempty]
    out["ACLT"] = sum(aclt) / len(aclt) if aclt else None

    user_clusters = user_clusters or {}
    item_clusters = item_clusters or {}
    g = {}
    for u in nonempty:
        if u in user_clusters:
            sc = scores[u][:k]
            g.setdefault(user_clusters[u], []).append(sum(sc) / len(sc))
    out["UserMADrating"] = mad(g)
    g = {}
    for u in nonempty:
        if u in user_clusters:
            g.setdefault(user_clusters[u], []).append(acc[u]["nDCG"])
    out["UserMADranking"] = mad(g)
    for name, use_score in (("ItemMADrating", True), ("ItemMADranking", False)):
        received = {}
        for u in users:
            for r, i in enumerate(tops[u], 1):
                v = scores[u][r - 1] if use_score else 1.0 / math.log2(r + 1)
                received.setdefault(i, []).append(v)
        g = {}
        for i, v in received.items():
            if i in item_clusters:
                g.setdefault(item_clusters[i], []).append(sum(v) / len(v))
        out[name] = mad(g)
    return out


# ---------------------------------------------------------------- other oracles

def single_pass_k_core(pairs, target, k):
    """pairs: list of (user, item); drop entities of ``target`` with < k interactions."""
    idx = 0 if target == "user" else 1
    deg = {}
    for p in pairs:
        deg[p[idx]] = deg.get(p[idx], 0) + 1
    return [p for p in pairs if deg[p[idx]] >= k]


def k_core_fixpoint(pairs, k):
    """Remove any user or item below k until nothing changes."""
    cur = list(pairs)
    while True:
        du, di = {}, {}
        for u, i in cur:
            du[u] = du.get(u, 0) + 1
            di[i] = di.get(i, 0) + 1
        nxt = [(u, i) for u, i in cur if du[u] >= k and di[i] >= k]
        if len(nxt) == len(cur):
            return cur
        cur = nxt


def best_timestamp(histories, target):
    """histories: user -> list of timestamps; brute-force argmin over observed T."""
    cands = sorted({t for ts in histories.values() for t in ts})
    best, best_obj = None, None
    for T in cands:
        obj = sum(abs(sum(1 for t in ts if t > T) / len(ts) - target)
                  for ts in histories.values())
        if best_obj is None or obj < best_obj - 1e-15:
            best, best_obj = T, obj
    return best


def cosine(x, y):
    dot = sum(a * b for a, b in zip(x, y))
    nx = math.sqrt(sum(a * a for a in x))
    ny = math.sqrt(sum(b * b for b in y))
    return 0.0 if nx == 0 or ny == 0 else dot / (nx * ny)
