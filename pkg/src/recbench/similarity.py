"""Vector similarity kernels for the neighbourhood models.

Vectors are sparse profiles: a zero entry means "not rated".  Two routes
exist for every kernel: :func:`similarity` evaluates one pair directly and
:func:`pairwise_similarity` computes all pairs of matrix rows with sparse
products.  They agree up to float rounding, which the tests check.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

KINDS = ("cosine", "jaccard", "dice", "pearson", "euclidean", "manhattan",
         "braycurtis", "adjusted_cosine")

_MAX_LEVELS = 32


def _dense(v):
    if sp.issparse(v):
        return np.asarray(v.todense(), dtype=np.float64).ravel()
    return np.asarray(v, dtype=np.float64).ravel()


def _safe_div(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


def similarity(kind, x, y, offsets=None) -> float:
    """Similarity of two profiles over a shared index space.

    ``offsets`` only matters for ``adjusted_cosine``: the value subtracted
    from each rated coordinate (a per-rater mean).  Without it, the mean of
    the rated entries of ``x`` and ``y`` at each coordinate is used, which is
    what :func:`pairwise_similarity` computes on a two-row matrix.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown similarity {kind!r}; valid: {', '.join(KINDS)}")
    x, y = _dense(x), _dense(y)
    if x.shape != y.shape:
        raise ValueError("profiles must share one index space")
    sx, sy = x != 0, y != 0
    if kind == "cosine":
        nx, ny = np.sqrt(x @ x), np.sqrt(y @ y)
        return float(x @ y / (nx * ny)) if nx > 0 and ny > 0 else 0.0
    if kind == "jaccard":
        union = np.count_nonzero(sx | sy)
        return np.count_nonzero(sx & sy) / union if union else 0.0
    if kind == "dice":
        den = np.count_nonzero(sx) + np.count_nonzero(sy)
        return 2.0 * np.count_nonzero(sx & sy) / den if den else 0.0
    if kind == "pearson":
        co = sx & sy
        if np.count_nonzero(co) < 2:
            return 0.0
        a, b = x[co] - x[co].mean(), y[co] - y[co].mean()
        den = np.sqrt((a @ a) * (b @ b))
        return float(a @ b / den) if den > 0 else 0.0
    if kind == "euclidean":
        return float(1.0 / (1.0 + np.sqrt(np.sum((x - y) ** 2))))
    if kind == "manhattan":
        return float(1.0 / (1.0 + np.sum(np.abs(x - y))))
    if kind == "braycurtis":
        u = sx | sy
        den = np.sum(x[u] + y[u])
        return float(1.0 - np.sum(np.abs(x[u] - y[u])) / den) if den != 0 else 0.0
    # adjusted_cosine
    if offsets is None:
        cnt = sx.astype(float) + sy.astype(float)
        offsets = _safe_div(x + y, cnt)
    offsets = np.asarray(offsets, dtype=np.float64)
    cx = np.where(sx, x - offsets, 0.0)
    cy = np.where(sy, y - offsets, 0.0)
    return similarity("cosine", cx, cy)


def _abs_diff_sums(X):
    """Matrix of sum_d |x_d - y_d| over all row pairs.

    For non-negative data with few distinct values this uses
    ``|x-y| = x + y - 2 min(x, y)`` and a level decomposition of ``min``;
    otherwise falls back to a dense city-block distance.
    """
    levels = np.unique(X.data) if X.nnz else np.array([])
    if X.nnz == 0 or (levels.min() >= 0 and len(levels) <= _MAX_LEVELS):
        l1 = np.asarray(X.sum(axis=1)).ravel()
        mins = np.zeros((X.shape[0], X.shape[0]))
        prev = 0.0
        for lv in levels:
            B = X.copy()
            B.data = (B.data >= lv).astype(np.float64)
            B.eliminate_zeros()
            mins += (lv - prev) * (B @ B.T).toarray()
            prev = lv
        out = l1[:, None] + l1[None, :] - 2.0 * mins
        return np.maximum(out, 0.0)
    D = X.toarray()
    return cdist(D, D, metric="cityblock")


def pairwise_similarity(X, kind) -> np.ndarray:
    """Dense matrix of similarities between all rows of ``X`` (rows are profiles)."""
    if kind not in KINDS:
        raise ValueError(f"unknown similarity {kind!r}; valid: {', '.join(KINDS)}")
    X = sp.csr_matrix(X, dtype=np.float64)
    X.eliminate_zeros()
    B = X.copy()
    B.data = np.ones_like(B.data)
    if kind == "cosine":
        return _cosine_rows(X)
    if kind in ("jaccard", "dice"):
        inter = (B @ B.T).toarray()
        n = np.asarray(B.sum(axis=1)).ravel()
        if kind == "jaccard":
            return _safe_div(inter, n[:, None] + n[None, :] - inter)
        return _safe_div(2.0 * inter, n[:, None] + n[None, :])
    if kind == "pearson":
        X2 = X.multiply(X).tocsr()
        n = (B @ B.T).toarray()
        sx = (X @ B.T).toarray()           # [i, j]: sum of x_i over co-rated coordinates
        sxx = (X2 @ B.T).toarray()
        sxy = (X @ X.T).toarray()
        nn = np.where(n > 0, n, 1.0)
        cov = sxy - sx * sx.T / nn
        var_x = np.maximum(sxx - sx * sx / nn, 0.0)
        var_y = var_x.T
        # relative guard: constant co-rated profiles have zero variance up to rounding
        valid = (n >= 2) & (var_x > 1e-12 * sxx) & (var_y > 1e-12 * sxx.T)
        den = np.sqrt(np.where(valid, var_x * var_y, 1.0))
        r = np.where(valid, cov / den, 0.0)
        return np.clip(r, -1.0, 1.0)
    if kind == "euclidean":
        sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T).toarray()
        d2 = np.maximum(d2, 0.0)
        np.fill_diagonal(d2, 0.0)
        return 1.0 / (1.0 + np.sqrt(d2))
    if kind == "manhattan":
        d = _abs_diff_sums(X)
        np.fill_diagonal(d, 0.0)
        return 1.0 / (1.0 + d)
    if kind == "braycurtis":
        d = _abs_diff_sums(X)
        np.fill_diagonal(d, 0.0)
        s = np.asarray(X.sum(axis=1)).ravel()
        den = s[:, None] + s[None, :]
        return np.where(den != 0, 1.0 - _safe_div(d, den), 0.0)
    # adjusted_cosine: center every rated entry on its coordinate's mean
    Xc = X.tocsc(copy=True)
    counts = np.diff(Xc.indptr)
    means = _safe_div(np.asarray(Xc.sum(axis=0)).ravel(), counts)
    Xc.data -= np.repeat(means, counts)
    return _cosine_rows(Xc.tocsr())


def _cosine_rows(X):
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    return _safe_div((X @ X.T).toarray(), norms[:, None] * norms[None, :])
