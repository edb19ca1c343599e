"""Paired significance tests over per-user metric vectors.

Both tests are two-sided.  The Student-t tail comes from a continued
fraction for the regularised incomplete beta function; the Wilcoxon
signed-rank test is exact (dynamic programming over rank sums) for small
untied samples and uses a tie-corrected normal approximation otherwise.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .utils import log_stage

EXACT_MAX_N = 25


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    model_a: str
    model_b: str
    metric: str
    cutoff: int
    test: str
    statistic: float
    p_value: float
    n: int


TestResult.__test__ = False  # not a pytest class


# ---------------------------------------------------------------- t distribution

def _betacf(a, b, x, eps=1e-16, max_iter=1000):
    """Continued fraction of I_x(a, b) (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a, b, x) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t, df) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return min(1.0, max(0.0, regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))))


def _paired(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    return a - b


def paired_t_test(a, b, model_a="a", model_b="b", metric="", cutoff=0) -> TestResult:
    d = _paired(a, b)
    n = len(d)
    if n < 2:
        raise InsufficientDataError(f"paired t-test needs n >= 2, got {n}")
    mean = math.fsum(d.tolist()) / n
    var = math.fsum(((d - mean) ** 2).tolist()) / (n - 1)
    if var == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
        p = 1.0 if mean == 0.0 else 0.0
    else:
        t = mean / math.sqrt(var / n)
        p = t_two_sided_p(t, n - 1)
    return TestResult(model_a, model_b, metric, cutoff, "paired_ttest", t, p, n)


# ---------------------------------------------------------------- Wilcoxon

def mid_ranks(x) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    start = 0
    while start < len(x):
        end = start
        while end + 1 < len(x) and sx[end + 1] == sx[start]:
            end += 1
        ranks[order[start:end + 1]] = (start + end) / 2.0 + 1.0
        start = end + 1
    return ranks


def signed_rank_sum_counts(n) -> list:
    """counts[s] = number of subsets of {1..n} with sum s (exact integers)."""
    total = n * (n + 1) // 2
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in range(1, n + 1):
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    return counts


def wilcoxon_exact_p(w, n) -> float:
    """Two-sided exact p for W = min(W+, W-) with untied ranks 1..n."""
    counts = signed_rank_sum_counts(n)
    tail = sum(counts[: int(math.floor(w)) + 1])
    return float(min(Fraction(1), Fraction(2 * tail, 2 ** n)))


def wilcoxon_brute_force_p(w, n) -> float:
    """Same quantity by enumerating all 2**n sign patterns (test oracle)."""
    total = n * (n + 1) // 2
    tail = 0
    for signs in itertools.product((0, 1), repeat=n):
        wp = sum(r for r, s in zip(range(1, n + 1), signs) if s)
        tail += min(wp, total - wp) <= w
    return float(min(Fraction(1), Fraction(tail, 2 ** n)))


def _norm_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def wilcoxon_signed_rank(a, b, model_a="a", model_b="b", metric="", cutoff=0) -> TestResult:
    d = _paired(a, b)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return TestResult(model_a, model_b, metric, cutoff, "wilcoxon", 0.0, 1.0, 0)
    absd = np.abs(d)
    ranks = mid_ranks(absd)
    w_plus = math.fsum(ranks[d > 0].tolist())
    w_minus = math.fsum(ranks[d < 0].tolist())
    w = min(w_plus, w_minus)
    _, tie_sizes = np.unique(absd, return_counts=True)
    ties = bool(np.any(tie_sizes > 1))
    if n <= EXACT_MAX_N and not ties:
        p = wilcoxon_exact_p(w, n)
    else:
        mean = n * (n + 1) / 4.0
        tie_term = math.fsum(((tie_sizes ** 3 - tie_sizes) / 48.0).tolist())
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        if var <= 0:
            p = 1.0
        else:
            z = (w - mean + 0.5) / math.sqrt(var)
            p = min(1.0, max(0.0, 2.0 * _norm_cdf(z)))
    return TestResult(model_a, model_b, metric, cutoff, "wilcoxon", w, p, n)


# ---------------------------------------------------------------- driver

def pairwise_tests(reports, wilcoxon=True, ttest=True) -> list:
    """Run the enabled tests for every unordered model pair, metric and cutoff.

    ``reports`` maps model name to a MetricReport (ordered as the models
    should appear).  Metrics without per-user vectors are skipped.  Pairing
    uses the users present in both vectors.
    """
    results = []
    models = list(reports)
    keys = []
    for m in models:
        for key in reports[m].values:
            if key not in keys:
                keys.append(key)
    for metric, cutoff in keys:
        for ma, mb in itertools.combinations(models, 2):
            va = reports[ma].values.get((metric, cutoff))
            vb = reports[mb].values.get((metric, cutoff))
            if va is None or vb is None:
                continue
            if va.per_user is None or vb.per_user is None:
                if (va.per_user is None) != (vb.per_user is None):
                    log_stage("STATS", "%s@%d: %s lacks per-user values; pair skipped",
                              metric, cutoff, ma if va.per_user is None else mb, level=30)
                continue
            common = sorted(set(va.per_user) & set(vb.per_user))
            a = [va.per_user[u] for u in common]
            b = [vb.per_user[u] for u in common]
            if wilcoxon:
                results.append(wilcoxon_signed_rank(a, b, ma, mb, metric, cutoff))
            if ttest:
                if len(common) < 2:
                    log_stage("STATS", "%s vs %s on %s@%d: insufficient paired users (%d)",
                              ma, mb, metric, cutoff, len(common), level=30)
                    results.append(TestResult(ma, mb, metric, cutoff, "paired_ttest",
                                              math.nan, math.nan, len(common)))
                else:
                    results.append(paired_t_test(a, b, ma, mb, metric, cutoff))
    return results
