"""Search strategies: grid, random, simulated annealing and TPE.

All strategies maximise.  Anneal and TPE are ask/tell objects so the
experiment driver can evaluate trials itself; :func:`anneal` wraps the
annealer for a plain objective function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp, ndtr

from ..utils import check_positive_int, check_rng
from .space import Choice, Fix, LogUniform, Normal, QUniform, Uniform, _plain, grid_expand, sample

STRATEGIES = ("grid", "random", "annealing", "tpe")


@dataclass
class Trial:
    params: dict
    objective: float
    fold_scores: list = field(default_factory=list)
    seed: int = 0
    index: int = 0
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None and not math.isnan(self.objective)


def best_trial(trials) -> Optional[Trial]:
    """Highest objective among successful trials; the earliest wins ties."""
    best = None
    for t in trials:
        if t.ok and (best is None or t.objective > best.objective):
            best = t
    return best


# ---------------------------------------------------------------- annealing

class Annealer:
    """Simulated annealing over a mixed search space.

    Neighbours perturb one uniformly chosen free dimension: Gaussian step
    with sd 10% of the range for continuous domains (clipped), +-q for
    QUniform, uniform resampling for Choice.  A worse proposal is accepted
    with probability exp(delta / T_k), T_k = t0 * alpha**k.
    """

    def __init__(self, space, rng, t0=1.0, alpha=0.95):
        self.space = space
        self.rng = check_rng(rng)
        self.t0 = t0
        self.alpha = alpha
        self.free = [n for n in sorted(space) if not isinstance(space[n], Fix)]
        self.current = None
        self.current_value = None
        self.k = 0
        self._pending = None

    def _perturb(self, params):
        new = dict(params)
        if not self.free:
            return new
        name = self.free[int(self.rng.integers(len(self.free)))]
        d = self.space[name]
        x = params[name]
        if isinstance(d, Uniform):
            new[name] = float(np.clip(x + self.rng.normal(0, 0.1 * (d.high - d.low)), d.low, d.high))
        elif isinstance(d, LogUniform):
            e = math.log(x) + self.rng.normal(0, 0.1 * (d.high_exp - d.low_exp))
            new[name] = float(math.exp(min(max(e, d.low_exp), d.high_exp)))
        elif isinstance(d, Normal):
            # nominal range mu +- 3 sigma
            new[name] = float(x + self.rng.normal(0, 0.6 * d.sigma))
        elif isinstance(d, QUniform):
            step = d.q if self.rng.random() < 0.5 else -d.q
            new[name] = d.quantize(x + step)
        elif isinstance(d, Choice):
            new[name] = d.sample(self.rng)
        new[name] = _plain(new[name])
        return new

    def ask(self):
        if self.current is None:
            self._pending = sample(self.space, self.rng)
        else:
            self._pending = self._perturb(self.current)
        return self._pending

    def tell(self, params, value):
        if self.current is None:
            self.current, self.current_value = params, value
            return
        self.k += 1
        if math.isnan(value):
            return
        delta = value - self.current_value
        if math.isnan(self.current_value) or delta >= 0:
            accept = True
        else:
            temp = self.t0 * self.alpha ** self.k
            accept = self.rng.random() < math.exp(delta / temp)
        if accept:
            self.current, self.current_value = params, value


def anneal(space, objective_fn, max_evals, rng, t0=1.0, alpha=0.95):
    """Run simulated annealing for ``max_evals`` evaluations; returns (best, history)."""
    max_evals = check_positive_int(max_evals, "max_evals")
    ann = Annealer(space, rng, t0, alpha)
    history = []
    for k in range(max_evals):
        params = ann.ask()
        value = float(objective_fn(params))
        ann.tell(params, value)
        history.append(Trial(params, value, [value], index=k))
    return best_trial(history), history


# ---------------------------------------------------------------- TPE

N_STARTUP = 10
GAMMA = 0.25
N_CANDIDATES = 24


def _to_internal(d, x):
    return math.log(x) if isinstance(d, LogUniform) else float(x)


def _from_internal(d, z):
    if isinstance(d, LogUniform):
        return float(math.exp(z))
    if isinstance(d, QUniform):
        return d.quantize(z)
    return float(z)


def _bounds(d):
    if isinstance(d, LogUniform):
        return d.low_exp, d.high_exp
    if isinstance(d, (Uniform, QUniform)):
        return float(d.low), float(d.high)
    return -math.inf, math.inf


class ParzenEstimator:
    """Truncated Gaussian mixture centred on observed values (internal space).

    Each point's bandwidth is the larger of its distances to the sorted
    neighbours on either side (bounds act as outer neighbours), floored at
    ``range / min(100, n)``.
    """

    def __init__(self, points, low, high, prior_range):
        pts = np.sort(np.asarray(points, dtype=np.float64))
        self.mus = pts
        self.low, self.high = low, high
        n = len(pts)
        rng_ = (high - low) if math.isfinite(high - low) else prior_range
        left = np.r_[low if math.isfinite(low) else -np.inf, pts[:-1]] if n else np.array([])
        right = np.r_[pts[1:], high if math.isfinite(high) else np.inf] if n else np.array([])
        gap_l, gap_r = pts - left, right - pts
        spacing = np.maximum(np.where(np.isfinite(gap_l), gap_l, 0.0),
                             np.where(np.isfinite(gap_r), gap_r, 0.0))
        floor = rng_ / min(100, max(n, 1))
        self.sigmas = np.maximum(spacing, floor)
        lo = ndtr((low - pts) / self.sigmas) if math.isfinite(low) else np.zeros(n)
        hi = ndtr((high - pts) / self.sigmas) if math.isfinite(high) else np.ones(n)
        self.mass = np.maximum(hi - lo, 1e-300)

    def sample(self, rng, size):
        comp = rng.integers(len(self.mus), size=size)
        out = np.empty(size)
        for k, c in enumerate(comp):
            mu, sd = self.mus[c], self.sigmas[c]
            for _ in range(100):
                z = rng.normal(mu, sd)
                if self.low <= z <= self.high:
                    break
            else:
                z = min(max(z, self.low), self.high)
            out[k] = z
        return out

    def logpdf(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        t = (z[:, None] - self.mus[None, :]) / self.sigmas[None, :]
        comp = -0.5 * t * t - np.log(self.sigmas * math.sqrt(2 * math.pi) * self.mass)[None, :]
        return logsumexp(comp, axis=1) - math.log(len(self.mus))


class CategoricalEstimator:
    """Counts plus one prior observation per option."""

    def __init__(self, options, observed):
        self.options = list(options)
        counts = np.ones(len(self.options))
        for v in observed:
            counts[self.options.index(v)] += 1
        self.p = counts / counts.sum()

    def sample(self, rng, size):
        return rng.choice(len(self.options), size=size, p=self.p)

    def logpdf_index(self, idx):
        return np.log(self.p[np.asarray(idx)])


def tpe_suggest(space, history, rng, n_startup=N_STARTUP, gamma=GAMMA,
                n_candidates=N_CANDIDATES):
    """Next assignment by the tree-structured Parzen estimator (maximising).

    ``history`` is a sequence of :class:`Trial` or ``(params, objective)``
    pairs.  With fewer than ``n_startup`` successful observations this is a
    prior draw.
    """
    rng = check_rng(rng)
    obs = []
    for h in history:
        params, value = (h.params, h.objective) if isinstance(h, Trial) else h
        if value is not None and not math.isnan(value):
            obs.append((params, float(value)))
    if len(obs) < n_startup:
        return sample(space, rng)
    order = sorted(range(len(obs)), key=lambda k: (-obs[k][1], k))
    n_good = max(1, int(math.ceil(gamma * len(obs))))
    good = [obs[k][0] for k in order[:n_good]]
    bad = [obs[k][0] for k in order[n_good:]]
    names = sorted(space)
    cands = {n: [] for n in names}
    score = np.zeros(n_candidates)
    for n in names:
        d = space[n]
        if isinstance(d, Fix):
            cands[n] = [d.value] * n_candidates
            continue
        if isinstance(d, Choice):
            g = CategoricalEstimator(d.options, [p[n] for p in good])
            b = CategoricalEstimator(d.options, [p[n] for p in bad])
            idx = g.sample(rng, n_candidates)
            score += g.logpdf_index(idx) - b.logpdf_index(idx)
            cands[n] = [d.options[i] for i in idx]
            continue
        low, high = _bounds(d)
        prior_range = 6.0 * d.sigma if isinstance(d, Normal) else high - low
        g = ParzenEstimator([_to_internal(d, p[n]) for p in good], low, high, prior_range)
        b = ParzenEstimator([_to_internal(d, p[n]) for p in bad], low, high, prior_range)
        z = g.sample(rng, n_candidates)
        vals = [_from_internal(d, v) for v in z]
        zq = np.array([_to_internal(d, v) for v in vals])
        score += g.logpdf(zq) - b.logpdf(zq)
        cands[n] = vals
    best = int(np.argmax(score))
    return {n: _plain(cands[n][best]) for n in names}


class TPESearch:
    def __init__(self, space, rng, **kwargs):
        self.space = space
        self.rng = check_rng(rng)
        self.kwargs = kwargs
        self.history = []

    def ask(self):
        return tpe_suggest(self.space, self.history, self.rng, **self.kwargs)

    def tell(self, params, value):
        self.history.append((params, value))


class RandomSearch:
    def __init__(self, space, rng):
        self.space = space
        self.rng = check_rng(rng)

    def ask(self):
        return sample(self.space, self.rng)

    def tell(self, params, value):
        pass


def make_searcher(strategy, space, rng):
    if strategy == "random":
        return RandomSearch(space, rng)
    if strategy == "annealing":
        return Annealer(space, rng)
    if strategy == "tpe":
        return TPESearch(space, rng)
    raise ValueError(f"no sequential searcher for {strategy!r}")


__all__ = ["STRATEGIES", "Trial", "best_trial", "Annealer", "anneal", "tpe_suggest",
           "TPESearch", "RandomSearch", "make_searcher", "grid_expand", "sample",
           "ParzenEstimator", "CategoricalEstimator"]
