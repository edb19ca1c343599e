"""Matrix factorisation trained with the pairwise BPR criterion."""
from __future__ import annotations

import numpy as np

from ..utils import check_positive_int
from .base import BaseRecommender

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def bpr_loss(p_u, q_i, q_j, reg):
    """Per-triple objective minimised by SGD: -ln sigma(x_uij) + reg/2 * ||theta||^2."""
    x = p_u @ (q_i - q_j)
    return -_log_sigmoid(x) + 0.5 * reg * (p_u @ p_u + q_i @ q_i + q_j @ q_j)


def bpr_gradient(p_u, q_i, q_j, reg):
    """Analytic gradient of :func:`bpr_loss` w.r.t. (p_u, q_i, q_j)."""
    x = p_u @ (q_i - q_j)
    g = 1.0 / (1.0 + np.exp(x))          # sigma(-x)
    return (-g * (q_i - q_j) + reg * p_u,
            -g * p_u + reg * q_i,
            g * p_u + reg * q_j)


@njit(cache=True)
def _sgd_epoch(P, Q, users, pos, neg, lr, reg):
    f = P.shape[1]
    for s in range(users.shape[0]):
        u, i, j = users[s], pos[s], neg[s]
        if j < 0:
            continue
        x = 0.0
        for k in range(f):
            x += P[u, k] * (Q[i, k] - Q[j, k])
        g = 1.0 / (1.0 + np.exp(x))
        for k in range(f):
            pu, qi, qj = P[u, k], Q[i, k], Q[j, k]
            P[u, k] = pu - lr * (-g * (qi - qj) + reg * pu)
            Q[i, k] = qi - lr * (-g * pu + reg * qi)
            Q[j, k] = qj - lr * (g * pu + reg * qj)


def sample_negatives(rng, users, n_items, pair_codes, profile_sizes, max_rounds=100):
    """Uniform non-profile item per sampled user, by vectorised rejection.

    ``pair_codes`` are the sorted ``user * n_items + item`` codes of the
    training interactions.  Users owning the whole catalog get -1.
    """
    neg = rng.integers(0, n_items, size=len(users))
    full = profile_sizes[users] >= n_items
    neg[full] = -1
    todo = np.flatnonzero(~full)
    for _ in range(max_rounds):
        if len(todo) == 0:
            break
        codes = users[todo] * n_items + neg[todo]
        pos = np.searchsorted(pair_codes, codes)
        hit = (pos < len(pair_codes)) & (pair_codes[np.minimum(pos, len(pair_codes) - 1)] == codes)
        todo = todo[hit]
        neg[todo] = rng.integers(0, n_items, size=len(todo))
    neg[todo] = -1
    return neg


class BPRMF(BaseRecommender):
    """BPR matrix factorisation.

    Each epoch performs one SGD step per training interaction on a
    uniformly drawn (user, positive) pair and a uniform negative item.
    """

    def __init__(self, factors=10, lr=0.05, epochs=10, reg=0.0025, random_state=42):
        self.factors = factors
        self.lr = lr
        self.epochs = epochs
        self.reg = reg
        self.random_state = random_state

    def _fit(self, train):
        f = check_positive_int(self.factors, "factors")
        epochs = check_positive_int(self.epochs, "epochs")
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.reg < 0:
            raise ValueError(f"reg must be non-negative, got {self.reg}")
        rng = np.random.default_rng(self.random_state)
        P = rng.normal(0.0, 0.01, (train.n_users, f))
        Q = rng.normal(0.0, 0.01, (train.n_items, f))
        codes = np.sort(train.pair_codes())
        sizes = train.user_profile_sizes
        n = train.n_interactions
        for _ in range(epochs):
            if n == 0:
                break
            idx = rng.integers(0, n, size=n)
            us, ps = train.users[idx], train.items[idx]
            ns = sample_negatives(rng, us, train.n_items, codes, sizes)
            _sgd_epoch(P, Q, us, ps, ns, float(self.lr), float(self.reg))
        self.user_factors_ = P
        self.item_factors_ = Q

    def _score(self, users):
        return self.user_factors_[users] @ self.item_factors_.T
