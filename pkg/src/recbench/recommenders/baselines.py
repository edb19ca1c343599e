from __future__ import annotations

import numpy as np

from .base import BaseRecommender


class RandomRecommender(BaseRecommender):
    """Uniformly random ranking; each user's scores come from its own seeded stream."""

    def __init__(self, random_state=42):
        self.random_state = random_state

    def _fit(self, train):
        self.seed_ = int(self.random_state if self.random_state is not None else 0)

    def _score(self, users):
        out = np.empty((len(users), self.n_items_))
        for row, u in enumerate(users.tolist()):
            out[row] = np.random.default_rng([self.seed_, u]).random(self.n_items_)
        return out


class MostPopRecommender(BaseRecommender):
    """Rank items by training interaction count."""

    def __init__(self):
        pass

    def _fit(self, train):
        self.item_popularity_ = train.item_popularity.copy()

    def _score(self, users):
        return np.broadcast_to(self.item_popularity_.astype(np.float64),
                               (len(users), self.n_items_)).copy()
