from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..dataset import Dataset

SHORT_HEAD_SHARE = 0.2


@dataclass(frozen=True)
class MetricInfo:
    name: str
    family: str
    user_averaged: bool
    lower_is_better: bool = False
    complex: bool = False


_INFO = [
    ("Precision", "accuracy", True), ("Recall", "accuracy", True), ("F1", "accuracy", True),
    ("HitRate", "accuracy", True), ("MRR", "accuracy", True), ("MAP", "accuracy", True),
    ("nDCG", "accuracy", True),
    ("MAE", "error", False), ("MSE", "error", False), ("RMSE", "error", False),
    ("ItemCoverage", "coverage", False), ("UserCoverage", "coverage", False),
    ("NumRetrieved", "coverage", False),
    ("EPC", "novelty", True), ("EFD", "novelty", True),
    ("Gini", "diversity", False), ("ShannonEntropy", "diversity", False),
    ("ARP", "bias", True), ("APLT", "bias", True), ("ACLT", "bias", True),
    ("UserMADrating", "fairness", False), ("UserMADranking", "fairness", False),
    ("ItemMADrating", "fairness", False), ("ItemMADranking", "fairness", False),
]

_LOWER_IS_BETTER = {"ARP", "Gini"}

METRICS = {
    name: MetricInfo(name, fam, avg,
                     lower_is_better=fam in ("error", "fairness") or name in _LOWER_IS_BETTER,
                     complex=fam == "fairness")
    for name, fam, avg in _INFO
}


def canonical_metric(name) -> Optional[str]:
    low = str(name).lower()
    for canon in METRICS:
        if canon.lower() == low:
            return canon
    return None


def long_tail_mask(popularity) -> np.ndarray:
    """True for items outside the short head (top 20% of the catalog by count).

    Items tied with the last short-head item's count join the short head.
    """
    pop = np.asarray(popularity)
    n = len(pop)
    if n == 0:
        return np.zeros(0, dtype=bool)
    head = int(math.ceil(SHORT_HEAD_SHARE * n - 1e-9))
    if head == 0:
        return np.ones(n, dtype=bool)
    boundary = np.sort(pop)[::-1][head - 1]
    return pop < boundary


@dataclass
class EvalContext:
    """Everything the list metrics need besides the lists.

    ``relevant`` maps evaluated users to their non-empty relevant test
    items; users whose test items all fall below the threshold are counted
    in ``skipped_users``.
    """

    relevant: dict
    item_popularity: np.ndarray
    catalog_size: int
    skipped_users: int = 0
    long_tail: np.ndarray = None
    user_ids: tuple = ()
    item_ids: tuple = ()

    def __post_init__(self):
        self.item_popularity = np.asarray(self.item_popularity)
        if self.long_tail is None:
            self.long_tail = long_tail_mask(self.item_popularity)

    @property
    def users(self):
        return sorted(self.relevant)

    @classmethod
    def build(cls, train: Dataset, test: Dataset, relevance_threshold=0.0):
        keep = test.ratings >= relevance_threshold
        relevant = {}
        for u, i in zip(test.users[keep].tolist(), test.items[keep].tolist()):
            relevant.setdefault(u, set()).add(i)
        test_users = set(np.unique(test.users).tolist())
        relevant = {u: frozenset(v) for u, v in relevant.items()}
        return cls(relevant, train.item_popularity, train.catalog_size,
                   skipped_users=len(test_users - set(relevant)),
                   user_ids=train.user_ids, item_ids=train.item_ids)


@dataclass
class MetricValue:
    value: Optional[float]
    per_user: Optional[dict] = None
    excluded: int = 0


@dataclass
class MetricReport:
    """Values keyed by (metric label, cutoff)."""

    values: dict = field(default_factory=dict)
    evaluated_users: int = 0
    skipped_users: int = 0

    def __getitem__(self, key):
        return self.values[key]

    def value(self, metric, cutoff):
        return self.values[(metric, cutoff)].value

    def per_user(self, metric, cutoff):
        return self.values[(metric, cutoff)].per_user
