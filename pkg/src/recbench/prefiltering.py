"""Dataset-to-dataset filters: rating thresholds, k-cores and cold-user retention.

Every filter prunes users and items left without interactions and rebuilds
dense indices.  Thresholds keep interactions with ``rating >= threshold``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .utils import check_positive_int, log_stage

STRATEGIES = (
    "global_threshold",
    "global_average",
    "user_average",
    "user_k_core",
    "item_k_core",
    "iterative_k_core",
    "iter_n_rounds",
    "cold_users",
)

DEFAULT_MAX_PROFILE = 5


def _warn_empty(ds, what):
    if ds.n_interactions == 0:
        log_stage("FILTER", "%s removed every interaction", what, level=30)
    return ds


def filter_by_rating(dataset: Dataset, mode="numerical", threshold=None) -> Dataset:
    """Drop interactions whose rating is below a threshold.

    ``mode`` is ``numerical`` (explicit ``threshold``), ``global_average``
    (mean of all ratings) or ``user_average`` (each user's own mean).
    """
    if mode in ("numerical", "global_threshold"):
        if threshold is None:
            raise ValueError("numerical rating filter needs a threshold")
        keep = dataset.ratings >= float(threshold)
    elif mode == "global_average":
        if dataset.n_interactions == 0:
            raise ValueError("global_average needs at least one interaction")
        keep = dataset.ratings >= dataset.ratings.mean()
    elif mode == "user_average":
        if dataset.n_interactions == 0:
            raise ValueError("user_average needs at least one interaction")
        sums = np.bincount(dataset.users, weights=dataset.ratings, minlength=dataset.n_users)
        counts = np.maximum(dataset.user_profile_sizes, 1)
        keep = dataset.ratings >= (sums / counts)[dataset.users]
    else:
        raise ValueError(f"unknown rating filter mode {mode!r}")
    return _warn_empty(dataset.select(keep), f"rating filter ({mode})")


def k_core(dataset: Dataset, target="user", k=1) -> Dataset:
    """Single pass removing users (or items) with fewer than ``k`` interactions."""
    k = check_positive_int(k, "k")
    if target == "user":
        keep = dataset.user_profile_sizes[dataset.users] >= k
    elif target == "item":
        keep = dataset.item_popularity[dataset.items] >= k
    else:
        raise ValueError(f"k-core target must be 'user' or 'item', got {target!r}")
    return _warn_empty(dataset.select(keep), f"{target} {k}-core")


def iterative_k_core(dataset: Dataset, k, max_rounds: Optional[int] = None):
    """Alternate user and item passes until both sides satisfy the k-core.

    One round is a user pass followed by an item pass.  Returns the filtered
    dataset and the number of rounds executed; the round that finds nothing
    left to remove counts, so an existing k-core takes one round.
    """
    k = check_positive_int(k, "k")
    if max_rounds is not None:
        max_rounds = check_positive_int(max_rounds, "max_rounds")
    ds = dataset
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        rounds += 1
        before = ds.n_interactions
        ds = ds.select(ds.user_profile_sizes[ds.users] >= k)
        ds = ds.select(ds.item_popularity[ds.items] >= k)
        if ds.n_interactions == before or ds.n_interactions == 0:
            break
    return _warn_empty(ds, f"iterative {k}-core"), rounds


def cold_users(dataset: Dataset, max_profile=DEFAULT_MAX_PROFILE) -> Dataset:
    """Retain only users with at most ``max_profile`` interactions."""
    max_profile = check_positive_int(max_profile, "max_profile")
    keep = dataset.user_profile_sizes[dataset.users] <= max_profile
    return _warn_empty(dataset.select(keep), "cold-users filter")


@dataclass(frozen=True)
class PrefilterStep:
    strategy: str
    threshold: Optional[float] = None
    core: Optional[int] = None
    rounds: Optional[int] = None
    max_profile: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown prefiltering strategy {self.strategy!r}; "
                             f"valid: {', '.join(STRATEGIES)}")
        if self.strategy == "global_threshold" and self.threshold is None:
            raise ValueError("global_threshold requires 'threshold'")
        if self.strategy in ("user_k_core", "item_k_core", "iterative_k_core", "iter_n_rounds"):
            if self.core is None:
                raise ValueError(f"{self.strategy} requires 'core'")
            check_positive_int(self.core, "core")
        if self.strategy == "iter_n_rounds":
            if self.rounds is None:
                raise ValueError("iter_n_rounds requires 'rounds'")
            check_positive_int(self.rounds, "rounds")
        if self.max_profile is not None:
            check_positive_int(self.max_profile, "max_profile")

    def apply(self, dataset: Dataset) -> Dataset:
        s = self.strategy
        if s == "global_threshold":
            return filter_by_rating(dataset, "numerical", self.threshold)
        if s in ("global_average", "user_average"):
            return filter_by_rating(dataset, s)
        if s == "user_k_core":
            return k_core(dataset, "user", self.core)
        if s == "item_k_core":
            return k_core(dataset, "item", self.core)
        if s == "iterative_k_core":
            return iterative_k_core(dataset, self.core)[0]
        if s == "iter_n_rounds":
            return iterative_k_core(dataset, self.core, self.rounds)[0]
        return cold_users(dataset, self.max_profile or DEFAULT_MAX_PROFILE)


def apply_prefilters(dataset: Dataset, steps) -> Dataset:
    for step in steps:
        before = dataset.summary()
        dataset = step.apply(dataset)
        after = dataset.summary()
        log_stage("FILTER", "%s: %d -> %d interactions, %d users, %d items",
                  step.strategy, before["interactions"], after["interactions"],
                  after["users"], after["items"])
    return dataset
