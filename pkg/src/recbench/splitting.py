"""Train/validation/test partitioning.

All partitions keep the vocabulary of the dataset they are cut from, so
train and test agree on dense user and item indices and on the catalog.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .dataset import Dataset, DatasetError, Interaction, read_interactions, write_interactions
from .utils import check_fraction, check_positive_int, check_rng, derive_seed, log_stage, ratio_count

STRATEGIES = (
    "temporal_hold_out",
    "temporal_leave_n_out",
    "fixed_timestamp",
    "best_timestamp",
    "random_subsampling",
    "random_cross_validation",
    "fix",
)


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    strategy: str
    test_ratio: Optional[float] = None
    leave_n_out: Optional[int] = None
    folds: Optional[int] = None
    timestamp: Optional[int] = None
    train_path: Optional[str] = None
    test_path: Optional[str] = None

    def __post_init__(self):
        s = self.strategy
        if s not in STRATEGIES:
            raise SplitError(f"unknown splitting strategy {s!r}; valid: {', '.join(STRATEGIES)}")
        if self.test_ratio is not None:
            check_fraction(self.test_ratio, "test_ratio")
        if self.leave_n_out is not None:
            check_positive_int(self.leave_n_out, "leave_n_out")
        if self.folds is not None:
            check_positive_int(self.folds, "folds")
        if s in ("temporal_hold_out", "random_subsampling"):
            if (self.test_ratio is None) == (self.leave_n_out is None):
                raise SplitError(f"{s} requires exactly one of test_ratio / leave_n_out")
        elif s == "best_timestamp" and self.test_ratio is None:
            raise SplitError("best_timestamp requires test_ratio")
        elif s == "fixed_timestamp" and self.timestamp is None:
            raise SplitError("fixed_timestamp requires timestamp")
        elif s == "fix" and (self.train_path is None or self.test_path is None):
            raise SplitError("fix requires train_path and test_path")
        elif s == "random_cross_validation" and self.folds is None:
            raise SplitError("random_cross_validation requires folds")


@dataclass(frozen=True)
class SplittingConfig:
    test: SplitSpec
    validation: Optional[SplitSpec] = None


@dataclass
class ValidationFold:
    train: Dataset
    validation: Dataset


@dataclass
class Fold:
    train: Dataset
    test: Dataset
    validation_folds: Optional[List[ValidationFold]] = None


@dataclass
class SplitPlan:
    folds: List[Fold] = field(default_factory=list)

    def __len__(self):
        return len(self.folds)


def _plan_from_masks(dataset, test_masks) -> SplitPlan:
    return SplitPlan([Fold(dataset.select(~m, prune=False), dataset.select(m, prune=False))
                      for m in test_masks])


def _positions_in_user(users, order):
    """Rank of each interaction inside its user's group under ``order``."""
    pos = np.empty(len(users), dtype=np.int64)
    sorted_users = users[order]
    starts = np.r_[0, np.flatnonzero(np.diff(sorted_users)) + 1]
    group_start = np.repeat(starts, np.diff(np.r_[starts, len(users)]))
    pos[order] = np.arange(len(users)) - group_start
    return pos


def _tail_mask(dataset, order, counts_fn, what):
    """Mark the last ``counts_fn(n_u)`` interactions of each user under ``order``.

    A user whose test share would swallow the whole profile stays in train.
    """
    sizes = dataset.user_profile_sizes
    want = np.array([counts_fn(int(n)) for n in sizes], dtype=np.int64)
    starved = (want >= sizes) & (sizes > 0)
    if starved.any():
        log_stage("SPLIT", "%s: %d users too small to hold out anything; kept in train",
                  what, int(starved.sum()), level=30)
        want[starved] = 0
    pos = _positions_in_user(dataset.users, order)
    n_u = sizes[dataset.users]
    return pos >= n_u - want[dataset.users]


def _require_timestamps(dataset, strategy):
    if not dataset.has_timestamps:
        raise SplitError(f"{strategy} needs a timestamp on every interaction")


def _chronological(dataset):
    return np.lexsort((dataset.items, dataset.timestamps, dataset.users))


def find_best_timestamp(dataset: Dataset, target_ratio: float) -> int:
    """Observed timestamp T minimising sum_u |share of u's events after T - target|.

    Exact rational arithmetic; ties go to the smaller T.  Sweeps the
    candidates in ascending order, updating only the user whose event is
    crossed.
    """
    _require_timestamps(dataset, "best_timestamp")
    # decimal repr so that 0.2 is exactly 1/5
    target = Fraction(repr(check_fraction(target_ratio, "target_ratio")))
    sizes = dataset.user_profile_sizes.tolist()
    n_active = sum(1 for s in sizes if s)
    # before the first candidate every event lies after T: share 1
    le = [0] * dataset.n_users
    total = n_active * abs(1 - target)
    order = np.argsort(dataset.timestamps, kind="stable")
    ts = dataset.timestamps[order].tolist()
    us = dataset.users[order].tolist()
    best_t, best_obj = None, None
    k = 0
    n = len(ts)
    while k < n:
        t = ts[k]
        while k < n and ts[k] == t:
            u = us[k]
            nu = sizes[u]
            old = abs(Fraction(nu - le[u], nu) - target)
            le[u] += 1
            total += abs(Fraction(nu - le[u], nu) - target) - old
            k += 1
        if best_obj is None or total < best_obj:
            best_t, best_obj = t, total
    return best_t


def temporal_split(dataset: Dataset, spec: SplitSpec) -> SplitPlan:
    s = spec.strategy
    _require_timestamps(dataset, s)
    if s in ("temporal_hold_out", "temporal_leave_n_out"):
        order = _chronological(dataset)
        if spec.test_ratio is not None and s == "temporal_hold_out":
            mask = _tail_mask(dataset, order, lambda n: ratio_count(spec.test_ratio, n), s)
        else:
            n_out = spec.leave_n_out or 1
            mask = _tail_mask(dataset, order, lambda n: n_out, s)
        return _plan_from_masks(dataset, [mask])
    if s == "fixed_timestamp":
        return _plan_from_masks(dataset, [dataset.timestamps > int(spec.timestamp)])
    if s == "best_timestamp":
        t_star = find_best_timestamp(dataset, spec.test_ratio)
        log_stage("SPLIT", "best timestamp for test ratio %s: %d", spec.test_ratio, t_star)
        return _plan_from_masks(dataset, [dataset.timestamps > t_star])
    raise SplitError(f"{s} is not a temporal strategy")


def random_split(dataset: Dataset, spec: SplitSpec, rng) -> SplitPlan:
    """Random hold-out, K-repeated hold-out and user-level k-fold CV.

    Repeated hold-out by ratio (``folds > 1`` with ``test_ratio``) samples
    interactions system-wide; every other variant works per user.
    """
    rng = check_rng(rng)
    base = int(rng.integers(2**63 - 1))
    s = spec.strategy
    n = dataset.n_interactions
    if s == "random_subsampling":
        repeats = spec.folds or 1
        masks = []
        for r in range(repeats):
            sub = np.random.default_rng([base, r])
            if spec.test_ratio is not None and repeats > 1:
                mask = np.zeros(n, dtype=bool)
                mask[sub.permutation(n)[:ratio_count(spec.test_ratio, n)]] = True
            else:
                order = np.lexsort((sub.random(n), dataset.users))
                if spec.test_ratio is not None:
                    fn = lambda m: ratio_count(spec.test_ratio, m)  # noqa: E731
                else:
                    fn = lambda m: spec.leave_n_out  # noqa: E731
                mask = _tail_mask(dataset, order, fn, s)
            masks.append(mask)
        return _plan_from_masks(dataset, masks)
    if s == "random_cross_validation":
        k = spec.folds
        sub = np.random.default_rng([base, 0])
        order = np.lexsort((sub.random(n), dataset.users))
        fold_of = _positions_in_user(dataset.users, order) % k
        small = int(np.count_nonzero((dataset.user_profile_sizes > 0)
                                     & (dataset.user_profile_sizes < k)))
        if small:
            log_stage("SPLIT", "%d users have fewer interactions than %d folds; "
                      "they stay in train for the deficient folds", small, k, level=30)
        return _plan_from_masks(dataset, [fold_of == j for j in range(k)])
    raise SplitError(f"{s} is not a random strategy")


def fixed_split(train_path, test_path, dataset: Optional[Dataset] = None) -> SplitPlan:
    """Precomputed split read from two interaction files.

    When ``dataset`` is given (e.g. the prefiltered union) only its
    interactions are kept and its vocabulary is used.
    """
    train_records = read_interactions(train_path)
    test_records = read_interactions(test_path)
    union, train_pairs, test_pairs = _union_of(train_records, test_records)
    if dataset is None:
        dataset = union
    return fixed_split_from_pairs(dataset, train_pairs, test_pairs)


def _union_of(train_records, test_records):
    train_pairs = {(r.user, r.item) for r in train_records}
    test_pairs = {(r.user, r.item) for r in test_records}
    overlap = train_pairs & test_pairs
    if overlap:
        u, i = sorted(overlap)[0]
        raise DatasetError(f"{len(overlap)} (user, item) pairs occur in both train and test, "
                           f"e.g. ({u}, {i})")
    union = Dataset.from_interactions(list(train_records) + list(test_records))
    return union, train_pairs, test_pairs


def load_fixed_union(train_path, test_path):
    for p in (train_path, test_path):
        if not os.path.exists(p):
            raise DatasetError(f"split file not found: {p}")
    return _union_of(read_interactions(train_path), read_interactions(test_path))


def fixed_split_from_pairs(dataset, train_pairs, test_pairs) -> SplitPlan:
    uids, iids = dataset.user_ids, dataset.item_ids
    pairs = [(uids[u], iids[i]) for u, i in zip(dataset.users.tolist(), dataset.items.tolist())]
    test_mask = np.array([p in test_pairs for p in pairs], dtype=bool)
    train_mask = np.array([p in train_pairs for p in pairs], dtype=bool)
    train = dataset.select(train_mask, prune=False)
    test = dataset.select(test_mask, prune=False)
    cold = np.count_nonzero((test.user_profile_sizes > 0) & (train.user_profile_sizes == 0))
    if cold:
        log_stage("SPLIT", "%d test users have no training interactions (cold start)", cold,
                  level=30)
    return SplitPlan([Fold(train, test)])


def split_once(dataset: Dataset, spec: SplitSpec, seed) -> SplitPlan:
    if spec.strategy in ("temporal_hold_out", "temporal_leave_n_out",
                         "fixed_timestamp", "best_timestamp"):
        return temporal_split(dataset, spec)
    if spec.strategy in ("random_subsampling", "random_cross_validation"):
        return random_split(dataset, spec, np.random.default_rng(seed))
    if spec.strategy == "fix":
        return fixed_split(spec.train_path, spec.test_path, dataset)
    raise SplitError(f"unknown splitting strategy {spec.strategy!r}")


def split_dataset(dataset: Dataset, config: SplittingConfig, seed=42) -> SplitPlan:
    """Test split, then the validation split applied to every fold's train set."""
    if dataset.n_interactions == 0:
        raise SplitError("cannot split an empty dataset")
    plan = split_once(dataset, config.test, derive_seed(seed, "test-split"))
    for f, fold in enumerate(plan.folds):
        if fold.train.n_interactions == 0 or fold.test.n_interactions == 0:
            raise SplitError(f"fold {f}: empty train or test partition")
        if config.validation is not None:
            inner = split_once(fold.train, config.validation,
                               derive_seed(seed, "validation-split", f))
            fold.validation_folds = [ValidationFold(v.train, v.test) for v in inner.folds]
    log_stage("SPLIT", "%s: %d fold(s), fold 0 train %d / test %d", config.test.strategy,
              len(plan), plan.folds[0].train.n_interactions, plan.folds[0].test.n_interactions)
    return plan


def dump_splits(plan: SplitPlan, out_dir) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for f, fold in enumerate(plan.folds):
        for part, ds in (("train", fold.train), ("test", fold.test)):
            path = os.path.join(out_dir, f"{part}_{f}.tsv")
            write_interactions(ds, path)
            written.append(path)
        for v, vf in enumerate(fold.validation_folds or []):
            for part, ds in (("train", vf.train), ("validation", vf.validation)):
                path = os.path.join(out_dir, f"{part}_{f}_{v}.tsv")
                write_interactions(ds, path)
                written.append(path)
    return written
