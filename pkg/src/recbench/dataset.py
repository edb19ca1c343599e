"""Interaction storage and the TSV loaders for interactions, attributes and clusters."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .utils import log_stage


class DatasetError(ValueError):
    """Raised for malformed or unusable data files."""


@dataclass(frozen=True)
class Interaction:
    user: str
    item: str
    rating: float
    timestamp: Optional[int] = None


_NO_TIME = -1


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Dataset:
    """Immutable indexed interaction store.

    Interactions are kept as parallel arrays of dense user/item indices,
    ratings and timestamps (``-1`` marks a missing timestamp), sorted by
    (user, item).  Dense indices follow the order of ``user_ids`` and
    ``item_ids``; :meth:`from_interactions` sorts external ids so that the
    dense order is also the lexicographic id order.

    A dataset may carry vocabulary entries with no interactions: train/test
    partitions share the vocabulary of the dataset they were cut from, so
    the catalog is the same on both sides.
    """

    __slots__ = ("users", "items", "ratings", "timestamps", "user_ids", "item_ids",
                 "attributes", "name", "_user_index", "_item_index")

    def __init__(self, users, items, ratings, timestamps, user_ids, item_ids,
                 attributes=None, name=""):
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        ratings = np.asarray(ratings, dtype=np.float64)
        timestamps = np.asarray(timestamps, dtype=np.int64)
        if not (len(users) == len(items) == len(ratings) == len(timestamps)):
            raise ValueError("interaction arrays must have equal length")
        order = np.lexsort((items, users))
        if len(order) and not np.all(order == np.arange(len(order))):
            users, items, ratings, timestamps = (
                users[order], items[order], ratings[order], timestamps[order])
        self.users = _readonly(users)
        self.items = _readonly(items)
        self.ratings = _readonly(ratings)
        self.timestamps = _readonly(timestamps)
        self.user_ids = tuple(user_ids)
        self.item_ids = tuple(item_ids)
        if attributes is not None:
            attributes = tuple(frozenset(a) for a in attributes)
            if len(attributes) != len(self.item_ids):
                raise ValueError("attributes must align with item_ids")
        self.attributes = attributes
        self.name = name
        self._user_index = None
        self._item_index = None

    # construction -----------------------------------------------------

    @classmethod
    def from_interactions(cls, interactions: Iterable, name="", user_ids=None, item_ids=None):
        """Deduplicate and index raw interactions.

        Duplicate (user, item) pairs keep the interaction with the greatest
        timestamp, the last occurrence winning ties or missing timestamps.
        An explicit vocabulary may be passed; otherwise sorted external ids
        are used.
        """
        latest = {}
        for pos, it in enumerate(interactions):
            if not isinstance(it, Interaction):
                it = Interaction(*it)
            key = (it.user, it.item)
            t = _NO_TIME if it.timestamp is None else int(it.timestamp)
            prev = latest.get(key)
            if prev is None or (t, pos) >= (prev[0], prev[1]):
                latest[key] = (t, pos, float(it.rating))
        if user_ids is None:
            user_ids = sorted({u for u, _ in latest})
        if item_ids is None:
            item_ids = sorted({i for _, i in latest})
        uidx = {u: k for k, u in enumerate(user_ids)}
        iidx = {i: k for k, i in enumerate(item_ids)}
        n = len(latest)
        users = np.empty(n, dtype=np.int64)
        items = np.empty(n, dtype=np.int64)
        ratings = np.empty(n, dtype=np.float64)
        stamps = np.empty(n, dtype=np.int64)
        for k, ((u, i), (t, _, r)) in enumerate(latest.items()):
            users[k] = uidx[u]
            items[k] = iidx[i]
            ratings[k] = r
            stamps[k] = t
        return cls(users, items, ratings, stamps, user_ids, item_ids, name=name)

    @classmethod
    def from_matrix(cls, X, name=""):
        """Wrap a user x item rating matrix; ids are the row/column numbers."""
        X = sp.coo_matrix(X)
        keep = X.data != 0
        n_users, n_items = X.shape
        return cls(X.row[keep], X.col[keep], X.data[keep],
                   np.full(int(keep.sum()), _NO_TIME),
                   [str(u) for u in range(n_users)],
                   [str(i) for i in range(n_items)], name=name)

    # basic properties -------------------------------------------------

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def catalog_size(self) -> int:
        return len(self.item_ids)

    @property
    def n_interactions(self) -> int:
        return len(self.users)

    def __len__(self):
        return len(self.users)

    @property
    def density(self) -> float:
        cells = self.n_users * self.n_items
        return self.n_interactions / cells if cells else 0.0

    @property
    def has_timestamps(self) -> bool:
        return self.n_interactions > 0 and bool(np.all(self.timestamps >= 0))

    @property
    def item_popularity(self) -> np.ndarray:
        return np.bincount(self.items, minlength=self.n_items)

    @property
    def user_profile_sizes(self) -> np.ndarray:
        return np.bincount(self.users, minlength=self.n_users)

    @property
    def user_index(self) -> Mapping[str, int]:
        if self._user_index is None:
            self._user_index = {u: k for k, u in enumerate(self.user_ids)}
        return self._user_index

    @property
    def item_index(self) -> Mapping[str, int]:
        if self._item_index is None:
            self._item_index = {i: k for k, i in enumerate(self.item_ids)}
        return self._item_index

    @property
    def interactions(self) -> list:
        return [
            Interaction(self.user_ids[u], self.item_ids[i], float(r),
                        None if t == _NO_TIME else int(t))
            for u, i, r, t in zip(self.users.tolist(), self.items.tolist(),
                                  self.ratings.tolist(), self.timestamps.tolist())
        ]

    def summary(self) -> dict:
        return {
            "users": int(np.count_nonzero(self.user_profile_sizes)),
            "items": int(np.count_nonzero(self.item_popularity)),
            "interactions": self.n_interactions,
            "density": self.density,
        }

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.ratings, (self.users, self.items)),
                             shape=(self.n_users, self.n_items))

    def pair_codes(self) -> np.ndarray:
        """Sorted int64 codes ``user * n_items + item``, for fast membership tests."""
        return self.users * self.n_items + self.items

    def attribute_matrix(self) -> sp.csr_matrix:
        """Binary item x feature matrix (features in sorted order)."""
        if self.attributes is None:
            raise DatasetError("dataset has no item attributes")
        features = sorted(set().union(*self.attributes)) if self.attributes else []
        fidx = {f: k for k, f in enumerate(features)}
        rows, cols = [], []
        for i, feats in enumerate(self.attributes):
            for f in feats:
                rows.append(i)
                cols.append(fidx[f])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_items, len(features)))

    # derivation -------------------------------------------------------

    def select(self, mask, prune=True) -> "Dataset":
        """Keep the interactions where ``mask`` is true.

        With ``prune`` users and items left without interactions are dropped
        and indices rebuilt contiguously; otherwise the vocabulary is kept.
        """
        mask = np.asarray(mask, dtype=bool)
        users, items = self.users[mask], self.items[mask]
        ratings, stamps = self.ratings[mask], self.timestamps[mask]
        if not prune:
            return Dataset(users, items, ratings, stamps, self.user_ids, self.item_ids,
                           self.attributes, self.name)
        kept_u = np.unique(users)
        kept_i = np.unique(items)
        umap = np.full(self.n_users, -1, dtype=np.int64)
        umap[kept_u] = np.arange(len(kept_u))
        imap = np.full(self.n_items, -1, dtype=np.int64)
        imap[kept_i] = np.arange(len(kept_i))
        attrs = None
        if self.attributes is not None:
            attrs = [self.attributes[i] for i in kept_i.tolist()]
        return Dataset(umap[users], imap[items], ratings, stamps,
                       [self.user_ids[u] for u in kept_u.tolist()],
                       [self.item_ids[i] for i in kept_i.tolist()], attrs, self.name)

    def with_attributes(self, attributes) -> "Dataset":
        return Dataset(self.users, self.items, self.ratings, self.timestamps,
                       self.user_ids, self.item_ids, attributes, self.name)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.user_ids == other.user_ids and self.item_ids == other.item_ids
                and np.array_equal(self.users, other.users)
                and np.array_equal(self.items, other.items)
                and np.array_equal(self.ratings, other.ratings)
                and np.array_equal(self.timestamps, other.timestamps)
                and self.attributes == other.attributes)

    __hash__ = None

    def __repr__(self):
        return (f"Dataset(name={self.name!r}, users={self.n_users}, items={self.n_items}, "
                f"interactions={self.n_interactions})")


# file formats ---------------------------------------------------------


def _lines(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.strip():
                yield lineno, line


def read_interactions(path) -> list:
    """Parse ``user\\titem\\trating[\\ttimestamp]`` lines."""
    out = []
    for lineno, line in _lines(path):
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise DatasetError(f"{path}:{lineno}: expected 3 or 4 tab-separated fields, "
                               f"got {len(fields)}")
        try:
            rating = float(fields[2])
        except ValueError:
            raise DatasetError(f"{path}:{lineno}: unparsable rating {fields[2]!r}") from None
        if not math.isfinite(rating):
            raise DatasetError(f"{path}:{lineno}: rating must be finite, got {fields[2]!r}")
        ts = None
        if len(fields) == 4:
            try:
                ts = int(fields[3])
            except ValueError:
                try:
                    f = float(fields[3])
                except ValueError:
                    f = float("nan")
                if not f.is_integer():
                    raise DatasetError(
                        f"{path}:{lineno}: unparsable timestamp {fields[3]!r}") from None
                ts = int(f)
            if ts < 0:
                raise DatasetError(f"{path}:{lineno}: negative timestamp {ts}")
        out.append(Interaction(fields[0], fields[1], rating, ts))
    return out


def load_dataset(config_or_path, name="") -> Dataset:
    """Load an interaction TSV into a deduplicated :class:`Dataset`.

    Accepts a path or any object with a ``dataset_path`` attribute.
    """
    path = getattr(config_or_path, "dataset_path", config_or_path)
    if not os.path.exists(path):
        raise DatasetError(f"dataset file not found: {path}")
    records = read_interactions(path)
    if not records:
        raise DatasetError(f"dataset {path} is empty")
    ds = Dataset.from_interactions(records, name=name)
    s = ds.summary()
    log_stage("LOAD", "%s: %d users, %d items, %d interactions, density %.6f",
              path, s["users"], s["items"], s["interactions"], s["density"])
    if not ds.has_timestamps:
        log_stage("LOAD", "no (complete) timestamp column; temporal splitting unavailable")
    return ds


def read_attributes(path) -> dict:
    feats = {}
    for lineno, line in _lines(path):
        fields = line.split("\t")
        item = fields[0]
        feats.setdefault(item, set()).update(f for f in fields[1:] if f)
    return feats


def load_attributes(path, dataset: Dataset) -> Dataset:
    """Attach item feature sets; items without features (and their interactions) are dropped."""
    if not os.path.exists(path):
        raise DatasetError(f"attribute file not found: {path}")
    feats = read_attributes(path)
    covered = np.array([bool(feats.get(i)) for i in dataset.item_ids], dtype=bool)
    if not covered.any():
        raise DatasetError(f"attribute file {path} covers none of the dataset's items")
    attrs = [frozenset(feats.get(i, ())) for i in dataset.item_ids]
    ds = dataset.with_attributes(attrs)
    dropped = int((~covered).sum())
    if dropped:
        ds = ds.select(covered[ds.items], prune=True)
        # items with no interactions at all are also absent after pruning; only
        # covered items survive
        log_stage("LOAD", "dropped %d items without side information", dropped)
    return ds


def load_clusters(path) -> dict:
    """Read ``entity\\tcluster`` lines into a mapping."""
    if not os.path.exists(path):
        raise DatasetError(f"cluster file not found: {path}")
    out = {}
    for lineno, line in _lines(path):
        fields = line.split("\t")
        if len(fields) < 2:
            raise DatasetError(f"{path}:{lineno}: expected 'entity<TAB>cluster'")
        out[fields[0]] = fields[1]
    return out


def write_interactions(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for it in dataset.interactions:
            row = [it.user, it.item, repr(it.rating) if not it.rating.is_integer()
                   else str(int(it.rating))]
            if it.timestamp is not None:
                row.append(str(it.timestamp))
            fh.write("\t".join(row) + "\n")
