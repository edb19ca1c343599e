"""Deterministic synthetic datasets for tests, scenarios and benchmarks.

``group_structured`` mimics a movie catalog: items belong to genres, users
prefer a few genres, item popularity follows a Zipf law and every event has
a timestamp.  ``two_block`` is the minimal two-community dataset used to
check that latent-factor models learn block structure.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Interaction, write_interactions


@dataclass
class SyntheticData:
    dataset: Dataset
    attributes: dict        # item id -> set of features
    user_clusters: dict     # user id -> label
    item_clusters: dict     # item id -> label

    def with_attributes(self) -> Dataset:
        """The dataset with the item feature sets attached."""
        ds = self.dataset
        return ds.with_attributes([self.attributes.get(i, ()) for i in ds.item_ids])


def _ids(prefix, n):
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{k:0{width}d}" for k in range(n)]


def group_structured(n_users=300, n_items=400, n_groups=8, mean_profile=40, zipf=0.9,
                     affinity=12.0, n_tags=20, tags_per_item=2, seed=0) -> SyntheticData:
    """Popularity-skewed interactions with genre structure.

    Each user draws ``mean_profile`` items on average (at least 8) without
    replacement, with weight popularity * (``affinity`` if the item's genre
    is among the user's favourite two, else 1).  Ratings are 1..5 and higher
    inside favourite genres.
    """
    rng = np.random.default_rng(seed)
    uids, iids = _ids("u", n_users), _ids("i", n_items)
    genre = rng.integers(n_groups, size=n_items)
    pop = 1.0 / np.arange(1, n_items + 1) ** zipf
    pop = pop[rng.permutation(n_items)]
    favs = np.stack([rng.choice(n_groups, size=2, replace=False) for _ in range(n_users)])
    sizes = np.clip(rng.geometric(1.0 / mean_profile, size=n_users), 8, n_items // 2)
    start = rng.integers(0, 10**6, size=n_users)
    records = []
    for u in range(n_users):
        liked = np.isin(genre, favs[u])
        w = np.log(pop) + np.log(np.where(liked, affinity, 1.0))
        keys = w + rng.gumbel(size=n_items)
        chosen = np.argsort(-keys, kind="stable")[: sizes[u]]
        base = np.where(liked[chosen], 4.0, 2.5)
        ratings = np.clip(np.rint(base + rng.normal(0, 0.8, size=len(chosen))), 1, 5)
        stamps = start[u] + np.cumsum(rng.integers(1, 5000, size=len(chosen)))
        records.extend(Interaction(uids[u], iids[i], float(r), int(t))
                       for i, r, t in zip(chosen.tolist(), ratings.tolist(), stamps.tolist()))
    ds = Dataset.from_interactions(records, name="synthetic")
    attributes = {}
    for i in range(n_items):
        tags = rng.choice(n_tags, size=tags_per_item, replace=False)
        attributes[iids[i]] = {f"genre{genre[i]}"} | {f"tag{t}" for t in sorted(tags.tolist())}
    means = {}
    for u, r in zip(ds.users.tolist(), ds.ratings.tolist()):
        means.setdefault(ds.user_ids[u], []).append(r)
    user_clusters = {u: ("happy" if np.mean(v) >= 3.5 else "unhappy")
                     for u, v in sorted(means.items())}
    counts = ds.item_popularity
    cut = np.median(counts)
    item_clusters = {ds.item_ids[i]: ("popular" if counts[i] > cut else "niche")
                     for i in range(ds.n_items)}
    return SyntheticData(ds, attributes, user_clusters, item_clusters)


def benchmark_data(seed=0) -> SyntheticData:
    """About 50k interactions over 1000 users and 1500 items."""
    return group_structured(n_users=1000, n_items=1500, n_groups=12, mean_profile=50,
                            seed=seed)


def two_block(n_users=100, n_items=80, p_in=0.3, p_out=0.02, seed=0) -> Dataset:
    """Users and items split into two halves; interactions mostly inside a block."""
    rng = np.random.default_rng(seed)
    ub = np.arange(n_users) >= n_users // 2
    ib = np.arange(n_items) >= n_items // 2
    same = ub[:, None] == ib[None, :]
    X = rng.random((n_users, n_items)) < np.where(same, p_in, p_out)
    for u in np.flatnonzero(X.sum(axis=1) == 0):  # no empty profiles
        block = np.flatnonzero(ib == ub[u])
        X[u, rng.choice(block)] = True
    return Dataset.from_matrix(X.astype(np.float64), name="two_block")


def write_synthetic(data: SyntheticData, out_dir, prefix="") -> dict:
    """Write dataset, attribute and cluster TSVs; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {k: os.path.join(out_dir, f"{prefix}{k}.tsv")
             for k in ("dataset", "attributes", "user_clusters", "item_clusters")}
    write_interactions(data.dataset, paths["dataset"])
    with open(paths["attributes"], "w", encoding="utf-8", newline="\n") as fh:
        for item in sorted(data.attributes):
            fh.write("\t".join([item] + sorted(data.attributes[item])) + "\n")
    for key, clusters in (("user_clusters", data.user_clusters),
                          ("item_clusters", data.item_clusters)):
        with open(paths[key], "w", encoding="utf-8", newline="\n") as fh:
            for e in sorted(clusters):
                fh.write(f"{e}\t{clusters[e]}\n")
    return paths
