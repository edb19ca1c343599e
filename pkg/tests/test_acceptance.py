"""Acceptance criteria 1-9; each test prints one PASS/FAIL line."""
import math
import os
import time

import numpy as np
import pytest
import yaml
from scipy import stats as sps

import conftest
from recbench.cli import main
from recbench.config import EnumerationError, load_config, parse_config
from recbench.experiment import run_experiment
from recbench.hyperopt import Choice, LogUniform, grid_expand
from recbench.metrics import METRICS
from recbench.prefiltering import iterative_k_core
from recbench.recommenders import BPRMF
from recbench.splitting import SplitSpec, random_split, temporal_split
from recbench.stats import (paired_t_test, t_two_sided_p, wilcoxon_brute_force_p,
                            wilcoxon_exact_p, wilcoxon_signed_rank)
from recbench.synthetic import benchmark_data, two_block, write_synthetic

from instances import (block_preference_share, evaluate_instance, finite_difference_check,
                       ks_uniform, pairs_of, random_dataset, random_metric_instance,
                       tpe_beats_random)
from oracles import all_metrics

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")
FIXTURES = os.path.join(ROOT, "tests", "fixtures", "paper_configs")


@pytest.fixture
def report():
    """Record the criterion's PASS/FAIL line for the terminal summary."""
    def emit(n, ok, detail):
        conftest.ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return emit


# 1 ---------------------------------------------------------------------------

def test_criterion_1_metric_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, mismatches, compared = 0.0, [], 0
    for n in range(200):
        inst = random_metric_instance(rng, max_users=10, max_items=15, k_values=(1, 3, 5))
        k = inst["k"]
        rep = evaluate_instance(inst)
        want = all_metrics(inst["items"], inst["scores"], inst["relevant"], inst["counts"], k,
                           inst["pred"], inst["truth"], inst["user_clusters"],
                           inst["item_clusters"])
        for name in METRICS:
            got, ref = rep.value(name, k), want[name]
            compared += 1
            if (got is None) != (ref is None):
                mismatches.append((n, name, got, ref))
            elif got is not None:
                err = abs(got - ref)
                worst = max(worst, err)
                if err > 1e-9:
                    mismatches.append((n, name, got, ref))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 10 and len(METRICS) == 24
    report(1, ok, f"{compared} values over 200 instances x {len(METRICS)} metrics, "
                  f"max |diff| {worst:.2e}, {len(mismatches)} mismatches, {elapsed:.2f}s")
    assert not mismatches, mismatches[:5]
    assert elapsed < 10


# 2 and 3 ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def benchmark_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("benchmark")
    write_synthetic(benchmark_data(seed=0), d)
    return d


def _benchmark_config(d, models, attributes=False):
    data = {"strategy": "dataset", "dataset_path": "dataset.tsv"}
    if attributes:
        data["side_information"] = {"attribute_path": "attributes.tsv"}
    return parse_config(yaml.safe_dump({"experiment": {
        "dataset": "benchmark", "data_config": data,
        "splitting": {"test_splitting": {"strategy": "temporal_hold_out", "test_ratio": 0.2},
                      "validation_splitting": {"strategy": "random_subsampling",
                                               "test_ratio": 0.2}},
        "models": models,
        "evaluation": {"cutoffs": [10, 5], "simple_metrics": ["nDCG", "ItemCoverage"],
                       "relevance_threshold": 1},
        "top_k": 10, "random_seed": 42}}, sort_keys=False), base_dir=str(d))


@pytest.mark.slow
def test_criterion_2_ordering(report, benchmark_dir):
    t0 = time.perf_counter()
    cfg = _benchmark_config(benchmark_dir, {
        "Random": {"meta": {"validation_metric": "nDCG@10"}},
        "MostPop": {"meta": {"validation_metric": "nDCG@10"}},
        "ItemKNN": {"meta": {"hyper_opt_alg": "grid", "validation_metric": "nDCG@10"},
                    "neighbors": [50, 100, 200], "similarity": ["cosine", "jaccard"]}})
    r = run_experiment(cfg, workers=4)
    elapsed = time.perf_counter() - t0
    nd = {m: r.models[m].report.value("nDCG", 5) for m in ("ItemKNN", "MostPop", "Random")}
    cov = r.models["Random"].report.value("ItemCoverage", 10)
    catalog = r.dataset_summary["items"]
    ordered = nd["ItemKNN"] > nd["MostPop"] > nd["Random"]
    ok = ordered and cov >= 0.99 * catalog and elapsed < 300
    report(2, ok, f"{r.dataset_summary['interactions']} interactions; nDCG@5 ItemKNN "
                  f"{nd['ItemKNN']:.4f} > MostPop {nd['MostPop']:.4f} > Random "
                  f"{nd['Random']:.4f}; Random ItemCoverage@10 {cov:.0f}/{catalog}; "
                  f"{elapsed:.1f}s")
    assert r.dataset_summary["interactions"] >= 50_000
    assert ordered
    assert cov >= 0.99 * catalog
    assert elapsed < 300


@pytest.mark.slow
def test_criterion_3_attribute_coverage(report, benchmark_dir):
    grid = {"neighbors": [50, 100], "similarity": ["cosine", "jaccard"],
            "meta": {"hyper_opt_alg": "grid", "validation_metric": "nDCG@10"}}
    cfg = _benchmark_config(benchmark_dir, {"ItemKNN": grid, "AttributeItemKNN": grid},
                            attributes=True)
    r = run_experiment(cfg, workers=4)
    a = r.models["AttributeItemKNN"].report.value("ItemCoverage", 10)
    b = r.models["ItemKNN"].report.value("ItemCoverage", 10)
    same_budget = len(r.models["AttributeItemKNN"].trials) == len(r.models["ItemKNN"].trials)
    ok = a >= b and same_budget
    report(3, ok, f"ItemCoverage@10 AttributeItemKNN {a:.0f} >= ItemKNN {b:.0f} "
                  f"({len(r.models['ItemKNN'].trials)} trials each)")
    assert same_budget
    assert a >= b


# 4 ---------------------------------------------------------------------------

def _property_violations(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng)
    out = []
    k = int(rng.integers(1, 5))
    core, _ = iterative_k_core(ds, k)
    if core.n_interactions and (core.user_profile_sizes[core.user_profile_sizes > 0].min() < k
                                or core.item_popularity[core.item_popularity > 0].min() < k):
        out.append("k-core")
    spec = SplitSpec("temporal_hold_out", test_ratio=float(rng.uniform(0.1, 0.9)))
    fold = temporal_split(ds, spec).folds[0]
    last, first = {}, {}
    for it in fold.train.interactions:
        last[it.user] = max(last.get(it.user, -1), it.timestamp)
    for it in fold.test.interactions:
        first[it.user] = min(first.get(it.user, math.inf), it.timestamp)
    if any(last[u] > first[u] for u in first if u in last):
        out.append("temporal")
    folds = int(rng.integers(2, 6))
    plan = random_split(ds, SplitSpec("random_cross_validation", folds=folds), seed)
    tests = [set(pairs_of(f.test)) for f in plan.folds]
    if sum(len(t) for t in tests) != len(set().union(*tests)) \
            or set().union(*tests) != set(pairs_of(ds)) \
            or any(set(pairs_of(f.train)) != set(pairs_of(ds)) - t
                   for f, t in zip(plan.folds, tests)):
        out.append("cv-partition")
    spec = SplitSpec("random_subsampling", test_ratio=0.3, folds=2)
    a, b = random_split(ds, spec, seed), random_split(ds, spec, seed)
    if any(fa.test != fb.test or fa.train != fb.train for fa, fb in zip(a.folds, b.folds)):
        out.append("determinism")
    return out


def test_criterion_4_prefilter_split_invariants(report):
    violations = []
    for seed in range(1000):
        violations += [(seed, v) for v in _property_violations(seed)]
    report(4, not violations, f"1000 trials x 4 invariants (k-core fixpoint, temporal order, "
                              f"CV partition, seeded determinism): {len(violations)} violations")
    assert not violations, violations[:10]


# 5 ---------------------------------------------------------------------------

def test_criterion_5_statistics(report):
    exact_ok = all(wilcoxon_exact_p(w, n) == wilcoxon_brute_force_p(w, n)
                   for n in range(1, 13) for w in range(n * (n + 1) // 2 + 1))
    t = paired_t_test([1, 2, 3, 4, -1], [0, 0, 0, 0, 0])
    t_ok = abs(t.statistic - 2.0925) <= 1e-3 and abs(t.p_value - 0.105) <= 1e-3 \
        and abs(t_two_sided_p(2.0925, 4) - 0.105) <= 1e-3
    w = wilcoxon_signed_rank([1, -2, 3, 4, 5], [0, 0, 0, 0, 0])
    literal_ok = w.p_value == 0.3125
    ok = exact_ok and t_ok and literal_ok
    report(5, ok, f"exact == enumeration for n<=12: {exact_ok}; t={t.statistic:.4f} "
                  f"p={t.p_value:.5f}: {t_ok}; d=[1,-2,3,4,5] exact p = {w.p_value} "
                  f"(required 0.3125; enumeration gives {wilcoxon_brute_force_p(2, 5)}, "
                  f"scipy gives {sps.wilcoxon([1, -2, 3, 4, 5], method='exact').pvalue})")
    assert exact_ok
    assert t_ok
    assert w.p_value == 0.3125


# 6 ---------------------------------------------------------------------------

def test_criterion_6_hyperopt(report):
    space = {"a": Choice((1, 2)), "b": Choice(("x", "y", "z")), "c": Choice((0.1, 0.2))}
    grid_ok = len(grid_expand(space)) == 2 * 3 * 2
    wins = sum(win for _, win in (tpe_beats_random(k) for k in range(100)))
    rng = np.random.default_rng(6)
    d = LogUniform(-10, -1)
    ks = ks_uniform(np.log([d.sample(rng) for _ in range(10_000)]), -10, -1)
    ok = grid_ok and wins >= 80 and ks < 0.02
    report(6, ok, f"grid 12 == 2x3x2: {grid_ok}; TPE >= random in {wins}/100; "
                  f"LogUniform KS {ks:.4f}")
    assert grid_ok
    assert wins >= 80
    assert ks < 0.02


# 7 ---------------------------------------------------------------------------

def test_criterion_7_bpr(report):
    ds = two_block(seed=0)
    m = BPRMF(factors=8, lr=0.05, epochs=30, reg=0.001, random_state=1).fit(ds)
    share = block_preference_share(m, ds.n_users, ds.n_items)
    grad = finite_difference_check(np.random.default_rng(7), n_points=100)
    ok = share >= 0.95 and grad <= 1e-4
    report(7, ok, f"in-block > cross-block for {share:.0%} of users after 30 epochs; "
                  f"worst gradient relative error {grad:.2e}")
    assert share >= 0.95
    assert grad <= 1e-4


# 8 ---------------------------------------------------------------------------

def _tree(d):
    out = {}
    for root, _, files in os.walk(d):
        for f in files:
            p = os.path.join(root, f)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, d)] = fh.read()
    return out


@pytest.mark.slow
def test_criterion_8_end_to_end_determinism(report, tmp_path):
    diffs = []
    counts = {}
    for name in ("basic_configuration.yml", "advanced_configuration.yml"):
        trees = []
        for run, workers in enumerate((1, 1, 8)):
            out = tmp_path / f"{name}-{run}"
            code = main(["-q", "run", os.path.join(SCENARIOS, name), "--out", str(out),
                         "--seed", "42", "--workers", str(workers)])
            assert code == 0
            trees.append(_tree(out))
        counts[name] = len(trees[0])
        for other in trees[1:]:
            if other != trees[0]:
                diffs.append((name, sorted(k for k in set(other) | set(trees[0])
                                           if other.get(k) != trees[0].get(k))))
    report(8, not diffs, f"basic ({counts.get('basic_configuration.yml')} files) and advanced "
                         f"({counts.get('advanced_configuration.yml')} files), seed 42, runs "
                         f"with workers 1, 1, 8: {'identical' if not diffs else diffs}")
    assert not diffs


# 9 ---------------------------------------------------------------------------

def test_criterion_9_config_fidelity(report, capsys):
    one = load_config(os.path.join(FIXTURES, "hello_world.yml"))
    two = load_config(os.path.join(FIXTURES, "basic_configuration.yml"))
    try:
        load_config(os.path.join(FIXTURES, "advanced_configuration.yml"))
        three = None
    except EnumerationError as e:
        three = e
    three_ok = three is not None and "NeuMF" in str(three) \
        and three.partial["splitting"].validation.folds == 5
    codes = [main(["run", os.path.join(FIXTURES, n), "--validate-only"])
             for n in ("hello_world.yml", "basic_configuration.yml")]
    capsys.readouterr()
    ok = bool(one.models) and bool(two.models) and three_ok and codes == [0, 0]
    report(9, ok, f"configs 1-2 parse ({list(one.models)}, {list(two.models)}); config 3 -> "
                  f"{type(three).__name__}: {three}; --validate-only exit codes {codes}")
    assert three_ok
    assert codes == [0, 0]
