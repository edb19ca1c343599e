"""Report files for an :class:`~recbench.experiment.ExperimentResult`.

Every file is a pure function of the result, written in a fixed order, so a
run with the same configuration and seed reproduces the directory byte for
byte.  Wall-clock timings are logged, never written.
"""
from __future__ import annotations

import json
import math
import os

from .config import render_config
from .metrics import METRICS
from .utils import log_stage

SIGNIFICANT = "%.10g"
DAGGER_LEVELS = ((0.001, "‡"), (0.05, "†"))  # double and single dagger


class ReportError(OSError):
    def __init__(self, message, manifest):
        super().__init__(message)
        self.manifest = list(manifest)


def format_value(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    return SIGNIFICANT % v


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def performance_table(result, k) -> str:
    labels = result.config.evaluation.metric_labels
    lines = ["\t".join(["model"] + labels)]
    for m in result.succeeded:
        lines.append("\t".join([m.name] + [format_value(m.report.value(lab, k))
                                           for lab in labels]))
    return "\n".join(lines) + "\n"


def _base_metric(label):
    return label.split("_")[0]


def _column_winner(result, label, k):
    """Best model in a column and the largest p-value against any rival."""
    rows = [(m.name, m.report.value(label, k)) for m in result.succeeded
            if m.report.value(label, k) is not None]
    if len(rows) < 2:
        return None, None
    lower = METRICS[_base_metric(label)].lower_is_better
    best = (min if lower else max)(rows, key=lambda r: r[1])[0]
    pref = "wilcoxon" if result.config.evaluation.wilcoxon_test else "paired_ttest"
    ps = [t.p_value for t in result.tests if t.metric == label and t.cutoff == k
          and t.test == pref and best in (t.model_a, t.model_b)]
    if len(ps) < len(rows) - 1:
        return best, None
    return best, max(1.0 if math.isnan(p) else p for p in ps)


def marked_table(result, k) -> str:
    """Performance table where a column's best model carries a dagger when it
    beats every other model at p <= 0.05 (double dagger: p <= 0.001)."""
    labels = result.config.evaluation.metric_labels
    marks = {}
    for lab in labels:
        best, p = _column_winner(result, lab, k)
        if best is None or p is None:
            continue
        for level, sym in DAGGER_LEVELS:
            if p <= level:
                marks[(best, lab)] = sym
                break
    lines = ["\t".join(["model"] + labels)]
    for m in result.succeeded:
        cells = [format_value(m.report.value(lab, k)) + marks.get((m.name, lab), "")
                 for lab in labels]
        lines.append("\t".join([m.name] + cells))
    return "\n".join(lines) + "\n"


def triples_table(result) -> str:
    labels = result.config.evaluation.metric_labels
    lines = ["Model\tMetric\tValue"]
    for m in result.succeeded:
        for k in result.config.evaluation.cutoffs:
            for lab in labels:
                lines.append(f"{m.name}\t{lab}@{k}\t{format_value(m.report.value(lab, k))}")
    return "\n".join(lines) + "\n"


def best_params(result) -> str:
    out = {}
    for name, m in result.models.items():
        if not m.ok and m.best is None:
            out[name] = {"error": m.error}
            continue
        mc = result.config.models[name]
        entry = {"params": {p: _plain(v) for p, v in sorted(m.best.params.items())},
                 "validation_metric": mc.meta.validation_metric,
                 "objective": _plain(m.best.objective),
                 "fold_scores": [_plain(s) for s in m.best.fold_scores],
                 "hyper_opt_alg": mc.meta.hyper_opt_alg,
                 "trials": len(m.trials),
                 "tuned_on": m.tuned_on}
        if m.error:
            entry["error"] = m.error
        out[name] = entry
    return json.dumps(out, indent=2, ensure_ascii=False) + "\n"


def recs_table(lists) -> str:
    return "".join(f"{u}\t{i}\t{s!r}\n" for u, i, s in lists.rows())


def stats_table(tests) -> str:
    lines = ["model_a\tmodel_b\ttest\tstatistic\tp_value\tn"]
    for t in tests:
        lines.append(f"{t.model_a}\t{t.model_b}\t{t.test}\t{format_value(t.statistic)}\t"
                     f"{format_value(t.p_value)}\t{t.n}")
    return "\n".join(lines) + "\n"


def report_files(result) -> list:
    """(relative path, text) pairs in writing order."""
    cfg = result.config
    files = []
    for k in cfg.evaluation.cutoffs:
        files.append((f"performance_cutoff_{k}.tsv", performance_table(result, k)))
        if result.tests:
            files.append((f"performance_cutoff_{k}_marked.tsv", marked_table(result, k)))
    files.append(("performance_triples.tsv", triples_table(result)))
    files.append(("best_params.json", best_params(result)))
    for m in result.succeeded:
        if cfg.models[m.name].meta.save_recs and m.lists is not None:
            files.append((f"recs/{m.name}.tsv", recs_table(m.lists)))
    groups = {}
    for t in result.tests:
        groups.setdefault((t.metric, t.cutoff), []).append(t)
    for (metric, k), tests in groups.items():
        files.append((f"stats_{metric}@{k}.tsv", stats_table(tests)))
    files.append(("experiment_snapshot.yml", render_config(cfg.with_seed(result.seed))))
    return files


def write_reports(result, out_dir) -> list:
    """Write every report under ``out_dir``; returns the written paths.

    On an I/O error a :class:`ReportError` carries the files written so far.
    """
    manifest = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for rel, text in report_files(result):
            path = os.path.join(out_dir, rel)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            manifest.append(path)
    except OSError as e:
        raise ReportError(f"writing reports failed after {len(manifest)} file(s): {e}",
                          manifest) from e
    log_stage("WRITE", "%d files written to %s", len(manifest), out_dir)
    return manifest
