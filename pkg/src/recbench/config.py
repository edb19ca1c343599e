"""Experiment configuration: YAML text to a validated, normalised plan.

The file layout is::

    experiment:
      dataset: <name>
      data_config: {strategy: dataset, dataset_path: ..., side_information: {attribute_path: ...}}
      prefiltering: {strategy: ..., ...}          # or a list of such steps
      splitting: {test_splitting: {...}, validation_splitting: {...}}
      models: {<ModelName>: {meta: {...}, <param>: <domain>, ...}}
      evaluation: {cutoffs: [...], simple_metrics: [...], complex_metrics: [...], ...}
      top_k: 50
      random_seed: 42

Names (models, metrics, strategies, similarities) are matched
case-insensitively.  Lines consisting only of ``<...>`` are treated as
elided content and dropped before parsing.
"""
from __future__ import annotations

import logging
import numbers
import os
import re
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import yaml

from . import prefiltering as pf
from . import splitting as splt
from .hyperopt.space import Choice, DomainError, Fix, LogUniform, Normal, QUniform, Uniform
from .metrics import METRICS, canonical_metric
from .recommenders import MODELS
from .similarity import KINDS as SIMILARITIES

logger = logging.getLogger("recbench")

HYPER_OPT_ALGS = ("grid", "random", "annealing", "tpe")
_ALG_ALIASES = {"rand": "random", "anneal": "annealing", "bayesian": "tpe", "bayes": "tpe"}
_PREFILTER_ALIASES = {"n_rounds_k_core": "iter_n_rounds", "numerical": "global_threshold"}
DEFAULT_TOP_K = 50
DEFAULT_SEED = 42
DEFAULT_MAX_EVALS = 10
_TAGS = {"uniform": 2, "loguniform": 2, "quniform": 3, "normal": 2, "choice": None}
_TUPLE_RE = re.compile(r"^\(\s*([^()]*)\)$")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending node."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class SchemaError(ConfigError):
    pass


class EnumerationError(ConfigError):
    """Unknown name; ``partial`` holds the sections parsed before the failure, if any."""

    def __init__(self, kind, value, valid, path=""):
        self.value = value
        self.valid = tuple(valid)
        self.partial = {}
        super().__init__(f"unknown {kind} {value!r}; valid values: {', '.join(self.valid)}", path)


class SearchDomainError(ConfigError):
    pass


# ---------------------------------------------------------------- plan types

@dataclass(frozen=True)
class SideInformation:
    attribute_path: str


@dataclass(frozen=True)
class DataConfig:
    strategy: str = "dataset"
    dataset_path: Optional[str] = None
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    side_information: Optional[SideInformation] = None


@dataclass(frozen=True)
class ModelMeta:
    hyper_opt_alg: str = "grid"
    hyper_max_evals: int = DEFAULT_MAX_EVALS
    save_recs: bool = False
    validation_metric: str = f"nDCG@{DEFAULT_TOP_K}"

    @property
    def validation_metric_name(self):
        return self.validation_metric.split("@")[0]

    @property
    def validation_cutoff(self):
        return int(self.validation_metric.split("@")[1])


@dataclass(frozen=True)
class ModelConfig:
    name: str
    meta: ModelMeta = field(default_factory=ModelMeta)
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ComplexMetric:
    metric: str
    clustering_name: Optional[str] = None
    clustering_file: Optional[str] = None
    parameters: dict = field(default_factory=dict)

    @property
    def label(self):
        return f"{self.metric}_{self.clustering_name}" if self.clustering_name else self.metric


@dataclass(frozen=True)
class EvaluationConfig:
    cutoffs: tuple = ()
    simple_metrics: tuple = ("nDCG",)
    complex_metrics: tuple = ()
    relevance_threshold: float = 0.0
    wilcoxon_test: bool = False
    paired_ttest: bool = False

    @property
    def metric_labels(self):
        return list(self.simple_metrics) + [c.label for c in self.complex_metrics]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_name: str
    data: DataConfig
    prefiltering: tuple
    splitting: splt.SplittingConfig
    models: dict
    evaluation: EvaluationConfig
    top_k: int = DEFAULT_TOP_K
    random_seed: int = DEFAULT_SEED
    base_dir: Optional[str] = field(default=None, compare=False)
    warnings: tuple = field(default=(), compare=False)

    def resolve(self, path):
        """Interpret a relative path against the config file's directory."""
        if path is None or os.path.isabs(path) or self.base_dir is None:
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))

    def with_seed(self, seed):
        return replace(self, random_seed=int(seed))


# ---------------------------------------------------------------- helpers

class _Ctx:
    def __init__(self):
        self.warnings = []

    def warn(self, msg):
        self.warnings.append(msg)
        logger.warning(msg)


def _mapping(node, path, ctx, known, required=()):
    if node is None:
        node = {}
    if not isinstance(node, dict):
        raise SchemaError(f"expected a mapping, got {type(node).__name__}", path)
    for key in required:
        if node.get(key) is None:
            raise SchemaError(f"{path}.{key} required", f"{path}.{key}")
    for key in node:
        if key not in known:
            ctx.warn(f"{path}.{key}: unknown key ignored")
    return node


def _canon(value, options, kind, path, aliases=None):
    low = str(value).strip().lower()
    if aliases and low in aliases:
        low = aliases[low]
    for opt in options:
        if opt.lower() == low:
            return opt
    raise EnumerationError(kind, value, options, path)


def _is_number(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


def _int(v, path, minimum=1):
    if isinstance(v, bool) or not (isinstance(v, numbers.Integral)
                                   or (isinstance(v, float) and v.is_integer())):
        raise ConfigError(f"expected an integer, got {v!r}", path)
    v = int(v)
    if v < minimum:
        raise ConfigError(f"must be >= {minimum}, got {v}", path)
    return v


def _bool(v, path):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "false"):
        return v.lower() == "true"
    raise ConfigError(f"expected a boolean, got {v!r}", path)


def _scalar_value(v):
    if isinstance(v, str):
        m = _TUPLE_RE.match(v.strip())
        if m:
            parts = [p.strip() for p in m.group(1).split(",") if p.strip()]
            try:
                return tuple(int(p) if re.fullmatch(r"[-+]?\d+", p) else float(p) for p in parts)
            except ValueError:
                return v
    return v


def parse_search_domain(value, path="value"):
    """Config node to a search domain.

    Scalars fix the value; plain lists are choices; ``[kind, args...]`` with
    kind in uniform/loguniform/quniform/normal/choice builds that domain.
    LogUniform bounds are natural-log exponents.
    """
    if isinstance(value, dict):
        raise SearchDomainError("mappings are not valid search domains", path)
    if not isinstance(value, (list, tuple)):
        return Fix(_scalar_value(value))
    items = list(value)
    if not items:
        raise SearchDomainError("empty list is not a valid search domain", path)
    head = items[0]
    if isinstance(head, str) and head.strip().lower() in _TAGS and len(items) > 1:
        tag = head.strip().lower()
        args = items[1:]
        if tag == "choice":
            return Choice(tuple(_scalar_value(a) for a in args))
        arity = _TAGS[tag]
        if len(args) != arity or not all(_is_number(a) for a in args):
            raise SearchDomainError(f"[{tag}, ...] needs {arity} numeric arguments, got {args!r}",
                                    path)
        try:
            if tag == "uniform":
                return Uniform(*args)
            if tag == "loguniform":
                return LogUniform(*args)
            if tag == "quniform":
                return QUniform(*args)
            return Normal(*args)
        except DomainError as e:
            raise SearchDomainError(str(e), path) from None
    for k, a in enumerate(items):
        if isinstance(a, (list, dict)):
            raise SearchDomainError("nested lists are not valid choice values", f"{path}[{k}]")
    return Choice(tuple(_scalar_value(a) for a in items))


def _strip_placeholders(text):
    return "\n".join(line for line in text.splitlines() if line.strip() != "<...>")


_ITEM_RE = re.compile(r"^(\s*)- [^\s:][^:]*:\s*\S")


def _realign_sequence_items(text):
    """Pull over-indented keys under ``- key: value`` back to the key column.

    Hand-written listings often indent the remaining keys of a sequence item
    past its first key, which YAML rejects.  Returns ``(text, changed)``.
    """
    lines = text.split("\n")
    changed = False
    k = 0
    while k < len(lines):
        m = _ITEM_RE.match(lines[k])
        k += 1
        if not m:
            continue
        col = len(m.group(1)) + 2
        run = []
        while k < len(lines) and lines[k].strip():
            ind = len(lines[k]) - len(lines[k].lstrip())
            if ind <= col:
                break
            run.append(k)
            k += 1
        if run:
            shift = min(len(lines[j]) - len(lines[j].lstrip()) for j in run) - col
            for j in run:
                lines[j] = lines[j][shift:]
            changed = True
    return "\n".join(lines), changed


# ---------------------------------------------------------------- sections

def _parse_data(node, ctx):
    path = "experiment.data_config"
    node = _mapping(node, path, ctx,
                    {"strategy", "dataset_path", "train_path", "test_path", "side_information"})
    strategy = _canon(node.get("strategy", "dataset"), ("dataset", "fixed"),
                      "data strategy", f"{path}.strategy")
    if strategy == "dataset" and node.get("dataset_path") is None:
        raise SchemaError(f"{path}.dataset_path required", f"{path}.dataset_path")
    if strategy == "fixed":
        for key in ("train_path", "test_path"):
            if node.get(key) is None:
                raise SchemaError(f"{path}.{key} required", f"{path}.{key}")
    side = node.get("side_information")
    side_cfg = None
    if side is not None:
        if not isinstance(side, dict):
            ctx.warn(f"{path}.side_information: expected a mapping, ignored")
        else:
            side = _mapping(side, f"{path}.side_information", ctx, {"attribute_path"})
            if side.get("attribute_path") is not None:
                side_cfg = SideInformation(str(side["attribute_path"]))
            else:
                ctx.warn(f"{path}.side_information: no attribute_path given, ignored")
    return DataConfig(strategy, node.get("dataset_path"), node.get("train_path"),
                      node.get("test_path"), side_cfg)


def _parse_prefilter(node, path, ctx):
    node = _mapping(node, path, ctx, {"strategy", "threshold", "core", "rounds", "max_profile"},
                    required=("strategy",))
    strategy = _canon(node["strategy"], pf.STRATEGIES, "prefiltering strategy",
                      f"{path}.strategy", _PREFILTER_ALIASES)
    threshold = node.get("threshold")
    if strategy == "global_threshold" and isinstance(threshold, str) \
            and threshold.lower() == "average":
        strategy, threshold = "global_average", None
    if threshold is not None and not _is_number(threshold):
        raise ConfigError(f"threshold must be a number, got {threshold!r}", f"{path}.threshold")
    kwargs = {"threshold": float(threshold) if threshold is not None else None}
    for key in ("core", "rounds", "max_profile"):
        if node.get(key) is not None:
            kwargs[key] = _int(node[key], f"{path}.{key}")
    if strategy == "cold_users" and kwargs.get("max_profile") is None:
        kwargs["max_profile"] = pf.DEFAULT_MAX_PROFILE
    try:
        return pf.PrefilterStep(strategy, **kwargs)
    except ValueError as e:
        raise ConfigError(str(e), path) from None


def _parse_split_spec(node, path, ctx):
    node = _mapping(node, path, ctx, {"strategy", "test_ratio", "leave_n_out", "folds",
                                      "timestamp", "train_path", "test_path"},
                    required=("strategy",))
    strategy = _canon(node["strategy"], splt.STRATEGIES, "splitting strategy", f"{path}.strategy")
    kwargs = {}
    if node.get("test_ratio") is not None:
        v = node["test_ratio"]
        if not _is_number(v) or not 0 < v < 1:
            raise ConfigError(f"test_ratio must be in (0, 1), got {v!r}", f"{path}.test_ratio")
        kwargs["test_ratio"] = float(v)
    for key in ("leave_n_out", "folds"):
        if node.get(key) is not None:
            kwargs[key] = _int(node[key], f"{path}.{key}")
    if node.get("timestamp") is not None:
        kwargs["timestamp"] = _int(node["timestamp"], f"{path}.timestamp", minimum=0)
    for key in ("train_path", "test_path"):
        if node.get(key) is not None:
            kwargs[key] = str(node[key])
    try:
        return splt.SplitSpec(strategy, **kwargs)
    except ValueError as e:
        raise ConfigError(str(e), path) from None


def _parse_splitting(node, data, ctx):
    path = "experiment.splitting"
    if data.strategy == "fixed":
        node = _mapping(node, path, ctx, {"test_splitting", "validation_splitting"})
        test = splt.SplitSpec("fix", train_path=data.train_path, test_path=data.test_path)
    else:
        if node is None:
            raise SchemaError(f"{path} required", path)
        node = _mapping(node, path, ctx, {"test_splitting", "validation_splitting"},
                        required=("test_splitting",))
        test = _parse_split_spec(node["test_splitting"], f"{path}.test_splitting", ctx)
    val = None
    if isinstance(node, dict) and node.get("validation_splitting") is not None:
        val = _parse_split_spec(node["validation_splitting"], f"{path}.validation_splitting", ctx)
        if val.strategy == "fix":
            raise ConfigError("fix is not available for validation splitting",
                              f"{path}.validation_splitting.strategy")
    return splt.SplittingConfig(test, val)


def _parse_validation_metric(value, top_k, path):
    text = str(value)
    name, _, cut = text.partition("@")
    canon = canonical_metric(name)
    if canon is None:
        raise EnumerationError("metric", name, METRICS, path)
    if METRICS[canon].complex:
        raise ConfigError(f"{canon} needs extra parameters and cannot drive model selection",
                          path)
    k = top_k if not cut else _int(_maybe_int(cut), path)
    if k > top_k:
        raise ConfigError(f"cutoff {k} exceeds top_k {top_k}", path)
    return f"{canon}@{k}"


def _maybe_int(s):
    try:
        return int(s)
    except ValueError:
        return s


def _parse_models(node, top_k, ctx):
    path = "experiment.models"
    if not isinstance(node, dict) or not node:
        raise SchemaError(f"{path} must be a non-empty mapping", path)
    models = {}
    unknown = []
    for raw_name, body in node.items():
        name = str(raw_name)
        if name.lower().startswith("external."):
            ctx.warn(f"{path}.{name}: external models are not loaded; "
                     f"using the built-in {name.split('.', 1)[1]}")
            name = name.split(".", 1)[1]
        try:
            canon = _canon(name, MODELS, "model", f"{path}.{raw_name}")
        except EnumerationError:
            unknown.append(str(raw_name))
            continue
        mpath = f"{path}.{raw_name}"
        if body is None:
            body = {}
        if not isinstance(body, dict):
            raise SchemaError("expected a mapping", mpath)
        meta_node = body.get("meta") or {}
        meta_node = _mapping(meta_node, f"{mpath}.meta", ctx,
                             {"hyper_opt_alg", "hyper_max_evals", "save_recs",
                              "validation_metric"})
        alg = _canon(meta_node.get("hyper_opt_alg", "grid"), HYPER_OPT_ALGS,
                     "hyper_opt_alg", f"{mpath}.meta.hyper_opt_alg", _ALG_ALIASES)
        evals = _int(meta_node.get("hyper_max_evals", DEFAULT_MAX_EVALS),
                     f"{mpath}.meta.hyper_max_evals")
        save = _bool(meta_node.get("save_recs", False), f"{mpath}.meta.save_recs")
        vm = _parse_validation_metric(meta_node.get("validation_metric", f"nDCG@{top_k}"),
                                      top_k, f"{mpath}.meta.validation_metric")
        valid_params = set(MODELS[canon]().get_params()) - {"random_state"}
        params = {}
        for pname, pval in body.items():
            if pname == "meta":
                continue
            ppath = f"{mpath}.{pname}"
            if pname not in valid_params:
                ctx.warn(f"{ppath}: {canon} has no hyperparameter {pname!r}; ignored "
                         f"(valid: {', '.join(sorted(valid_params)) or 'none'})")
                continue
            dom = parse_search_domain(pval, ppath)
            if pname == "similarity":
                dom = _normalise_similarity(dom, ppath)
            params[pname] = dom
        if alg == "grid":
            for pname, dom in params.items():
                if not dom.finite:
                    raise ConfigError(f"grid requires finite domains; {pname} is "
                                      f"{type(dom).__name__}", f"{mpath}.{pname}")
        models[canon] = ModelConfig(canon, ModelMeta(alg, evals, save, vm), params)
    if unknown:
        raise EnumerationError("model" if len(unknown) == 1 else "models",
                               ", ".join(unknown), MODELS, path)
    return models


def _normalise_similarity(dom, path):
    canon = lambda v: _canon(v, SIMILARITIES, "similarity", path)  # noqa: E731
    if isinstance(dom, Fix):
        return Fix(canon(dom.value))
    if isinstance(dom, Choice):
        return Choice(tuple(canon(v) for v in dom.options))
    raise SearchDomainError("similarity must be a name or a list of names", path)


def _parse_evaluation(node, top_k, ctx):
    path = "experiment.evaluation"
    node = _mapping(node, path, ctx, {"cutoffs", "simple_metrics", "evaluation",
                                      "complex_metrics", "relevance_threshold",
                                      "wilcoxon_test", "paired_ttest"})
    simple = node.get("simple_metrics")
    if simple is None and node.get("evaluation") is not None:
        simple = node["evaluation"]
    if simple is None:
        simple = ["nDCG"]
    if not isinstance(simple, list):
        simple = [simple]
    names = []
    for k, m in enumerate(simple):
        canon = canonical_metric(m)
        if canon is None:
            raise EnumerationError("metric", m, METRICS, f"{path}.simple_metrics[{k}]")
        if METRICS[canon].complex:
            raise ConfigError(f"{canon} needs clustering parameters; list it under "
                              f"complex_metrics", f"{path}.simple_metrics[{k}]")
        if canon not in names:
            names.append(canon)
    complex_ = []
    for k, entry in enumerate(node.get("complex_metrics") or []):
        cp = f"{path}.complex_metrics[{k}]"
        if not isinstance(entry, dict) or entry.get("metric") is None:
            raise SchemaError(f"{cp}.metric required", cp)
        canon = canonical_metric(entry["metric"])
        if canon is None:
            raise EnumerationError("metric", entry["metric"], METRICS, f"{cp}.metric")
        if METRICS[canon].complex and not entry.get("clustering_file"):
            raise SchemaError(f"{cp}.clustering_file required for {canon}", cp)
        extra = {key: v for key, v in entry.items()
                 if key not in ("metric", "clustering_name", "clustering_file")}
        complex_.append(ComplexMetric(canon, entry.get("clustering_name"),
                                      entry.get("clustering_file"), extra))
    cutoffs = node.get("cutoffs")
    if cutoffs is None:
        cutoffs = [top_k]
    elif not isinstance(cutoffs, list):
        cutoffs = [cutoffs]
    cutoffs = tuple(dict.fromkeys(_int(c, f"{path}.cutoffs") for c in cutoffs))
    if max(cutoffs) > top_k:
        raise ConfigError(f"cutoff {max(cutoffs)} exceeds top_k {top_k}", f"{path}.cutoffs")
    thr = node.get("relevance_threshold", 0.0)
    if not _is_number(thr):
        raise ConfigError(f"relevance_threshold must be a number, got {thr!r}",
                          f"{path}.relevance_threshold")
    return EvaluationConfig(cutoffs, tuple(names), tuple(complex_), float(thr),
                            _bool(node.get("wilcoxon_test", False), f"{path}.wilcoxon_test"),
                            _bool(node.get("paired_ttest", False), f"{path}.paired_ttest"))


_EXPERIMENT_KEYS = {"dataset", "data_config", "prefiltering", "splitting", "models",
                    "evaluation", "top_k", "random_seed", "external_models_path"}


def parse_config(text, base_dir=None) -> ExperimentConfig:
    """Parse YAML text into a validated :class:`ExperimentConfig`."""
    ctx = _Ctx()
    text = _strip_placeholders(text)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        fixed, changed = _realign_sequence_items(text)
        try:
            if not changed:
                raise e
            doc = yaml.safe_load(fixed)
        except yaml.YAMLError:
            raise ConfigError(f"malformed YAML: {e}") from None
        ctx.warn("over-indented keys inside a list item were re-aligned before parsing")
    if not isinstance(doc, dict) or doc.get("experiment") is None:
        raise SchemaError("experiment required", "experiment")
    for key in doc:
        if key != "experiment":
            ctx.warn(f"{key}: unknown top-level key ignored")
    exp = _mapping(doc["experiment"], "experiment", ctx, _EXPERIMENT_KEYS)
    for key in ("dataset", "data_config", "models"):
        if exp.get(key) is None:
            raise SchemaError(f"experiment.{key} required", f"experiment.{key}")
    if exp.get("external_models_path") is not None:
        ctx.warn("experiment.external_models_path: dynamic model loading is not supported; "
                 "ignored")
    top_k = _int(exp.get("top_k", DEFAULT_TOP_K), "experiment.top_k")
    seed = _int(exp.get("random_seed", DEFAULT_SEED), "experiment.random_seed", minimum=0)
    data = _parse_data(exp["data_config"], ctx)
    pre = exp.get("prefiltering")
    if pre is None:
        steps = ()
    elif isinstance(pre, list):
        steps = tuple(_parse_prefilter(s, f"experiment.prefiltering[{k}]", ctx)
                      for k, s in enumerate(pre))
    else:
        steps = (_parse_prefilter(pre, "experiment.prefiltering", ctx),)
    splitting = _parse_splitting(exp.get("splitting"), data, ctx)
    evaluation = _parse_evaluation(exp.get("evaluation"), top_k, ctx)
    try:
        models = _parse_models(exp["models"], top_k, ctx)
    except EnumerationError as e:
        e.partial = {"dataset_name": str(exp["dataset"]), "data": data, "prefiltering": steps,
                     "splitting": splitting, "evaluation": evaluation, "top_k": top_k,
                     "random_seed": seed}
        raise
    return ExperimentConfig(str(exp["dataset"]), data, steps, splitting, models, evaluation,
                            top_k, seed, base_dir, tuple(ctx.warnings))


def load_config(path) -> ExperimentConfig:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------- rendering

def _render_value(v):
    if isinstance(v, tuple):
        return "(" + ", ".join(str(x) for x in v) + ")"
    return v


def render_domain(dom):
    if isinstance(dom, Fix):
        return _render_value(dom.value)
    if isinstance(dom, Choice):
        vals = [_render_value(v) for v in dom.options]
        if isinstance(vals[0], str) and vals[0].strip().lower() in _TAGS:
            return ["choice"] + vals
        return vals
    if isinstance(dom, Uniform):
        return ["uniform", dom.low, dom.high]
    if isinstance(dom, LogUniform):
        return ["loguniform", dom.low_exp, dom.high_exp]
    if isinstance(dom, QUniform):
        return ["quniform", dom.low, dom.high, dom.q]
    if isinstance(dom, Normal):
        return ["normal", dom.mu, dom.sigma]
    raise TypeError(f"not a search domain: {dom!r}")


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def _render_spec(spec):
    return _drop_none({"strategy": spec.strategy, "test_ratio": spec.test_ratio,
                       "leave_n_out": spec.leave_n_out, "folds": spec.folds,
                       "timestamp": spec.timestamp, "train_path": spec.train_path,
                       "test_path": spec.test_path})


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = cfg.data
    data = _drop_none({"strategy": d.strategy, "dataset_path": d.dataset_path,
                       "train_path": d.train_path, "test_path": d.test_path})
    if d.side_information is not None:
        data["side_information"] = {"attribute_path": d.side_information.attribute_path}
    exp = {"dataset": cfg.dataset_name, "data_config": data}
    if cfg.prefiltering:
        exp["prefiltering"] = [
            _drop_none({"strategy": s.strategy, "threshold": s.threshold, "core": s.core,
                        "rounds": s.rounds, "max_profile": s.max_profile})
            for s in cfg.prefiltering]
    split = {}
    if cfg.data.strategy != "fixed":
        split["test_splitting"] = _render_spec(cfg.splitting.test)
    if cfg.splitting.validation is not None:
        split["validation_splitting"] = _render_spec(cfg.splitting.validation)
    if split:
        exp["splitting"] = split
    models = {}
    for name, m in cfg.models.items():
        body = {"meta": {"hyper_opt_alg": m.meta.hyper_opt_alg,
                         "hyper_max_evals": m.meta.hyper_max_evals,
                         "save_recs": m.meta.save_recs,
                         "validation_metric": m.meta.validation_metric}}
        for pname, dom in m.params.items():
            body[pname] = render_domain(dom)
        models[name] = body
    exp["models"] = models
    ev = cfg.evaluation
    evaluation = {"cutoffs": list(ev.cutoffs), "simple_metrics": list(ev.simple_metrics)}
    if ev.complex_metrics:
        evaluation["complex_metrics"] = [
            dict(_drop_none({"metric": c.metric, "clustering_name": c.clustering_name,
                             "clustering_file": c.clustering_file}), **c.parameters)
            for c in ev.complex_metrics]
    evaluation.update({"relevance_threshold": ev.relevance_threshold,
                       "wilcoxon_test": ev.wilcoxon_test, "paired_ttest": ev.paired_ttest})
    exp["evaluation"] = evaluation
    exp["top_k"] = cfg.top_k
    exp["random_seed"] = cfg.random_seed
    return {"experiment": exp}


def render_config(cfg: ExperimentConfig) -> str:
    """YAML text that parses back to an equal plan."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None,
                          allow_unicode=True)


def describe(cfg: ExperimentConfig) -> str:
    """Human-readable summary of a resolved plan."""
    lines = [f"dataset: {cfg.dataset_name}",
             f"data: {cfg.data.strategy} {cfg.data.dataset_path or ''}".rstrip(),
             f"prefiltering: {', '.join(s.strategy for s in cfg.prefiltering) or 'none'}",
             f"test splitting: {cfg.splitting.test.strategy}",
             f"validation splitting: "
             f"{cfg.splitting.validation.strategy if cfg.splitting.validation else 'none'}",
             f"top_k: {cfg.top_k}  cutoffs: {list(cfg.evaluation.cutoffs)}  "
             f"seed: {cfg.random_seed}",
             f"metrics: {', '.join(cfg.evaluation.metric_labels)}"]
    for name, m in cfg.models.items():
        lines.append(f"model {name}: {m.meta.hyper_opt_alg} "
                     f"(max_evals {m.meta.hyper_max_evals}), select on "
                     f"{m.meta.validation_metric}, params "
                     f"{ {k: render_domain(v) for k, v in m.params.items()} }")
    return "\n".join(lines)


__all__ = ["ConfigError", "SchemaError", "EnumerationError", "SearchDomainError",
           "ExperimentConfig", "DataConfig", "SideInformation", "ModelConfig", "ModelMeta",
           "EvaluationConfig", "ComplexMetric", "parse_config", "load_config",
           "parse_search_domain", "render_config", "render_domain", "config_to_dict",
           "describe"]
