"""Input validation, seed derivation and stage-tagged logging."""
from __future__ import annotations

import hashlib
import logging
import math
import numbers

import numpy as np

logger = logging.getLogger("recbench")

STAGES = ("LOAD", "FILTER", "SPLIT", "TUNE", "EVAL", "STATS", "WRITE")


def log_stage(stage, msg, *args, level=logging.INFO):
    if stage not in STAGES:
        raise ValueError(f"unknown stage tag {stage!r}")
    logger.log(level, f"[{stage}] {msg}", *args)


def derive_seed(*keys) -> int:
    """Deterministic 63-bit seed from an arbitrary tuple of keys.

    Used so that every random stream (split repeat, trial, model fit) depends
    only on the experiment seed and its own identity, never on execution order.
    """
    payload = "\x1f".join(repr(k) for k in keys).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


def make_rng(*keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*keys))


def check_rng(rng) -> np.random.Generator:
    """Accept None, an int seed or a Generator and return a Generator."""
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, numbers.Integral):
        return np.random.default_rng(int(rng))
    raise TypeError(f"expected None, int or numpy Generator, got {type(rng).__name__}")


def check_positive_int(value, name, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_fraction(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValueError(f"{name} must be a number in (0, 1), got {value!r}")
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in (0, 1), got {value!r}")
    return value


def ratio_count(ratio: float, n: int) -> int:
    """ceil(ratio * n), robust to float noise such as 0.7 * 10 = 7.000000000000001."""
    return int(math.ceil(ratio * n - 1e-9))


def fmean(values) -> float:
    """Compensated mean; nan for an empty sequence."""
    values = list(values)
    if not values:
        return float("nan")
    return math.fsum(values) / len(values)
