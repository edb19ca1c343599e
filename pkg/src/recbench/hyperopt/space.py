"""Search-space domains, grid expansion and prior sampling."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Tuple


class DomainError(ValueError):
    pass


def _plain(v):
    """numpy scalars to Python scalars, integral floats from QUniform kept as int."""
    if hasattr(v, "item"):
        v = v.item()
    return v


@dataclass(frozen=True)
class Fix:
    value: Any

    finite = True

    def values(self):
        return [self.value]

    def sample(self, rng):
        return self.value


@dataclass(frozen=True)
class Choice:
    options: Tuple[Any, ...]

    finite = True

    def __post_init__(self):
        if len(self.options) == 0:
            raise DomainError("Choice needs at least one option")

    def values(self):
        return list(self.options)

    def sample(self, rng):
        return self.options[int(rng.integers(len(self.options)))]


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    finite = False

    def __post_init__(self):
        if not self.low < self.high:
            raise DomainError(f"Uniform needs low < high, got [{self.low}, {self.high}]")

    def sample(self, rng):
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class LogUniform:
    """exp(U(low_exp, high_exp)); support [e^low_exp, e^high_exp]."""

    low_exp: float
    high_exp: float

    finite = False

    def __post_init__(self):
        if not self.low_exp < self.high_exp:
            raise DomainError(f"LogUniform needs low < high, got [{self.low_exp}, {self.high_exp}]")

    @property
    def low(self):
        return math.exp(self.low_exp)

    @property
    def high(self):
        return math.exp(self.high_exp)

    def sample(self, rng):
        return float(math.exp(rng.uniform(self.low_exp, self.high_exp)))


@dataclass(frozen=True)
class QUniform:
    low: float
    high: float
    q: float

    finite = True

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"QUniform needs q > 0, got {self.q}")
        if not self.low < self.high:
            raise DomainError(f"QUniform needs low < high, got [{self.low}, {self.high}]")

    @property
    def integral(self):
        return all(float(v).is_integer() for v in (self.low, self.high, self.q))

    def quantize(self, x):
        v = round(x / self.q) * self.q
        v = min(max(v, self.low), self.high)
        return int(round(v)) if self.integral else float(v)

    def values(self):
        n = int(math.floor((self.high - self.low) / self.q + 1e-9))
        vals = [self.quantize(self.low + k * self.q) for k in range(n + 1)]
        return list(dict.fromkeys(vals))

    def sample(self, rng):
        return self.quantize(float(rng.uniform(self.low, self.high)))


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    finite = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"Normal needs sigma > 0, got {self.sigma}")

    def sample(self, rng):
        return float(rng.normal(self.mu, self.sigma))


DOMAIN_KINDS = (Fix, Choice, Uniform, LogUniform, QUniform, Normal)


def grid_expand(space) -> list:
    """Cartesian product of finite domains.

    Parameter names vary in sorted order (last name fastest); each
    domain's values keep their declared order.
    """
    names = sorted(space)
    for n in names:
        if not space[n].finite:
            raise DomainError(f"grid requires finite domains; {n!r} is {type(space[n]).__name__}")
    return [dict(zip(names, combo))
            for combo in itertools.product(*(space[n].values() for n in names))]


def sample(space, rng) -> dict:
    """One independent prior draw per dimension, in sorted name order."""
    return {n: _plain(space[n].sample(rng)) for n in sorted(space)}
