"""Bundles, valuation models and the seeded synthetic valuation generators.

A bundle is a plain ``int`` bitmask over ``m`` items: item ``j`` is in the
bundle iff bit ``j`` is set.  "Lexicographic" order on bundles means integer
order of the mask throughout the package.

Money is an ``int`` in minor units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import numpy as np

MAX_ITEMS = 20


class BundleError(ValueError):
    pass


def full_bundle(m: int) -> int:
    return (1 << m) - 1


def cardinality(x: int) -> int:
    return x.bit_count()


def bundle(*indicator: int) -> int:
    """Build a mask from an indicator vector, ``bundle(1, 0)`` is item 0 alone."""
    mask = 0
    for j, bit in enumerate(indicator):
        if bit:
            mask |= 1 << j
    return mask


def bundle_of(items: Iterable[int]) -> int:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def indicator(x: int, m: int) -> tuple[int, ...]:
    return tuple((x >> j) & 1 for j in range(m))


def items_of(x: int) -> list[int]:
    out = []
    j = 0
    while x:
        if x & 1:
            out.append(j)
        x >>= 1
        j += 1
    return out


def submasks(x: int) -> Iterator[int]:
    """All subsets of ``x`` (including 0 and ``x``) in increasing mask order."""
    subs = []
    sub = x
    while True:
        subs.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & x
    return reversed(subs)


def check_width(x: int, m: int) -> None:
    if x < 0 or x >> m:
        raise BundleError(f"bundle {x:#b} does not fit in {m} items")


# ---------------------------------------------------------------------------
# valuation models


@dataclass(frozen=True)
class Valuation:
    """Normalised, monotone valuation over bundles of ``m`` items."""

    m: int

    kind = "abstract"

    def __post_init__(self):
        if not 1 <= self.m <= MAX_ITEMS:
            raise BundleError(f"m={self.m} outside [1, {MAX_ITEMS}]")

    def __call__(self, x: int) -> int:
        check_width(x, self.m)
        return self._value(x)

    def _value(self, x: int) -> int:
        raise NotImplementedError

    @cached_property
    def table(self) -> tuple[int, ...]:
        return tuple(self._value(x) for x in range(1 << self.m))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Valuation):
    """The null valuation carried by buyers who never joined."""

    kind = "zero"

    def _value(self, x: int) -> int:
        return 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m}


@dataclass(frozen=True)
class ExplicitTable(Valuation):
    values: tuple[int, ...] = ()

    kind = "table"

    def __post_init__(self):
        super().__post_init__()
        if len(self.values) != 1 << self.m:
            raise BundleError(f"table needs {1 << self.m} entries, got {len(self.values)}")
        if self.values[0] != 0:
            raise BundleError("valuation of the empty bundle must be 0")
        if any(v < 0 for v in self.values):
            raise BundleError("valuations must be non-negative")
        if self.m <= 12:
            for x, v in enumerate(self.values):
                for j in range(self.m):
                    y = x | (1 << j)
                    if self.values[y] < v:
                        raise BundleError(f"not monotone: v({y:#b}) < v({x:#b})")

    def _value(self, x: int) -> int:
        return self.values[x]

    @property
    def table(self) -> tuple[int, ...]:
        return self.values

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "values": list(self.values)}


@dataclass(frozen=True)
class SingleMinded(Valuation):
    """Worth ``value`` on any superset of ``demand``, 0 elsewhere."""

    demand: int = 0
    value: int = 0

    kind = "single_minded"

    def __post_init__(self):
        super().__post_init__()
        check_width(self.demand, self.m)
        if self.value < 0:
            raise BundleError("value must be non-negative")

    def _value(self, x: int) -> int:
        return self.value if x & self.demand == self.demand and self.demand else 0

    @property
    def size(self) -> int:
        return cardinality(self.demand)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "demand": self.demand, "value": self.value}


def avg_valuation(v: SingleMinded) -> Fraction:
    """Value per demanded item."""
    if not isinstance(v, SingleMinded):
        raise TypeError("average valuation is defined for single-minded buyers only")
    if v.demand == 0:
        raise BundleError("empty demand has no average valuation")
    return Fraction(v.value, cardinality(v.demand))


@dataclass(frozen=True)
class UnitDemand(Valuation):
    """Homogeneous items, one unit wanted: ``value`` for any nonempty bundle."""

    value: int = 0

    kind = "unit"

    def _value(self, x: int) -> int:
        return self.value if x else 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "value": self.value}


@dataclass(frozen=True)
class Coverage(Valuation):
    """``v(x) = |union of sets[j] for j in x|``; sets are bitsets over the ground set."""

    sets: tuple[int, ...] = ()

    kind = "coverage"

    def __post_init__(self):
        super().__post_init__()
        if len(self.sets) != self.m:
            raise BundleError("coverage needs one subset per item")

    def _value(self, x: int) -> int:
        covered = 0
        j = 0
        while x:
            if x & 1:
                covered |= self.sets[j]
            x >>= 1
            j += 1
        return covered.bit_count()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "sets": [format(s, "x") for s in self.sets]}


@dataclass(frozen=True)
class SqrtAdditive(Valuation):
    """``v(x) = floor(scale * sqrt(sum of weights in x))``.

    Flooring through ``isqrt`` keeps the function sub-additive exactly;
    rounding to nearest would not.
    """

    weights: tuple[int, ...] = ()
    scale: int = 1

    kind = "sqrt"

    def __post_init__(self):
        super().__post_init__()
        if len(self.weights) != self.m or any(w < 0 for w in self.weights):
            raise BundleError("sqrt valuation needs m non-negative weights")
        if self.scale < 0:
            raise BundleError("scale must be non-negative")

    def _value(self, x: int) -> int:
        total = 0
        j = 0
        while x:
            if x & 1:
                total += self.weights[j]
            x >>= 1
            j += 1
        return math.isqrt(self.scale * self.scale * total)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "weights": list(self.weights), "scale": self.scale}


def evaluate(v: Valuation, x: int) -> int:
    return v(x)


def valuation_from_dict(d: Mapping) -> Valuation:
    kind, m = d["kind"], int(d["m"])
    if kind == "zero":
        return Zero(m)
    if kind == "table":
        return ExplicitTable(m, tuple(int(v) for v in d["values"]))
    if kind == "single_minded":
        return SingleMinded(m, int(d["demand"]), int(d["value"]))
    if kind == "unit":
        return UnitDemand(m, int(d["value"]))
    if kind == "coverage":
        return Coverage(m, tuple(int(s, 16) for s in d["sets"]))
    if kind == "sqrt":
        return SqrtAdditive(m, tuple(int(w) for w in d["weights"]), int(d["scale"]))
    raise ValueError(f"unknown valuation kind {kind!r}")


def scaled(v: Valuation, factor: Fraction) -> Valuation:
    """Misreport helper: every value multiplied by ``factor`` and floored.

    Single-minded and unit-demand reports keep their kind; everything else
    becomes an explicit table (floor preserves monotonicity).
    """
    factor = Fraction(factor)
    if factor < 0:
        raise ValueError("scale factor must be non-negative")
    if isinstance(v, SingleMinded):
        return SingleMinded(v.m, v.demand, math.floor(v.value * factor))
    if isinstance(v, UnitDemand):
        return UnitDemand(v.m, math.floor(v.value * factor))
    return ExplicitTable(v.m, tuple(math.floor(t * factor) for t in v.table))


def is_monotone(v: Valuation) -> bool:
    t = v.table
    return all(t[x | (1 << j)] >= t[x] for x in range(len(t)) for j in range(v.m))


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class ValuationModelConfig:
    kind: str = "single_minded"
    m: int = 4
    distribution: str = "uniform"
    lo: float = 0.0
    hi: float = 200_000.0
    mean: float = 100_000.0
    std: float = 4_000.0
    ground_set: int = 4_000
    weight_lo: int = 1
    weight_hi: int = 40_000
    scale: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.m <= MAX_ITEMS:
            raise BundleError(f"m={self.m} outside [1, {MAX_ITEMS}]")
        if self.distribution not in ("uniform", "normal"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "uniform" and not (0 <= self.lo < self.hi):
            raise ValueError("uniform distribution needs 0 <= lo < hi")
        if self.distribution == "normal" and not (self.std > 0 and self.mean > 0):
            raise ValueError("normal distribution needs positive mean and std")
        if self.ground_set < 2:
            raise ValueError("coverage ground set needs at least 2 elements")
        if not (0 <= self.weight_lo <= self.weight_hi) or self.scale < 0:
            raise ValueError("bad sqrt weight range or scale")


def _rng(cfg: ValuationModelConfig, rng: np.random.Generator | None) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(cfg.seed)


def _draw_money(cfg: ValuationModelConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    if cfg.distribution == "uniform":
        raw = rng.uniform(cfg.lo, cfg.hi, size=size)
    else:
        raw = rng.normal(cfg.mean, cfg.std, size=size)
    return np.maximum(np.rint(raw), 0).astype(np.int64)


def gen_single_minded(cfg: ValuationModelConfig, n: int,
                      rng: np.random.Generator | None = None) -> list[SingleMinded]:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(cfg, rng)
    demands = rng.integers(1, 1 << cfg.m, size=n)
    averages = _draw_money(cfg, rng, n)
    return [SingleMinded(cfg.m, int(d), int(a) * cardinality(int(d)))
            for d, a in zip(demands, averages)]


def gen_unit_demand(cfg: ValuationModelConfig, n: int,
                    rng: np.random.Generator | None = None) -> list[UnitDemand]:
    rng = _rng(cfg, rng)
    return [UnitDemand(cfg.m, int(a)) for a in _draw_money(cfg, rng, n)]


def gen_coverage(cfg: ValuationModelConfig, n: int,
                 rng: np.random.Generator | None = None) -> list[Coverage]:
    rng = _rng(cfg, rng)
    size_hi = cfg.ground_set // 2
    out = []
    for _ in range(n):
        sets = []
        for _ in range(cfg.m):
            k = int(rng.integers(1, size_hi + 1))
            chosen = rng.choice(cfg.ground_set, size=k, replace=False)
            bits = np.zeros(cfg.ground_set, dtype=np.uint8)
            bits[chosen] = 1
            # little-endian bit order: element e is bit e of the int
            sets.append(int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little"))
        out.append(Coverage(cfg.m, tuple(sets)))
    return out


def gen_sqrt_subadditive(cfg: ValuationModelConfig, n: int,
                         rng: np.random.Generator | None = None) -> list[SqrtAdditive]:
    rng = _rng(cfg, rng)
    w = rng.integers(cfg.weight_lo, cfg.weight_hi + 1, size=(n, cfg.m))
    return [SqrtAdditive(cfg.m, tuple(int(x) for x in row), cfg.scale) for row in w]


def gen_monotone_table(cfg: ValuationModelConfig, n: int,
                       rng: np.random.Generator | None = None) -> list[ExplicitTable]:
    """Random monotone tables: each bundle adds a uniform increment over its best subset."""
    rng = _rng(cfg, rng)
    out = []
    size = 1 << cfg.m
    for _ in range(n):
        inc = _draw_money(cfg, rng, size)
        t = [0] * size
        for x in range(1, size):
            base = max(t[x & ~(1 << j)] for j in range(cfg.m) if x >> j & 1)
            t[x] = base + int(inc[x])
        out.append(ExplicitTable(cfg.m, tuple(t)))
    return out


GENERATORS = {
    "single_minded": gen_single_minded,
    "unit": gen_unit_demand,
    "coverage": gen_coverage,
    "sqrt": gen_sqrt_subadditive,
    "table": gen_monotone_table,
}


def generate(cfg: ValuationModelConfig, n: int,
             rng: np.random.Generator | None = None) -> list[Valuation]:
    try:
        gen = GENERATORS[cfg.kind]
    except KeyError:
        raise ValueError(f"unknown valuation model {cfg.kind!r}") from None
    return gen(cfg, n, rng)
