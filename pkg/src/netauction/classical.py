"""Classical (network-free) auction mechanisms behind one interface.

A mechanism maps ``(avail, valuations)`` to an :class:`Outcome`, where
``avail`` is the bitmask of items still for sale and ``valuations`` maps buyer
id to reported :class:`~netauction.valuation.Valuation`.  Every mechanism is
deterministic; the randomised DNS mechanism closes over a frozen
:class:`CoinRecord`.

Bids of zero never win.  Ties go to the lowest buyer id.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lpsolve import fractional_optimum
from .valuation import (MAX_ITEMS, SingleMinded, Valuation, avg_valuation, cardinality, items_of,
                        submasks)

Valuations = Mapping[int, Valuation]


class MechanismError(ValueError):
    pass


@dataclass
class Outcome:
    allocation: dict[int, int] = field(default_factory=dict)
    payment: dict[int, int] = field(default_factory=dict)

    def bundle(self, i: int) -> int:
        return self.allocation.get(i, 0)

    def paid(self, i: int) -> int:
        return self.payment.get(i, 0)

    @property
    def winners(self) -> frozenset[int]:
        return frozenset(i for i, x in self.allocation.items() if x)

    def allocated(self) -> int:
        out = 0
        for x in self.allocation.values():
            out |= x
        return out

    def is_feasible(self, avail: int) -> bool:
        seen = 0
        for x in self.allocation.values():
            if x & seen or x & ~avail:
                return False
            seen |= x
        return True

    def normalized(self) -> "Outcome":
        """Drop empty bundles and zero payments, so equal outcomes compare equal."""
        return Outcome({i: x for i, x in sorted(self.allocation.items()) if x},
                       {i: p for i, p in sorted(self.payment.items()) if p})

    def to_dict(self) -> dict:
        n = self.normalized()
        return {"allocation": {str(i): x for i, x in n.allocation.items()},
                "payment": {str(i): p for i, p in n.payment.items()}}


def utility(v: Valuation, outcome: Outcome, i: int) -> int:
    return v(outcome.bundle(i)) - outcome.paid(i)


def sw(outcome: Outcome, valuations: Valuations) -> int:
    """Social welfare under the given (true) valuations."""
    return sum(valuations[i](x) for i, x in outcome.allocation.items() if x)


def revenue(outcome: Outcome) -> int:
    return sum(outcome.payment.values())


class Mechanism:
    """Interface consumed by the meta-mechanisms."""

    name = "mechanism"

    def outcome(self, avail: int, valuations: Valuations) -> Outcome:
        raise NotImplementedError

    def allocate(self, avail: int, valuations: Valuations) -> dict[int, int]:
        return self.outcome(avail, valuations).allocation

    def winners(self, avail: int, valuations: Valuations) -> frozenset[int]:
        return frozenset(i for i, x in self.allocate(avail, valuations).items() if x)

    def __call__(self, avail: int, valuations: Valuations) -> Outcome:
        return self.outcome(avail, valuations)

    def __repr__(self):
        return f"{type(self).__name__}()"


def _ranked(scores: Mapping[int, int]) -> list[tuple[int, int]]:
    return sorted(((s, i) for i, s in scores.items()), key=lambda t: (-t[0], t[1]))


# ---------------------------------------------------------------------------
# single item / grand bundle


class SecondPrice(Mechanism):
    """Vickrey auction for the whole available bundle, scored by ``v(avail)``."""

    name = "second_price"

    def __init__(self, reserve: int = 0):
        self.reserve = reserve

    def outcome(self, avail, valuations):
        if not avail or not valuations:
            return Outcome()
        ranked = _ranked({i: v(avail) for i, v in valuations.items()})
        top, w = ranked[0]
        if top <= 0 or top < self.reserve:
            return Outcome()
        second = ranked[1][0] if len(ranked) > 1 else 0
        return Outcome({w: avail}, {w: max(second, self.reserve)})


def second_price(avail: int, valuations: Valuations) -> Outcome:
    return SecondPrice().outcome(avail, valuations)


# ---------------------------------------------------------------------------
# (k+1)-th price for homogeneous unit-demand items


class MPA(Mechanism):
    name = "mpa"

    def outcome(self, avail, valuations):
        k = cardinality(avail)
        if not k or not valuations:
            return Outcome()
        unit = avail & -avail
        ranked = _ranked({i: v(unit) for i, v in valuations.items()})
        price = ranked[k][0] if len(ranked) > k else 0
        winners = sorted(i for score, i in ranked[:k] if score > 0)
        # items are interchangeable; handing them out by id keeps a winner's
        # bid from permuting the others' items
        alloc = {i: 1 << item for i, item in zip(winners, items_of(avail))}
        return Outcome(alloc, {i: price for i in winners})


def mpa(avail: int, valuations: Valuations) -> Outcome:
    return MPA().outcome(avail, valuations)


# ---------------------------------------------------------------------------
# LOS greedy for single-minded buyers


_LCM_SIZES = math.lcm(*range(1, MAX_ITEMS + 1))


class LOS(Mechanism):
    """Greedy by average value per item.

    ``payment="critical"`` (default) charges a winner the average value of the
    first buyer that would be granted a conflicting bundle were the winner
    absent, times her bundle size, rounded up to whole money units: the lowest
    report at which she still wins.  ``payment="next"`` charges the average
    value of whichever buyer follows her in the ranking; that rule is kept for
    comparison and is not incentive compatible.
    """

    name = "los"

    def __init__(self, payment: str = "critical"):
        if payment not in ("critical", "next"):
            raise ValueError("payment must be 'critical' or 'next'")
        self.payment = payment

    def __repr__(self):
        return f"LOS(payment={self.payment!r})"

    @staticmethod
    def _order(valuations: Valuations) -> list[int]:
        keyed = []
        for i, v in valuations.items():
            if not isinstance(v, SingleMinded):
                raise MechanismError(f"LOS needs single-minded buyers; buyer {i} is {v.kind}")
            # value * (L / size) is an exact integer image of the average value
            av = v.value * (_LCM_SIZES // cardinality(v.demand)) if v.demand else 0
            keyed.append((-av, i))
        keyed.sort()
        return [i for _, i in keyed]

    @staticmethod
    def _greedy(order, valuations, avail, skip=None):
        remaining = avail
        granted = []
        for i in order:
            if i == skip:
                continue
            v = valuations[i]
            d = v.demand
            if v.value > 0 and d and d & remaining == d:
                granted.append(i)
                remaining &= ~d
        return granted

    def allocate(self, avail, valuations):
        if not avail or not valuations:
            return {}
        order = self._order(valuations)
        return {i: valuations[i].demand for i in self._greedy(order, valuations, avail)}

    def outcome(self, avail, valuations):
        if not avail or not valuations:
            return Outcome()
        order = self._order(valuations)
        granted = self._greedy(order, valuations, avail)
        alloc = {i: valuations[i].demand for i in granted}
        pay = {}
        for w in granted:
            size = cardinality(alloc[w])
            if self.payment == "next":
                pos = order.index(w)
                nxt = order[pos + 1] if pos + 1 < len(order) else None
                crit = avg_valuation(valuations[nxt]) if nxt is not None else Fraction(0)
            else:
                crit = Fraction(0)
                for j in self._greedy(order, valuations, avail, skip=w):
                    if valuations[j].demand & alloc[w]:
                        crit = avg_valuation(valuations[j])
                        break
            pay[w] = math.ceil(crit * size)
        return Outcome(alloc, pay)


def los(avail: int, valuations: Valuations) -> Outcome:
    return LOS().outcome(avail, valuations)


# ---------------------------------------------------------------------------
# welfare maximiser with Clarke pivot payments


class BruteVCG(Mechanism):
    """Exact welfare maximisation by dynamic programming over item subsets.

    Among optimal allocations the lexicographically smallest vector of
    bundles (in buyer-id order) is returned.
    """

    name = "brute_vcg"

    def __init__(self, max_buyers: int = 12, max_items: int = 5):
        self.max_buyers = max_buyers
        self.max_items = max_items

    def _check(self, avail, valuations):
        if len(valuations) > self.max_buyers or cardinality(avail) > self.max_items:
            raise MechanismError(
                f"brute_vcg bound exceeded: {len(valuations)} buyers, {cardinality(avail)} items "
                f"(limit {self.max_buyers} x {self.max_items})")

    @staticmethod
    def _suffix_tables(buyers, valuations, avail):
        subs = list(submasks(avail))
        tables = [{s: valuations[i](s) for s in subs} for i in buyers]
        best = [None] * (len(buyers) + 1)
        best[len(buyers)] = {s: 0 for s in subs}
        for k in range(len(buyers) - 1, -1, -1):
            nxt, vk, cur = best[k + 1], tables[k], {}
            for s in subs:
                cur[s] = max(vk[t] + nxt[s ^ t] for t in submasks(s))
            best[k] = cur
        return tables, best

    @classmethod
    def optimum(cls, avail: int, valuations: Valuations) -> tuple[int, dict[int, int]]:
        buyers = sorted(valuations)
        tables, best = cls._suffix_tables(buyers, valuations, avail)
        alloc = {}
        s = avail
        for k, i in enumerate(buyers):
            target = best[k][s]
            for t in submasks(s):
                if tables[k][t] + best[k + 1][s ^ t] == target:
                    break
            if t:
                alloc[i] = t
            s ^= t
        return best[0][avail], alloc

    def allocate(self, avail, valuations):
        if not avail or not valuations:
            return {}
        self._check(avail, valuations)
        return self.optimum(avail, valuations)[1]

    def outcome(self, avail, valuations):
        if not avail or not valuations:
            return Outcome()
        self._check(avail, valuations)
        total, alloc = self.optimum(avail, valuations)
        pay = {}
        for i, x in alloc.items():
            others = {j: v for j, v in valuations.items() if j != i}
            without_i = self.optimum(avail, others)[0] if others else 0
            pay[i] = without_i - (total - valuations[i](x))
        return Outcome(alloc, pay)


def brute_vcg(avail: int, valuations: Valuations) -> Outcome:
    return BruteVCG().outcome(avail, valuations)


# ---------------------------------------------------------------------------
# DNS randomised mechanism


class Group(str, enum.Enum):
    SECPRICE = "SecPrice"
    FIXED = "Fixed"
    STAT = "Stat"


@dataclass(frozen=True)
class CoinRecord:
    """Frozen randomness of one DNS run.

    ``groups`` assigns each buyer her group.  The fixed-price stage visits the
    Fixed buyers present by ``orderings[frozenset(present)]`` when that key is
    given, otherwise by ascending ``(rank, id)``.
    """

    groups: Mapping[int, Group]
    ranks: Mapping[int, int] = field(default_factory=dict)
    orderings: Mapping[frozenset, tuple[int, ...]] = field(default_factory=dict)

    @classmethod
    def draw(cls, buyers: Iterable[int], eps: float, seed: int | Sequence[int]) -> "CoinRecord":
        """One independent draw per ``(seed, buyer)``: SecPrice w.p. 1-eps, Fixed and Stat eps/2 each."""
        key = [seed] if isinstance(seed, int) else list(seed)
        groups, ranks = {}, {}
        for i in buyers:
            rng = np.random.default_rng([*key, i])
            u = rng.random()
            if u < 1 - eps:
                groups[i] = Group.SECPRICE
            elif u < 1 - eps / 2:
                groups[i] = Group.FIXED
            else:
                groups[i] = Group.STAT
            ranks[i] = int(rng.integers(0, 2**62))
        return cls(groups, ranks)

    def order(self, ids: Iterable[int]) -> tuple[int, ...]:
        ids = frozenset(ids)
        fixed = self.orderings.get(ids)
        if fixed is not None:
            if frozenset(fixed) != ids:
                raise MechanismError("ordering override is not a permutation of its key")
            return tuple(fixed)
        return tuple(sorted(ids, key=lambda i: (self.ranks.get(i, 0), i)))

    def to_dict(self) -> dict:
        return {"groups": {str(i): g.value for i, g in sorted(self.groups.items())},
                "ranks": {str(i): r for i, r in sorted(self.ranks.items())},
                "orderings": [[sorted(k), list(v)] for k, v in self.orderings.items()]}


def _ceil_div_sqrt(value: Fraction, k: int) -> int:
    """Smallest integer ``r`` with ``r >= value / sqrt(k)``."""
    if value <= 0:
        return 0
    num, den = value.numerator, value.denominator
    t, d = num * num, den * den * k
    r = math.isqrt(t // d)
    while r * r * d < t:
        r += 1
    return r


class DNS(Mechanism):
    """Grouped mechanism: fractional benchmark, grand-bundle Vickrey, fixed prices.

    ``fixed_price`` pins the per-item price of the fixed-price stage instead
    of deriving it from the Stat group's fractional optimum; used to replay
    hand-built traces.
    """

    name = "dns"

    def __init__(self, coins: CoinRecord, eps: float = 0.01, fixed_price: int | None = None):
        self.eps = Fraction(str(eps))
        if not 0 < self.eps < 1:
            raise MechanismError("eps must lie in (0, 1)")
        self.coins = coins
        self.fixed_price = fixed_price

    def __repr__(self):
        return f"DNS(eps={self.eps}, fixed_price={self.fixed_price})"

    def outcome(self, avail, valuations):
        if not avail or not valuations:
            return Outcome()
        missing = [i for i in valuations if i not in self.coins.groups]
        if missing:
            raise MechanismError(f"coin record has no group for buyers {sorted(missing)}")
        groups = self.coins.groups
        k = cardinality(avail)
        stat = {i: v for i, v in valuations.items() if groups[i] is Group.STAT}
        opt_stat = fractional_optimum(avail, stat)

        reserve = _ceil_div_sqrt(opt_stat, k)
        bids = {i: v(avail) for i, v in valuations.items() if groups[i] is Group.SECPRICE}
        if bids:
            ranked = _ranked(bids)
            top, w = ranked[0]
            if top > 0 and top >= reserve:
                second = ranked[1][0] if len(ranked) > 1 else 0
                return Outcome({w: avail}, {w: max(second, reserve)})

        if self.fixed_price is not None:
            price = self.fixed_price
        else:
            price = math.ceil(self.eps * opt_stat / (8 * k))
        alloc, pay = {}, {}
        remaining = avail
        fixed = [i for i in valuations if groups[i] is Group.FIXED]
        for i in self.coins.order(fixed):
            v = valuations[i]
            best, best_u = 0, 0
            # candidates ascend by mask; strict improvement keeps the smallest on ties
            for y in sorted(submasks(remaining), key=lambda y: (cardinality(y), y)):
                u = v(y) - price * cardinality(y)
                if u > best_u:
                    best, best_u = y, u
            if best:
                alloc[i] = best
                pay[i] = price * cardinality(best)
                remaining &= ~best
        return Outcome(alloc, pay)


def dns(avail: int, valuations: Valuations, coins: CoinRecord, eps: float = 0.01) -> Outcome:
    return DNS(coins, eps).outcome(avail, valuations)


MECHANISMS = {
    "second_price": SecondPrice,
    "mpa": MPA,
    "los": LOS,
    "brute_vcg": BruteVCG,
}
