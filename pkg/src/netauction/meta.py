"""Graph-exploration meta-mechanisms lifting a classical mechanism onto a network.

Both variants share one exploration loop.  The explored set starts as the
seller alone; an explored node that is a winner or is outside the current
potential-winner set gets marked, her reported neighbours join, and the
potential winners are recomputed by running the classical mechanism over the
explored non-winners on the residual items.  An unselected potential winner
stays unmarked, so her neighbours are withheld until she is satisfied or
exhausted.

* :func:`meta_msn` commits one winner per iteration: the potential winner with
  most reported neighbours (lowest id on ties).
* :func:`meta_msn_m` commits every potential winner of the iteration at once.

The loop stops when the residual bundle is empty or, after exploring, no
explored non-winner would win.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from .classical import Mechanism, Outcome
from .netgraph import GlobalProfile, SocialNetwork
from .valuation import full_bundle


@dataclass
class IterationRecord:
    index: int
    avail_before: int
    explored: list[int]
    candidates: list[int]
    potential: list[int]
    priorities: dict[int, int]
    selected: list[int]
    committed: dict[int, tuple[int, int]]
    avail_after: int
    classical: Outcome

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "avail_before": self.avail_before,
            "explored": self.explored,
            "candidates": self.candidates,
            "potential": self.potential,
            "priorities": {str(i): s for i, s in self.priorities.items()},
            "selected": self.selected,
            "committed": {str(i): list(bp) for i, bp in self.committed.items()},
            "avail_after": self.avail_after,
            "classical": self.classical.to_dict(),
        }


@dataclass
class MetaTrace:
    variant: str
    seller: int
    m: int
    initial_potential: list[int]
    iterations: list[IterationRecord] = field(default_factory=list)
    explored: list[int] = field(default_factory=list)
    marked: list[int] = field(default_factory=list)
    exhausted: list[int] = field(default_factory=list)
    ever_outside: list[int] = field(default_factory=list)
    final_potential: list[int] = field(default_factory=list)
    final_avail: int = 0
    termination: str = ""
    invocations: int = 0

    @property
    def winners(self) -> list[int]:
        return [i for rec in self.iterations for i in rec.selected]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "seller": self.seller,
            "m": self.m,
            "initial_potential": self.initial_potential,
            "iterations": [rec.to_dict() for rec in self.iterations],
            "explored": self.explored,
            "marked": self.marked,
            "exhausted": self.exhausted,
            "ever_outside": self.ever_outside,
            "final_potential": self.final_potential,
            "final_avail": self.final_avail,
            "termination": self.termination,
            "invocations": self.invocations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class ExplorationState:
    """Residual items, explored/marked sets, winners and potential winners of one run."""

    def __init__(self, net: SocialNetwork, gp: GlobalProfile, mech: Mechanism):
        if net.seller is None:
            raise ValueError("network has no seller")
        self.net, self.gp, self.mech = net, gp, mech
        self.seller = net.seller
        self.full = full_bundle(gp.m)
        self.avail = self.full
        self.explored: set[int] = {self.seller}
        self.marks: set[int] = set()
        self.winners: list[int] = []
        self.committed = Outcome()
        self.invocations = 0
        self._cache: dict = {}
        self._winner_cache: dict = {}
        # buyers found outside P at some recomputation
        self.ever_outside: set[int] = set()
        self.potential: frozenset[int] = self._winners_over(net.seller_neighbours, self.avail)
        self.ever_outside.update(net.seller_neighbours - self.potential)

    def _classical(self, ids, avail) -> Outcome:
        key = (frozenset(ids), avail)
        out = self._cache.get(key)
        if out is None:
            self.invocations += 1
            out = self.mech.outcome(avail, self.gp.valuations(sorted(key[0])))
            self._cache[key] = out
        return out

    def _winners_over(self, ids, avail) -> frozenset[int]:
        key = (frozenset(ids), avail)
        hit = self._winner_cache.get(key)
        if hit is None:
            full = self._cache.get(key)
            if full is not None:
                hit = full.winners
            else:
                self.invocations += 1
                hit = self.mech.winners(avail, self.gp.valuations(sorted(key[0])))
            self._winner_cache[key] = hit
        return hit

    def candidates(self) -> frozenset[int]:
        """Explored buyers that have not won yet (A minus W minus the seller)."""
        return frozenset(self.explored - set(self.winners) - {self.seller})

    def _next_to_mark(self) -> int | None:
        if self.seller not in self.marks:
            return self.seller
        won = set(self.winners)
        pool = [i for i in self.explored
                if i not in self.marks and (i in won or i not in self.potential)]
        return min(pool) if pool else None

    def reported_neighbours(self, i: int) -> frozenset[int]:
        if i == self.seller:
            return self.net.seller_neighbours
        return self.gp[i].neighbours

    def explore(self) -> None:
        while (i := self._next_to_mark()) is not None:
            self.explored.update(j for j in self.reported_neighbours(i) if j != self.seller)
            self.marks.add(i)
            cands = self.candidates()
            self.potential = self._winners_over(cands, self.avail)
            self.ever_outside.update(cands - self.potential)

    def open_potential(self) -> frozenset[int]:
        return self.potential - set(self.winners)

    def commit(self, chosen, classical: Outcome) -> dict[int, tuple[int, int]]:
        done = {}
        for i in chosen:
            x, p = classical.bundle(i), classical.paid(i)
            self.committed.allocation[i] = x
            self.committed.payment[i] = p
            self.winners.append(i)
            self.avail &= ~x
            done[i] = (x, p)
        return done

    def exhausted(self) -> list[int]:
        won = set(self.winners)
        return sorted(i for i in self.marks if i != self.seller and i not in won)


Selector = Callable[[ExplorationState, Outcome], list[int]]


def _select_top_priority(state: ExplorationState, classical: Outcome) -> list[int]:
    pool = state.open_potential()
    return [min(pool, key=lambda i: (-len(state.reported_neighbours(i)), i))]


def _select_all(state: ExplorationState, classical: Outcome) -> list[int]:
    return sorted(state.open_potential())


def _run(variant: str, net: SocialNetwork, gp: GlobalProfile, mech: Mechanism,
         select: Selector) -> tuple[Outcome, MetaTrace]:
    state = ExplorationState(net, gp, mech)
    trace = MetaTrace(variant, state.seller, gp.m, sorted(state.potential))
    termination = "no_potential_winners"
    if state.open_potential():
        while True:
            state.explore()
            if not state.open_potential():
                termination = "no_potential_winners"
                break
            before = state.avail
            cands = state.candidates()
            classical = state._classical(cands, before)
            chosen = select(state, classical)
            priorities = {i: len(state.reported_neighbours(i)) for i in sorted(state.potential)}
            done = state.commit(chosen, classical)
            trace.iterations.append(IterationRecord(
                index=len(trace.iterations) + 1,
                avail_before=before,
                explored=sorted(state.explored - {state.seller}),
                candidates=sorted(cands),
                potential=sorted(state.potential),
                priorities=priorities,
                selected=list(chosen),
                committed=done,
                avail_after=state.avail,
                classical=classical.normalized(),
            ))
            if not state.avail:
                termination = "items_exhausted"
                break
    trace.explored = sorted(state.explored - {state.seller})
    trace.marked = sorted(state.marks)
    trace.exhausted = state.exhausted()
    trace.ever_outside = sorted(state.ever_outside)
    trace.final_potential = sorted(state.potential)
    trace.final_avail = state.avail
    trace.termination = termination
    trace.invocations = state.invocations
    return state.committed.normalized(), trace


def meta_msn(net: SocialNetwork, gp: GlobalProfile, mech: Mechanism) -> tuple[Outcome, MetaTrace]:
    """One winner per iteration, chosen by reported-neighbour count."""
    return _run("msn", net, gp, mech, _select_top_priority)


def meta_msn_m(net: SocialNetwork, gp: GlobalProfile, mech: Mechanism) -> tuple[Outcome, MetaTrace]:
    """Every potential winner of an iteration is committed at once."""
    return _run("msn_m", net, gp, mech, _select_all)


META = {"msn": meta_msn, "msn_m": meta_msn_m}


@dataclass(frozen=True)
class TerminationVerdict:
    ok: bool
    reason: str
    problems: tuple[str, ...] = ()


def check_termination_state(trace: MetaTrace) -> TerminationVerdict:
    problems = []
    winners = set(trace.winners)
    open_potential = set(trace.final_potential) - winners
    if trace.termination == "items_exhausted":
        if trace.final_avail:
            problems.append("terminated as items_exhausted with items left")
    elif trace.termination == "no_potential_winners":
        if open_potential:
            problems.append(f"terminated with open potential winners {sorted(open_potential)}")
    else:
        problems.append(f"unknown termination reason {trace.termination!r}")
    exhausted = set(trace.exhausted)
    for i in trace.explored:
        if i in winners or i in exhausted:
            continue
        if i not in open_potential:
            problems.append(f"buyer {i} is explored but neither winner, exhausted nor potential")
        elif trace.termination != "items_exhausted":
            problems.append(f"buyer {i} left as an unselected potential winner")
    if exhausted & winners:
        problems.append("a buyer is both winner and exhausted")
    return TerminationVerdict(not problems, trace.termination, tuple(problems))
