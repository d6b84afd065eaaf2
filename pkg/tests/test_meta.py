import json
from pathlib import Path

import pytest

from netauction.classical import DNS, LOS, MPA, BruteVCG, CoinRecord, Group, SecondPrice, sw
from netauction.golden import (A, B, C, three_buyer_network, los_priority_counterexample,
                               fixed_price_dns, replay_dns_manipulation, three_buyer_profile)
from netauction.meta import check_termination_state, meta_msn, meta_msn_m
from netauction.netgraph import GlobalProfile, SocialNetwork, star
from netauction.props import random_instance
from netauction.valuation import SingleMinded, UnitDemand, bundle, full_bundle

DATA = Path(__file__).parent / "data"
METAS = [meta_msn, meta_msn_m]


def one_item(edges, values):
    net = SocialNetwork.from_edges(edges, seller=0)
    return net, GlobalProfile.truthful(net, {i: UnitDemand(1, v) for i, v in values.items()})


def test_single_neighbour_wins_free():
    net, gp = one_item([(0, 1)], {1: 7})
    out, trace = meta_msn(net, gp, SecondPrice())
    assert out.allocation == {1: 1} and out.paid(1) == 0
    assert trace.termination == "items_exhausted"


def test_chain_exploration_second_price():
    # s->{a,b}, a->c, b->d with a=5, b=3, c=1, d=10
    a, b, c, d = 1, 2, 3, 4
    net, gp = one_item([(0, a), (0, b), (a, c), (b, d)], {a: 5, b: 3, c: 1, d: 10})
    out, trace = meta_msn(net, gp, SecondPrice())
    assert trace.initial_potential == [a]
    assert out.allocation == {d: 1} and out.payment == {d: 5}
    assert trace.explored == [a, b, c, d]
    assert trace.exhausted == [a, b, c]
    assert trace.termination == "items_exhausted"


@pytest.mark.parametrize("meta", METAS)
def test_empty_neighbourhood_terminates(meta):
    net = SocialNetwork.from_edges([(1, 2)], seller=0, nodes=[0])
    gp = GlobalProfile.truthful(net, {1: UnitDemand(1, 3), 2: UnitDemand(1, 4)})
    out, trace = meta(net, gp, SecondPrice())
    assert out.winners == frozenset() and trace.iterations == []
    assert trace.termination == "no_potential_winners" and trace.initial_potential == []


def test_undemanded_item_ends_without_potential_winners():
    net = star(0, [1, 2])
    vals = {1: SingleMinded(3, bundle(1, 0, 0), 5), 2: SingleMinded(3, bundle(1, 1, 0), 4)}
    out, trace = meta_msn(net, GlobalProfile.truthful(net, vals), LOS())
    assert trace.termination == "no_potential_winners" and trace.final_avail == bundle(0, 1, 1)
    assert check_termination_state(trace).ok


def test_msn_m_stops_at_first_neighbourhood_when_demand_covers_supply():
    net = SocialNetwork.from_edges([(0, 1), (0, 2), (1, 3), (2, 4)], seller=0)
    vals = {1: UnitDemand(2, 5), 2: UnitDemand(2, 4), 3: UnitDemand(2, 90), 4: UnitDemand(2, 80)}
    coins = CoinRecord({i: Group.FIXED for i in vals}, {i: i for i in vals})
    out, trace = meta_msn_m(net, GlobalProfile.truthful(net, vals), DNS(coins, 0.5, fixed_price=1))
    assert len(trace.iterations) == 1 and out.winners == {1, 2}
    assert trace.explored == [1, 2]


# ---------------------------------------------------------------- golden traces

def test_dns_manipulation_trace_msn():
    rep = replay_dns_manipulation()["msn"]
    trace = rep["truthful_trace"]
    assert trace.initial_potential == [A, B]
    first, second = trace.iterations
    assert first.classical.allocation == {A: bundle(1, 0), B: bundle(0, 1)}
    assert first.selected == [B] and first.committed == {B: (bundle(0, 1), 2)}
    assert second.candidates == [A, C]
    assert second.selected == [C] and second.committed == {C: (bundle(1, 0), 2)}
    assert rep["truthful_utility_a"] == 0
    assert rep["deviating"].allocation == {A: bundle(1, 1)} and rep["deviating"].paid(A) == 4
    assert rep["deviating_utility_a"] == 1


def test_dns_manipulation_trace_msn_m():
    rep = replay_dns_manipulation()["msn_m"]
    assert rep["truthful"].allocation == {A: bundle(1, 0), B: bundle(0, 1)}
    assert rep["truthful_utility_a"] == 2 and rep["deviating_utility_a"] == 1


def test_traces_match_frozen_json():
    frozen = json.loads((DATA / "dns_manipulation_traces.json").read_text())
    for name, meta in (("msn", meta_msn), ("msn_m", meta_msn_m)):
        _, trace = meta(three_buyer_network(), three_buyer_profile(), fixed_price_dns())
        assert json.loads(trace.to_json()) == frozen[name]


def test_los_hiding_neighbour_counterexample():
    net, gp, lie = los_priority_counterexample()
    v = gp[2].valuation
    truthful, _ = meta_msn(net, gp, LOS())
    deviating, _ = meta_msn(net, gp.replace(2, lie), LOS())
    assert truthful.paid(2) == 9 and deviating.paid(2) == 0
    assert v(deviating.bundle(2)) - deviating.paid(2) == v(truthful.bundle(2)) - truthful.paid(2) + 9


def test_exhausted_buyer_can_win_later_under_los():
    # the literal loop re-runs the classical mechanism over every explored non-winner
    net = SocialNetwork.from_edges([(0, 1), (0, 2), (1, 3)], seller=0)
    vals = {1: SingleMinded(2, 1, 5), 2: SingleMinded(2, 3, 20), 3: SingleMinded(2, 2, 20)}
    out, trace = meta_msn(net, GlobalProfile.truthful(net, vals), LOS())
    assert trace.initial_potential == [2]
    assert 1 in trace.ever_outside and 1 in out.winners


# ---------------------------------------------------------------- invariants over random instances

def _cases():
    for seed in range(40):
        yield seed, "unit", SecondPrice(), 1
        yield seed, "unit", MPA(), 1 + seed % 4
        yield seed, "single_minded", LOS(), 1 + seed % 4
        yield seed, "table", BruteVCG(), 1 + seed % 3


CASES = list(_cases())


@pytest.mark.parametrize("meta", METAS)
@pytest.mark.parametrize("seed,kind,mech,m", CASES[::3])
def test_structural_invariants(meta, seed, kind, mech, m):
    inst = random_instance(seed, kind, m, n_max=8 if isinstance(mech, BruteVCG) else 12)
    out, trace = meta(inst.net, inst.profile, mech)
    assert out.is_feasible(full_bundle(m))
    assert check_termination_state(trace).ok, check_termination_state(trace).problems
    avail = full_bundle(m)
    for rec in trace.iterations:
        assert rec.avail_before == avail
        # winner commitment: bit-exact classical output over the candidates on the residual
        ref = mech.outcome(rec.avail_before, inst.profile.valuations(rec.candidates))
        for i, (x, p) in rec.committed.items():
            assert (x, p) == (ref.bundle(i), ref.paid(i))
            assert out.bundle(i) == x and out.paid(i) == p
            avail &= ~x
        assert rec.avail_after == avail
    assert trace.final_avail == avail
    assert set(out.winners) <= set(trace.explored)


@pytest.mark.parametrize("meta", METAS)
@pytest.mark.parametrize("seed", range(30))
def test_exhaustion_permanent_for_monotone_mechanisms(meta, seed):
    inst = random_instance(seed, "unit", 1 + seed % 4)
    out, trace = meta(inst.net, inst.profile, MPA())
    assert set(trace.exhausted) <= set(trace.ever_outside)
    for i in trace.ever_outside:
        assert out.bundle(i) == 0 and out.paid(i) == 0


@pytest.mark.parametrize("meta", METAS)
@pytest.mark.parametrize("seed", range(30))
def test_welfare_at_least_first_neighbourhood(meta, seed):
    inst = random_instance(seed, "table" if seed % 2 else "mixed", 1 + seed % 4, n_max=8)
    vals = inst.valuations
    first = BruteVCG().outcome(full_bundle(inst.profile.m),
                               {i: vals[i] for i in inst.net.seller_neighbours})
    out, _ = meta(inst.net, inst.profile, BruteVCG())
    assert sw(out, vals) >= sw(first, vals)


@pytest.mark.parametrize("meta", METAS)
def test_replay_is_deterministic(meta):
    inst = random_instance(5, "single_minded", 4)
    assert meta(inst.net, inst.profile, LOS())[1].to_json() == \
        meta(inst.net, inst.profile, LOS())[1].to_json()
