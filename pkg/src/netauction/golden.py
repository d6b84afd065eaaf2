"""Hand-checked fixtures: the three-buyer DNS counterexample and a LOS walk-through.

Node ids: seller 0, buyers a=1, b=2, c=3.  Items u1 = bit 0, u2 = bit 1, so
the indicator ``(1, 0)`` is mask 1, ``(0, 1)`` is mask 2 and ``(1, 1)`` mask 3.
"""
from __future__ import annotations

from .classical import DNS, LOS, CoinRecord, Group, Outcome, utility
from .meta import meta_msn, meta_msn_m
from .netgraph import GlobalProfile, Profile, SocialNetwork
from .valuation import ExplicitTable, SingleMinded, bundle, bundle_of

SELLER, A, B, C = 0, 1, 2, 3
NAMES = {A: "a", B: "b", C: "c"}


def three_buyer_network() -> SocialNetwork:
    return SocialNetwork.from_edges([(SELLER, A), (SELLER, B), (B, C)], seller=SELLER)


def three_buyer_valuations() -> dict[int, ExplicitTable]:
    # columns: (0,0) (1,0) (0,1) (1,1)
    return {
        A: ExplicitTable(2, (0, 4, 0, 5)),
        B: ExplicitTable(2, (0, 0, 3, 3)),
        C: ExplicitTable(2, (0, 5, 0, 5)),
    }


def three_buyer_profile() -> GlobalProfile:
    return GlobalProfile.truthful(three_buyer_network(), three_buyer_valuations())


def manipulated_a() -> ExplicitTable:
    """Buyer a inflates her value for the grand bundle from 5 to 7."""
    return ExplicitTable(2, (0, 4, 0, 7))


def fixed_price_coins() -> CoinRecord:
    """All three buyers in Fixed; {a, c} is visited c first, every other set by id."""
    return CoinRecord(
        groups={A: Group.FIXED, B: Group.FIXED, C: Group.FIXED},
        ranks={A: 0, B: 1, C: 2},
        orderings={frozenset({A, C}): (C, A)},
    )


def fixed_price_dns() -> DNS:
    return DNS(fixed_price_coins(), eps=0.5, fixed_price=2)


def replay_dns_manipulation() -> dict:
    """Replay the counterexample under both meta-mechanisms."""
    net = three_buyer_network()
    gp = three_buyer_profile()
    true_a = three_buyer_valuations()[A]
    lie = gp.replace(A, Profile(manipulated_a(), gp[A].neighbours))
    dns = fixed_price_dns()
    report = {}
    for label, meta in (("msn", meta_msn), ("msn_m", meta_msn_m)):
        truthful, t_trace = meta(net, gp, dns)
        deviating, d_trace = meta(net, lie, dns)
        report[label] = {
            "truthful": truthful,
            "truthful_trace": t_trace,
            "truthful_utility_a": utility(true_a, truthful, A),
            "deviating": deviating,
            "deviating_trace": d_trace,
            "deviating_utility_a": utility(true_a, deviating, A),
        }
    return report


# ---------------------------------------------------------------------------
# LOS walk-through: three single-minded buyers over three items

def los_example() -> tuple[dict[int, SingleMinded], Outcome]:
    vals = {
        1: SingleMinded(3, bundle_of([0, 1]), 10),
        2: SingleMinded(3, bundle_of([1]), 4),
        3: SingleMinded(3, bundle_of([2]), 3),
    }
    return vals, LOS().outcome(bundle(1, 1, 1), vals)


# ---------------------------------------------------------------------------
# LOS under one-winner-per-iteration: hiding a neighbour lowers the price


def los_priority_counterexample() -> tuple[SocialNetwork, GlobalProfile, Profile]:
    """Buyer 2 hides neighbour 4, loses the priority tie to buyer 1, and wins
    one iteration later after 1's bundle has blocked her price setter 3.

    Returns the network, the truthful profile and buyer 2's misreport.
    """
    net = SocialNetwork.from_edges([(SELLER, 1), (SELLER, 2), (SELLER, 3), (2, 4)], seller=SELLER)
    vals = {
        1: SingleMinded(2, bundle_of([1]), 8),
        2: SingleMinded(2, bundle_of([0]), 10),
        3: SingleMinded(2, bundle_of([0, 1]), 18),
        4: SingleMinded(2, bundle_of([0, 1]), 0),
    }
    gp = GlobalProfile.truthful(net, vals)
    return net, gp, Profile(vals[2], frozenset())
