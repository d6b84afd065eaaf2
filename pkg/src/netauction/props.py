"""Incentive, rationality, deficit and non-sensitivity checks by deviation enumeration.

A check never proves a property; a pass means no violation was found within
the enumerated deviation set, whose size is reported alongside the verdict.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

import numpy as np

from .classical import (DNS, LOS, MPA, BruteVCG, CoinRecord, Mechanism, Outcome,
                        SecondPrice, revenue, utility)
from .meta import meta_msn, meta_msn_m
from .netgraph import GlobalProfile, Profile, SocialNetwork, star
from .valuation import (SingleMinded, Valuation, ValuationModelConfig, full_bundle,
                        gen_coverage, gen_monotone_table, gen_single_minded,
                        gen_sqrt_subadditive, gen_unit_demand, scaled, valuation_from_dict)

Runner = Callable[[SocialNetwork, GlobalProfile], Outcome]


@dataclass(frozen=True)
class Instance:
    net: SocialNetwork
    profile: GlobalProfile
    seed: int = 0
    label: str = ""

    @property
    def valuations(self) -> dict[int, Valuation]:
        return {i: self.profile[i].valuation for i in self.net.buyers}

    def describe(self) -> dict:
        return {"label": self.label, "seed": self.seed, "n": len(self.net.buyers),
                "m": self.profile.m, "edges": len(self.net.edges)}


def lifted(meta, mech: Mechanism) -> Runner:
    def run(net, gp):
        return meta(net, gp, mech)[0]
    run.__name__ = f"{meta.__name__}[{mech!r}]"
    return run


def classical_runner(mech: Mechanism) -> Runner:
    """Ignore the network: every buyer takes part with her reported valuation."""
    def run(net, gp):
        return mech.outcome(full_bundle(gp.m), gp.valuations(net.buyers))
    run.__name__ = f"classical[{mech!r}]"
    return run


# ---------------------------------------------------------------------------
# deviation sets


@dataclass(frozen=True)
class DeviationPolicy:
    """Misreports tried per buyer.

    Valuation misreports: each factor in ``scales``; with ``swap``, the
    valuation of one sampled other buyer (for single-minded buyers under
    ``public_bundles`` only her value is taken, the demand stays public);
    with ``bundle_change``, every other demand bundle at the true value;
    plus any entries in ``extra``.  Neighbour misreports: all subsets of the
    true neighbour set when it has at most ``max_exhaustive`` members, else
    ``sampled_subsets`` random subsets.  The cross product of both lists,
    minus the truthful report, is enumerated.
    """

    scales: tuple[Fraction, ...] = (Fraction(0), Fraction(1, 2), Fraction(2))
    swap: bool = True
    public_bundles: bool = True
    bundle_change: bool = False
    neighbours: bool = True
    max_exhaustive: int = 4
    sampled_subsets: int = 16
    extra: Mapping[int, tuple[Valuation, ...]] = field(default_factory=dict)
    seed: int = 0


def valuation_deviations(i: int, inst: Instance, policy: DeviationPolicy) -> list[Valuation]:
    v = inst.profile[i].valuation
    out: list[Valuation] = [scaled(v, f) for f in policy.scales]
    others = [j for j in inst.net.buyers if j != i]
    if policy.swap and others:
        rng = np.random.default_rng([policy.seed, inst.seed, i, 1])
        other = inst.profile[others[int(rng.integers(len(others)))]].valuation
        if isinstance(v, SingleMinded) and isinstance(other, SingleMinded) and policy.public_bundles:
            out.append(SingleMinded(v.m, v.demand, other.value))
        else:
            out.append(other)
    if policy.bundle_change and isinstance(v, SingleMinded):
        out.extend(SingleMinded(v.m, d, v.value) for d in range(1, 1 << v.m) if d != v.demand)
    out.extend(policy.extra.get(i, ()))
    unique = []
    for d in out:
        if d != v and d not in unique:
            unique.append(d)
    return unique


def neighbour_deviations(i: int, inst: Instance, policy: DeviationPolicy) -> list[frozenset[int]]:
    true = sorted(inst.net.neighbours(i))
    if not policy.neighbours or not true:
        return []
    if len(true) <= policy.max_exhaustive:
        subsets = [frozenset(c) for k in range(len(true))
                   for c in itertools.combinations(true, k)]
    else:
        rng = np.random.default_rng([policy.seed, inst.seed, i, 2])
        subsets = []
        for _ in range(policy.sampled_subsets):
            mask = rng.random(len(true)) < 0.5
            s = frozenset(j for j, keep in zip(true, mask) if keep)
            if len(s) < len(true) and s not in subsets:
                subsets.append(s)
    return subsets


def deviations(i: int, inst: Instance, policy: DeviationPolicy) -> Iterator[Profile]:
    truth = inst.profile[i]
    vals = [truth.valuation] + valuation_deviations(i, inst, policy)
    nbrs = [truth.neighbours] + neighbour_deviations(i, inst, policy)
    for v, r in itertools.product(vals, nbrs):
        if v is truth.valuation and r == truth.neighbours:
            continue
        yield Profile(v, r)


# ---------------------------------------------------------------------------
# reports


def _profile_dict(p: Profile) -> dict:
    return {"valuation": p.valuation.to_dict(), "neighbours": sorted(p.neighbours)}


@dataclass
class DeviationReport:
    property: str
    passed: bool
    instance: dict
    checked: int = 0
    violations: int = 0
    deviator: int | None = None
    truthful_utility: int | None = None
    deviating_utility: int | None = None
    deviating_profile: dict | None = None
    detail: str = ""

    @property
    def gap(self) -> int | None:
        if self.deviating_utility is None or self.truthful_utility is None:
            return None
        return self.deviating_utility - self.truthful_utility

    def to_dict(self) -> dict:
        return {
            "property": self.property, "passed": self.passed, "instance": self.instance,
            "checked": self.checked, "violations": self.violations, "deviator": self.deviator,
            "truthful_utility": self.truthful_utility, "deviating_utility": self.deviating_utility,
            "gap": self.gap, "deviating_profile": self.deviating_profile, "detail": self.detail,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def replay_gap(runner: Runner, inst: Instance, report: DeviationReport) -> int:
    """Re-run a failed IC report's deviation and return the utility gap."""
    p = report.deviating_profile
    dev = Profile(valuation_from_dict(p["valuation"]), frozenset(p["neighbours"]))
    i = report.deviator
    true_v = inst.profile[i].valuation
    base = utility(true_v, runner(inst.net, inst.profile), i)
    lie = utility(true_v, runner(inst.net, inst.profile.replace(i, dev)), i)
    return lie - base


# ---------------------------------------------------------------------------
# checks


def check_ic(runner: Runner, inst: Instance, policy: DeviationPolicy = DeviationPolicy()
             ) -> DeviationReport:
    report = DeviationReport("IC", True, inst.describe())
    truthful = runner(inst.net, inst.profile)
    for i in sorted(inst.net.reachable()):
        true_v = inst.profile[i].valuation
        base = utility(true_v, truthful, i)
        for dev in deviations(i, inst, policy):
            report.checked += 1
            out = runner(inst.net, inst.profile.replace(i, dev))
            u = utility(true_v, out, i)
            if u > base:
                report.violations += 1
                if report.passed:
                    report.passed = False
                    report.deviator = i
                    report.truthful_utility = base
                    report.deviating_utility = u
                    report.deviating_profile = _profile_dict(dev)
    return report


def check_ir(runner: Runner, inst: Instance) -> DeviationReport:
    report = DeviationReport("IR", True, inst.describe())
    out = runner(inst.net, inst.profile)
    for i in inst.net.buyers:
        report.checked += 1
        u = utility(inst.profile[i].valuation, out, i)
        if u < 0:
            report.violations += 1
            if report.passed:
                report.passed = False
                report.deviator = i
                report.truthful_utility = u
    return report


def check_nd(runner: Runner, inst: Instance) -> DeviationReport:
    out = runner(inst.net, inst.profile)
    rv = revenue(out)
    return DeviationReport("ND", rv >= 0, inst.describe(), checked=1,
                           violations=int(rv < 0), detail=f"revenue={rv}")


def check_non_sensitivity(mech: Mechanism, inst: Instance,
                          policy: DeviationPolicy = DeviationPolicy(neighbours=False)
                          ) -> DeviationReport:
    """A winner's valuation misreport either zeroes her bundle or changes nobody's."""
    report = DeviationReport("non-sensitivity", True, inst.describe())
    avail = full_bundle(inst.profile.m)
    vals = inst.valuations
    base = mech.outcome(avail, vals).normalized().allocation
    for w in sorted(base):
        for dev in valuation_deviations(w, inst, policy):
            report.checked += 1
            after = mech.outcome(avail, {**vals, w: dev}).normalized().allocation
            if after.get(w, 0) and after != base:
                report.violations += 1
                if report.passed:
                    report.passed = False
                    report.deviator = w
                    report.deviating_profile = {"valuation": dev.to_dict(), "neighbours": []}
                    report.detail = f"allocation {base} -> {after}"
    return report


# ---------------------------------------------------------------------------
# random instances


def random_network(n: int, out_degree: int, rng: np.random.Generator) -> SocialNetwork:
    """Seller 0 and buyers 1..n; every node links to up to ``out_degree`` others."""
    nodes = list(range(n + 1))
    edges = set()
    for i in nodes:
        k = int(rng.integers(1 if i == 0 else 0, out_degree + 1))
        targets = [j for j in nodes if j != i and j != 0]
        for j in rng.choice(targets, size=min(k, len(targets)), replace=False):
            edges.add((i, int(j)))
    return SocialNetwork.from_edges(edges, seller=0, nodes=nodes)


def random_valuations(kind: str, m: int, n: int, rng: np.random.Generator, hi: int = 100
                      ) -> list[Valuation]:
    cfg = ValuationModelConfig(kind="table", m=m, lo=0, hi=hi, ground_set=40,
                               weight_lo=1, weight_hi=hi, scale=10)
    if kind == "unit":
        return gen_unit_demand(cfg, n, rng)
    if kind == "single_minded":
        return gen_single_minded(cfg, n, rng)
    if kind == "table":
        return gen_monotone_table(ValuationModelConfig(kind="table", m=m, lo=0, hi=hi // 4 or 1),
                                  n, rng)
    if kind == "mixed":
        out = []
        for _ in range(n):
            pick = int(rng.integers(3))
            gen = (gen_coverage, gen_sqrt_subadditive, gen_monotone_table)[pick]
            c = cfg if pick < 2 else ValuationModelConfig(kind="table", m=m, lo=0, hi=hi // 4 or 1)
            out.extend(gen(c, 1, rng))
        return out
    raise ValueError(f"unknown valuation kind {kind!r}")


def random_instance(seed: int, kind: str, m: int, n_min: int = 2, n_max: int = 12,
                    out_degree: int = 4, label: str = "") -> Instance:
    rng = np.random.default_rng([seed, 7])
    n = int(rng.integers(n_min, n_max + 1))
    net = random_network(n, out_degree, rng)
    vals = random_valuations(kind, m, n, rng)
    gp = GlobalProfile.truthful(net, dict(zip(net.buyers, vals)))
    return Instance(net, gp, seed, label or kind)


def star_instance(inst: Instance) -> Instance:
    """Same buyers and valuations, seller linked to all, no buyer-buyer edges."""
    net = star(inst.net.seller, inst.net.buyers)
    return Instance(net, GlobalProfile.truthful(net, inst.valuations), inst.seed,
                    inst.label + "/star")


# ---------------------------------------------------------------------------
# named suites for the CLI


@dataclass
class SuiteResult:
    name: str
    instances: int = 0
    checks: int = 0
    deviations: int = 0
    failures: list[DeviationReport] = field(default_factory=list)
    expect_failure: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.failures) if self.expect_failure else not self.failures


def _meta_property_suite(name, meta, make_mech, kind, m_of, seeds, policy, n_max=12):
    res = SuiteResult(name)
    for s in range(seeds):
        m = m_of(s)
        inst = random_instance(s, kind, m, n_max=n_max, label=name)
        runner = lifted(meta, make_mech(inst))
        for rep in (check_ic(runner, inst, policy), check_ir(runner, inst), check_nd(runner, inst)):
            res.checks += 1
            res.deviations += rep.checked
            if not rep.passed:
                res.failures.append(rep)
        res.instances += 1
    return res


def dns_for(inst: Instance, eps: float = 0.01) -> DNS:
    return DNS(CoinRecord.draw(inst.net.buyers, eps, inst.seed), eps)


def suite_msn_second_price(seeds: int) -> SuiteResult:
    return _meta_property_suite("msn-second-price", meta_msn, lambda _: SecondPrice(), "unit",
                                lambda s: 1, seeds, DeviationPolicy())


def suite_msn_mpa(seeds: int) -> SuiteResult:
    return _meta_property_suite("msn-mpa", meta_msn, lambda _: MPA(), "unit",
                                lambda s: 1 + s % 4, seeds, DeviationPolicy())


def suite_msn_los(seeds: int) -> SuiteResult:
    return _meta_property_suite("msn-los", meta_msn, lambda _: LOS(), "single_minded",
                                lambda s: 1 + s % 4, seeds, DeviationPolicy(public_bundles=True))


def suite_msnm_dns(seeds: int, eps: float = 0.01) -> SuiteResult:
    return _meta_property_suite("msnm-dns", meta_msn_m, lambda inst: dns_for(inst, eps), "mixed",
                                lambda s: 1 + s % 3, seeds, DeviationPolicy())


def suite_non_sensitivity(seeds: int) -> list[SuiteResult]:
    results = []
    cases = [
        ("nonsens-second-price", lambda inst: SecondPrice(), "unit", lambda s: 1, False),
        ("nonsens-mpa", lambda inst: MPA(), "unit", lambda s: 1 + s % 4, False),
        ("nonsens-los", lambda inst: LOS(), "single_minded", lambda s: 1 + s % 4, False),
        ("nonsens-dns", lambda inst: dns_for(inst, 0.5), "mixed", lambda s: 2 + s % 2, True),
    ]
    for name, make, kind, m_of, expect_fail in cases:
        res = SuiteResult(name, expect_failure=expect_fail)
        for s in range(seeds):
            inst = random_instance(s, kind, m_of(s), label=name)
            rep = check_non_sensitivity(make(inst), inst)
            res.instances += 1
            res.checks += 1
            res.deviations += rep.checked
            if not rep.passed:
                res.failures.append(rep)
        results.append(res)
    return results


def suite_welfare_bound(seeds: int) -> SuiteResult:
    """SW of both lifts of the welfare maximiser is at least its SW on the seller's neighbours."""
    from .classical import sw

    res = SuiteResult("welfare-bound")
    vcg = BruteVCG()
    for s in range(seeds):
        inst = random_instance(s, "table" if s % 2 else "mixed", 1 + s % 4, n_max=8,
                               label="welfare-bound")
        vals = inst.valuations
        rs = inst.net.seller_neighbours
        first = sw(vcg.outcome(full_bundle(inst.profile.m), {i: vals[i] for i in rs}), vals)
        for meta in (meta_msn, meta_msn_m):
            res.checks += 1
            got = sw(meta(inst.net, inst.profile, vcg)[0], vals)
            if got < first:
                res.failures.append(DeviationReport(
                    "welfare-bound", False, inst.describe(),
                    detail=f"{meta.__name__}: SW {got} < first-neighbourhood SW {first}"))
        res.instances += 1
    return res


SUITES: dict[str, Callable[[int], SuiteResult | list[SuiteResult]]] = {
    "msn-second-price": suite_msn_second_price,
    "msn-mpa": suite_msn_mpa,
    "msn-los": suite_msn_los,
    "msnm-dns": suite_msnm_dns,
    "non-sensitivity": suite_non_sensitivity,
    "welfare-bound": suite_welfare_bound,
}
