"""Acceptance gate: one marked group of tests per criterion; see the terminal summary."""
import time

import numpy as np
import pytest

from netauction import bench
from netauction.classical import LOS, MPA, BruteVCG, SecondPrice, revenue, sw
from netauction.cli import dns_manipulation_report
from netauction.golden import A, B, C
from netauction.lpsolve import build_config_lp, solve
from netauction.meta import meta_msn, meta_msn_m
from netauction.props import (dns_for, random_instance, random_valuations, star_instance, suite_msn_los, suite_msn_mpa,
                              suite_msn_second_price, suite_msnm_dns, suite_non_sensitivity,
                              suite_welfare_bound)
from netauction.valuation import SingleMinded, bundle_of, full_bundle


def _summary(res) -> str:
    first = res.failures[0].to_json() if res.failures else ""
    return (f"{res.name}: {res.instances} instances, {res.deviations} deviations, "
            f"{len(res.failures)} failing checks {first}")


# ---------------------------------------------------------------- 1

@pytest.mark.criterion(1)
def test_c1_golden_counterexample():
    start = time.perf_counter()
    rep = dns_manipulation_report()
    elapsed = time.perf_counter() - start
    msn = rep["msn"]
    assert msn["truthful_trace"].winners == [B, C]
    assert msn["truthful_utility_a"] == 0
    assert msn["deviating"].allocation == {A: 3} and msn["deviating"].paid(A) == 4
    assert msn["deviating_utility_a"] == 1
    ic_msn, ic_msn_m = rep["ic_msn"], rep["ic_msn_m"]
    assert not ic_msn.passed and ic_msn.deviator == A and ic_msn.gap == 1
    assert ic_msn_m.passed
    print(f"C1 u_a truthful 0, deviating 1 (pays 4); meta_msn flagged gap {ic_msn.gap}; "
          f"meta_msn_m passes {ic_msn_m.checked} deviations; {elapsed:.3f}s")
    assert elapsed < 1.0


# ---------------------------------------------------------------- 2

_C2_BUDGET = 120.0
_c2_time = []


@pytest.mark.criterion(2)
@pytest.mark.parametrize("suite", [suite_msn_second_price, suite_msn_mpa, suite_msn_los],
                         ids=["second_price", "mpa", "los"])
def test_c2_metamsn_suites(suite):
    start = time.perf_counter()
    res = suite(200)
    _c2_time.append(time.perf_counter() - start)
    print("C2", _summary(res), f"{_c2_time[-1]:.1f}s")
    assert res.instances == 200
    assert not res.failures, _summary(res)
    assert sum(_c2_time) < _C2_BUDGET


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3)
def test_c3_msnm_dns_fixed_coins():
    start = time.perf_counter()
    res = suite_msnm_dns(100, eps=0.01)
    elapsed = time.perf_counter() - start
    print("C3", _summary(res), f"{elapsed:.1f}s")
    assert res.instances == 100 and not res.failures, _summary(res)
    assert elapsed < 300


# ---------------------------------------------------------------- 4

@pytest.mark.criterion(4)
def test_c4_non_sensitivity():
    start = time.perf_counter()
    results = {r.name: r for r in suite_non_sensitivity(500)}
    elapsed = time.perf_counter() - start
    for r in results.values():
        print("C4", _summary(r))
    for name in ("nonsens-second-price", "nonsens-mpa", "nonsens-los"):
        assert results[name].instances == 500 and not results[name].failures
    dns = results["nonsens-dns"]
    assert dns.failures, "no DNS counterexample within 500 instances"
    print("C4 logged DNS counterexample:", dns.failures[0].to_json())
    assert elapsed < 120


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5)
def test_c5_welfare_bound():
    start = time.perf_counter()
    res = suite_welfare_bound(200)
    elapsed = time.perf_counter() - start
    print("C5", _summary(res), f"{elapsed:.1f}s")
    assert res.instances == 200 and res.checks == 400 and not res.failures
    assert elapsed < 120


# ---------------------------------------------------------------- 6

@pytest.mark.criterion(6)
def test_c6_lp_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    for _ in range(100):
        n, m = int(rng.integers(1, 13)), int(rng.integers(1, 6))
        vals = {i + 1: v for i, v in enumerate(
            random_valuations(str(rng.choice(["mixed", "single_minded", "unit"])), m, n, rng))}
        lp = build_config_lp(full_bundle(m), vals)
        sol = solve(lp)
        integral, _ = BruteVCG.optimum(full_bundle(m), vals)
        assert sol.is_dual_certificate(lp) and sol.optimum >= integral
    pairs = {i + 1: SingleMinded(3, bundle_of(p), 1) for i, p in enumerate(([0, 1], [1, 2], [0, 2]))}
    opt = solve(build_config_lp(full_bundle(3), pairs)).optimum
    elapsed = time.perf_counter() - start
    print(f"C6 100 LPs certified, pair cover optimum {opt}, {elapsed:.1f}s")
    assert abs(float(opt) - 1.5) <= 1e-9
    assert elapsed < 60


# ---------------------------------------------------------------- 7

@pytest.mark.criterion(7)
def test_c7_experiment_ordering():
    start = time.perf_counter()
    base = bench.Scenario(network="pa", n=1000, k=3, m=10, mechanism="los", repeats=20, seed=2024)
    net = bench.build_network(base)
    problems = []
    for m in (10, 15, 20):
        sc = bench.Scenario(network="pa", n=1000, k=3, m=m, mechanism="los", repeats=20, seed=2024)
        s = {k.split("/")[1]: v for k, v in bench.summarize(bench.run_scenario(sc, net)).items()}
        for metric in ("mean_sw", "mean_revenue"):
            f, a = getattr(s["first"], metric), getattr(s["all"], metric)
            msn, msn_m = getattr(s["msn"], metric), getattr(s["msn_m"], metric)
            if not (f <= msn <= a and f <= msn_m <= a):
                problems.append((m, metric, f, msn, msn_m, a))
            gap = (msn - msn_m) / msn_m if msn_m else 0.0
            print(f"C7 m={m} {metric}: FIRST {f:.0f} MetaMSN {msn:.0f} MetaMSN-m {msn_m:.0f} "
                  f"ALL {a:.0f}; MetaMSN vs MetaMSN-m gap {gap:+.2%}")
    elapsed = time.perf_counter() - start
    print(f"C7 {elapsed:.1f}s")
    assert not problems, problems
    assert elapsed < 300


# ---------------------------------------------------------------- 8

@pytest.mark.criterion(8)
@pytest.mark.parametrize("mechanism,m,extra", [
    ("los", 8, {}), ("mpa", 3, {}), ("dns", 3, {"eps": 0.5, "ground_set": 300}),
    ("second_price", 1, {})])
def test_c8_determinism(tmp_path, mechanism, m, extra):
    sc = bench.Scenario(network="er", n=80, p=0.05, m=m, mechanism=mechanism, repeats=4,
                        seed=8, **extra)
    bench.emit_csv(bench.run_scenario(sc), tmp_path / "a.csv")
    bench.emit_csv(bench.run_scenario(sc), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


# ---------------------------------------------------------------- 9

STAR_CASES = [
    ("msn", "second_price", "unit", 1),
    ("msn", "mpa", "unit", 4),
    ("msn", "los", "single_minded", 4),
    ("msn_m", "dns", "mixed", 3),
    ("msn_m", "brute_vcg", "table", 3),
    ("msn_m", "los", "single_minded", 4),
]


def _star_mech(name, inst):
    return {"second_price": SecondPrice, "mpa": MPA, "los": LOS, "brute_vcg": BruteVCG}[name]() \
        if name != "dns" else dns_for(inst, 0.5)


@pytest.mark.criterion(9)
@pytest.mark.parametrize("meta_name,mech_name,kind,m_max", STAR_CASES,
                         ids=[f"{a}-{b}" for a, b, _, _ in STAR_CASES])
def test_c9_star_reduction(meta_name, mech_name, kind, m_max):
    meta = {"msn": meta_msn, "msn_m": meta_msn_m}[meta_name]
    diffs = []
    for seed in range(100):
        m = 1 + seed % m_max
        inst = star_instance(random_instance(seed, kind, m, n_max=8 if kind == "table" else 12))
        mech = _star_mech(mech_name, inst)
        vals = inst.valuations
        alone = mech.outcome(full_bundle(m), vals)
        lifted, _ = meta(inst.net, inst.profile, mech)
        if (sw(alone, vals), revenue(alone)) != (sw(lifted, vals), revenue(lifted)):
            diffs.append((seed, sw(alone, vals), revenue(alone), sw(lifted, vals), revenue(lifted)))
    print(f"C9 {meta_name} o {mech_name}: {len(diffs)}/100 differ {diffs[:3]}")
    assert not diffs
