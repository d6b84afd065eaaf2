"""Command line: ``netauction run | check | repro``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

from . import bench, golden, props
from .classical import LOS, sw, utility
from .meta import meta_msn, meta_msn_m
from .valuation import indicator


def _fmt_bundle(x: int, m: int) -> str:
    return "(" + ",".join(map(str, indicator(x, m))) + ")"


def cmd_run(args) -> int:
    try:
        sc = bench.load_scenario(args.scenario)
        if args.repeats is not None:
            sc = replace(sc, repeats=args.repeats)
        records = bench.run_scenario(sc)
    except (bench.ScenarioError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    bench.emit_csv(records, args.output)
    summary = bench.summarize(records)
    print(f"{'stack':<22}{'runs':>6}{'mean SW':>16}{'mean RV':>16}{'joined':>10}")
    for label in sorted(summary):
        s = summary[label]
        print(f"{label:<22}{s.runs:>6}{s.mean_sw:>16.1f}{s.mean_revenue:>16.1f}{s.mean_joined:>10.1f}")
    print(f"wrote {len(records)} records to {args.output}")
    if sc.mechanism == "brute_vcg":
        # welfare maximiser: FIRST <= meta per run is guaranteed
        by_repeat: dict[int, dict[str, int]] = {}
        for rec in records:
            by_repeat.setdefault(rec.run_id // len(sc.stacks), {})[rec.mechanism.split("/")[1]] = rec.sw
        bad = [r for r, row in by_repeat.items() if "first" in row
               and any(row[s] < row["first"] for s in ("msn", "msn_m") if s in row)]
        if bad:
            print(f"FAIL: meta SW below FIRST in repeats {bad}")
            return 1
    return 0


def _print_suite(res: props.SuiteResult, show: int) -> None:
    verdict = "PASS" if res.passed else "FAIL"
    note = " (violations expected)" if res.expect_failure else ""
    print(f"{res.name:<22}{res.instances:>10}{res.checks:>8}{res.deviations:>12}"
          f"{len(res.failures):>10}  {verdict}{note}")
    for rep in res.failures[:show]:
        print("    " + rep.to_json())


def cmd_check(args) -> int:
    suite = props.SUITES.get(args.suite)
    if suite is None:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(props.SUITES)}",
              file=sys.stderr)
        return 2
    start = time.perf_counter()
    result = suite(args.seeds)
    results = result if isinstance(result, list) else [result]
    print(f"{'suite':<22}{'instances':>10}{'checks':>8}{'deviations':>12}{'failures':>10}  verdict")
    for res in results:
        _print_suite(res, args.show)
    print(f"elapsed {time.perf_counter() - start:.1f}s")
    return 0 if all(r.passed for r in results) else 1


def dns_manipulation_report() -> dict:
    """Golden trace plus IC verdicts of both meta-mechanisms on the three-buyer instance."""
    report = golden.replay_dns_manipulation()
    net, gp = golden.three_buyer_network(), golden.three_buyer_profile()
    inst = props.Instance(net, gp, label="three-buyer DNS")
    policy = props.DeviationPolicy(extra={golden.A: (golden.manipulated_a(),)})
    dns = golden.fixed_price_dns()
    report["ic_msn"] = props.check_ic(props.lifted(meta_msn, dns), inst, policy)
    report["ic_msn_m"] = props.check_ic(props.lifted(meta_msn_m, dns), inst, policy)
    return report


def cmd_repro_dns_manipulation(args) -> int:
    start = time.perf_counter()
    rep = dns_manipulation_report()
    m = 2
    for label in ("msn", "msn_m"):
        r = rep[label]
        print(f"== {label}: truthful run")
        for it in r["truthful_trace"].iterations:
            committed = ", ".join(f"{golden.NAMES[i]} gets {_fmt_bundle(x, m)} pays {p}"
                                  for i, (x, p) in it.committed.items())
            print(f"  iteration {it.index}: potential "
                  f"{[golden.NAMES[i] for i in it.potential]} -> {committed}")
        print(f"  termination: {r['truthful_trace'].termination}")
        print(f"  u_a truthful = {r['truthful_utility_a']}")
        dev = r["deviating"]
        print(f"== {label}: a reports v'(1,1) = 7")
        print(f"  a gets {_fmt_bundle(dev.bundle(golden.A), m)} pays {dev.paid(golden.A)}; "
              f"u_a = {r['deviating_utility_a']}")
    if args.json:
        print(json.dumps({k: rep[k]["truthful_trace"].to_dict() for k in ("msn", "msn_m")},
                         sort_keys=True))
    ic_msn, ic_msn_m = rep["ic_msn"], rep["ic_msn_m"]
    print(f"check_ic meta_msn   o dns: {'PASS' if ic_msn.passed else 'FAIL'} "
          f"({ic_msn.checked} deviations; deviator {ic_msn.deviator}, gap {ic_msn.gap})")
    print(f"check_ic meta_msn_m o dns: {'PASS' if ic_msn_m.passed else 'FAIL'} "
          f"({ic_msn_m.checked} deviations)")
    print(f"elapsed {time.perf_counter() - start:.3f}s")
    expected = (not ic_msn.passed and ic_msn.deviator == golden.A and ic_msn.gap == 1
                and ic_msn_m.passed)
    print("verdict:", "reproduced" if expected else "NOT reproduced")
    return 0 if expected else 1


def cmd_repro_los(args) -> int:
    vals, out = golden.los_example()
    for i in sorted(vals):
        v = vals[i]
        print(f"buyer {i}: demand {_fmt_bundle(v.demand, v.m)} value {v.value} -> "
              f"gets {_fmt_bundle(out.bundle(i), v.m)} pays {out.paid(i)}")
    print(f"SW = {sw(out, vals)}")
    return 0


def cmd_repro_los_counterexample(args) -> int:
    net, gp, lie = golden.los_priority_counterexample()
    true_v = gp[2].valuation
    for meta in (meta_msn, meta_msn_m):
        t, _ = meta(net, gp, LOS())
        d, _ = meta(net, gp.replace(2, lie), LOS())
        print(f"{meta.__name__:<11} buyer 2 truthful u = {utility(true_v, t, 2)}, "
              f"hiding neighbour 4 u = {utility(true_v, d, 2)}")
    return 0


REPRO = {
    "proposition": cmd_repro_dns_manipulation,
    "los-example": cmd_repro_los,
    "los-counterexample": cmd_repro_los_counterexample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netauction",
                                     description="Auctions over social networks by graph exploration")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file and write a CSV")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True, help="CSV path")
    p.add_argument("--repeats", type=int, help="override the scenario's repeat count")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="run a property suite over seeded instances")
    p.add_argument("suite", help=", ".join(props.SUITES))
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--show", type=int, default=3, help="failure reports printed per suite")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("repro", help="replay a hand-checked example")
    p.add_argument("example", choices=sorted(REPRO))
    p.add_argument("--json", action="store_true", help="also print the traces as JSON")
    p.set_defaults(func=lambda a: REPRO[a.example](a))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
