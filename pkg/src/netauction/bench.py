"""Experiment harness: scenario files, FIRST/ALL baselines, repeated runs, CSV output.

Scenario files hold one ``key = value`` pair per line; ``#`` starts a
comment.  Recognised keys and defaults:

    network     pa | er | file            (required)
    n           node count for pa/er      (required for pa/er, <= 2000)
    k           attachment edges for pa   (default 3)
    p           edge probability for er   (default 0.01)
    path        edge-list file for file   (relative to the scenario file)
    symmetrize  true | false              (default true)
    m           number of items           (required)
    mechanism   second_price | mpa | los | brute_vcg | dns   (required)
    stacks      comma list of first, all, msn, msn_m   (default all four)
    valuation   single_minded | unit | coverage | sqrt | table
                (default: los -> single_minded, second_price/mpa -> unit,
                 dns -> coverage, brute_vcg -> table)
    distribution, lo, hi, mean, std, ground_set, weight_lo, weight_hi, scale
                valuation model parameters, integers in minor money units
    eps         DNS group probability     (default 0.01)
    seed        master seed               (default 0)
    network_seed  seed of the synthetic graph (default: seed)
    repeats     runs per stack            (default ceil(|V| / 20))
    timing      record wall time in ms    (default false, keeps CSV reproducible)
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from statistics import fmean

import networkx as nx
import numpy as np

from .classical import DNS, LOS, MPA, BruteVCG, CoinRecord, Mechanism, Outcome, SecondPrice, revenue, sw
from .meta import META
from .netgraph import GlobalProfile, SocialNetwork, read_edge_list
from .valuation import MAX_ITEMS, ValuationModelConfig, full_bundle, generate

CSV_HEADER = ("run_id", "seller", "mechanism", "m", "sw", "revenue",
              "joined", "winners", "iterations", "ms")
STACKS = ("first", "msn", "msn_m", "all")
MAX_SYNTHETIC_NODES = 2000
MAX_ITEMS_FOR = {"dns": 6, "los": MAX_ITEMS, "brute_vcg": 5}
DEFAULT_VALUATION = {"los": "single_minded", "second_price": "unit", "mpa": "unit",
                     "dns": "coverage", "brute_vcg": "table"}


class ScenarioError(ValueError):
    pass


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


@dataclass(frozen=True)
class Scenario:
    network: str
    m: int
    mechanism: str
    n: int | None = None
    k: int = 3
    p: float = 0.01
    path: str | None = None
    symmetrize: bool = True
    stacks: tuple[str, ...] = STACKS
    valuation: str | None = None
    distribution: str = "uniform"
    lo: int = 0
    hi: int = 200_000
    mean: int = 100_000
    std: int = 4_000
    ground_set: int = 4_000
    weight_lo: int = 1
    weight_hi: int = 40_000
    scale: int = 100
    eps: float = 0.01
    seed: int = 0
    network_seed: int | None = None
    repeats: int | None = None
    timing: bool = False

    def __post_init__(self):
        if self.network not in ("pa", "er", "file"):
            raise ScenarioError(f"network must be pa, er or file, not {self.network!r}")
        if self.network == "file":
            if not self.path:
                raise ScenarioError("network = file needs a path")
            if not Path(self.path).is_file():
                raise ScenarioError(f"edge-list file {self.path} does not exist")
        else:
            if self.n is None or self.n < 2:
                raise ScenarioError("synthetic networks need n >= 2")
            if self.n > MAX_SYNTHETIC_NODES:
                raise ScenarioError(f"n={self.n} exceeds the desk-scale bound {MAX_SYNTHETIC_NODES}")
            if self.network == "pa" and not 1 <= self.k < self.n:
                raise ScenarioError("preferential attachment needs 1 <= k < n")
            if self.network == "er" and not 0 <= self.p <= 1:
                raise ScenarioError("edge probability p must lie in [0, 1]")
        if self.mechanism not in MECHANISM_FACTORIES:
            raise ScenarioError(f"unknown mechanism {self.mechanism!r}")
        bound = MAX_ITEMS_FOR.get(self.mechanism, MAX_ITEMS)
        if not 1 <= self.m <= bound:
            raise ScenarioError(f"m={self.m} outside [1, {bound}] for {self.mechanism}")
        if self.mechanism == "second_price" and self.m != 1:
            raise ScenarioError("second_price sells a single item; use m = 1")
        bad = [s for s in self.stacks if s not in STACKS]
        if bad or not self.stacks:
            raise ScenarioError(f"stacks must be drawn from {', '.join(STACKS)}")
        if self.mechanism == "dns" and not 0 < self.eps < 1:
            raise ScenarioError("eps must lie in (0, 1) for dns")
        if self.repeats is not None and self.repeats < 1:
            raise ScenarioError("repeats must be >= 1")

    @property
    def valuation_kind(self) -> str:
        return self.valuation or DEFAULT_VALUATION[self.mechanism]

    def valuation_config(self) -> ValuationModelConfig:
        return ValuationModelConfig(
            kind=self.valuation_kind, m=self.m, distribution=self.distribution,
            lo=self.lo, hi=self.hi, mean=self.mean, std=self.std, ground_set=self.ground_set,
            weight_lo=self.weight_lo, weight_hi=self.weight_hi, scale=self.scale, seed=self.seed)


def _convert(name: str, raw: str, typ):
    typ = str(typ)
    try:
        if "bool" in typ:
            return _BOOL[raw.lower()]
        if "tuple" in typ:
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if "int" in typ:
            return int(raw)
        if "float" in typ:
            return float(raw)
    except (KeyError, ValueError):
        raise ScenarioError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_scenario(text: str, base_dir: Path | str = ".", source: str = "<scenario>") -> Scenario:
    types = {f.name: f.type for f in fields(Scenario)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value'")
        if key not in types:
            raise ScenarioError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, types[key])
    if "path" in values:
        values["path"] = str(Path(base_dir) / values["path"])
    for key in ("network", "m", "mechanism"):
        if key not in values:
            raise ScenarioError(f"{source}: missing required key {key!r}")
    try:
        return Scenario(**values)
    except ScenarioError as e:
        raise ScenarioError(f"{source}: {e}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), path.parent, str(path))


# ---------------------------------------------------------------------------
# networks


def build_network(sc: Scenario) -> SocialNetwork:
    if sc.network == "file":
        return read_edge_list(sc.path, symmetrize=sc.symmetrize)
    seed = sc.seed if sc.network_seed is None else sc.network_seed
    if sc.network == "pa":
        g = nx.barabasi_albert_graph(sc.n, sc.k, seed=seed)
    else:
        g = nx.gnp_random_graph(sc.n, sc.p, seed=seed)
    # undirected graphs: both directions are edges
    edges = [(i, j) for i, j in g.edges()] + [(j, i) for i, j in g.edges()]
    return SocialNetwork.from_edges(edges, nodes=g.nodes())


# ---------------------------------------------------------------------------
# runs


def _second_price(sc, buyers, r):
    return SecondPrice()


def _dns(sc, buyers, r):
    return DNS(CoinRecord.draw(buyers, sc.eps, (sc.seed, r)), sc.eps)


MECHANISM_FACTORIES = {
    "second_price": _second_price,
    "mpa": lambda sc, buyers, r: MPA(),
    "los": lambda sc, buyers, r: LOS(),
    "brute_vcg": lambda sc, buyers, r: BruteVCG(),
    "dns": _dns,
}


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    seller: int
    mechanism: str
    m: int
    sw: int
    revenue: int
    joined: int
    winners: int
    iterations: int
    ms: int = 0

    def __post_init__(self):
        if min(self.joined, self.winners, self.iterations, self.ms) < 0:
            raise ValueError("counts must be non-negative")

    def row(self) -> tuple:
        return tuple(getattr(self, k) for k in CSV_HEADER)


def baseline_all(net: SocialNetwork, gp: GlobalProfile, mech: Mechanism) -> Outcome:
    """The classical mechanism over every buyer, as if the seller knew them all."""
    return mech.outcome(full_bundle(gp.m), gp.valuations(net.buyers))


def baseline_first(net: SocialNetwork, gp: GlobalProfile, mech: Mechanism) -> Outcome:
    """The classical mechanism over the seller's own neighbours only."""
    return mech.outcome(full_bundle(gp.m), gp.valuations(sorted(net.seller_neighbours)))


def draw_repeat(sc: Scenario, net: SocialNetwork, r: int) -> tuple[SocialNetwork, GlobalProfile]:
    rng = np.random.default_rng([sc.seed, r])
    nodes = sorted(net.nodes)
    seller = nodes[int(rng.integers(len(nodes)))]
    net = net.with_seller(seller)
    vals = generate(sc.valuation_config(), len(net.buyers), rng)
    return net, GlobalProfile.truthful(net, dict(zip(net.buyers, vals)))


def run_stack(stack: str, net: SocialNetwork, gp: GlobalProfile, mech: Mechanism
              ) -> tuple[Outcome, int, int]:
    """Outcome, joined-buyer count and iteration count of one stack."""
    if stack == "first":
        return baseline_first(net, gp, mech), len(net.seller_neighbours), 1
    if stack == "all":
        return baseline_all(net, gp, mech), len(net.buyers), 1
    out, trace = META[stack](net, gp, mech)
    return out, len(trace.explored), len(trace.iterations)


def default_repeats(net: SocialNetwork) -> int:
    return max(1, math.ceil(len(net.nodes) / 20))


def run_scenario(sc: Scenario, net: SocialNetwork | None = None) -> list[RunRecord]:
    net = net if net is not None else build_network(sc)
    if len(net.nodes) < 2:
        raise ScenarioError("network needs a seller and at least one buyer")
    if sc.mechanism == "brute_vcg" and "all" in sc.stacks and len(net.nodes) - 1 > BruteVCG().max_buyers:
        raise ScenarioError("brute_vcg cannot run ALL on more than "
                            f"{BruteVCG().max_buyers} buyers; drop 'all' from stacks")
    repeats = sc.repeats or default_repeats(net)
    records = []
    for r in range(repeats):
        run_net, gp = draw_repeat(sc, net, r)
        mech = MECHANISM_FACTORIES[sc.mechanism](sc, run_net.buyers, r)
        truth = gp.valuations(run_net.buyers)
        for s_idx, stack in enumerate(sc.stacks):
            start = time.perf_counter()
            out, joined, iters = run_stack(stack, run_net, gp, mech)
            ms = round((time.perf_counter() - start) * 1000) if sc.timing else 0
            records.append(RunRecord(
                run_id=r * len(sc.stacks) + s_idx, seller=run_net.seller,
                mechanism=f"{sc.mechanism}/{stack}", m=sc.m, sw=sw(out, truth),
                revenue=revenue(out), joined=joined, winners=len(out.winners),
                iterations=iters, ms=ms))
    return records


# ---------------------------------------------------------------------------
# output


def csv_text(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in sorted(records, key=lambda r: r.run_id):
        w.writerow(rec.row())
    return buf.getvalue()


def emit_csv(records, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(csv_text(records))


def read_csv(path) -> list[RunRecord]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [RunRecord(**{k: (row[k] if k == "mechanism" else int(row[k])) for k in CSV_HEADER})
            for row in rows]


@dataclass
class StackSummary:
    mechanism: str
    runs: int
    mean_sw: float
    mean_revenue: float
    mean_joined: float = 0.0
    extras: dict = field(default_factory=dict)


def summarize(records) -> dict[str, StackSummary]:
    groups: dict[str, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.mechanism, []).append(rec)
    return {label: StackSummary(label, len(rs), fmean(r.sw for r in rs),
                                fmean(r.revenue for r in rs), fmean(r.joined for r in rs))
            for label, rs in groups.items()}
