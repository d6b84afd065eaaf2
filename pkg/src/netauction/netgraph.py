"""Directed social network, buyer profiles and the join (reachability) rule."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .valuation import Valuation, Zero


class EdgeListError(ValueError):
    pass


@dataclass(frozen=True)
class SocialNetwork:
    """Nodes are non-negative ints; ``seller`` may be chosen after loading."""

    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    seller: int | None = None

    def __post_init__(self):
        for i, j in self.edges:
            if i == j:
                raise EdgeListError(f"self-loop on node {i}")
            if i not in self.nodes or j not in self.nodes:
                raise EdgeListError(f"edge ({i}, {j}) has an endpoint outside the node set")
        if self.seller is not None and self.seller not in self.nodes:
            raise EdgeListError(f"seller {self.seller} is not a node")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], seller: int | None = None,
                   nodes: Iterable[int] = ()) -> "SocialNetwork":
        edges = frozenset((int(i), int(j)) for i, j in edges)
        all_nodes = set(nodes)
        for i, j in edges:
            all_nodes.add(i)
            all_nodes.add(j)
        if seller is not None:
            all_nodes.add(seller)
        return cls(frozenset(all_nodes), edges, seller)

    def with_seller(self, seller: int) -> "SocialNetwork":
        return SocialNetwork(self.nodes, self.edges, seller)

    @cached_property
    def _adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {i: set() for i in self.nodes}
        for i, j in self.edges:
            adj[i].add(j)
        return {i: frozenset(s) for i, s in adj.items()}

    def neighbours(self, i: int) -> frozenset[int]:
        return self._adjacency[i]

    @cached_property
    def buyers(self) -> tuple[int, ...]:
        return tuple(sorted(self.nodes - {self.seller}))

    @property
    def seller_neighbours(self) -> frozenset[int]:
        if self.seller is None:
            raise ValueError("network has no seller")
        return self.neighbours(self.seller)

    def reachable(self) -> frozenset[int]:
        """Buyers with a path from the seller along true edges."""
        seen = {self.seller}
        queue = deque([self.seller])
        while queue:
            i = queue.popleft()
            for j in self.neighbours(i):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return frozenset(seen - {self.seller})


def star(seller: int, buyers: Iterable[int]) -> SocialNetwork:
    """Seller linked to every buyer, no buyer-buyer edges: the classical auction."""
    buyers = list(buyers)
    return SocialNetwork.from_edges(((seller, b) for b in buyers), seller=seller, nodes=buyers)


def load_edge_list(text: str, symmetrize: bool = False) -> SocialNetwork:
    """Parse whitespace-separated ``src dst`` lines; ``#`` starts a comment line."""
    edges = set()
    nodes = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise EdgeListError(f"line {lineno}: expected two node ids, got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: node ids must be integers, got {raw!r}") from None
        if i < 0 or j < 0:
            raise EdgeListError(f"line {lineno}: node ids must be non-negative")
        if i == j:
            raise EdgeListError(f"line {lineno}: self-loop on node {i}")
        nodes.update((i, j))
        edges.add((i, j))
        if symmetrize:
            edges.add((j, i))
    return SocialNetwork(frozenset(nodes), frozenset(edges))


def read_edge_list(path, symmetrize: bool = False) -> SocialNetwork:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh.read(), symmetrize)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    valuation: Valuation
    neighbours: frozenset[int] = frozenset()

    @classmethod
    def null(cls, m: int) -> "Profile":
        return cls(Zero(m), frozenset())

    @property
    def is_null(self) -> bool:
        return isinstance(self.valuation, Zero) and not self.neighbours


@dataclass(frozen=True)
class GlobalProfile:
    """Reported profile per buyer; missing buyers read as the null profile."""

    m: int
    profiles: Mapping[int, Profile] = field(default_factory=dict)

    def __getitem__(self, i: int) -> Profile:
        p = self.profiles.get(i)
        return p if p is not None else Profile.null(self.m)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.profiles))

    def __len__(self) -> int:
        return len(self.profiles)

    @classmethod
    def truthful(cls, net: SocialNetwork, valuations: Mapping[int, Valuation]) -> "GlobalProfile":
        """Every buyer reports her true valuation and her full neighbour set."""
        ms = {v.m for v in valuations.values()}
        if len(ms) != 1:
            raise ValueError("all valuations must share the same item count")
        return cls(ms.pop(), {i: Profile(valuations[i], net.neighbours(i)) for i in valuations})

    def replace(self, i: int, profile: Profile) -> "GlobalProfile":
        profiles = dict(self.profiles)
        profiles[i] = profile
        return GlobalProfile(self.m, profiles)

    def valuations(self, ids: Iterable[int]) -> dict[int, Valuation]:
        return {i: self[i].valuation for i in ids}


def joined_set(net: SocialNetwork, gp: GlobalProfile) -> frozenset[int]:
    """Buyers reached from the seller along reported neighbour sets."""
    seen: set[int] = set()
    queue = deque(sorted(net.seller_neighbours))
    seen.update(queue)
    while queue:
        i = queue.popleft()
        for j in gp[i].neighbours:
            if j != net.seller and j not in seen:
                seen.add(j)
                queue.append(j)
    return frozenset(seen)


def restrict(gp: GlobalProfile, ids: Iterable[int]) -> GlobalProfile:
    """Keep the profiles of ``ids``; everyone else becomes the null profile."""
    keep = set(ids)
    return GlobalProfile(gp.m, {i: p for i, p in gp.profiles.items() if i in keep})


def reported(net: SocialNetwork, gp: GlobalProfile) -> GlobalProfile:
    """The profile the seller actually observes: unjoined buyers are nulled."""
    return restrict(gp, joined_set(net, gp))
