"""Forwarding subgraph (FS) construction.

An FS is a DAG over copies of physical nodes.  It holds the tie-broken
shortest primary path plus, for every primary node, the shortest path to the
destination that survives the failure that node must route around.  Where an
alternate path would close a cycle, or would merge into a node whose onward
route differs from its own, it continues through a fresh copy of the
physical node instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .topology import Topology, TopologyError, shortest_path


class FsNode(NamedTuple):
    physical: int
    copy: int = 0

    def __str__(self) -> str:
        return f"{self.physical}" + "'" * self.copy


class FsError(ValueError):
    pass


LINK = "single-link"
NODE = "single-node"
SRLG = "srlg"


@dataclass(frozen=True)
class FailureModel:
    kind: str = LINK
    groups: tuple[frozenset, ...] = ()

    def __post_init__(self):
        if self.kind not in (LINK, NODE, SRLG):
            raise FsError(f"unknown failure model {self.kind!r}")
        if self.kind == SRLG and not self.groups:
            raise FsError("srlg model needs at least one group")

    @classmethod
    def srlg(cls, groups: Iterable[Iterable[tuple[int, int]]]) -> "FailureModel":
        return cls(SRLG, tuple(frozenset(tuple(l) for l in g) for g in groups))

    def validate(self, topo: Topology) -> None:
        for group in self.groups:
            for u, v in group:
                if not topo.has_link(u, v):
                    raise FsError(f"srlg link {u}-{v} not in topology")

    def group_of(self, link: tuple[int, int]) -> frozenset:
        for group in self.groups:
            if link in group:
                return group
        return frozenset([link])


def load_srlg(path: str | Path, topo: Topology) -> FailureModel:
    """One group per line, links written as ``src-dst`` tokens.

    A token names the physical link, so on undirected maps both directions
    join the group.
    """
    groups = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        group = set()
        for tok in line.split():
            try:
                a, b = tok.split("-")
                u, v = topo.node_id(a), topo.node_id(b)
            except (ValueError, TopologyError):
                raise FsError(f"{path}:{lineno}: bad link token {tok!r}") from None
            if not topo.has_link(u, v):
                raise FsError(f"{path}:{lineno}: no link {tok}")
            group.add((u, v))
            if not topo.directed and topo.has_link(v, u):
                group.add((v, u))
        groups.append(group)
    model = FailureModel.srlg(groups)
    model.validate(topo)
    return model


@dataclass
class ForwardingSubgraph:
    source: int
    dest: int
    primary: tuple[int, ...]
    # alternates[i] is the physical path from primary[i] to dest, () if none
    alternates: tuple[tuple[int, ...], ...]
    succ: dict[FsNode, list[FsNode]] = field(default_factory=dict)
    model: str = LINK

    @property
    def hops(self) -> int:
        return len(self.primary) - 1

    @property
    def nodes(self) -> list[FsNode]:
        return list(self.succ)

    @property
    def edges(self) -> list[tuple[FsNode, FsNode]]:
        return [(u, v) for u, vs in self.succ.items() for v in vs]

    def copies(self, physical: int) -> list[FsNode]:
        return sorted(n for n in self.succ if n.physical == physical)

    def continuation(self, node: FsNode) -> tuple[int, ...]:
        """Physical route obtained by always taking the first successor."""
        out = [node.physical]
        while self.succ[node]:
            node = self.succ[node][0]
            out.append(node.physical)
        return tuple(out)

    def reaches(self, start: FsNode, goal: FsNode) -> bool:
        stack, seen = [start], {start}
        while stack:
            u = stack.pop()
            if u == goal:
                return True
            for v in self.succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    def topological_order(self) -> list[FsNode]:
        indeg = {n: 0 for n in self.succ}
        for _, v in self.edges:
            indeg[v] += 1
        ready = sorted(n for n, k in indeg.items() if k == 0)
        order = []
        while ready:
            u = ready.pop(0)
            order.append(u)
            for v in self.succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
                    ready.sort()
        if len(order) != len(self.succ):
            raise FsError("forwarding subgraph has a cycle")
        return order

    def dump(self, topo: Topology | None = None) -> str:
        """Deterministic text form used by the ``fs`` command and tests."""
        name = (lambda u: topo.names[u]) if topo is not None else str

        def fmt(n: FsNode) -> str:
            return name(n.physical) + "'" * n.copy

        lines = [f"fs {name(self.source)} -> {name(self.dest)} model={self.model}"]
        lines.append("primary: " + " ".join(name(u) for u in self.primary))
        for i, alt in enumerate(self.alternates):
            body = " ".join(name(u) for u in alt) if alt else "-"
            lines.append(f"alternate {name(self.primary[i])}: {body}")
        lines.append("nodes: " + " ".join(fmt(n) for n in self.topological_order()))
        lines.append(f"edges: {len(self.edges)}")
        for u in self.topological_order():
            for v in self.succ[u]:
                lines.append(f"  {fmt(u)} -> {fmt(v)}")
        return "\n".join(lines) + "\n"


def make_acyclic(fs: ForwardingSubgraph, path: Iterable[int]) -> ForwardingSubgraph:
    """Add an alternate ``path`` (starting at a node already in ``fs``).

    Each hop first tries the existing copies of its head node, lowest copy
    index first.  A copy is reused when linking to it cannot close a cycle
    and its first-successor route equals the rest of ``path``; at that point
    the remainder is already present and we stop.  Otherwise a new copy is
    created.  Mutates and returns ``fs``.
    """
    path = tuple(path)
    cur = FsNode(path[0], 0)
    if cur not in fs.succ:
        raise FsError(f"alternate starts at {path[0]}, which is not in the FS")
    for j in range(1, len(path)):
        v = path[j]
        rest = path[j:]
        target = None
        for cand in fs.copies(v):
            if fs.continuation(cand) == rest and not fs.reaches(cand, cur):
                target = cand
                break
        if target is not None:
            if target not in fs.succ[cur]:
                fs.succ[cur].append(target)
            return fs
        existing = fs.copies(v)
        fresh = FsNode(v, existing[-1].copy + 1 if existing else 0)
        fs.succ[fresh] = []
        fs.succ[cur].append(fresh)
        cur = fresh
    return fs


def _removed_for(topo: Topology, model: FailureModel, primary, i):
    u, v = primary[i], primary[i + 1]
    if model.kind == LINK:
        return [(u, v)], ()
    if model.kind == NODE:
        if v == primary[-1]:
            # the destination itself cannot be avoided
            return [(u, v)], ()
        return (), (v,)
    return sorted(model.group_of((u, v))), ()


def build_fs(
    topo: Topology,
    s: int,
    d: int,
    model: FailureModel | None = None,
    primary_path: tuple[int, ...] | None = None,
) -> ForwardingSubgraph:
    """Primary shortest path plus one shortest alternate per primary hop.

    ``primary_path`` lets callers that already hold the tie-broken shortest
    path (e.g. from a shortest-path tree) skip recomputing it.
    """
    model = model or FailureModel()
    topo.check_node(s)
    topo.check_node(d)
    if s == d:
        raise FsError("source and destination coincide")
    if model.kind == SRLG:
        model.validate(topo)
    if primary_path is None:
        res = shortest_path(topo, s, d)
        if res is None:
            raise FsError(f"{s} and {d} are disconnected")
        primary_path = res.nodes
    primary = tuple(primary_path)

    fs = ForwardingSubgraph(s, d, primary, (), {}, model.kind)
    for a, b in zip(primary, primary[1:]):
        fs.succ[FsNode(a)] = [FsNode(b)]
    fs.succ[FsNode(d)] = []

    alternates = []
    for i in range(len(primary) - 1):
        links, nodes = _removed_for(topo, model, primary, i)
        res = shortest_path(topo, primary[i], d, links, nodes)
        alt = res.nodes if res is not None else ()
        alternates.append(alt)
        if alt:
            make_acyclic(fs, alt)
    fs.alternates = tuple(alternates)
    return fs


def fs_edge_count(fs: ForwardingSubgraph) -> int:
    return sum(len(vs) for vs in fs.succ.values())
