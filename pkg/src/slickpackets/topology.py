"""Network maps: loading, link labels and shortest paths.

Nodes are dense integers ``0..N-1``.  Every directed link ``(u, v)`` gets a
label that is unique among the outgoing links of ``u`` and is
``ceil(log2(outdegree(u)))`` bits wide.

Latencies are kept exact: integer latencies stay ``int`` and anything else
becomes a :class:`fractions.Fraction`, so path sums and equality tests never
suffer from float rounding.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, NamedTuple, Union

Latency = Union[int, Fraction]


class TopologyError(ValueError):
    """Raised for malformed or inconsistent topology input."""


class Link(NamedTuple):
    src: int
    dst: int
    latency: Latency = 1

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)


class PathResult(NamedTuple):
    nodes: tuple[int, ...]
    latency: Latency
    hops: int


def label_width(degree: int) -> int:
    """Bits needed for ``degree`` distinct labels (0 for a single link)."""
    if degree <= 1:
        return 0
    return (degree - 1).bit_length()


def parse_latency(token: str) -> Latency:
    value = Fraction(token)
    if value < 0:
        raise ValueError(f"negative latency {token!r}")
    if value.denominator == 1:
        return int(value)
    return value


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable directed, weighted network map with per-node link labels.

    Build instances with :meth:`from_links` or :func:`load_topology`.
    """

    n: int
    succ: tuple[tuple[tuple[int, Latency], ...], ...]
    weighted: bool
    directed: bool
    names: tuple[str, ...]
    _label: dict = field(repr=False)
    _by_label: tuple = field(repr=False)
    _latency: dict = field(repr=False)
    _pred: tuple = field(repr=False)

    @classmethod
    def from_links(
        cls,
        n: int,
        links: Iterable,
        *,
        directed: bool = False,
        weighted: bool | None = None,
        names: Iterable[str] | None = None,
    ) -> "Topology":
        """Build a topology from ``(src, dst[, latency])`` tuples.

        With ``directed=False`` every link is installed in both directions
        unless the reverse direction is listed explicitly.
        """
        explicit: dict[tuple[int, int], Latency] = {}
        for item in links:
            if len(item) == 2:
                u, v = item
                lat: Latency = 1
            else:
                u, v, lat = item
                if isinstance(lat, float):
                    lat = parse_latency(repr(lat))
                elif isinstance(lat, Fraction) and lat.denominator == 1:
                    lat = int(lat)
            u, v = int(u), int(v)
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"link ({u},{v}) outside node range 0..{n - 1}")
            if lat < 0:
                raise TopologyError(f"negative latency on ({u},{v})")
            if (u, v) in explicit:
                raise TopologyError(f"duplicate link ({u},{v})")
            explicit[(u, v)] = lat
        latency = dict(explicit)
        if not directed:
            for (u, v), lat in explicit.items():
                latency.setdefault((v, u), lat)
        if weighted is None:
            weighted = any(lat != 1 for lat in latency.values())
        elif not weighted and any(lat != 1 for lat in latency.values()):
            raise TopologyError("unweighted topology with non-unit latency")
        return cls._build(n, latency, weighted, directed, names)

    @classmethod
    def _build(cls, n, latency, weighted, directed, names) -> "Topology":
        adj: list[list[tuple[int, Latency]]] = [[] for _ in range(n)]
        for (u, v), lat in latency.items():
            adj[u].append((v, lat))
        for row in adj:
            row.sort()
        pred: list[list[tuple[int, Latency]]] = [[] for _ in range(n)]
        for u, row in enumerate(adj):
            for v, lat in row:
                pred[v].append((u, lat))
        labels: dict[tuple[int, int], int] = {}
        by_label = []
        for u, row in enumerate(adj):
            by_label.append(tuple(v for v, _ in row))
            for i, (v, _) in enumerate(row):
                labels[(u, v)] = i
        if names is None:
            names = [str(i) for i in range(n)]
        names = tuple(names)
        if len(names) != n:
            raise TopologyError("names must cover every node")
        return cls(
            n=n,
            succ=tuple(tuple(row) for row in adj),
            weighted=bool(weighted),
            directed=directed,
            names=names,
            _label=labels,
            _by_label=tuple(by_label),
            _latency=dict(latency),
            _pred=tuple(tuple(p) for p in pred),
        )

    # -- structure -------------------------------------------------------

    @property
    def nodes(self) -> range:
        return range(self.n)

    @property
    def links(self) -> list[Link]:
        return [Link(u, v, lat) for u in range(self.n) for v, lat in self.succ[u]]

    def num_links(self) -> int:
        """Directed link count."""
        return len(self._latency)

    def num_physical_links(self) -> int:
        """Link count with ``(u,v)`` and ``(v,u)`` merged (undirected maps)."""
        if self.directed:
            return len(self._latency)
        return len({(min(u, v), max(u, v)) for u, v in self._latency})

    def has_link(self, u: int, v: int) -> bool:
        return (u, v) in self._latency

    def latency(self, u: int, v: int) -> Latency:
        try:
            return self._latency[(u, v)]
        except KeyError:
            raise TopologyError(f"no link ({u},{v})") from None

    def degree(self, u: int) -> int:
        return len(self.succ[u])

    def check_node(self, u: int) -> None:
        if not isinstance(u, int) or not 0 <= u < self.n:
            raise TopologyError(f"unknown node {u!r}")

    def node_id(self, name: str | int) -> int:
        """Resolve a node by its name in the source file (or by id)."""
        if isinstance(name, int):
            self.check_node(name)
            return name
        try:
            return self.names.index(name)
        except ValueError:
            pass
        try:
            idx = int(name)
        except ValueError:
            raise TopologyError(f"unknown node {name!r}") from None
        self.check_node(idx)
        return idx

    # -- labels ----------------------------------------------------------

    def width(self, u: int) -> int:
        return label_width(len(self.succ[u]))

    def label(self, u: int, v: int) -> str:
        """Label of link ``(u, v)`` as a bit string (may be empty)."""
        try:
            idx = self._label[(u, v)]
        except KeyError:
            raise TopologyError(f"no link ({u},{v})") from None
        w = self.width(u)
        return format(idx, f"0{w}b") if w else ""

    def label_value(self, u: int, v: int) -> int:
        return self._label[(u, v)]

    def next_hop(self, u: int, label: str | int) -> int | None:
        """Neighbor of ``u`` reached through ``label``; ``None`` if unassigned."""
        if isinstance(label, str):
            if len(label) != self.width(u):
                return None
            idx = int(label, 2) if label else 0
        else:
            idx = label
        row = self._by_label[u]
        if 0 <= idx < len(row):
            return row[idx]
        return None

    def path_latency(self, path: Iterable[int]) -> Latency:
        path = list(path)
        return sum((self.latency(a, b) for a, b in zip(path, path[1:])), 0)

    def path_labels(self, path: Iterable[int]) -> list[str]:
        path = list(path)
        return [self.label(a, b) for a, b in zip(path, path[1:])]

    def edge_list(self) -> str:
        """Serialise as an edge-list file (one directed line per link when
        ``directed`` is set, otherwise one line per physical link)."""
        out = []
        seen = set()
        for u in range(self.n):
            for v, lat in self.succ[u]:
                if not self.directed:
                    if (v, u) in seen and self._latency.get((v, u)) == lat:
                        continue
                    seen.add((u, v))
                out.append(f"{self.names[u]} {self.names[v]} {lat}")
        return "\n".join(out) + "\n"


def assign_labels(topo: Topology) -> Topology:
    """Return ``topo`` with labels assigned by ascending neighbor id.

    Labels are always derived this way at construction time, so this is the
    identity on any :class:`Topology`; it exists for callers that build
    adjacency by hand and want the labelling rule spelled out.
    """
    return Topology._build(topo.n, topo._latency, topo.weighted, topo.directed, topo.names)


def load_topology(path: str | Path, *, directed: bool = False) -> Topology:
    """Read a whitespace separated ``src dst [latency]`` edge list.

    ``#`` starts a comment.  Node tokens may be arbitrary strings; if they
    are all integers they are ordered numerically, otherwise lexically.
    When no line carries a latency every link has latency 1 and the
    topology is flagged unweighted.
    """
    raw: list[tuple[str, str, Latency | None, int]] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise TopologyError(f"{path}:{lineno}: expected 'src dst [latency]'")
        lat = None
        if len(parts) == 3:
            try:
                lat = parse_latency(parts[2])
            except (ValueError, ZeroDivisionError):
                raise TopologyError(f"{path}:{lineno}: bad latency {parts[2]!r}") from None
        if parts[0] == parts[1]:
            raise TopologyError(f"{path}:{lineno}: self-loop at {parts[0]}")
        raw.append((parts[0], parts[1], lat, lineno))

    tokens = {t for a, b, _, _ in raw for t in (a, b)}
    try:
        ordered = sorted(tokens, key=int)
    except ValueError:
        ordered = sorted(tokens)
    index = {t: i for i, t in enumerate(ordered)}
    weighted = any(lat is not None and lat != 1 for _, _, lat, _ in raw)

    seen: dict[tuple[int, int], int] = {}
    links = []
    for a, b, lat, lineno in raw:
        pair = (index[a], index[b])
        if pair in seen:
            raise TopologyError(
                f"{path}:{lineno}: duplicate link {a}->{b} (first on line {seen[pair]})"
            )
        seen[pair] = lineno
        links.append((pair[0], pair[1], 1 if lat is None else lat))
    return Topology.from_links(
        len(ordered), links, directed=directed, weighted=weighted, names=ordered
    )


# -- shortest paths ------------------------------------------------------

def _blocked(removed_links, removed_nodes):
    links = frozenset((l[0], l[1]) for l in removed_links) if removed_links else frozenset()
    nodes = frozenset(removed_nodes) if removed_nodes else frozenset()
    return links, nodes


def shortest_path_tree(
    topo: Topology,
    src: int,
    removed_links: Iterable = (),
    removed_nodes: Iterable[int] = (),
    target: int | None = None,
) -> dict[int, PathResult]:
    """Tie-broken shortest paths from ``src`` to every reachable node.

    Paths are ordered by (latency, hop count, node sequence); the winner
    for each destination is unique and every prefix of a winning path is
    itself a winning path, so the result forms a tree.  With ``target`` the
    search stops as soon as that node is settled.
    """
    topo.check_node(src)
    links, nodes = _blocked(removed_links, removed_nodes)
    if src in nodes:
        return {}
    done: dict[int, PathResult] = {}
    heap = [(0, 0, (src,))]
    while heap:
        dist, hops, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done[u] = PathResult(path, dist, hops)
        if u == target:
            break
        for v, lat in topo.succ[u]:
            if v in done or v in nodes or (u, v) in links:
                continue
            heapq.heappush(heap, (dist + lat, hops + 1, path + (v,)))
    return done


def shortest_path(
    topo: Topology,
    s: int,
    d: int,
    removed_links: Iterable = (),
    removed_nodes: Iterable[int] = (),
) -> PathResult | None:
    topo.check_node(s)
    topo.check_node(d)
    tree = shortest_path_tree(topo, s, removed_links, removed_nodes, target=d)
    return tree.get(d)


def distances(
    topo: Topology,
    src: int,
    removed_links: Iterable = (),
    reverse: bool = False,
) -> dict[int, tuple[Latency, int]]:
    """``node -> (latency, hops)`` of the shortest paths from ``src``.

    Among equal-latency paths the smallest hop count is reported.  With
    ``reverse`` the distances are *to* ``src`` instead of from it.
    """
    links, _ = _blocked(removed_links, ())
    pred = topo._pred
    done: dict[int, tuple[Latency, int]] = {}
    heap = [(0, 0, src)]
    while heap:
        dist, hops, u = heapq.heappop(heap)
        if u in done:
            continue
        done[u] = (dist, hops)
        nbrs = pred[u] if reverse else topo.succ[u]
        for v, lat in nbrs:
            if v in done:
                continue
            if ((v, u) if reverse else (u, v)) in links:
                continue
            heapq.heappush(heap, (dist + lat, hops + 1, v))
    return done


def reachable(topo: Topology, src: int, removed_links: Iterable = ()) -> set[int]:
    links, _ = _blocked(removed_links, ())
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        for v, _ in topo.succ[u]:
            if v not in seen and (u, v) not in links:
                seen.add(v)
                stack.append(v)
    return seen


def physical_failure(topo: Topology, link) -> frozenset[tuple[int, int]]:
    """Directed pairs taken down when the physical link ``link`` fails."""
    u, v = link[0], link[1]
    out = {(u, v)}
    if topo.has_link(v, u):
        out.add((v, u))
    return frozenset(out)
