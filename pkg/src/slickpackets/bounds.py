"""Lower bounds on the edge count of single-link-failure FSes, and graphs
that meet them."""

from __future__ import annotations

from dataclasses import dataclass

from .fs import build_fs, fs_edge_count
from .topology import Topology


@dataclass(frozen=True)
class BoundResult:
    primary_hops: int
    weighted_bound: int
    unweighted_bound: int


def lower_bound(k: int, weighted: bool) -> int:
    """Minimum FS edges for a ``k``-hop shortest primary path."""
    if k <= 0:
        raise ValueError("primary path must have at least one hop")
    return 2 * k + 1 if weighted else -(-5 * k // 2)


def bound_result(k: int) -> BoundResult:
    return BoundResult(k, lower_bound(k, True), lower_bound(k, False))


def witness_weighted(k: int) -> tuple[Topology, int, int]:
    """Spine ``0..k`` plus hub ``k+1``; hub edges from ``v_i`` weigh ``k-i``.

    The hub-to-``v_k`` edge weighs 1: with weight 0 the two-hop route
    ``v_0, u, v_k`` would tie the spine and win on hop count.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hub = k + 1
    links = [(i, i + 1, 1) for i in range(k)]
    links += [(i, hub, k - i) for i in range(k)]
    links.append((hub, k, 1))
    return Topology.from_links(k + 2, links), 0, k


def witness_unweighted(k: int) -> tuple[Topology, int, int]:
    """Spine ``0..k``; hub ``b`` touches ``v_2b, v_2b+1, v_2b+2``.

    Odd ``k`` ends with one hub joined to ``v_k-1`` and ``v_k``.  Hub ids
    follow the spine so lexicographic tie-breaking keeps the spine primary.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    links = [(i, i + 1) for i in range(k)]
    hub = k + 1
    for b in range(k // 2):
        links += [(2 * b, hub), (2 * b + 1, hub), (2 * b + 2, hub)]
        hub += 1
    if k % 2:
        links += [(k - 1, hub), (k, hub)]
        hub += 1
    return Topology.from_links(hub, links), 0, k


def witness_fs_size(k: int, weighted: bool) -> int:
    topo, s, d = witness_weighted(k) if weighted else witness_unweighted(k)
    return fs_edge_count(build_fs(topo, s, d))
