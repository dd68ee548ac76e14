import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from graphgen import random_2connected
from slickpackets.bounds import lower_bound
from slickpackets.fs import (
    LINK,
    NODE,
    FailureModel,
    ForwardingSubgraph,
    FsError,
    FsNode,
    build_fs,
    fs_edge_count,
    load_srlg,
    make_acyclic,
)
from slickpackets.topology import Topology, shortest_path


def edges(fs):
    return sorted((str(u), str(v)) for u, v in fs.edges)


def test_mesh_fs(mesh):
    fs = build_fs(mesh, 0, 6)
    assert fs.primary == (0, 1, 2, 5, 6)
    assert fs.alternates[1] == (1, 4, 5, 6)
    assert fs.alternates[2] == (2, 4, 5, 6)
    assert fs.alternates[0] == () and fs.alternates[3] == ()
    assert edges(fs) == sorted([("0", "1"), ("1", "2"), ("2", "5"), ("5", "6"),
                                ("1", "4"), ("4", "5"), ("2", "4")])
    assert fs.copies(1) == [FsNode(1)]


def test_ladder_duplicates_r1(ladder):
    fs = build_fs(ladder, 0, 5)
    assert fs.primary == (0, 1, 2, 4, 5)
    assert fs.alternates[2] == (2, 1, 3, 4, 5)
    assert fs.copies(1) == [FsNode(1, 0), FsNode(1, 1)]
    assert fs.succ[FsNode(2)] == [FsNode(4), FsNode(1, 1)]
    assert fs.succ[FsNode(1, 1)] == [FsNode(3)]
    assert str(FsNode(1, 1)) == "1'"
    fs.topological_order()


def test_make_acyclic_backtrack_gets_copy():
    fs = ForwardingSubgraph(0, 2, (0, 1, 2), ((), ()),
                            {FsNode(0): [FsNode(1)], FsNode(1): [FsNode(2)], FsNode(2): []})
    make_acyclic(fs, (1, 0, 3, 2))
    assert FsNode(0, 1) in fs.succ[FsNode(1)]
    fs.topological_order()


def test_make_acyclic_no_cycle_no_copy():
    fs = ForwardingSubgraph(0, 2, (0, 1, 2), ((), ()),
                            {FsNode(0): [FsNode(1)], FsNode(1): [FsNode(2)], FsNode(2): []})
    make_acyclic(fs, (0, 3, 2))
    assert fs.succ[FsNode(0)] == [FsNode(1), FsNode(3)]
    assert fs.succ[FsNode(3)] == [FsNode(2)]
    assert all(n.copy == 0 for n in fs.nodes)


def test_disjoint_alternate_never_copies():
    t = Topology.from_links(5, [(0, 1), (0, 2), (2, 3), (3, 4), (4, 1)])
    fs = build_fs(t, 0, 1)
    assert fs.alternates[0] == (0, 2, 3, 4, 1)
    assert all(n.copy == 0 for n in fs.nodes)


def test_ring_backtrack_reuses_suffix():
    t = Topology.from_links(6, [(i, (i + 1) % 6) for i in range(6)])
    fs = build_fs(t, 0, 2)
    assert fs.alternates[1] == (1, 0, 5, 4, 3, 2)
    assert fs.copies(0) == [FsNode(0), FsNode(0, 1)]
    # the copy of 0 joins the source's own alternate at 5
    assert fs.succ[FsNode(0, 1)] == [FsNode(5)]
    assert fs_edge_count(fs) == 2 + 4 + 2


def test_three_edge_minimum():
    t = Topology.from_links(3, [(0, 1), (0, 2), (2, 1)])
    fs = build_fs(t, 0, 1)
    assert fs.primary == (0, 1)
    assert fs.alternates[0] == (0, 2, 1)
    assert fs_edge_count(fs) == 3


def test_primary_only_k_edges():
    t = Topology.from_links(4, [(0, 1), (1, 2), (2, 3)])
    fs = build_fs(t, 0, 3)
    assert fs_edge_count(fs) == 3
    assert fs.alternates == ((), (), ())


def test_errors(mesh):
    with pytest.raises(FsError):
        build_fs(mesh, 0, 0)
    t = Topology.from_links(4, [(0, 1), (2, 3)])
    with pytest.raises(FsError, match="disconnected"):
        build_fs(t, 0, 3)
    with pytest.raises(FsError):
        FailureModel("srlg")
    with pytest.raises(FsError):
        FailureModel("bogus")


def test_node_model_last_hop_is_link(mesh):
    fs = build_fs(mesh, 0, 6, FailureModel(NODE))
    # R1 must avoid R2 entirely
    assert 2 not in fs.alternates[1]
    # R5's next hop is d: falls back to avoiding the link, none exists
    assert fs.alternates[3] == ()


def test_srlg_group(tmp_path, mesh):
    p = tmp_path / "g.txt"
    p.write_text("# shared conduit\n2-5 4-5\n")
    model = load_srlg(p, mesh)
    assert (5, 2) in model.groups[0]
    fs = build_fs(mesh, 0, 6, model)
    # R2's alternate cannot use 4-5 either, so no path remains
    assert fs.alternates[2] == ()


def test_srlg_bad_token(tmp_path, mesh):
    p = tmp_path / "g.txt"
    p.write_text("0-6\n")
    with pytest.raises(FsError, match="no link"):
        load_srlg(p, mesh)


def test_dump_deterministic(ladder):
    a = build_fs(ladder, 0, 5).dump(ladder)
    b = build_fs(ladder, 0, 5).dump(ladder)
    assert a == b
    assert "nodes: 0 1 2 1' 3 4 5" in a
    assert "  2 -> 1'" in a
    assert a.splitlines()[0] == "fs 0 -> 5 model=single-link"


cases = st.tuples(st.integers(3, 14), st.integers(0, 20), st.integers(1, 5), st.randoms(use_true_random=False))


@settings(max_examples=80, deadline=None)
@given(cases)
def test_fs_invariants(case):
    n, chords, wmax, rnd = case
    n, links = random_2connected(random.Random(rnd.random()), n, chords, wmax)
    t = Topology.from_links(n, links)
    s, d = 0, n - 1
    fs = build_fs(t, s, d)
    fs.topological_order()
    assert fs.primary == shortest_path(t, s, d).nodes
    for u, v in fs.edges:
        assert t.has_link(u.physical, v.physical)
    for i, alt in enumerate(fs.alternates):
        assert alt, "2-connected graphs always have an alternate"
        removed = [(fs.primary[i], fs.primary[i + 1])]
        assert t.path_latency(alt) == shortest_path(t, fs.primary[i], d, removed).latency
        assert fs.continuation(FsNode(fs.primary[i])) == fs.primary[i:]
    for node, succ in fs.succ.items():
        assert len(succ) <= 2
    assert fs_edge_count(fs) >= lower_bound(fs.hops, t.weighted)
    assert nx.is_directed_acyclic_graph(nx.DiGraph(fs.edges))
