import random

import pytest
from hypothesis import given, settings, strategies as st

from graphgen import random_2connected
from slickpackets.bits import HeaderError, from_bytes, to_bytes, uint
from slickpackets.codec_default import (
    LENGTH_CODES,
    DefaultHeader,
    EncodingError,
    Segment,
    decode_default,
    default_size_bytes,
    encode_default,
    length_code,
    walk_default,
)
from slickpackets.fs import build_fs
from slickpackets.topology import Topology


def chain_graph(src_degree, widths):
    """Primary ``s - d`` plus one alternate ``s, x1 .. xm, d`` whose labels
    have the requested widths; leaves pad the degrees."""
    links = [(0, 1)]
    nxt = 2
    path = [0] + [nxt + i for i in range(len(widths))] + [1]
    nxt += len(widths)
    links += list(zip(path, path[1:]))
    deg = {0: src_degree}
    for x, w in zip(path[1:-1], widths):
        deg[x] = 2 ** w
    for u, want in deg.items():
        have = sum(1 for a, b in links if u in (a, b))
        for _ in range(want - have):
            links.append((u, nxt))
            nxt += 1
    return Topology.from_links(nxt, links)


# ladder topology, 0 -> 5; bits derived by hand
LADDER_BODY = (
    "" + "110"                                    # s: 0-bit primary, no alternate
    + "01" + "0" + "00101" + "10" + "1" + "10"    # 1 -> 2; alt 1,3,4,5
    + "1" + "0" + "00110" + "0" + "10" + "1" + "10"  # 2 -> 4; alt 2,1',3,4,5
    + "10" + "110"                                # 4 -> 5, no alternate
)


def test_ladder_golden(ladder):
    h = encode_default(build_fs(ladder, 0, 5), ladder)
    assert h.body == LADDER_BODY
    assert h.header_length == 34
    assert h.bits == uint(34, 16) + "0" + LADDER_BODY
    assert h.size_bits == 51
    assert default_size_bytes(build_fs(ladder, 0, 5), ladder) == 7


def test_no_alternate_segment():
    assert Segment("01", "110", ()).bits == "01110"


def test_one_hop_three_bytes():
    t = Topology.from_links(2, [(0, 1)])
    fs = build_fs(t, 0, 1)
    h = encode_default(fs, t)
    assert h.body == "110"
    assert default_size_bytes(fs, t) == 3


def test_thirty_bit_alternate():
    t = chain_graph(17, [5] * 5)    # 5 + 5*5 = 30 label bits
    h = encode_default(build_fs(t, 0, 1), t)
    p = t.label(0, 1)
    assert h.body.startswith(p + "0" + "11110")
    assert walk_default(h, t, 0)[0][2] == tuple(t.path_labels(build_fs(t, 0, 1).alternates[0]))


def test_hundred_bit_alternate():
    t = chain_graph(9, [6] * 16)    # 4 + 16*6 = 100
    h = encode_default(build_fs(t, 0, 1), t)
    assert h.body.startswith(t.label(0, 1) + "10" + "1100100")
    view = decode_default(h, t, 0)
    assert sum(map(len, view.alt_labels)) == 100


def test_too_long_alternate():
    t = chain_graph(9, [6] * 22)    # 136 bits
    with pytest.raises(EncodingError, match="exceeds 127"):
        encode_default(build_fs(t, 0, 1), t)


@pytest.mark.parametrize("bits,code", [(0, "110"), (1, "0"), (31, "0"), (32, "10"), (127, "10")])
def test_code_minimality(bits, code):
    assert length_code(bits) == code


def test_prefix_free():
    words = list(LENGTH_CODES)
    for a in words:
        for b in words:
            if a != b:
                assert not b.startswith(a)
    assert max(map(len, words)) == 3


def test_destination_signal(ladder):
    v = decode_default(DefaultHeader.of(""), ladder, 5)
    assert v.at_destination


def test_first_label_roundtrip(mesh):
    fs = build_fs(mesh, 0, 6)
    v = decode_default(encode_default(fs, mesh), mesh, 0)
    assert v.label == mesh.label(0, 1) and v.next_node == 1


def test_bytes_roundtrip(ladder):
    h = encode_default(build_fs(ladder, 0, 5), ladder)
    raw = h.to_bytes()
    assert len(raw) == 7
    assert DefaultHeader.from_bytes(raw) == h


def test_decoder_errors(ladder):
    with pytest.raises(HeaderError):
        DefaultHeader(5, False, "01")
    with pytest.raises(HeaderError, match="truncated"):
        DefaultHeader.from_bits("0000000000000101" + "0" + "01")
    # length field claims more bits than remain
    with pytest.raises(HeaderError, match="exceeds"):
        decode_default(DefaultHeader.of("01" + "0" + "11111" + "1"), ladder, 1)
    # label 11 is unassigned at node 1 (degree 3)
    with pytest.raises(HeaderError, match="not advertised"):
        decode_default(DefaultHeader.of("11" + "110"), ladder, 1)
    with pytest.raises(HeaderError, match="prefix code"):
        decode_default(DefaultHeader.of("01" + "111"), ladder, 1)


def test_decoder_accepts_zero_length_under_code0(ladder):
    v = decode_default(DefaultHeader.of("01" + "0" + "00000"), ladder, 1)
    assert v.alt_labels == () and v.next_node == 2


def test_bits_helpers():
    assert to_bytes("1") == b"\x80"
    assert from_bytes(b"\x80\x01") == "1000000000000001"
    with pytest.raises(ValueError):
        uint(4, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 30), st.integers(0, 40), st.integers(1, 4), st.integers(0, 2**32))
def test_roundtrip_property(n, chords, wmax, seed):
    rng = random.Random(seed)
    n, links = random_2connected(rng, n, chords, wmax)
    t = Topology.from_links(n, links)
    s, d = rng.sample(range(n), 2)
    fs = build_fs(t, s, d)
    h = encode_default(fs, t)
    assert DefaultHeader.from_bytes(h.to_bytes()) == h
    rows = walk_default(h, t, s)
    assert [r[0] for r in rows] == list(fs.primary[:-1])
    assert [r[1] for r in rows] == t.path_labels(fs.primary)
    assert [r[2] for r in rows] == [tuple(t.path_labels(a)) if a else () for a in fs.alternates]
