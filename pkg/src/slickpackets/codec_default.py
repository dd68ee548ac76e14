"""The Default header format.

Layout (MSB first, no alignment inside the body)::

    header_length:16  on_alternate:1  body

``header_length`` counts body bits.  On the primary path the body is one
segment per remaining primary router::

    p  code  length  d1 .. dl

where ``p`` is the primary next-hop label, ``code`` is ``0``/``10``/``110``
for a 5/7/0-bit ``length`` field and ``length`` is the total bit length of
the alternate labels ``d1..dl``.  Once a packet has switched to its
alternate the body is just the remaining alternate labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitReader, HeaderError, nbytes, to_bytes, from_bytes, uint
from .fs import ForwardingSubgraph
from .topology import Topology

LENGTH_CODES = {"0": 5, "10": 7, "110": 0}
MAX_ALT_BITS = (1 << 7) - 1
LENGTH_FIELD_BITS = 16


class EncodingError(ValueError):
    pass


def length_code(alt_bits: int) -> str:
    """Shortest code whose length field holds ``alt_bits``."""
    if alt_bits == 0:
        return "110"
    if alt_bits <= 31:
        return "0"
    if alt_bits <= MAX_ALT_BITS:
        return "10"
    raise EncodingError(f"alternate path of {alt_bits} bits exceeds {MAX_ALT_BITS}")


@dataclass(frozen=True)
class DefaultHeader:
    header_length: int
    on_alternate: bool
    body: str

    def __post_init__(self):
        if self.header_length != len(self.body):
            raise HeaderError(
                f"header_length {self.header_length} != body bits {len(self.body)}"
            )
        if self.header_length >> LENGTH_FIELD_BITS:
            raise HeaderError("body longer than the 16-bit length field allows")

    @classmethod
    def of(cls, body: str, on_alternate: bool = False) -> "DefaultHeader":
        return cls(len(body), on_alternate, body)

    @property
    def bits(self) -> str:
        return uint(self.header_length, LENGTH_FIELD_BITS) + str(int(self.on_alternate)) + self.body

    @property
    def size_bits(self) -> int:
        return LENGTH_FIELD_BITS + 1 + self.header_length

    def to_bytes(self) -> bytes:
        return to_bytes(self.bits)

    @classmethod
    def from_bits(cls, bits: str) -> "DefaultHeader":
        r = BitReader(bits)
        length = r.read_uint(LENGTH_FIELD_BITS)
        on_alt = r.read(1) == "1"
        return cls(length, on_alt, r.read(length))

    @classmethod
    def from_bytes(cls, data: bytes) -> "DefaultHeader":
        return cls.from_bits(from_bytes(data))


@dataclass(frozen=True)
class Segment:
    primary_label: str
    code: str
    alt_labels: tuple[str, ...]

    @property
    def bits(self) -> str:
        alt = "".join(self.alt_labels)
        return self.primary_label + self.code + uint(len(alt), LENGTH_CODES[self.code]) + alt


def segments(fs: ForwardingSubgraph, topo: Topology) -> list[Segment]:
    if len(fs.alternates) != fs.hops:
        raise EncodingError("FS needs exactly one alternate slot per primary hop")
    out = []
    for i in range(fs.hops):
        u, v = fs.primary[i], fs.primary[i + 1]
        alt = fs.alternates[i]
        labels = tuple(topo.path_labels(alt)) if alt else ()
        if len(alt) > 2 and labels[-1] == "":
            # a zero-width last label would make header_length hit 0 one hop early
            raise EncodingError(
                f"alternate from {u} ends with a zero-width label at {alt[-2]}"
            )
        total = sum(map(len, labels))
        if alt and total == 0:
            raise EncodingError(f"alternate from {u} encodes to zero bits")
        out.append(Segment(topo.label(u, v), length_code(total), labels))
    return out


def encode_default(fs: ForwardingSubgraph, topo: Topology) -> DefaultHeader:
    body = "".join(seg.bits for seg in segments(fs, topo))
    return DefaultHeader.of(body)


def default_size_bytes(fs: ForwardingSubgraph, topo: Topology) -> int:
    return nbytes(encode_default(fs, topo).size_bits)


@dataclass(frozen=True)
class DefaultView:
    """What the router at ``node`` reads from the front of a header."""

    node: int
    at_destination: bool
    on_alternate: bool = False
    label: str = ""             # primary label, or the alternate label in alternate mode
    next_node: int | None = None
    alt_labels: tuple[str, ...] = ()
    alt_nodes: tuple[int, ...] = ()  # physical alternate route starting at ``node``
    consumed: int = 0           # bits taken by this segment or label
    remaining: str = ""         # body bits after them


def _label_at(r: BitReader, topo: Topology, node: int) -> tuple[str, int]:
    label = r.read(topo.width(node))
    nxt = topo.next_hop(node, label)
    if nxt is None:
        raise HeaderError(f"label {label!r} not advertised by node {node}")
    return label, nxt


def split_labels(bits: str, topo: Topology, start: int) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """Cut a label run into per-hop labels by walking the map from ``start``."""
    r = BitReader(bits)
    labels, nodes = [], [start]
    node = start
    while r.remaining:
        label, node = _label_at(r, topo, node)
        labels.append(label)
        nodes.append(node)
        if len(nodes) > topo.n + len(bits):
            raise HeaderError("label run does not terminate")
    return tuple(labels), tuple(nodes)


def decode_default(header: DefaultHeader, topo: Topology, current: int) -> DefaultView:
    topo.check_node(current)
    if header.header_length == 0:
        return DefaultView(current, True, header.on_alternate)
    r = BitReader(header.body)
    if header.on_alternate:
        label, nxt = _label_at(r, topo, current)
        return DefaultView(current, False, True, label, nxt, consumed=r.pos,
                           remaining=header.body[r.pos:])
    label, nxt = _label_at(r, topo, current)
    code, width = r.read_prefix_code(LENGTH_CODES, 3)
    alt_len = r.read_uint(width)
    if alt_len > r.remaining:
        raise HeaderError(f"alternate length {alt_len} exceeds the {r.remaining} bits left")
    alt_bits = r.read(alt_len)
    alt_labels, alt_nodes = split_labels(alt_bits, topo, current) if alt_bits else ((), ())
    return DefaultView(current, False, False, label, nxt, alt_labels, alt_nodes,
                       consumed=r.pos, remaining=header.body[r.pos:])


def walk_default(header: DefaultHeader, topo: Topology, source: int) -> list[tuple[int, str, tuple[str, ...]]]:
    """Consume every segment along the failure-free path.

    Returns ``(node, primary label, alternate labels)`` per primary router.
    """
    out = []
    node = source
    while True:
        view = decode_default(header, topo, node)
        if view.at_destination:
            return out
        if view.on_alternate:
            raise HeaderError("walk_default expects a primary-mode header")
        out.append((node, view.label, view.alt_labels))
        header = DefaultHeader.of(view.remaining)
        node = view.next_node
