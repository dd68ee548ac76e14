"""The Direct header format: the FS serialised as a DAG.

Layout (MSB first)::

    NodePtrLength  CurrentNodePtr  ND ND ND ...

``NodePtrLength`` is ``0``/``10``/``110``/``1110`` for 10/8/6/4-bit node
pointers.  Every pointer, CurrentNodePtr included, is a bit offset measured
from bit 0 of the header; the value 0 marks the destination.  A node
descriptor is ``NumberOfSuccessors:1`` followed by one or two successor
descriptors ``LinkId ContainsPtr:1 [Ptr]``, the first one being the primary.
ContainsPtr 0 means the successor's descriptor starts right after this one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitReader, HeaderError, nbytes, to_bytes, from_bytes, uint
from .fs import ForwardingSubgraph, FsNode
from .topology import Topology

PTR_CODES = {"1110": 4, "110": 6, "10": 8, "0": 10}
CODE_FOR_WIDTH = {w: c for c, w in PTR_CODES.items()}
WIDTHS = (4, 6, 8, 10)


class DirectEncodingError(ValueError):
    pass


@dataclass(frozen=True)
class DirectHeader:
    bits: str

    @property
    def _preamble(self) -> tuple[str, int, int]:
        r = BitReader(self.bits)
        code, width = r.read_prefix_code(PTR_CODES, 4)
        return code, width, r.read_uint(width)

    @property
    def ptr_width(self) -> int:
        return self._preamble[1]

    @property
    def current_node_ptr(self) -> int:
        return self._preamble[2]

    @property
    def size_bits(self) -> int:
        return len(self.bits)

    def with_current(self, ptr: int) -> "DirectHeader":
        code, width, _ = self._preamble
        start = len(code)
        return DirectHeader(self.bits[:start] + uint(ptr, width) + self.bits[start + width:])

    def to_bytes(self) -> bytes:
        return to_bytes(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> "DirectHeader":
        # trailing pad bits are harmless: nothing addresses them
        return cls(from_bytes(data))


def _layout_order(fs: ForwardingSubgraph) -> list[FsNode]:
    """Primary routers first, then each alternate's new nodes in primary order."""
    order = [FsNode(u) for u in fs.primary[:-1]]
    placed = set(order)
    dest = FsNode(fs.dest)
    for u in fs.primary[:-1]:
        succ = fs.succ[FsNode(u)]
        if len(succ) < 2:
            continue
        node = succ[1]
        while node != dest and node not in placed:
            order.append(node)
            placed.add(node)
            node = fs.succ[node][0]
    missing = set(fs.succ) - placed - {dest}
    if missing:
        raise DirectEncodingError(f"FS nodes unreachable by the layout: {sorted(missing)}")
    return order


def _layout(fs: ForwardingSubgraph, topo: Topology, order: list[FsNode], width: int):
    """Return (per-node offsets, serialiser closure inputs) for one pointer width."""
    index = {n: i for i, n in enumerate(order)}
    dest = FsNode(fs.dest)
    plans = []
    for i, node in enumerate(order):
        sds = []
        for k, nxt in enumerate(fs.succ[node]):
            label = topo.label(node.physical, nxt.physical)
            if nxt == dest:
                relative = False
            elif k == 0:
                relative = index[nxt] == i + 1
            else:
                relative = False
            sds.append((label, relative, nxt))
        plans.append(sds)
    preamble = len(CODE_FOR_WIDTH[width]) + width
    offsets = {}
    pos = preamble
    for node, sds in zip(order, plans):
        offsets[node] = pos
        pos += 1 + sum(len(lab) + 1 + (0 if rel else width) for lab, rel, _ in sds)
    return offsets, plans, pos


def encode_direct(fs: ForwardingSubgraph, topo: Topology, ptr_width: int | None = None) -> DirectHeader:
    """Serialise ``fs``; picks the narrowest pointer width that fits."""
    dest = FsNode(fs.dest)
    for node, succ in fs.succ.items():
        if len(succ) > 2:
            raise DirectEncodingError(f"{node} has {len(succ)} successors (max 2)")
        if node != dest and not succ:
            raise DirectEncodingError(f"{node} is a dead end")
    if fs.succ[dest]:
        raise DirectEncodingError("destination must have no successors")
    order = _layout_order(fs)
    widths = WIDTHS if ptr_width is None else (ptr_width,)
    for width in widths:
        if width not in CODE_FOR_WIDTH:
            raise DirectEncodingError(f"unsupported pointer width {width}")
        offsets, plans, _ = _layout(fs, topo, order, width)
        if max(offsets.values()) < (1 << width):
            break
    else:
        raise DirectEncodingError(
            f"node offsets up to {max(offsets.values())} do not fit {widths[-1]}-bit pointers"
        )
    out = [CODE_FOR_WIDTH[width], uint(offsets[order[0]], width)]
    for node, sds in zip(order, plans):
        out.append("1" if len(sds) == 2 else "0")
        for label, relative, nxt in sds:
            out.append(label)
            if relative:
                out.append("0")
            else:
                out.append("1")
                out.append(uint(0 if nxt == dest else offsets[nxt], width))
    return DirectHeader("".join(out))


def direct_size_bytes(fs: ForwardingSubgraph, topo: Topology) -> int:
    return nbytes(encode_direct(fs, topo).size_bits)


@dataclass(frozen=True)
class Successor:
    label: str
    next_node: int
    next_ptr: int


@dataclass(frozen=True)
class DirectStep:
    node: int
    egress: bool
    offset: int = 0
    nd_bits: int = 0
    options: tuple[Successor, ...] = ()


def decode_direct_step(header: DirectHeader, topo: Topology, current: int) -> DirectStep:
    """Parse the descriptor CurrentNodePtr points at, as seen by ``current``."""
    topo.check_node(current)
    _, width, ptr = header._preamble
    if ptr == 0:
        return DirectStep(current, True)
    if ptr >= len(header.bits):
        raise HeaderError(f"node pointer {ptr} beyond the {len(header.bits)}-bit header")
    r = BitReader(header.bits, ptr)
    count = 2 if r.read(1) == "1" else 1
    raw = []
    for _ in range(count):
        label = r.read(topo.width(current))
        nxt = topo.next_hop(current, label)
        if nxt is None:
            raise HeaderError(f"label {label!r} not advertised by node {current}")
        has_ptr = r.read(1) == "1"
        raw.append((label, nxt, r.read_uint(width) if has_ptr else None))
    size = r.pos - ptr
    options = tuple(
        Successor(label, nxt, ptr + size if p is None else p) for label, nxt, p in raw
    )
    return DirectStep(current, False, ptr, size, options)


def walk_direct(header: DirectHeader, topo: Topology, source: int) -> list[tuple[int, str, tuple[str, ...]]]:
    """Recover ``(node, primary label, alternate labels)`` per primary router.

    The alternate of a primary router is read by taking its second
    successor and then following first successors to the destination.
    """
    limit = len(header.bits) + 1

    def follow(h: DirectHeader, node: int) -> tuple[list[str], list[int]]:
        labels, nodes = [], [node]
        while True:
            step = decode_direct_step(h, topo, node)
            if step.egress:
                return labels, nodes
            opt = step.options[0]
            labels.append(opt.label)
            node = opt.next_node
            nodes.append(node)
            h = h.with_current(opt.next_ptr)
            if len(labels) > limit:
                raise HeaderError("pointer chain does not terminate")

    out = []
    node, h = source, header
    for _ in range(limit):
        step = decode_direct_step(h, topo, node)
        if step.egress:
            return out
        prim = step.options[0]
        alt: tuple[str, ...] = ()
        if len(step.options) == 2:
            sec = step.options[1]
            rest, _ = follow(h.with_current(sec.next_ptr), sec.next_node)
            alt = (sec.label, *rest)
        out.append((node, prim.label, alt))
        node, h = prim.next_node, h.with_current(prim.next_ptr)
    raise HeaderError("pointer chain does not terminate")
