"""Hop-by-hop forwarding of an encoded header under injected failures."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from .bits import BitReader, HeaderError, uint
from .codec_default import DefaultHeader, LENGTH_CODES, decode_default, split_labels
from .codec_direct import DirectHeader, decode_direct_step
from .fs import ForwardingSubgraph, FsError
from .topology import Latency, Topology

PRIMARY = "primary"
ALTERNATE = "alternate"

DELIVERED = "delivered"
DROPPED = "dropped"


@dataclass(frozen=True)
class FailedSet:
    """Failed directed links plus failed nodes (a node takes its links down)."""

    links: frozenset = frozenset()
    nodes: frozenset = frozenset()

    @classmethod
    def of(cls, links: Iterable = (), nodes: Iterable[int] = ()) -> "FailedSet":
        return cls(frozenset((l[0], l[1]) for l in links), frozenset(nodes))

    @classmethod
    def physical(cls, topo: Topology, links: Iterable) -> "FailedSet":
        """Fail each link in both directions where the reverse exists."""
        out = set()
        for u, v in ((l[0], l[1]) for l in links):
            out.add((u, v))
            if topo.has_link(v, u):
                out.add((v, u))
        return cls(frozenset(out))

    def validate(self, topo: Topology) -> None:
        for u, v in self.links:
            if not topo.has_link(u, v):
                raise FsError(f"failed link {u}-{v} not in topology")
        for u in self.nodes:
            topo.check_node(u)

    def alive(self, u: int, v: int) -> bool:
        return (u, v) not in self.links and u not in self.nodes and v not in self.nodes


NO_FAILURES = FailedSet()


@dataclass(frozen=True)
class Hop:
    node: int
    label: str
    mode: str
    next_node: int


@dataclass
class PacketTrace:
    source: int
    hops: list[Hop] = field(default_factory=list)
    outcome: str = DELIVERED
    reason: str = ""
    at: int | None = None
    latency: Latency = 0

    @property
    def delivered(self) -> bool:
        return self.outcome == DELIVERED

    @property
    def path(self) -> tuple[int, ...]:
        return (self.source, *(h.next_node for h in self.hops))

    @property
    def switches(self) -> int:
        modes = [h.mode for h in self.hops]
        return sum(1 for a, b in zip(modes, modes[1:]) if a != b)

    def _step(self, topo: Topology, node: int, label: str, mode: str, nxt: int) -> None:
        self.hops.append(Hop(node, label, mode, nxt))
        self.latency += topo.latency(node, nxt)

    def _drop(self, node: int, reason: str) -> "PacketTrace":
        self.outcome, self.reason, self.at = DROPPED, reason, node
        return self

    def _deliver(self, node: int) -> "PacketTrace":
        self.outcome, self.at = DELIVERED, node
        return self

    def render(self, topo: Topology) -> str:
        name = topo.names
        lines = []
        for h in self.hops:
            label = h.label if h.label else "-"
            lines.append(f"hop {name[h.node]} -> {name[h.next_node]} label={label} mode={h.mode}")
        lines.append("path: " + " ".join(name[u] for u in self.path))
        if self.delivered:
            lines.append(f"delivered at {name[self.at]} latency={self.latency}")
        else:
            lines.append(f"dropped at {name[self.at]}: {self.reason}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PointerHeader:
    """Default-format header forwarded by moving start/end pointers.

    The label buffer is never rewritten; ``start`` and ``end`` are bit
    offsets into it delimiting the live body.
    """

    start: int
    end: int
    on_alternate: bool
    buffer: str

    PTR_BITS = 12

    @classmethod
    def from_default(cls, header: DefaultHeader) -> "PointerHeader":
        if header.header_length >> cls.PTR_BITS:
            raise HeaderError("body too long for 12-bit pointers")
        return cls(0, header.header_length, header.on_alternate, header.body)

    @property
    def bits(self) -> str:
        return (uint(self.start, self.PTR_BITS) + uint(self.end, self.PTR_BITS)
                + str(int(self.on_alternate)) + self.buffer)

    @property
    def body(self) -> str:
        return self.buffer[self.start:self.end]

    def as_default(self) -> DefaultHeader:
        return DefaultHeader.of(self.body, self.on_alternate)


Header = Union[DefaultHeader, DirectHeader, PointerHeader]


def _hop_cap(topo: Topology, nbits: int) -> int:
    # zero-width labels consume no bits, so bound by nodes as well
    return nbits + 2 * topo.n + 2


def _forward_default(header: DefaultHeader, topo: Topology, source: int,
                     failed: FailedSet) -> PacketTrace:
    trace = PacketTrace(source)
    node = source
    for _ in range(_hop_cap(topo, header.size_bits)):
        view = decode_default(header, topo, node)
        if view.at_destination:
            return trace._deliver(node)
        if view.on_alternate:
            if not failed.alive(node, view.next_node):
                return trace._drop(node, "alternate link down")
            trace._step(topo, node, view.label, ALTERNATE, view.next_node)
            header = DefaultHeader.of(view.remaining, True)
            node = view.next_node
            continue
        if failed.alive(node, view.next_node):
            trace._step(topo, node, view.label, PRIMARY, view.next_node)
            header = DefaultHeader.of(view.remaining)
            node = view.next_node
            continue
        if not view.alt_labels:
            return trace._drop(node, "primary link down, no alternate")
        first = view.alt_nodes[1]
        if not failed.alive(node, first):
            return trace._drop(node, "primary and alternate links down")
        trace._step(topo, node, view.alt_labels[0], ALTERNATE, first)
        header = DefaultHeader.of("".join(view.alt_labels[1:]), True)
        node = first
    raise HeaderError("hop limit exceeded")


def _forward_pointer(header: PointerHeader, topo: Topology, source: int,
                     failed: FailedSet) -> PacketTrace:
    trace = PacketTrace(source)
    node = source
    start, end, on_alt, buf = header.start, header.end, header.on_alternate, header.buffer
    for _ in range(_hop_cap(topo, len(buf))):
        if start == end:
            return trace._deliver(node)
        r = BitReader(buf, start, end)
        label = r.read(topo.width(node))
        nxt = topo.next_hop(node, label)
        if nxt is None:
            raise HeaderError(f"label {label!r} not advertised by node {node}")
        if on_alt:
            if not failed.alive(node, nxt):
                return trace._drop(node, "alternate link down")
            trace._step(topo, node, label, ALTERNATE, nxt)
            start, node = r.pos, nxt
            continue
        _, width = r.read_prefix_code(LENGTH_CODES, 3)
        alt_len = r.read_uint(width)
        alt_start = r.pos
        r.read(alt_len)
        if failed.alive(node, nxt):
            trace._step(topo, node, label, PRIMARY, nxt)
            start, node = r.pos, nxt
            continue
        if alt_len == 0:
            return trace._drop(node, "primary link down, no alternate")
        alt_labels, alt_nodes = split_labels(buf[alt_start:alt_start + alt_len], topo, node)
        first = alt_nodes[1]
        if not failed.alive(node, first):
            return trace._drop(node, "primary and alternate links down")
        trace._step(topo, node, alt_labels[0], ALTERNATE, first)
        start = alt_start + len(alt_labels[0])
        end = alt_start + alt_len
        on_alt, node = True, first
    raise HeaderError("hop limit exceeded")


def _forward_direct(header: DirectHeader, topo: Topology, source: int,
                    failed: FailedSet) -> PacketTrace:
    trace = PacketTrace(source)
    node = source
    mode = PRIMARY
    for _ in range(_hop_cap(topo, header.size_bits)):
        step = decode_direct_step(header, topo, node)
        if step.egress:
            return trace._deliver(node)
        chosen = None
        for k, opt in enumerate(step.options):
            if failed.alive(node, opt.next_node):
                chosen = opt
                if k == 1:
                    mode = ALTERNATE
                break
        if chosen is None:
            if len(step.options) == 1:
                reason = "primary link down, no alternate" if mode == PRIMARY else "alternate link down"
            else:
                reason = "primary and alternate links down"
            return trace._drop(node, reason)
        trace._step(topo, node, chosen.label, mode, chosen.next_node)
        header = header.with_current(chosen.next_ptr)
        node = chosen.next_node
    raise HeaderError("hop limit exceeded")


def forward_packet(header: Header, topo: Topology, source: int,
                   failed: FailedSet = NO_FAILURES) -> PacketTrace:
    """Simulate every hop of one packet; never looks ahead of the current link."""
    topo.check_node(source)
    if source in failed.nodes:
        raise FsError("the source itself has failed")
    if isinstance(header, DefaultHeader):
        return _forward_default(header, topo, source, failed)
    if isinstance(header, PointerHeader):
        return _forward_pointer(header, topo, source, failed)
    if isinstance(header, DirectHeader):
        return _forward_direct(header, topo, source, failed)
    raise TypeError(f"unsupported header type {type(header).__name__}")


def delivered_latency(fs: ForwardingSubgraph, topo: Topology, l0: tuple[int, int]) -> Latency:
    """Latency of a packet that meets failed primary link ``l0`` at its upstream end."""
    pairs = list(zip(fs.primary, fs.primary[1:]))
    try:
        i = pairs.index((l0[0], l0[1]))
    except ValueError:
        raise FsError(f"{l0[0]}-{l0[1]} is not a primary link") from None
    alt = fs.alternates[i]
    if not alt:
        raise FsError(f"no alternate at {l0[0]}")
    return topo.path_latency(fs.primary[:i + 1]) + topo.path_latency(alt)
