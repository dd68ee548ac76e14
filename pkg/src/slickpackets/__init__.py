"""Source routing with failure-avoiding forwarding subgraphs carried in the
packet header."""

from .topology import Link, Topology, TopologyError, load_topology, shortest_path
from .fs import FailureModel, ForwardingSubgraph, FsNode, build_fs, fs_edge_count
from .codec_default import DefaultHeader, decode_default, default_size_bytes, encode_default
from .codec_direct import DirectHeader, decode_direct_step, direct_size_bytes, encode_direct
from .forward import FailedSet, PacketTrace, PointerHeader, forward_packet
from .bounds import lower_bound, witness_unweighted, witness_weighted

__version__ = "0.1.0"
