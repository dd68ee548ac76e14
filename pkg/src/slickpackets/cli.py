"""Command-line entry point.

Exit status: 0 success or delivered, 1 dropped, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from .bits import HeaderError, nbytes
from .bounds import bound_result, lower_bound, witness_unweighted, witness_weighted
from .codec_default import DefaultHeader, EncodingError, encode_default, walk_default
from .codec_direct import DirectEncodingError, DirectHeader, encode_direct, walk_direct
from .failsim import (
    PRESETS,
    SCHEMES,
    SimError,
    TimingParams,
    params_dict,
    run_eval,
    sample_triples,
    triple_metrics,
    write_stretch_csv,
)
from .forward import FailedSet, PointerHeader, forward_packet
from .fs import LINK, NODE, SRLG, FailureModel, FsError, build_fs, fs_edge_count, load_srlg
from .golden import GoldenVector, header_from_payload
from .topology import Topology, TopologyError, load_topology, parse_latency, shortest_path_tree

EXIT_OK, EXIT_DROPPED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3

DATA_ERRORS = (TopologyError, FsError, HeaderError, EncodingError,
               DirectEncodingError, SimError, OSError)


class UsageError(Exception):
    pass


def _latency(text: str):
    try:
        return parse_latency(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad duration {text!r}") from None


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _common(nested: bool) -> argparse.ArgumentParser:
    """Global flags.  Nested copies default to SUPPRESS so that a flag given
    before the subcommand is not reset by the subparser."""
    dflt = (lambda v: argparse.SUPPRESS) if nested else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--topo", default=dflt(None), help="edge-list topology file")
    common.add_argument("--directed", action="store_true", default=dflt(False),
                        help="treat each edge-list line as one directed link")
    common.add_argument("--seed", type=int, default=dflt(1))
    common.add_argument("--format", choices=("default", "direct"), default=dflt("default"))
    common.add_argument("--preset", choices=sorted(PRESETS), default=dflt("sprint"))
    common.add_argument("--out", default=dflt(None), help="write output here instead of stdout")
    common.add_argument("--model", choices=(LINK, NODE, SRLG), default=dflt(LINK))
    common.add_argument("--srlg", default=dflt(None), help="SRLG group file (implies --model srlg)")
    return common


def build_parser() -> argparse.ArgumentParser:
    top = _common(False)
    common = _common(True)

    p = argparse.ArgumentParser(prog="slickpackets", parents=[top],
                                description="Source routing with failure-avoiding forwarding subgraphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = add("fs", help="print the forwarding subgraph for a pair")
    sp.add_argument("src")
    sp.add_argument("dst")

    sp = add("encode", help="encode the FS header for a pair")
    sp.add_argument("src")
    sp.add_argument("dst")
    sp.add_argument("--golden", help="also write a golden-vector file")

    sp = add("decode", help="decode a header and list its segments")
    sp.add_argument("src", nargs="?")
    sp.add_argument("--hex", help="tagged payload as hex")
    sp.add_argument("--golden", help="golden-vector file")

    for name in ("trace", "forward"):
        sp = add(name, help="forward one packet under failures")
        sp.add_argument("src")
        sp.add_argument("dst")
        sp.add_argument("--fail", nargs="*", default=[], metavar="A-B",
                        help="failed links (both directions on undirected maps)")
        sp.add_argument("--fail-node", nargs="*", default=[], metavar="N")
        sp.add_argument("--pointer", action="store_true",
                        help="forward the Default header with start/end pointers")

    ev = add("eval", help="batch evaluations")
    evsub = ev.add_subparsers(dest="eval_command", required=True)
    sp = evsub.add_parser("sizes", parents=[common], help="header sizes per pair")
    sp.add_argument("--all-pairs-below", type=int, default=1000,
                    help="evaluate all pairs when the map has fewer nodes")
    sp.add_argument("--pairs", type=_positive, default=10000,
                    help="sampled pairs on larger maps")
    sp = evsub.add_parser("stretch", parents=[common], help="stretch vs generation time")
    sp.add_argument("--schemes", nargs="+", choices=SCHEMES, default=list(SCHEMES))
    sp.add_argument("--links", type=_positive, default=100)
    sp.add_argument("--sources", type=_positive, default=20)
    sp.add_argument("--dests", type=_positive, default=20)
    sp.add_argument("--source-tries", type=_positive, default=2000)
    sp.add_argument("--t0", type=_latency)
    sp.add_argument("--D", type=_latency)
    sp.add_argument("--d-r", dest="d_r", type=_latency)
    sp.add_argument("--gen-interval", type=_latency)
    sp.add_argument("--horizon", type=_latency,
                    help="last generation time (default: until every triple converged)")

    sp = add("bounds", help="lower bounds and tight witness graphs")
    sp.add_argument("k", type=int)
    sp.add_argument("--unweighted", action="store_true", help="use the unweighted witness")
    sp.add_argument("--emit-graph", help="write the witness as an edge list")
    return p


@contextmanager
def _output(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _topology(args) -> Topology:
    if not args.topo:
        raise UsageError("--topo is required")
    return load_topology(args.topo, directed=args.directed)


def _model(args, topo) -> FailureModel:
    if args.srlg:
        return load_srlg(args.srlg, topo)
    if args.model == SRLG:
        raise UsageError("--model srlg needs --srlg FILE")
    return FailureModel(args.model)


def _fs(args, topo):
    s, d = topo.node_id(args.src), topo.node_id(args.dst)
    return build_fs(topo, s, d, _model(args, topo))


def _encode(fs, topo, fmt):
    return encode_default(fs, topo) if fmt == "default" else encode_direct(fs, topo)


def cmd_fs(args, out) -> int:
    topo = _topology(args)
    fs = _fs(args, topo)
    out.write(fs.dump(topo))
    return EXIT_OK


def cmd_encode(args, out) -> int:
    topo = _topology(args)
    fs = _fs(args, topo)
    header = _encode(fs, topo, args.format)
    vec = GoldenVector(args.topo, args.src, args.dst, args.format, header.bits)
    out.write(f"format: {args.format}\nbits: {header.size_bits}\n"
              f"bytes: {nbytes(header.size_bits)}\nhex: {vec.payload.hex()}\n")
    if args.golden:
        vec.save(args.golden)
    return EXIT_OK


def cmd_decode(args, out) -> int:
    if args.golden:
        vec = GoldenVector.load(args.golden)
        header = vec.header()
        topo_path = args.topo or vec.topology
        src = args.src or vec.source
    elif args.hex:
        try:
            payload = bytes.fromhex(args.hex)
        except ValueError:
            raise HeaderError("--hex is not valid hexadecimal") from None
        header = header_from_payload(payload)
        topo_path, src = args.topo, args.src
    else:
        raise UsageError("decode needs --hex or --golden")
    if not topo_path or src is None:
        raise UsageError("decode needs a topology and a source")
    topo = load_topology(topo_path, directed=args.directed)
    s = topo.node_id(src)
    name = topo.names
    if isinstance(header, DefaultHeader):
        rows = walk_default(header, topo, s)
        out.write(f"format: default\nheader_length: {header.header_length}\n")
    else:
        rows = walk_direct(header, topo, s)
        out.write(f"format: direct\nptr_width: {header.ptr_width}\n"
                  f"current_node_ptr: {header.current_node_ptr}\n")
    node = s
    for node, plabel, alt in rows:
        alt_txt = " ".join(lab or "-" for lab in alt) if alt else "none"
        out.write(f"{name[node]}: primary={plabel or '-'} alternate={alt_txt}\n")
    return EXIT_OK


def cmd_trace(args, out) -> int:
    topo = _topology(args)
    fs = _fs(args, topo)
    links = []
    for tok in args.fail:
        a, sep, b = tok.partition("-")
        if not sep:
            raise TopologyError(f"bad link token {tok!r}")
        u, v = topo.node_id(a), topo.node_id(b)
        if not topo.has_link(u, v):
            raise TopologyError(f"no link {tok}")
        links.append((u, v))
    failed = FailedSet.physical(topo, links) if not topo.directed else FailedSet.of(links)
    nodes = frozenset(topo.node_id(x) for x in args.fail_node)
    if fs.dest in nodes or fs.source in nodes:
        raise FsError("the source or destination cannot fail")
    failed = FailedSet(failed.links, nodes)
    header = _encode(fs, topo, args.format)
    if args.pointer:
        if args.format != "default":
            raise UsageError("--pointer applies to the default format only")
        header = PointerHeader.from_default(header)
    trace = forward_packet(header, topo, fs.source, failed)
    out.write(trace.render(topo))
    return EXIT_OK if trace.delivered else EXIT_DROPPED


def _pairs(topo: Topology, args) -> tuple[list[tuple[int, int]], str]:
    if topo.n < args.all_pairs_below:
        return [(s, d) for s in topo.nodes for d in topo.nodes if s != d], "all-pairs"
    rng = random.Random(args.seed)
    total = topo.n * (topo.n - 1)
    want = min(args.pairs, total)
    chosen = set()
    while len(chosen) < want:
        s, d = rng.randrange(topo.n), rng.randrange(topo.n)
        if s != d:
            chosen.add((s, d))
    return sorted(chosen), "sampled"


def cmd_sizes(args, out) -> int:
    topo = _topology(args)
    model = _model(args, topo)
    pairs, mode = _pairs(topo, args)
    out.write(f"# topology: {args.topo}\n# seed: {args.seed}\n# model: {model.kind}\n"
              f"# pairs: {mode}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["src", "dst", "default_bytes", "direct_bytes", "fs_edges", "lb_edges"])
    trees: dict[int, dict] = {}
    skipped = 0
    for s, d in pairs:
        if s not in trees:
            trees[s] = shortest_path_tree(topo, s)
        res = trees[s].get(d)
        if res is None:
            skipped += 1
            continue
        fs = build_fs(topo, s, d, model, primary_path=res.nodes)
        try:
            dflt = str(nbytes(encode_default(fs, topo).size_bits))
        except EncodingError:
            dflt = "NA"
        try:
            drct = str(nbytes(encode_direct(fs, topo).size_bits))
        except DirectEncodingError:
            drct = "NA"
        w.writerow([topo.names[s], topo.names[d], dflt, drct, fs_edge_count(fs),
                    lower_bound(res.hops, topo.weighted)])
    if skipped:
        print(f"warning: {skipped} disconnected pairs skipped", file=sys.stderr)
    return EXIT_OK


def _params(args) -> TimingParams:
    base = PRESETS[args.preset]
    pick = lambda v, default: default if v is None else v
    return TimingParams(pick(args.t0, base.t0), pick(args.D, base.D),
                        pick(args.d_r, base.d_r), pick(args.gen_interval, base.gen_interval))


def cmd_stretch(args, out) -> int:
    topo = _topology(args)
    params = _params(args)
    cache: dict = {}
    triples = sample_triples(topo, args.seed, args.links, args.sources, args.dests,
                             args.source_tries, _cache=cache)
    if not triples:
        print("warning: no qualified triples", file=sys.stderr)
    metrics = [triple_metrics(topo, t, _cache=cache) for t in triples]
    series, needed = run_eval(topo, args.schemes, params, triples, args.horizon, metrics)
    meta = {"topology": args.topo, "seed": args.seed, "preset": args.preset,
            "params": " ".join(f"{k}={v}" for k, v in params_dict(params).items()),
            "triples": len(triples), "horizon": args.horizon if args.horizon is not None else needed}
    if args.horizon is not None and Fraction(args.horizon) < Fraction(needed):
        meta["warning"] = f"horizon below convergence time {needed}"
        print(f"warning: horizon below convergence time {needed}", file=sys.stderr)
    write_stretch_csv(series, out, meta)
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    if args.k < 1:
        raise UsageError("k must be >= 1")
    weighted = not args.unweighted
    topo, s, d = witness_weighted(args.k) if weighted else witness_unweighted(args.k)
    fs = build_fs(topo, s, d)
    res = bound_result(args.k)
    bound = res.weighted_bound if weighted else res.unweighted_bound
    out.write(f"k: {args.k}\nweighted_bound: {res.weighted_bound}\n"
              f"unweighted_bound: {res.unweighted_bound}\n"
              f"witness: {'weighted' if weighted else 'unweighted'} ({topo.n} nodes)\n"
              f"witness_fs_edges: {fs_edge_count(fs)}\n"
              f"tight: {'yes' if fs_edge_count(fs) == bound else 'no'}\n")
    if args.emit_graph:
        Path(args.emit_graph).write_text(topo.edge_list())
    return EXIT_OK


COMMANDS = {"fs": cmd_fs, "encode": cmd_encode, "decode": cmd_decode,
            "trace": cmd_trace, "forward": cmd_trace, "bounds": cmd_bounds}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.srlg:
        args.model = SRLG
    if args.command == "eval":
        handler = cmd_sizes if args.eval_command == "sizes" else cmd_stretch
    else:
        handler = COMMANDS[args.command]
    try:
        with _output(args.out) as out:
            return handler(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"slickpackets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"slickpackets: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
