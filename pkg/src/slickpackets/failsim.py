"""Closed-form packet stretch after a single link failure.

For a triple ``(l0, s, d)`` the source emits a packet every
``gen_interval`` ms from time 0; ``l0`` fails at ``t0``.  Each scheme
below maps a generation time to the stretch of that packet, i.e. its
lifetime divided by the post-failure shortest-path latency from ``s`` to
``d``.  Packets that travel the original path in full count as stretch 1.

Notation used in the code::

    ds      dist(s, r0)                 shortest latency, no failure
    hsd     hat-dist(s, d)              shortest latency with l0 down
    hr0d    hat-dist(r0, d)
    M       max(t0, ds)                 when the first affected packet reaches r0

All quantities are exact (``int``/``Fraction``) in the scalar functions.
The physical link fails, so both directions of ``l0`` are removed, and
latencies are assumed symmetric when a message travels "back" to ``s``.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .topology import (
    Latency,
    Topology,
    distances,
    physical_failure,
    shortest_path_tree,
)

FLOODED = "flooded-sp"
FAST = "fast-sp"
E2E = "e2e-sp"
VSR = "fast-vsr"
SAFEGUARD = "ideal-safeguard"
NCR = "ideal-ncr"

SCHEMES = (FLOODED, FAST, E2E, VSR, SAFEGUARD, NCR)
SLICK_VARIANTS = {FLOODED: "flooded", FAST: "fast", E2E: "e2e"}
NON_DROPPING = (FLOODED, FAST, E2E, SAFEGUARD, NCR)


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class TimingParams:
    t0: Latency = 150
    D: Latency = 50
    d_r: Latency = 2
    gen_interval: Latency = 1

    def __post_init__(self):
        for name in ("t0", "D", "d_r"):
            if getattr(self, name) < 0:
                raise SimError(f"{name} must be >= 0")
        if self.gen_interval <= 0:
            raise SimError("gen_interval must be > 0")

    def describe(self) -> str:
        return f"t0={self.t0} D={self.D} d_r={self.d_r} gen_interval={self.gen_interval}"


PRESETS = {
    "sprint": TimingParams(150, 50, 2),
    "flat": TimingParams(50, 0, 0),
    "sprint-t0": TimingParams(0, 50, 2),
    "flat-t0": TimingParams(0, 0, 0),
}


@dataclass(frozen=True)
class Triple:
    l0: tuple[int, int]
    s: int
    d: int

    @property
    def r0(self) -> int:
        return self.l0[0]


@dataclass(frozen=True)
class Upstream:
    """A primary router ``r`` upstream of ``r0`` (``s`` included)."""

    node: int
    dist_s: Latency      # dist(s, r)
    dist_r0: Latency     # dist(r0, r)
    hops_r0: int         # h(r0, r)
    hat_d: Latency       # hat-dist(r, d)


@dataclass(frozen=True)
class TripleMetrics:
    triple: Triple
    primary: tuple[int, ...]
    ds: Latency          # dist(s, r0)
    dist_r0s: Latency    # dist(r0, s)
    hops_r0s: int        # h(r0, s)
    hsd: Latency         # hat-dist(s, d)
    hr0d: Latency        # hat-dist(r0, d)
    hds: Latency         # hat-dist(d, s)
    upstream: tuple[Upstream, ...]  # ordered from s towards r0, r0 excluded


def triple_metrics(topo: Topology, triple: Triple, primary: Sequence[int] | None = None,
                   _cache: dict | None = None) -> TripleMetrics:
    """Distances the closed forms need.  ``_cache`` shares Dijkstra runs."""
    cache = _cache if _cache is not None else {}
    s, d, r0 = triple.s, triple.d, triple.r0

    def tree(src):
        key = ("tree", src)
        if key not in cache:
            cache[key] = shortest_path_tree(topo, src)
        return cache[key]

    def plain(src):
        key = ("dist", src)
        if key not in cache:
            cache[key] = distances(topo, src)
        return cache[key]

    def hat(src, reverse):
        key = ("hat", triple.l0, src, reverse)
        if key not in cache:
            cache[key] = distances(topo, src, physical_failure(topo, triple.l0), reverse=reverse)
        return cache[key]

    if primary is None:
        res = tree(s).get(d)
        if res is None:
            raise SimError(f"{s} cannot reach {d}")
        primary = res.nodes
    primary = tuple(primary)
    pairs = list(zip(primary, primary[1:]))
    if triple.l0 not in pairs:
        raise SimError(f"{triple.l0} is not on the primary path {primary}")
    i = pairs.index(triple.l0)
    to_d = hat(d, True)
    from_d = hat(d, False)
    if s not in to_d:
        raise SimError(f"{s} and {d} are disconnected once {triple.l0} fails")
    from_r0 = plain(r0)
    prefix = [0]
    for a, b in pairs[:i]:
        prefix.append(prefix[-1] + topo.latency(a, b))
    upstream = tuple(
        Upstream(r, prefix[j], from_r0[r][0], from_r0[r][1], to_d[r][0])
        for j, r in enumerate(primary[:i])
    )
    return TripleMetrics(
        triple=triple,
        primary=primary,
        ds=prefix[i],
        dist_r0s=from_r0[s][0],
        hops_r0s=from_r0[s][1],
        hsd=to_d[s][0],
        hr0d=to_d[r0][0],
        hds=from_d[s][0],
        upstream=upstream,
    )


def _frac(x) -> Fraction:
    return Fraction(x)


def sigma_r0(m: TripleMetrics) -> Fraction:
    return _frac(m.ds + m.hr0d) / m.hsd


def slick_learn_time(m: TripleMetrics, p: TimingParams, variant: str) -> Latency:
    """When ``s`` learns of the failure."""
    first = max(p.t0, m.ds)
    if variant == "flooded":
        return p.t0 + m.dist_r0s + m.hops_r0s * p.d_r
    if variant == "fast":
        return first + m.ds
    if variant == "e2e":
        return first + m.hr0d + p.D + m.hds
    raise SimError(f"unknown SlickPackets variant {variant!r}")


def _check_t(t) -> None:
    if t < 0:
        raise SimError("generation time must be >= 0")


def stretch_slickpackets(m: TripleMetrics, p: TimingParams, variant: str, t) -> Fraction:
    _check_t(t)
    tau_s = slick_learn_time(m, p, variant) + p.D
    if t >= tau_s:
        return Fraction(1)
    if t >= max(p.t0, m.ds) - m.ds:
        return sigma_r0(m)
    return Fraction(1)


def safeguard_thresholds(m: TripleMetrics, p: TimingParams) -> list[tuple[Latency, Fraction]]:
    """``(first redirected send time, stretch)`` per router, upstream first."""
    out = []
    for u in m.upstream:
        learn = p.t0 + u.dist_r0 + u.hops_r0 * p.d_r
        out.append((max(0, learn + p.D - u.dist_s), _frac(u.dist_s + u.hat_d) / m.hsd))
    out.append((max(p.t0, m.ds) - m.ds, sigma_r0(m)))
    return out


def stretch_safeguard(m: TripleMetrics, p: TimingParams, t) -> Fraction:
    _check_t(t)
    # the first router on the way that is already redirecting takes the packet
    for start, sigma in safeguard_thresholds(m, p):
        if t >= start:
            return sigma
    return Fraction(1)


def stretch_ncr(m: TripleMetrics, p: TimingParams, t) -> Fraction:
    return stretch_safeguard(m, TimingParams(p.t0, 0, 0, p.gen_interval), t)


def vsr_times(m: TripleMetrics, p: TimingParams) -> tuple[Latency, Latency, Latency]:
    """``(first dropped send time, learn time, ready time)`` at ``s``."""
    first = max(p.t0, m.ds)
    learn = first + m.ds
    return first - m.ds, learn, learn + p.D


def stretch_vsr(m: TripleMetrics, p: TimingParams, t) -> Fraction:
    _check_t(t)
    drop_from, _, tau = vsr_times(m, p)
    if t < drop_from or t > tau:
        return Fraction(1)
    # dropped-and-resent packets and queued packets both leave s at tau
    return _frac(tau - t + m.hsd) / m.hsd


def stretch(scheme: str, m: TripleMetrics, p: TimingParams, t) -> Fraction:
    if scheme in SLICK_VARIANTS:
        return stretch_slickpackets(m, p, SLICK_VARIANTS[scheme], t)
    if scheme == VSR:
        return stretch_vsr(m, p, t)
    if scheme == SAFEGUARD:
        return stretch_safeguard(m, p, t)
    if scheme == NCR:
        return stretch_ncr(m, p, t)
    raise SimError(f"unknown scheme {scheme!r}")


def stretch_series(scheme: str, m: TripleMetrics, p: TimingParams,
                   times: Sequence) -> list[Fraction]:
    """Exact stretch for many generation times, thresholds computed once."""
    one = Fraction(1)
    if scheme in SLICK_VARIANTS:
        start = max(p.t0, m.ds) - m.ds
        tau = slick_learn_time(m, p, SLICK_VARIANTS[scheme]) + p.D
        sig = sigma_r0(m)
        return [sig if start <= t < tau else one for t in times]
    if scheme == VSR:
        start, _, tau = vsr_times(m, p)
        return [_frac(tau - t + m.hsd) / m.hsd if start <= t <= tau else one for t in times]
    if scheme in (SAFEGUARD, NCR):
        q = p if scheme == SAFEGUARD else TimingParams(p.t0, 0, 0, p.gen_interval)
        table = safeguard_thresholds(m, q)
        out = []
        for t in times:
            for start, sig in table:
                if t >= start:
                    out.append(sig)
                    break
            else:
                out.append(one)
        return out
    raise SimError(f"unknown scheme {scheme!r}")


def converged_at(scheme: str, m: TripleMetrics, p: TimingParams) -> Latency:
    """Send time from which every packet has stretch 1 (``tau(s)``)."""
    if scheme in SLICK_VARIANTS:
        return slick_learn_time(m, p, SLICK_VARIANTS[scheme]) + p.D
    if scheme == VSR:
        return vsr_times(m, p)[2]
    if scheme == SAFEGUARD:
        return safeguard_thresholds(m, p)[0][0]
    if scheme == NCR:
        return safeguard_thresholds(m, TimingParams(p.t0, 0, 0, p.gen_interval))[0][0]
    raise SimError(f"unknown scheme {scheme!r}")


def horizon(metrics: Iterable[TripleMetrics], p: TimingParams,
            schemes: Sequence[str] = SCHEMES) -> Latency:
    h = 0
    for m in metrics:
        for sc in schemes:
            h = max(h, converged_at(sc, m, p) + m.hsd + p.gen_interval)
    return h


# -- triple selection ----------------------------------------------------

def _primary_links(path: Sequence[int]) -> list[tuple[int, int]]:
    return list(zip(path, path[1:]))


def all_triples(topo: Topology) -> list[Triple]:
    """Every ``(l0, s, d)`` with ``l0`` on the tie-broken primary path and
    ``s``, ``d`` still connected once ``l0`` fails."""
    out = []
    for s in topo.nodes:
        tree = shortest_path_tree(topo, s)
        for d in sorted(tree):
            if d == s:
                continue
            for l0 in _primary_links(tree[d].nodes):
                out.append(Triple(l0, s, d))
    return [t for t in out if _survives(topo, t)]


def _survives(topo: Topology, t: Triple, cache: dict | None = None) -> bool:
    cache = cache if cache is not None else {}
    key = ("hat", t.l0, t.d, True)
    if key not in cache:
        cache[key] = distances(topo, t.d, physical_failure(topo, t.l0), reverse=True)
    return t.s in cache[key]


def sample_triples(
    topo: Topology,
    seed: int,
    n_links: int = 100,
    n_sources: int = 20,
    n_dests: int = 20,
    max_source_tries: int = 2000,
    _cache: dict | None = None,
) -> list[Triple]:
    """Seeded sample of triples.

    For each sampled directed link, random sources are tried (at most
    ``max_source_tries``) and the first ``n_sources`` whose shortest-path
    tree uses the link are kept.  Each one gets up to ``n_dests`` random
    destinations from the subtree below the link; destinations that lose
    connectivity when the link fails are discarded.
    """
    rng = random.Random(seed)
    cache = _cache if _cache is not None else {}
    links = sorted((l.src, l.dst) for l in topo.links)
    if n_links < len(links):
        links = sorted(rng.sample(links, n_links))
    nodes = list(topo.nodes)
    out = []
    for u, v in links:
        tries = rng.sample(nodes, min(max_source_tries, len(nodes)))
        qualified = 0
        for s in tries:
            if qualified >= n_sources:
                break
            key = ("tree", s)
            if key not in cache:
                cache[key] = shortest_path_tree(topo, s)
            tree = cache[key]
            if v not in tree or len(tree[v].nodes) < 2 or tree[v].nodes[-2] != u:
                continue
            qualified += 1
            below = sorted(d for d, res in tree.items()
                           if len(res.nodes) > tree[v].hops and res.nodes[tree[v].hops] == v)
            if n_dests < len(below):
                below = sorted(rng.sample(below, n_dests))
            for d in below:
                t = Triple((u, v), s, d)
                if _survives(topo, t, cache):
                    out.append(t)
    return out


# -- batch evaluation ----------------------------------------------------

@dataclass
class StretchSeries:
    scheme: str
    gen_times: np.ndarray
    mean: np.ndarray
    max: np.ndarray
    n_triples: int


def gen_times(p: TimingParams, until: Latency) -> list[Latency]:
    n = math.floor(Fraction(until) / Fraction(p.gen_interval))
    return [k * p.gen_interval for k in range(n + 1)]


def _stretch_matrix(scheme: str, ms: Sequence[TripleMetrics], p: TimingParams,
                    t: np.ndarray) -> np.ndarray:
    """Float stretch, one row per triple, one column per generation time."""
    tt = t[None, :]
    hsd = np.array([float(m.hsd) for m in ms])[:, None]
    if scheme in SLICK_VARIANTS:
        var = SLICK_VARIANTS[scheme]
        start = np.array([float(max(p.t0, m.ds) - m.ds) for m in ms])[:, None]
        tau = np.array([float(slick_learn_time(m, p, var) + p.D) for m in ms])[:, None]
        sig = np.array([float(sigma_r0(m)) for m in ms])[:, None]
        return np.where((tt >= start) & (tt < tau), sig, 1.0)
    if scheme == VSR:
        rows = [vsr_times(m, p) for m in ms]
        start = np.array([float(r[0]) for r in rows])[:, None]
        tau = np.array([float(r[2]) for r in rows])[:, None]
        live = (tau - tt + hsd) / hsd
        return np.where((tt >= start) & (tt <= tau), live, 1.0)
    if scheme in (SAFEGUARD, NCR):
        q = p if scheme == SAFEGUARD else TimingParams(p.t0, 0, 0, p.gen_interval)
        out = np.ones((len(ms), len(t)))
        for row, m in enumerate(ms):
            # downstream routers first so upstream ones overwrite them
            for start, sig in reversed(safeguard_thresholds(m, q)):
                out[row, t >= float(start)] = float(sig)
        return out
    raise SimError(f"unknown scheme {scheme!r}")


def run_eval(
    topo: Topology,
    schemes: Sequence[str],
    params: TimingParams,
    triples: Sequence[Triple],
    until: Latency | None = None,
    metrics: Sequence[TripleMetrics] | None = None,
    chunk: int = 2048,
) -> tuple[list[StretchSeries], Latency]:
    """Mean and max stretch per generation time for each scheme.

    Returns the series and the horizon used.  A horizon shorter than the
    convergence time of some triple is honoured but flagged by the caller.
    """
    for sc in schemes:
        if sc not in SCHEMES:
            raise SimError(f"unknown scheme {sc!r}")
    if metrics is None:
        cache: dict = {}
        metrics = [triple_metrics(topo, t, _cache=cache) for t in triples]
    needed = horizon(metrics, params, schemes) if metrics else params.gen_interval
    until = needed if until is None else until
    times = gen_times(params, until)
    t = np.array([float(x) for x in times])
    out = []
    for sc in schemes:
        total = np.zeros(len(t))
        peak = np.ones(len(t)) if metrics else np.full(len(t), np.nan)
        for lo in range(0, len(metrics), chunk):
            mat = _stretch_matrix(sc, metrics[lo:lo + chunk], params, t)
            total += mat.sum(axis=0)
            peak = np.maximum(peak, mat.max(axis=0))
        mean = total / len(metrics) if metrics else np.full(len(t), np.nan)
        out.append(StretchSeries(sc, np.array(times, dtype=object), mean, peak, len(metrics)))
    return out, needed


def _num(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_stretch_csv(series: Sequence[StretchSeries], fh, meta: dict[str, object]) -> None:
    for key, value in meta.items():
        fh.write(f"# {key}: {value}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["scheme", "gen_time_ms", "mean_stretch", "max_stretch", "n_triples",
                "mean_stretch_minus_1"])
    for sr in series:
        for t, mean, peak in zip(sr.gen_times, sr.mean, sr.max):
            w.writerow([sr.scheme, _num(t), _num(mean), _num(peak), sr.n_triples,
                        _num(mean - 1.0)])


def stretch_csv(series: Sequence[StretchSeries], meta: dict[str, object]) -> str:
    buf = io.StringIO()
    write_stretch_csv(series, buf, meta)
    return buf.getvalue()


def params_dict(p: TimingParams) -> dict:
    return {k: _num(v) for k, v in asdict(p).items()}
