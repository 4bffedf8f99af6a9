"""Stochastic edge-process models over a fixed candidate-edge graph.

Two edge dynamics are available: independent per-slot presence with
probability p, and a two-state chain per edge (OFF->ON probability p,
ON->OFF probability q, initial ON probability p0).  Sampling is
deterministic given the seed: draws come from numpy's PCG64 seeded with
SeedSequence(seed), slot-major over the candidate edges in their listed
order.

The alternating special case (p=q=1) on a line admits exact per-start
latencies, computed here from the slot-1 configuration bit string.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .temporal import Graphlet, GraphletSequence, load_tgs

__all__ = [
    "UnderlyingGraph",
    "ErParams",
    "MarkovParams",
    "ModelSpec",
    "stationary_distribution",
    "sample_er_tgs",
    "sample_markov_tgs",
    "shortest_path",
    "Configuration",
    "config_stats",
    "alternating_cut_latency",
    "alternating_soa_latency",
    "alternating_average_latency",
    "alternating_tgs",
    "parse_model_spec",
    "format_model_spec",
]

MAX_ENUM_NODES = 24


@dataclass(frozen=True)
class UnderlyingGraph:
    """Candidate-edge graph the stochastic processes act on."""

    nodes: tuple
    edges: tuple
    name: str | None = None

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("duplicate node ids")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
            key = (u, v) if u <= v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def line(cls, n):
        if n < 1:
            raise ValueError("a line needs at least one node")
        return cls(tuple(range(n)), tuple((i, i + 1) for i in range(n - 1)), name="line")

    @classmethod
    def complete(cls, n):
        if n < 1:
            raise ValueError("a complete graph needs at least one node")
        edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
        return cls(tuple(range(n)), edges, name="complete")

    @classmethod
    def from_graphlet(cls, g, name=None):
        return cls(tuple(sorted(g.nodes)), tuple(sorted(g.edges)), name=name)

    def neighbor_map(self):
        out = {v: [] for v in self.nodes}
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return {v: tuple(sorted(ws)) for v, ws in out.items()}


@dataclass(frozen=True)
class ErParams:
    """Independent per-slot edge presence with probability p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


@dataclass(frozen=True)
class MarkovParams:
    """Two-state per-edge chain: OFF->ON prob p, ON->OFF prob q, initial ON prob p0.

    p0 defaults to the stationary ON probability p/(p+q).
    """

    p: float
    q: float
    p0: float | None = None

    def __post_init__(self):
        for name in ("p", "q"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.p0 is None:
            if self.p + self.q <= 0.0:
                raise ValueError("p0 has no stationary default when p = q = 0")
            object.__setattr__(self, "p0", self.p / (self.p + self.q))
        elif not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")

    @property
    def stationary_on(self):
        pi_on, _ = stationary_distribution(self)
        return pi_on

    def is_stationary_start(self, tol=1e-12):
        if self.p + self.q <= 0.0:
            return False
        return abs(self.p0 - self.p / (self.p + self.q)) <= tol


def stationary_distribution(params):
    """Stationary (ON, OFF) probabilities of the two-state edge chain."""
    p, q = params.p, params.q
    if p + q <= 0.0:
        raise ValueError("p = q = 0 leaves every distribution stationary")
    return p / (p + q), q / (p + q)


def sample_er_tgs(gu, params, horizon, seed):
    """Sample a sequence with each candidate edge present independently per slot.

    seed may be an int or a numpy SeedSequence.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = np.random.default_rng(seed)
    draws = rng.random((horizon, len(gu.edges)))
    present = draws < params.p
    graphlets = []
    for t in range(horizon):
        edges = [e for e, on in zip(gu.edges, present[t]) if on]
        graphlets.append(Graphlet(t + 1, gu.nodes, edges))
    return GraphletSequence(graphlets)


def sample_markov_tgs(gu, params, horizon, seed):
    """Sample a sequence of per-edge two-state chains, independent across edges.

    seed may be an int or a numpy SeedSequence.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = np.random.default_rng(seed)
    n_edges = len(gu.edges)
    state = rng.random(n_edges) < params.p0
    graphlets = []
    for t in range(1, horizon + 1):
        if t > 1:
            u = rng.random(n_edges)
            state = np.where(state, u >= params.q, u < params.p)
        edges = [e for e, on in zip(gu.edges, state) if on]
        graphlets.append(Graphlet(t, gu.nodes, edges))
    return GraphletSequence(graphlets)


def shortest_path(gu, source, dest):
    """Deterministic BFS path (list of nodes) from source to dest, or None."""
    if source not in gu.nodes or dest not in gu.nodes:
        raise ValueError(f"unknown node {source!r} or {dest!r}")
    if source == dest:
        return [source]
    nbr = gu.neighbor_map()
    parent = {source: None}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in nbr[x]:
            if y not in parent:
                parent[y] = x
                if y == dest:
                    path = [dest]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(y)
    return None


# --- the alternating (p = q = 1) special case on a line ---------------------


@dataclass(frozen=True)
class Configuration:
    """Slot-1 edge states of a line, as a bit string; bit i = edge (i, i+1)."""

    bits: str

    def __post_init__(self):
        if not self.bits:
            raise ValueError("a configuration needs at least one bit")
        if set(self.bits) - {"0", "1"}:
            raise ValueError("configuration bits must be 0 or 1")

    @property
    def n(self):
        """Number of line nodes (one more than the edge count)."""
        return len(self.bits) + 1


def config_stats(config):
    """(k, b): count of adjacent unequal bit pairs, and the first bit."""
    bits = config.bits
    k = sum(1 for a, b in zip(bits, bits[1:]) if a != b)
    return k, int(bits[0])


def alternating_cut_latency(config):
    """Slots to cross the alternating line under cut-through forwarding."""
    k, b = config_stats(config)
    return k + 1 - b


def alternating_soa_latency(config):
    """Slots to cross the alternating line when each hop costs one slot.

    Equal to 2(n-1) - k - b: each of the n-1 hops costs one slot when its
    edge is up on arrival and two slots otherwise, and arrival parities
    make hop i cheap exactly when bit i extends a change run (or bit 1 is
    set).  The uniform average over configurations is 3(n-1)/2.
    """
    k, b = config_stats(config)
    return 2 * (config.n - 1) - k - b


def alternating_average_latency(n, metric):
    """Exact average latency over all 2^(n-1) slot-1 configurations."""
    if n < 2:
        raise ValueError("need at least two nodes")
    if n > MAX_ENUM_NODES:
        raise ValueError(f"enumeration capped at {MAX_ENUM_NODES} nodes")
    if metric not in ("cut", "soa"):
        raise ValueError("metric must be 'cut' or 'soa'")
    width = n - 1
    change_mask = (1 << (width - 1)) - 1
    total = 0
    for x in range(1 << width):
        k = ((x ^ (x >> 1)) & change_mask).bit_count()
        b = x & 1
        total += (k + 1 - b) if metric == "cut" else (2 * width - k - b)
    return Fraction(total, 1 << width)


def alternating_tgs(config, horizon):
    """The deterministic flip-every-slot line sequence starting from `config`."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n = config.n
    nodes = range(n)
    graphlets = []
    for t in range(1, horizon + 1):
        want = "1" if t % 2 == 1 else "0"
        edges = [(i, i + 1) for i, bit in enumerate(config.bits) if bit == want]
        graphlets.append(Graphlet(t, nodes, edges))
    return GraphletSequence(graphlets)


# --- model spec text format --------------------------------------------------
#
#   er p=<float> gu=<line|complete|file:PATH> n=<int>
#   mc p=<float> q=<float> p0=<float|stationary> gu=<...> n=<int>


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: object
    gu: UnderlyingGraph

    def __post_init__(self):
        if self.kind not in ("er", "mc"):
            raise ValueError("model kind must be 'er' or 'mc'")


def _load_underlying(gu_token, n_token):
    if gu_token.startswith("file:"):
        path = gu_token[len("file:"):]
        tgs = load_tgs(path)
        if tgs.horizon != 1:
            raise ValueError(f"underlying-graph file {path!r} must hold exactly one slot")
        return UnderlyingGraph.from_graphlet(tgs[0])
    if n_token is None:
        raise ValueError("n=<int> is required with gu=line or gu=complete")
    n = int(n_token)
    if gu_token == "line":
        return UnderlyingGraph.line(n)
    if gu_token == "complete":
        return UnderlyingGraph.complete(n)
    raise ValueError(f"unknown underlying graph {gu_token!r}")


def parse_model_spec(text):
    parts = text.split()
    if not parts:
        raise ValueError("empty model spec")
    kind = parts[0]
    kv = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ValueError(f"bad token {tok!r}; expected key=value")
        key, val = tok.split("=", 1)
        if key in kv:
            raise ValueError(f"duplicate key {key!r}")
        kv[key] = val
    if "gu" not in kv:
        raise ValueError("model spec needs gu=<line|complete|file:PATH>")
    gu = _load_underlying(kv.pop("gu"), kv.pop("n", None))
    if kind == "er":
        if set(kv) != {"p"}:
            raise ValueError("er spec takes exactly p=<float> (plus gu/n)")
        return ModelSpec("er", ErParams(float(kv["p"])), gu)
    if kind == "mc":
        if not {"p", "q"} <= set(kv) or set(kv) - {"p", "q", "p0"}:
            raise ValueError("mc spec takes p=<float> q=<float> [p0=<float|stationary>] (plus gu/n)")
        p0_tok = kv.get("p0", "stationary")
        p0 = None if p0_tok == "stationary" else float(p0_tok)
        return ModelSpec("mc", MarkovParams(float(kv["p"]), float(kv["q"]), p0), gu)
    raise ValueError(f"unknown model kind {kind!r}")


def format_model_spec(spec):
    gu = spec.gu
    if gu.name in ("line", "complete"):
        gu_part = f"gu={gu.name} n={len(gu.nodes)}"
    else:
        raise ValueError("only line/complete underlying graphs have a canonical spec string")
    if spec.kind == "er":
        return f"er p={spec.params.p!r} {gu_part}"
    params = spec.params
    pi_on = params.p / (params.p + params.q) if params.p + params.q > 0 else None
    if pi_on is not None and params.p0 == pi_on:
        p0_part = "p0=stationary"
    else:
        p0_part = f"p0={params.p0!r}"
    return f"mc p={params.p!r} q={params.q!r} {p0_part} {gu_part}"
