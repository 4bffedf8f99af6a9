"""Deterministic model of time-varying graphs.

A :class:`GraphletSequence` is an ordered list of undirected snapshots
("graphlets"), one per time slot.  This module provides the two static
views of such a sequence -- the time-expanded stacked graph and the
collapsed smashed graph -- together with slot-aware reachability,
connectivity, and clique queries evaluated by exhaustive search.

Reachability uses journey semantics: a message may traverse any number
of edges inside a single slot and may wait at a node, but it never moves
to an earlier slot.  All containers are immutable after construction and
every operation is a pure function, so everything here is safe to use
concurrently.
"""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction
from pathlib import Path

__all__ = [
    "Graphlet",
    "GraphletSequence",
    "StackedGraph",
    "SmashedGraph",
    "build_stacked",
    "stacked_reachable",
    "smash",
    "m_smash",
    "t_adjacent",
    "t_reachable",
    "t_clique",
    "t_k_connected",
    "reachable_pairs_fraction",
    "parse_tgs",
    "format_tgs",
    "load_tgs",
    "dump_tgs",
]


def _normalize_edge(u, v):
    if u == v:
        raise ValueError(f"self-loop on node {u!r}")
    a, b = (u, v) if u <= v else (v, u)
    return (a, b)


class Graphlet:
    """One slot of a dynamic network: an undirected snapshot with a slot index."""

    __slots__ = ("time", "nodes", "edges")

    def __init__(self, time, nodes, edges=()):
        if time < 1:
            raise ValueError("slot index must be >= 1")
        node_set = frozenset(nodes)
        edge_set = frozenset(_normalize_edge(u, v) for u, v in edges)
        for u, v in edge_set:
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
        self.time = time
        self.nodes = node_set
        self.edges = edge_set

    def has_edge(self, u, v):
        if u == v:
            return False
        return _normalize_edge(u, v) in self.edges

    def __eq__(self, other):
        if not isinstance(other, Graphlet):
            return NotImplemented
        return (self.time, self.nodes, self.edges) == (other.time, other.nodes, other.edges)

    def __hash__(self):
        return hash((self.time, self.nodes, self.edges))

    def __repr__(self):
        return f"Graphlet(time={self.time}, nodes={sorted(self.nodes)!r}, edges={sorted(self.edges)!r})"


class GraphletSequence:
    """Ordered sequence of graphlets on contiguous slots 1..T."""

    __slots__ = ("graphlets",)

    def __init__(self, graphlets):
        gs = tuple(graphlets)
        if not gs:
            raise ValueError("a graphlet sequence needs at least one slot")
        for i, g in enumerate(gs, start=1):
            if g.time != i:
                raise ValueError(f"slot {i} carries time index {g.time}; slots must be contiguous from 1")
        self.graphlets = gs

    @classmethod
    def from_slot_edges(cls, nodes, slot_edges):
        """Build a sequence with a constant node set from per-slot edge lists."""
        nodes = frozenset(nodes)
        return cls(Graphlet(t, nodes, edges) for t, edges in enumerate(slot_edges, start=1))

    @property
    def horizon(self):
        return len(self.graphlets)

    @property
    def node_ids(self):
        out = set()
        for g in self.graphlets:
            out |= g.nodes
        return frozenset(out)

    def __len__(self):
        return len(self.graphlets)

    def __iter__(self):
        return iter(self.graphlets)

    def __getitem__(self, i):
        return self.graphlets[i]

    def __eq__(self, other):
        if not isinstance(other, GraphletSequence):
            return NotImplemented
        return self.graphlets == other.graphlets

    def __hash__(self):
        return hash(self.graphlets)

    def __repr__(self):
        return f"GraphletSequence(T={self.horizon}, n={len(self.node_ids)})"


class StackedGraph:
    """Time-expanded directed view of a graphlet sequence.

    Vertices are (node id, slot) pairs.  Every slot edge contributes one
    arc in each direction inside its slot; a cross arc ties the same node
    id across consecutive slots (the "wait" action) whenever the id is
    present in both slots.
    """

    __slots__ = ("nodes", "slot_arcs", "cross_arcs", "_succ")

    def __init__(self, nodes, slot_arcs, cross_arcs):
        self.nodes = frozenset(nodes)
        self.slot_arcs = frozenset(slot_arcs)
        self.cross_arcs = frozenset(cross_arcs)
        succ = {v: [] for v in self.nodes}
        for a, b in itertools.chain(self.slot_arcs, self.cross_arcs):
            succ[a].append(b)
        self._succ = succ

    @property
    def arcs(self):
        return self.slot_arcs | self.cross_arcs

    def successors(self, v):
        return tuple(self._succ.get(v, ()))


class SmashedGraph:
    """Union of all graphlets into one static undirected graph."""

    __slots__ = ("nodes", "edges", "_adj")

    def __init__(self, nodes, edges):
        self.nodes = frozenset(nodes)
        self.edges = frozenset(_normalize_edge(u, v) for u, v in edges)
        adj = {v: set() for v in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self._adj = adj

    def neighbors(self, u):
        return frozenset(self._adj[u])

    def connected(self, u, v):
        if u not in self.nodes or v not in self.nodes:
            raise ValueError(f"unknown node {u!r} or {v!r}")
        if u == v:
            return True
        seen = {u}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y in self._adj[x]:
                if y == v:
                    return True
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return False

    def components(self):
        comps = []
        seen = set()
        for start in self.nodes:
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for y in self._adj[x]:
                    if y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            comps.append(frozenset(comp))
        return comps


def build_stacked(tgs):
    """Stack a sequence into its directed time-expanded graph."""
    nodes = set()
    slot_arcs = set()
    cross_arcs = set()
    for g in tgs:
        for v in g.nodes:
            nodes.add((v, g.time))
        for u, v in g.edges:
            slot_arcs.add(((u, g.time), (v, g.time)))
            slot_arcs.add(((v, g.time), (u, g.time)))
    for g, h in zip(tgs.graphlets, tgs.graphlets[1:]):
        for v in g.nodes & h.nodes:
            cross_arcs.add(((v, g.time), (v, h.time)))
    return StackedGraph(nodes, slot_arcs, cross_arcs)


def stacked_reachable(stg, src, dst):
    """Directed reachability between two (node, slot) vertices of a stacked graph."""
    if src not in stg.nodes or dst not in stg.nodes:
        raise ValueError(f"unknown stacked vertex {src!r} or {dst!r}")
    if src == dst:
        return True
    seen = {src}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for y in stg.successors(x):
            if y == dst:
                return True
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return False


def smash(tgs):
    """Collapse a sequence into the union of its slots."""
    nodes = set()
    edges = set()
    for g in tgs:
        nodes |= g.nodes
        edges |= g.edges
    return SmashedGraph(nodes, edges)


def m_smash(tgs, m):
    """Smash every block of m consecutive slots, keeping the blocks stacked.

    m=1 returns an equivalent copy; m >= T collapses the whole sequence
    into a single graphlet equal to smash(tgs).
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError("block size m must be a positive integer")
    graphlets = []
    for i, start in enumerate(range(0, tgs.horizon, m), start=1):
        block = tgs.graphlets[start:start + m]
        nodes = set()
        edges = set()
        for g in block:
            nodes |= g.nodes
            edges |= g.edges
        graphlets.append(Graphlet(i, nodes, edges))
    return GraphletSequence(graphlets)


def _require_known(tgs, *ids):
    known = tgs.node_ids
    for v in ids:
        if v not in known:
            raise ValueError(f"unknown node id {v!r}")


def t_adjacent(tgs, u, v):
    """True iff the edge (u, v) is present in at least one slot."""
    _require_known(tgs, u, v)
    if u == v:
        return False
    e = _normalize_edge(u, v)
    return any(e in g.edges for g in tgs)


def t_reachable(tgs, source, target):
    """Journey reachability from source to target within the horizon.

    Returns (reachable, journey); the witness journey is a list of
    ((from, to), slot) steps with non-decreasing slots, empty for
    source == target, and None when unreachable.
    """
    _require_known(tgs, source, target)
    if source == target:
        return True, []
    parent = {}
    reached = {source}
    for g in tgs:
        adj = {}
        for u, v in g.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        queue = deque(x for x in reached if x in adj)
        while queue:
            x = queue.popleft()
            for y in adj.get(x, ()):
                if y not in reached:
                    reached.add(y)
                    parent[y] = (x, g.time)
                    queue.append(y)
        if target in reached:
            break
    if target not in reached:
        return False, None
    journey = []
    v = target
    while v != source:
        x, t = parent[v]
        journey.append(((x, v), t))
        v = x
    journey.reverse()
    return True, journey


def _slot_component_masks(graphlet, index):
    """Bit masks of the multi-node components of one slot, restricted to `index`."""
    adj = {}
    for u, v in graphlet.edges:
        if u in index and v in index:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    masks = []
    seen = set()
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        mask = 0
        for x in comp:
            mask |= 1 << index[x]
        masks.append(mask)
    return masks


def _journey_masks(tgs, removed=frozenset()):
    """Per-node bit masks of journey-reachable sets, with `removed` ids deleted
    from every slot."""
    order = sorted(tgs.node_ids - removed)
    index = {v: i for i, v in enumerate(order)}
    reach = [1 << i for i in range(len(order))]
    for g in tgs:
        for comp in _slot_component_masks(g, index):
            for i, r in enumerate(reach):
                if r & comp:
                    reach[i] = r | comp
    return order, reach


def t_clique(tgs):
    """A maximum node set of V(1) that is pairwise adjacent somewhere in time.

    Exhaustive search; ties resolved toward the lexicographically smallest
    clique by sorted node id.  Desk scale only.
    """
    v1 = sorted(tgs.graphlets[0].nodes)
    if not v1:
        return ()
    adj = {u: set() for u in v1}
    v1_set = set(v1)
    for g in tgs:
        for u, v in g.edges:
            if u in v1_set and v in v1_set:
                adj[u].add(v)
                adj[v].add(u)
    for size in range(len(v1), 0, -1):
        for combo in itertools.combinations(v1, size):
            if all(b in adj[a] for a, b in itertools.combinations(combo, 2)):
                return tuple(combo)
    return ()


def t_k_connected(tgs, k):
    """True iff every (k-1)-subset of node ids can be removed from all slots
    without breaking journey reachability between any remaining ordered pair."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ids = sorted(tgs.node_ids)
    if k - 1 >= len(ids):
        raise ValueError(f"cannot remove {k - 1} nodes from a {len(ids)}-node sequence")
    for removed in itertools.combinations(ids, k - 1):
        order, reach = _journey_masks(tgs, frozenset(removed))
        full = (1 << len(order)) - 1
        if any(r != full for r in reach):
            return False
    return True


def reachable_pairs_fraction(tgs):
    """Exact fraction of ordered pairs (u, v), u != v, with u -> v journey-reachable."""
    order, reach = _journey_masks(tgs)
    n = len(order)
    if n < 2:
        return Fraction(0)
    hits = sum(r.bit_count() - 1 for r in reach)
    return Fraction(hits, n * (n - 1))


# --- text format -----------------------------------------------------------
#
# Line-oriented sequence format over contiguous 0-based integer node ids:
#
#   tgs <n> <T>
#   t <slot>
#   e <u> <v>
#   ...
#
# Every slot has node set {0, .., n-1}; slots without a `t` block are empty.


def parse_tgs(text):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty sequence file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "tgs":
        raise ValueError(f"bad header {lines[0]!r}; expected 'tgs <n> <T>'")
    try:
        n, horizon = int(head[1]), int(head[2])
    except ValueError:
        raise ValueError(f"bad header {lines[0]!r}; node count and horizon must be integers") from None
    if n < 0 or horizon < 1:
        raise ValueError("node count must be >= 0 and horizon >= 1")
    slot_edges = {t: set() for t in range(1, horizon + 1)}
    declared = set()
    current = None
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "t":
            if len(parts) != 2:
                raise ValueError(f"bad slot line {ln!r}")
            slot = int(parts[1])
            if not 1 <= slot <= horizon:
                raise ValueError(f"slot {slot} out of range 1..{horizon}")
            if slot in declared:
                raise ValueError(f"slot {slot} declared twice")
            declared.add(slot)
            current = slot
        elif parts[0] == "e":
            if current is None:
                raise ValueError("edge line before any 't <slot>' line")
            if len(parts) != 3:
                raise ValueError(f"bad edge line {ln!r}")
            u, v = int(parts[1]), int(parts[2])
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"node id out of range 0..{n - 1} in {ln!r}")
            e = _normalize_edge(u, v)
            if e in slot_edges[current]:
                raise ValueError(f"duplicate edge {e} in slot {current}")
            slot_edges[current].add(e)
        else:
            raise ValueError(f"unrecognized line {ln!r}")
    nodes = range(n)
    return GraphletSequence(
        Graphlet(t, nodes, sorted(slot_edges[t])) for t in range(1, horizon + 1)
    )


def format_tgs(tgs):
    ids = tgs.node_ids
    for v in ids:
        if not isinstance(v, int) or v < 0:
            raise ValueError("the text format requires non-negative integer node ids")
    n = max(ids) + 1 if ids else 0
    out = [f"tgs {n} {tgs.horizon}"]
    for g in tgs:
        out.append(f"t {g.time}")
        for u, v in sorted(g.edges):
            out.append(f"e {u} {v}")
    return "\n".join(out) + "\n"


def load_tgs(path):
    return parse_tgs(Path(path).read_text())


def dump_tgs(tgs, path):
    Path(path).write_text(format_tgs(tgs))
