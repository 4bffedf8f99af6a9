"""Monte Carlo replay of message forwarding over sampled edge processes.

Per trial the engine walks the slots of a sampled (or supplied) sequence
and applies the forwarding discipline: store-or-advance moves one hop
when the next edge is up and the hop consumes that slot; cut-through
jumps the whole currently-connected stretch for free and only waiting
costs slots.  Delivery inside the very first cut-through component
counts as latency zero.

Reproducibility: draws come from numpy PCG64 streams.  The vectorized
engines give each fixed block of 8192 trials its own child stream
(SeedSequence(seed, spawn_key=(block,))), so results are deterministic
and independent of how blocks would be scheduled; per-trial python
engines use SeedSequence(seed, spawn_key=(trial,)).  Undelivered trials
are reported, never dropped.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .analytics import LatencyPmf
from .models import ErParams, sample_er_tgs, sample_markov_tgs, shortest_path

__all__ = [
    "TrialResult",
    "EmpiricalPmf",
    "default_horizon",
    "replay_soa",
    "replay_cut",
    "simulate_soa",
    "simulate_cut",
    "empirical_reachable_pairs",
    "reachable_pairs_samples",
]

BLOCK_TRIALS = 8192


@dataclass(frozen=True)
class TrialResult:
    """One replayed trial: latency in slots (None if undelivered) and the
    per-slot (node, slot) trajectory starting at (source, 0)."""

    latency: int | None
    trajectory: tuple


@dataclass(eq=False)
class EmpiricalPmf:
    """Latency histogram over a fixed trial count, undelivered kept separate."""

    counts: np.ndarray
    trials: int
    undelivered: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if int(self.counts.sum()) + self.undelivered != self.trials:
            raise ValueError("counts plus undelivered must equal the trial count")

    @classmethod
    def from_latencies(cls, latencies, trials):
        """latencies: integer array with -1 marking undelivered trials."""
        latencies = np.asarray(latencies)
        delivered = latencies[latencies >= 0]
        counts = np.bincount(delivered) if delivered.size else np.zeros(0, dtype=np.int64)
        return cls(counts, trials, int(trials - delivered.size))

    def fraction(self, latency):
        if 0 <= latency < len(self.counts):
            return self.counts[latency] / self.trials
        return 0.0

    def delivered(self):
        return self.trials - self.undelivered

    def mean(self):
        d = self.delivered()
        if d == 0:
            raise ValueError("no delivered trials")
        values = np.arange(len(self.counts))
        return float((values * self.counts).sum() / d)

    def variance(self):
        d = self.delivered()
        if d == 0:
            raise ValueError("no delivered trials")
        values = np.arange(len(self.counts))
        mean = (values * self.counts).sum() / d
        return float((((values - mean) ** 2) * self.counts).sum() / d)

    def stderr_mean(self):
        d = self.delivered()
        if d < 2:
            raise ValueError("need at least two delivered trials")
        return math.sqrt(self.variance() / d)

    def nonzero_items(self):
        return [(int(v), int(c)) for v, c in enumerate(self.counts) if c]

    def total_variation(self, pmf: LatencyPmf):
        """TV distance to an analytic PMF, comparing the shared integer support
        plus one tail bucket (undelivered vs. analytic mass past the histogram)."""
        top = len(self.counts)
        diff = 0.0
        analytic_tail = pmf.truncation_mass
        for latency, mass in zip(pmf.support(), pmf.masses):
            if latency < top:
                diff += abs(self.fraction(latency) - mass)
            else:
                analytic_tail += mass
        for latency in range(min(top, pmf.offset)):
            diff += self.fraction(latency)
        for latency in range(pmf.offset + len(pmf.masses), top):
            diff += self.fraction(latency)
        diff += abs(self.undelivered / self.trials - analytic_tail)
        return 0.5 * diff


def default_horizon(n, p):
    """Default trial cap: 20 (n-1) / p slots."""
    if p <= 0.0:
        raise ValueError("p must be positive")
    return math.ceil(20 * (n - 1) / p)


# --- single-trial replays on a materialized sequence -------------------------


def _union_distances(tgs, dest):
    """Hop distance to dest in the union of all slots (used as a progress rank)."""
    adj = {v: set() for v in tgs.node_ids}
    for g in tgs:
        for u, v in g.edges:
            adj[u].add(v)
            adj[v].add(u)
    dist = {dest: 0}
    queue = deque([dest])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _union_path(tgs, source, dest):
    dist = _union_distances(tgs, dest)
    if source not in dist:
        raise ValueError(f"{dest!r} is not connected to {source!r} in the slot union")
    path = [source]
    adj = {v: set() for v in tgs.node_ids}
    for g in tgs:
        for u, v in g.edges:
            adj[u].add(v)
            adj[v].add(u)
    while path[-1] != dest:
        cur = path[-1]
        path.append(min((w for w in adj[cur] if dist[w] == dist[cur] - 1)))
    return path


def replay_soa(tgs, source, dest, next_hop=None):
    """Replay store-or-advance forwarding over one sequence.

    With no policy the message follows a fixed shortest path of the slot
    union, waiting at each hop for its edge.  A callable policy
    next_hop(node, on_neighbors) may return the neighbor to move to, or
    None to wait.
    """
    if source == dest:
        return TrialResult(0, ((source, 0),))
    if next_hop is None:
        path = _union_path(tgs, source, dest)
        hops = {path[i]: path[i + 1] for i in range(len(path) - 1)}

        def next_hop(u, on_neighbors):
            want = hops[u]
            return want if want in on_neighbors else None

    cur = source
    trajectory = [(source, 0)]
    for g in tgs:
        on_neighbors = frozenset(
            v if u == cur else u for u, v in g.edges if cur in (u, v)
        )
        move = next_hop(cur, on_neighbors)
        if move is not None:
            if move not in on_neighbors:
                raise ValueError(f"policy chose {move!r}, not an up neighbor of {cur!r}")
            cur = move
        trajectory.append((cur, g.time))
        if cur == dest:
            return TrialResult(g.time, tuple(trajectory))
    return TrialResult(None, tuple(trajectory))


def replay_cut(tgs, source, dest, rank=None):
    """Replay cut-through forwarding over one sequence.

    Each slot the message jumps, for free, to the best node of its current
    component (lowest rank, ties by id; default rank is hop distance to
    dest in the slot union); if dest is in the component the trial ends at
    latency slot-1.  Otherwise the slot is spent waiting.
    """
    if source == dest:
        return TrialResult(0, ((source, 0),))
    if rank is None:
        dist = _union_distances(tgs, dest)
        far = len(tgs.node_ids) + 1
        rank = {v: dist.get(v, far) for v in tgs.node_ids}
    cur = source
    trajectory = [(source, 0)]
    for g in tgs:
        comp = {cur}
        adj = {}
        for u, v in g.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        queue = deque([cur])
        while queue:
            x = queue.popleft()
            for y in adj.get(x, ()):
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        if dest in comp:
            trajectory.append((dest, g.time))
            return TrialResult(g.time - 1, tuple(trajectory))
        cur = min(comp, key=lambda v: (rank[v], v))
        trajectory.append((cur, g.time))
    return TrialResult(None, tuple(trajectory))


# --- vectorized engines -------------------------------------------------------


def _block_streams(seed, trials):
    for block, start in enumerate(range(0, trials, BLOCK_TRIALS)):
        size = min(BLOCK_TRIALS, trials - start)
        yield np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,))), size


def _trial_stream(seed, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _path_replay_block(model, n_edges, metric, horizon, rng, size):
    """Replay `size` trials along a fixed edge path; returns latencies (-1 undelivered)."""
    er = isinstance(model, ErParams)
    if er:
        states = rng.random((size, n_edges)) < model.p
    else:
        states = rng.random((size, n_edges)) < model.p0
    pos = np.zeros(size, dtype=np.int64)
    orig = np.arange(size)
    latency = np.full(size, -1, dtype=np.int64)
    t = 0
    while orig.size and t < horizon:
        t += 1
        if t > 1:
            u = rng.random(states.shape)
            if er:
                states = u < model.p
            else:
                states = np.where(states, u >= model.q, u < model.p)
        if metric == "soa":
            on = states[np.arange(orig.size), pos]
            pos += on
            done = pos == n_edges
            latency[orig[done]] = t
        else:
            rows = np.arange(orig.size)
            while rows.size:
                on = states[rows, pos[rows]]
                moved = rows[on]
                pos[moved] += 1
                at_dest = pos[moved] == n_edges
                latency[orig[moved[at_dest]]] = t - 1
                rows = moved[~at_dest]
            done = pos == n_edges
        keep = ~done
        orig, pos, states = orig[keep], pos[keep], states[keep]
    return latency


def _run_path_trials(model, n_edges, metric, horizon, trials, seed):
    parts = []
    for rng, size in _block_streams(seed, trials):
        parts.append(_path_replay_block(model, n_edges, metric, horizon, rng, size))
    return EmpiricalPmf.from_latencies(np.concatenate(parts), trials)


def _adaptive_replay_block(accept_idx, n_ids, source_idx, dest_idx, p, horizon, rng, size):
    """Replay trials that, each slot, move to the first currently-up neighbor in
    the node's acceptance list (or wait).  Independent-churn model only;
    nodes are pre-mapped to integer indices and iterated in index order."""
    pos = np.full(size, source_idx, dtype=np.int64)
    orig = np.arange(size)
    latency = np.full(size, -1, dtype=np.int64)
    t = 0
    while orig.size and t < horizon:
        t += 1
        new_pos = pos.copy()
        for u in range(n_ids):
            cand = accept_idx[u]
            if cand is None or not cand.size:
                continue
            rows = np.nonzero(pos == u)[0]
            if not rows.size:
                continue
            on = rng.random((rows.size, cand.size)) < p
            any_on = on.any(axis=1)
            first = on.argmax(axis=1)
            new_pos[rows[any_on]] = cand[first[any_on]]
        pos = new_pos
        done = pos == dest_idx
        latency[orig[done]] = t
        keep = ~done
        orig, pos = orig[keep], pos[keep]
    return latency


def _simulate_soa_policy_loop(model, gu, source, dest, horizon, trials, seed, next_hop):
    """Per-trial python replay with a callable policy (any edge model)."""
    sampler = sample_er_tgs if isinstance(model, ErParams) else sample_markov_tgs
    latencies = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        tgs = _sample_with_stream(sampler, gu, model, horizon, seed, trial)
        result = replay_soa(tgs, source, dest, next_hop=next_hop)
        latencies[trial] = -1 if result.latency is None else result.latency
    return EmpiricalPmf.from_latencies(latencies, trials)


def _sample_with_stream(sampler, gu, model, horizon, seed, trial):
    # Re-seed the library samplers through a per-trial child sequence.
    child = np.random.SeedSequence(seed, spawn_key=(trial,))
    return sampler(gu, model, horizon, child)


def _validate_endpoints(gu, source, dest):
    if source not in gu.nodes or dest not in gu.nodes:
        raise ValueError(f"unknown node {source!r} or {dest!r}")


def simulate_soa(model, gu, source, dest, horizon=None, trials=10_000, seed=0, next_hop=None):
    """Empirical store-or-advance latency distribution.

    next_hop=None forwards along a fixed BFS shortest path of the
    candidate graph (on a line: hop by hop toward dest).  A dict
    {node: ordered acceptance tuple} replays the adaptive policy "move to
    the first currently-up listed neighbor" (independent-churn model
    only); a callable(node, on_neighbors) is replayed per trial.
    """
    _validate_endpoints(gu, source, dest)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if source == dest:
        return EmpiricalPmf(np.array([trials]), trials, 0)
    if horizon is None:
        horizon = default_horizon(len(gu.nodes), model.p)
    if next_hop is None:
        path = shortest_path(gu, source, dest)
        if path is None:
            raise ValueError(f"{dest!r} is unreachable from {source!r} in the candidate graph")
        return _run_path_trials(model, len(path) - 1, "soa", horizon, trials, seed)
    if isinstance(next_hop, dict):
        if not isinstance(model, ErParams):
            raise ValueError("adaptive acceptance lists assume the independent-churn model")
        order = sorted(gu.nodes)
        index = {v: i for i, v in enumerate(order)}
        accept_idx = [None] * len(order)
        for u, cand in next_hop.items():
            accept_idx[index[u]] = np.array([index[v] for v in cand], dtype=np.int64)
        parts = []
        for rng, size in _block_streams(seed, trials):
            parts.append(
                _adaptive_replay_block(
                    accept_idx, len(order), index[source], index[dest], model.p, horizon, rng, size
                )
            )
        return EmpiricalPmf.from_latencies(np.concatenate(parts), trials)
    if callable(next_hop):
        return _simulate_soa_policy_loop(model, gu, source, dest, horizon, trials, seed, next_hop)
    raise TypeError("next_hop must be None, a dict of acceptance tuples, or a callable")


def simulate_cut(model, gu, source, dest, horizon=None, trials=10_000, seed=0, rank=None):
    """Empirical cut-through latency distribution.

    On a line-shaped candidate graph the message jumps to the farthest node
    toward dest each slot (vectorized); on general graphs it jumps to the
    component node of minimum rank (default: hop distance to dest).
    """
    _validate_endpoints(gu, source, dest)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if source == dest:
        return EmpiricalPmf(np.array([trials]), trials, 0)
    if horizon is None:
        horizon = default_horizon(len(gu.nodes), model.p)
    if shortest_path(gu, source, dest) is None:
        raise ValueError(f"{dest!r} is unreachable from {source!r} in the candidate graph")
    if gu.name == "line" and rank is None:
        return _run_path_trials(model, abs(dest - source), "cut", horizon, trials, seed)
    return _simulate_cut_loop(model, gu, source, dest, horizon, trials, seed, rank)


def _simulate_cut_loop(model, gu, source, dest, horizon, trials, seed, rank):
    if rank is None:
        dist = _bfs_distances(gu, dest)
        far = len(gu.nodes) + 1
        rank = {v: dist.get(v, far) for v in gu.nodes}
    er = isinstance(model, ErParams)
    edges = gu.edges
    latencies = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        rng = _trial_stream(seed, trial)
        if er:
            states = rng.random(len(edges)) < model.p
        else:
            states = rng.random(len(edges)) < model.p0
        cur = source
        lat = -1
        for t in range(1, horizon + 1):
            if t > 1:
                u = rng.random(len(edges))
                if er:
                    states = u < model.p
                else:
                    states = np.where(states, u >= model.q, u < model.p)
            comp = _component_of(gu.nodes, edges, states, cur)
            if dest in comp:
                lat = t - 1
                break
            cur = min(comp, key=lambda v: (rank[v], v))
        latencies[trial] = lat
    return EmpiricalPmf.from_latencies(latencies, trials)


def _bfs_distances(gu, dest):
    nbr = gu.neighbor_map()
    dist = {dest: 0}
    queue = deque([dest])
    while queue:
        x = queue.popleft()
        for y in nbr[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _component_of(nodes, edges, states, start):
    adj = {}
    for e, on in zip(edges, states):
        if on:
            u, v = e
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    comp = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, ()):
            if y not in comp:
                comp.add(y)
                queue.append(y)
    return comp


# --- reachable-pairs curves ---------------------------------------------------


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def pair_fraction(self):
        n = len(self.parent)
        roots = {}
        for x in range(n):
            r = self.find(x)
            roots[r] = roots.get(r, 0) + 1
        hits = sum(c * (c - 1) for c in roots.values())
        return hits / (n * (n - 1))


def _closure_apply(reach, comp_masks):
    for comp in comp_masks:
        for i, r in enumerate(reach):
            if r & comp:
                reach[i] = r | comp


def _edge_component_masks(n, on_edge_indices, edge_list):
    adj = [[] for _ in range(n)]
    touched = set()
    for idx in on_edge_indices:
        u, v = edge_list[idx]
        adj[u].append(v)
        adj[v].append(u)
        touched.add(u)
        touched.add(v)
    masks = []
    seen = set()
    for start in touched:
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
            mask |= 1 << x
        masks.append(mask)
    return masks


def _reach_fraction(reach):
    n = len(reach)
    hits = sum(r.bit_count() - 1 for r in reach)
    return hits / (n * (n - 1))


def reachable_pairs_samples(model, gu, horizon_grid, trials, seed, ms=()):
    """Per-trial reachable-pair fractions on shared samples.

    Returns {"stacked": M, "smashed": M, ("msmg", m): M ...} where M is a
    (trials x grid) array; row i of every matrix is computed from the same
    sampled sequence, so stacked <= coarsened <= smashed holds per sample.
    Node ids must be 0..n-1.  Grid entries are horizons; a coarsened column
    reflects floor(T/m) complete blocks.
    """
    grid = list(horizon_grid)
    if any(t < 0 for t in grid):
        raise ValueError("horizons must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = len(gu.nodes)
    if set(gu.nodes) != set(range(n)):
        raise ValueError("reachable-pairs sampling expects node ids 0..n-1")
    for m in ms:
        if not isinstance(m, int) or m < 1:
            raise ValueError("block sizes must be positive integers")
    t_max = max(grid, default=0)
    er = isinstance(model, ErParams)
    edge_list = list(gu.edges)
    n_edges = len(edge_list)
    out = {"stacked": np.zeros((trials, len(grid))), "smashed": np.zeros((trials, len(grid)))}
    for m in ms:
        out[("msmg", m)] = np.zeros((trials, len(grid)))
    grid_by_t = {}
    for j, t in enumerate(grid):
        grid_by_t.setdefault(t, []).append(j)
    for trial in range(trials):
        rng = _trial_stream(seed, trial)
        reach = [1 << i for i in range(n)]
        uf = _UnionFind(n)
        block_reach = {m: [1 << i for i in range(n)] for m in ms}
        block_edges = {m: set() for m in ms}
        states = None
        for j in grid_by_t.get(0, ()):
            out["stacked"][trial, j] = 0.0
            out["smashed"][trial, j] = 0.0
            for m in ms:
                out[("msmg", m)][trial, j] = 0.0
        for t in range(1, t_max + 1):
            if er:
                states = rng.random(n_edges) < model.p
            elif states is None:
                states = rng.random(n_edges) < model.p0
            else:
                u = rng.random(n_edges)
                states = np.where(states, u >= model.q, u < model.p)
            on_idx = np.nonzero(states)[0]
            comp_masks = _edge_component_masks(n, on_idx, edge_list)
            _closure_apply(reach, comp_masks)
            for idx in on_idx:
                uf.union(*edge_list[idx])
            for m in ms:
                block_edges[m].update(int(i) for i in on_idx)
                if t % m == 0:
                    masks = _edge_component_masks(n, sorted(block_edges[m]), edge_list)
                    _closure_apply(block_reach[m], masks)
                    block_edges[m].clear()
            for j in grid_by_t.get(t, ()):
                out["stacked"][trial, j] = _reach_fraction(reach)
                out["smashed"][trial, j] = uf.pair_fraction()
                for m in ms:
                    out[("msmg", m)][trial, j] = _reach_fraction(block_reach[m])
    return out


def empirical_reachable_pairs(model, gu, horizon_grid, trials, seed, representation="stacked"):
    """Mean fraction of journey-reachable ordered pairs per horizon, with the
    standard error of the mean.  representation: 'stacked' or 'smashed'."""
    if representation not in ("stacked", "smashed"):
        raise ValueError("representation must be 'stacked' or 'smashed'")
    samples = reachable_pairs_samples(model, gu, horizon_grid, trials, seed)[representation]
    rows = []
    for j, t in enumerate(horizon_grid):
        col = samples[:, j]
        mean = float(col.mean())
        se = float(col.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        rows.append((t, mean, se))
    return rows
