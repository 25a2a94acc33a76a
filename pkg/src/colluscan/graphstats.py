"""Channel co-subscriber graph and small-world statistics.

Channels are nodes; an undirected simple edge joins two channels sharing
at least one subscriber. Statistics (average degree, density, diameter,
average path length, clustering) are computed over the giant component
with plain BFS, and compared against uniform G(n, m) random graphs with
the same node and edge counts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .records import SubscriptionEdge


@dataclass
class ChannelGraph:
    nodes: list
    adjacency: dict

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    def edges(self):
        for a in self.nodes:
            for b in self.adjacency[a]:
                if a < b:
                    yield (a, b)


@dataclass(frozen=True)
class NetworkStats:
    n_nodes: int
    n_edges: int
    average_degree: float
    diameter: int
    average_path_length: float
    density: float
    average_clustering: float

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes, "n_edges": self.n_edges,
            "average_degree": self.average_degree, "diameter": self.diameter,
            "average_path_length": self.average_path_length,
            "density": self.density,
            "average_clustering": self.average_clustering,
        }


def graph_from_edges(edges) -> ChannelGraph:
    """Build a simple graph from explicit node pairs (no loops, no multi-edges)."""
    adjacency: dict = {}
    for a, b in edges:
        if a == b:
            continue
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    nodes = sorted(adjacency)
    return ChannelGraph(nodes=nodes, adjacency=adjacency)


def build_channel_graph(subscriptions: list[SubscriptionEdge],
                        min_shared: int = 1) -> ChannelGraph:
    """Connect channels that share at least ``min_shared`` subscribers."""
    subscribers: dict = {}
    for edge in subscriptions:
        subscribers.setdefault(edge.channel_id, set()).add(edge.subscriber_id)
    channels = sorted(subscribers)
    adjacency: dict = {c: set() for c in channels}
    by_subscriber: dict = {}
    for channel, subs in subscribers.items():
        for s in subs:
            by_subscriber.setdefault(s, []).append(channel)
    pair_counts: dict = {}
    for group in by_subscriber.values():
        group = sorted(group)
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                key = (group[i], group[j])
                pair_counts[key] = pair_counts.get(key, 0) + 1
    for (a, b), count in pair_counts.items():
        if count >= min_shared:
            adjacency[a].add(b)
            adjacency[b].add(a)
    return ChannelGraph(nodes=channels, adjacency=adjacency)


def connected_components(graph: ChannelGraph) -> list[list]:
    seen: set = set()
    components = []
    for start in graph.nodes:
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        members = []
        while queue:
            node = queue.popleft()
            members.append(node)
            for nb in graph.adjacency[node]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        components.append(sorted(members))
    return components


def giant_component(graph: ChannelGraph) -> ChannelGraph:
    """Largest connected component; ties go to the smallest minimum node id."""
    if not graph.nodes:
        raise ValueError("empty graph has no giant component")
    components = connected_components(graph)
    components.sort(key=lambda c: (-len(c), min(c)))
    members = set(components[0])
    adjacency = {n: graph.adjacency[n] & members for n in components[0]}
    return ChannelGraph(nodes=components[0], adjacency=adjacency)


def _bfs_lengths(graph: ChannelGraph, start) -> dict:
    lengths = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nb in graph.adjacency[node]:
            if nb not in lengths:
                lengths[nb] = lengths[node] + 1
                queue.append(nb)
    return lengths


def local_clustering(graph: ChannelGraph, node) -> float:
    neighbors = list(graph.adjacency[node])
    k = len(neighbors)
    if k < 2:
        return 0.0
    links = 0
    for i in range(k):
        for j in range(i + 1, k):
            if neighbors[j] in graph.adjacency[neighbors[i]]:
                links += 1
    return 2.0 * links / (k * (k - 1))


def network_stats(graph: ChannelGraph) -> NetworkStats:
    """Statistics over a connected graph (pass the giant component)."""
    n = graph.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    m = graph.n_edges
    eccentricities = []
    total_paths, n_pairs = 0, 0
    for node in graph.nodes:
        lengths = _bfs_lengths(graph, node)
        if len(lengths) != n:
            raise ValueError(
                "graph is disconnected; compute stats on the giant component")
        if n > 1:
            vals = [d for other, d in lengths.items() if other != node]
            eccentricities.append(max(vals))
            total_paths += sum(vals)
            n_pairs += len(vals)
    diameter = max(eccentricities) if eccentricities else 0
    apl = total_paths / n_pairs if n_pairs else 0.0
    density = 2.0 * m / (n * (n - 1)) if n > 1 else 0.0
    clustering = float(np.mean([local_clustering(graph, v) for v in graph.nodes]))
    return NetworkStats(
        n_nodes=n, n_edges=m, average_degree=2.0 * m / n, diameter=diameter,
        average_path_length=apl, density=density,
        average_clustering=clustering,
    )


def sample_gnm(n: int, m: int, rng: np.random.Generator) -> ChannelGraph:
    """Uniform simple graph with n nodes and exactly m distinct edges."""
    max_edges = n * (n - 1) // 2
    if m > max_edges:
        raise ValueError(f"cannot place {m} edges on {n} nodes")
    chosen: set = set()
    while len(chosen) < m:
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        if a == b:
            continue
        chosen.add((min(a, b), max(a, b)))
    adjacency: dict = {i: set() for i in range(n)}
    for a, b in chosen:
        adjacency[a].add(b)
        adjacency[b].add(a)
    return ChannelGraph(nodes=list(range(n)), adjacency=adjacency)


def expected_gnm_clustering(n: int, m: int) -> float:
    """Edge density 2m/(n(n-1)): the analytic clustering of a G(n, m) graph."""
    return 2.0 * m / (n * (n - 1))


def random_graph_baseline(n: int, m: int, trials: int, seed: int) -> dict:
    """Mean and standard deviation of each statistic over G(n, m) samples.

    Path statistics are computed on each sample's giant component; the
    clustering average runs over all n nodes as in the observed graph.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(trials):
        g = sample_gnm(n, m, rng)
        giant = giant_component(g)
        giant_stats = network_stats(giant)
        clustering = float(np.mean([local_clustering(g, v) for v in g.nodes]))
        rows.append({
            "n_nodes": n, "n_edges": m,
            "average_degree": 2.0 * m / n,
            "diameter": giant_stats.diameter,
            "average_path_length": giant_stats.average_path_length,
            "density": expected_gnm_clustering(n, m),
            "average_clustering": clustering,
            "giant_component_nodes": giant.n_nodes,
        })
    out = {}
    for key in rows[0]:
        vals = np.array([r[key] for r in rows], dtype=float)
        out[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return out


def export_edge_list(graph: ChannelGraph, path) -> None:
    """Write one "id_a id_b" line per undirected edge."""
    from pathlib import Path
    lines = [f"{a} {b}" for a, b in sorted(graph.edges())]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")
