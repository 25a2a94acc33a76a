#!/usr/bin/env python3
"""Channel co-subscriber graph analytics with a G(n, m) baseline.

Builds the graph from a synthetic corpus, reports giant-component
statistics, and contrasts the clustering coefficient against same-size
uniform random graphs (the small-world signature).
"""

import argparse
import json

from colluscan.graphstats import (build_channel_graph, giant_component,
                                  network_stats, random_graph_baseline)
from colluscan.synth import SyntheticConfig, generate_synthetic_corpus


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-collusive", type=int, default=300)
    parser.add_argument("--n-organic", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=30)
    args = parser.parse_args()

    corpus = generate_synthetic_corpus(SyntheticConfig(
        n_collusive=args.n_collusive, n_organic=args.n_organic,
        seed=args.seed))
    graph = build_channel_graph(corpus.subscriptions)
    giant = giant_component(graph)
    stats = network_stats(giant)

    print(f"full graph: {graph.n_nodes} nodes, {graph.n_edges} edges")
    print(f"giant component share: {giant.n_nodes / graph.n_nodes:.2%}")
    print("observed giant component:")
    print(json.dumps(stats.as_dict(), indent=2))

    baseline = random_graph_baseline(giant.n_nodes, giant.n_edges,
                                     trials=args.trials, seed=args.seed)
    obs = stats.average_clustering
    rand = baseline["average_clustering"]["mean"]
    print(f"\nclustering observed={obs:.4f} random={rand:.4f} "
          f"ratio={obs / rand if rand else float('inf'):.1f}")
    print(f"APL observed={stats.average_path_length:.2f} "
          f"random={baseline['average_path_length']['mean']:.2f}")
    print("\nsmall-world signature: comparable path length, "
          "clustering well above the random baseline"
          if obs > 2 * rand else "\nno strong small-world signature here")


if __name__ == "__main__":
    main()
