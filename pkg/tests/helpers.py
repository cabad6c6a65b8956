"""Shared fixtures-by-hand: random instances and reusable invariant checks.

The random-instance checks double as the property suite: module tests call
them with their documented sizes, and the acceptance runner re-executes the
key ones under a single fixed seed.
"""

import numpy as np

from fastmix.chains import ReversibleChain, TransitionGraph, validate_chain
from fastmix.spectral import rayleigh_quotient, spectrum
from fastmix.upper_bounds import congestion, shortest_path_system


def random_connected_graph(rng, n, extra_edge_prob=0.4, uniform_pi=False):
    """Random spanning tree plus random extra edges; optionally random pi."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        attach = order[rng.integers(0, k)]
        edges.add((min(order[k], attach), max(order[k], attach)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    if uniform_pi:
        pi = None
    else:
        pi = rng.uniform(0.2, 1.0, size=n)
        pi = pi / pi.sum()
    return TransitionGraph(n, sorted(edges), pi)


def random_valid_chain(rng, graph):
    """Random symmetric flows scaled inside every node budget."""
    m = len(graph.edges)
    flows = rng.uniform(0.2, 1.0, size=m)
    load = np.zeros(graph.n)
    for k, (i, j) in enumerate(graph.edges):
        load[i] += flows[k]
        load[j] += flows[k]
    scale = min(graph.pi[i] / load[i] for i in range(graph.n))
    flows *= scale * rng.uniform(0.4, 0.98)
    P = np.zeros((graph.n, graph.n))
    for k, (i, j) in enumerate(graph.edges):
        P[i, j] = flows[k] / graph.pi[i]
        P[j, i] = flows[k] / graph.pi[j]
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    chain = ReversibleChain(graph, P)
    assert validate_chain(chain) == []
    return chain


def check_rayleigh_dominates_gap(seed=0, chains=200, functions=20, max_n=8):
    """rayleigh_quotient(chain, g) >= 1 - lambda2 - 1e-9 on random input."""
    rng = np.random.default_rng(seed)
    for _ in range(chains):
        graph = random_connected_graph(rng, int(rng.integers(2, max_n + 1)))
        chain = random_valid_chain(rng, graph)
        gap = 1.0 - spectrum(chain).lambda2
        for _ in range(functions):
            g = rng.normal(size=graph.n)
            if np.allclose(g, g[0]):
                continue
            assert rayleigh_quotient(chain, g) >= gap - 1e-9


def check_congestion_soundness(seed=0, cases=50, max_n=8):
    """tau2(chain) <= rho_bar(chain, shortest paths) on random valid chains."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        graph = random_connected_graph(rng, int(rng.integers(2, max_n + 1)))
        chain = random_valid_chain(rng, graph)
        tau2 = spectrum(chain).relaxation_time
        rho = congestion(chain, shortest_path_system(graph)).rho_bar
        assert tau2 <= rho + 1e-9
