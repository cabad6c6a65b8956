"""Glauber dynamics with site-update rates for pairwise spin systems.

The stationary law is the Gibbs measure pi(sigma) proportional to the
product of per-edge coupling factors.  A move picks a site v with
probability rho(v) and resamples its color from the conditional law K given
the neighbors; the chain lives on the configuration graph whose edges join
configurations differing at a single site.

The Ising specialization (colors -1/+1, couplings exp(beta * a * b)) comes
with the cut-width machinery used to pick good update rates on complete
b-ary trees: per-site congestion bounds B_v grow exponentially in the DFS
node width, so rates proportional to B_v equalize the per-site bounds.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chains import ReversibleChain, TransitionGraph
from .spectral import spectrum

STATE_SPACE_CAP = 2 ** 20
RATE_SUM_TOL = 1e-12


class SpinSystem:
    """Pairwise model: site graph, finite color set, positive couplings.

    ``coupling(v, w, a, b)`` is evaluated with the edge in canonical
    orientation ``v < w``; it must be strictly positive, which keeps the
    Gibbs measure supported on every configuration.
    """

    def __init__(self, n_sites, edges, colors, coupling, beta=None):
        self.n_sites = int(n_sites)
        if self.n_sites < 1:
            raise ValueError("need at least one site")
        seen = set()
        canon = []
        for v, w in edges:
            v, w = int(v), int(w)
            if v == w or not (0 <= v < n_sites and 0 <= w < n_sites):
                raise ValueError(f"bad site edge ({v},{w})")
            key = (min(v, w), max(v, w))
            if key in seen:
                raise ValueError(f"duplicate site edge {key}")
            seen.add(key)
            canon.append(key)
        self.edges = tuple(sorted(canon))
        self.colors = tuple(colors)
        if len(self.colors) < 2:
            raise ValueError("need at least two colors")
        self._coupling = coupling
        self.beta = beta
        nbrs = [[] for _ in range(self.n_sites)]
        for v, w in self.edges:
            nbrs[v].append(w)
            nbrs[w].append(v)
        self.neighbors = tuple(tuple(sorted(a)) for a in nbrs)
        for v, w in self.edges:
            for a in self.colors:
                for b in self.colors:
                    if coupling(v, w, a, b) <= 0.0:
                        raise ValueError(f"coupling on edge ({v},{w}) not positive "
                                         f"at colors ({a},{b})")

    @classmethod
    def ising(cls, n_sites, edges, beta):
        if beta <= 0:
            raise ValueError("need beta > 0")
        return cls(n_sites, edges, colors=(-1, +1),
                   coupling=lambda v, w, a, b: math.exp(beta * a * b), beta=beta)

    @property
    def n_states(self):
        return len(self.colors) ** self.n_sites

    @property
    def max_degree(self):
        return max(len(a) for a in self.neighbors) if self.n_sites else 0

    def edge_factor(self, x, y, color_x, color_y):
        """Coupling of edge {x,y} with colors given per endpoint."""
        if x < y:
            return self._coupling(x, y, color_x, color_y)
        return self._coupling(y, x, color_y, color_x)


# -- configuration enumeration -------------------------------------------


def _check_enumerable(system):
    if system.n_states > STATE_SPACE_CAP:
        raise ValueError(f"state space {system.n_states} exceeds cap {STATE_SPACE_CAP}")


def state_color_indices(system):
    """(n_states, n_sites) matrix: color index of each site, mixed radix.

    Site v contributes the v-th digit of the state index, so for two colors
    the +1 color sits at bit v exactly when bit v of the index is set.
    """
    _check_enumerable(system)
    q = len(system.colors)
    states = np.arange(system.n_states)
    digits = (states[:, None] // q ** np.arange(system.n_sites)[None, :]) % q
    return digits.astype(np.int64)


def configuration_of(system, index):
    """Color tuple of one enumerated configuration."""
    q = len(system.colors)
    out = []
    for _ in range(system.n_sites):
        out.append(system.colors[index % q])
        index //= q
    return tuple(out)


def gibbs_distribution(system):
    """Exact Gibbs probabilities over the enumerated configurations."""
    digits = state_color_indices(system)
    q = len(system.colors)
    log_w = np.zeros(system.n_states)
    for v, w in system.edges:
        table = np.array([[math.log(system.edge_factor(v, w, a, b))
                           for b in system.colors] for a in system.colors])
        log_w += table[digits[:, v], digits[:, w]]
    log_w -= log_w.max()
    weights = np.exp(log_w)
    return weights / weights.sum()


def configuration_graph(system):
    """Transition graph on configurations: single-site moves, Gibbs pi."""
    _check_enumerable(system)
    q = len(system.colors)
    edges = set()
    for m in range(system.n_states):
        for v in range(system.n_sites):
            cur = (m // q ** v) % q
            for c in range(cur + 1, q):
                edges.add((m, m + (c - cur) * q ** v))
    return TransitionGraph(system.n_states, sorted(edges), gibbs_distribution(system))


# -- the dynamics ---------------------------------------------------------


def glauber_kernel(system, sigma, v, a):
    """Heat-bath probability of writing color ``a`` at site ``v``.

    ``prod_{w ~ v} alpha(a, sigma(w))`` over the same product for every
    candidate color; an isolated site resamples uniformly.
    """
    weights = []
    for c in system.colors:
        prod = 1.0
        for w in system.neighbors[v]:
            prod *= system.edge_factor(v, w, c, sigma[w])
        weights.append(prod)
    total = sum(weights)
    return weights[system.colors.index(a)] / total


@dataclass(frozen=True)
class RateVector:
    """Site-selection probabilities."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        object.__setattr__(self, "rho", rho)
        if np.any(rho < 0.0):
            raise ValueError("rates must be nonnegative")
        if abs(rho.sum() - 1.0) > RATE_SUM_TOL:
            raise ValueError(f"rates sum to {rho.sum()!r}, not 1")


def uniform_rates(n_sites):
    return RateVector(np.full(n_sites, 1.0 / n_sites))


def build_glauber_chain(system, rates):
    """Explicit transition matrix of the rated dynamics on the configuration graph.

    P(sigma, sigma_v^a) = rho(v) K(sigma, sigma_v^a) for a != sigma(v); the
    diagonal absorbs the rest.  Output is reversible for the exact Gibbs pi
    by construction (checked numerically by the callers' validators).
    """
    _check_enumerable(system)
    if len(rates.rho) != system.n_sites:
        raise ValueError("one rate per site required")
    q = len(system.colors)
    digits = state_color_indices(system)
    N = system.n_states
    P = np.zeros((N, N))
    kernel_cache = {}
    for m in range(N):
        off = 0.0
        for v in range(system.n_sites):
            if rates.rho[v] == 0.0:
                continue
            profile = tuple(digits[m, w] for w in system.neighbors[v])
            key = (v, profile)
            weights = kernel_cache.get(key)
            if weights is None:
                weights = []
                for c in system.colors:
                    prod = 1.0
                    for w, cw in zip(system.neighbors[v], profile):
                        prod *= system.edge_factor(v, w, c, system.colors[cw])
                    weights.append(prod)
                total = sum(weights)
                weights = [x / total for x in weights]
                kernel_cache[key] = weights
            cur = digits[m, v]
            for c in range(q):
                if c == cur:
                    continue
                target = m + (c - cur) * q ** v
                move = rates.rho[v] * weights[c]
                P[m, target] = move
                off += move
        P[m, m] = 1.0 - off
    return ReversibleChain(configuration_graph(system), P)


def kbar(system):
    """Worst inverse kernel probability over all (configuration, site, color)."""
    _check_enumerable(system)
    digits = state_color_indices(system)
    worst = 0.0
    seen = set()
    for m in range(system.n_states):
        for v in range(system.n_sites):
            profile = tuple(digits[m, w] for w in system.neighbors[v])
            if (v, profile) in seen:
                continue
            seen.add((v, profile))
            weights = []
            for c in system.colors:
                prod = 1.0
                for w, cw in zip(system.neighbors[v], profile):
                    prod *= system.edge_factor(v, w, c, system.colors[cw])
                weights.append(prod)
            total = sum(weights)
            smallest = min(weights) / total
            if smallest <= 0.0:
                return math.inf
            worst = max(worst, 1.0 / smallest)
    return worst


@dataclass(frozen=True)
class RateComparisonReport:
    """Both rate-oblivious inequalities relating uniform and optimized chains."""

    tau2_uniform: float
    kbar: float
    n_sites: int
    tau2_fastest: float
    tau2_rated: float
    bound_via_fastest: float   # kbar * |V| * tau2(fastest)
    bound_via_rated: float     # |V| * tau2(rated)
    ok_fastest: bool
    ok_rated: bool


def check_rate_improvement_limits(system, fastest, rated_chain):
    """Verify the two inequalities capping what tuned rates can buy.

    ``fastest`` is the relaxation time of the unrestricted fastest chain on
    the configuration graph (or a solver result carrying ``tau2_star``);
    ``rated_chain`` is any rated Glauber chain.  Both uniform-chain bounds
    are evaluated numerically and reported with their margins.
    """
    tau_fast = getattr(fastest, "tau2_star", fastest)
    tau_uniform = spectrum(build_glauber_chain(system, uniform_rates(system.n_sites))).relaxation_time
    tau_rated = spectrum(rated_chain).relaxation_time
    kb = kbar(system)
    bound_fast = kb * system.n_sites * tau_fast
    bound_rated = system.n_sites * tau_rated
    return RateComparisonReport(
        tau2_uniform=tau_uniform, kbar=kb, n_sites=system.n_sites,
        tau2_fastest=tau_fast, tau2_rated=tau_rated,
        bound_via_fastest=bound_fast, bound_via_rated=bound_rated,
        ok_fastest=tau_uniform <= bound_fast + 1e-6,
        ok_rated=tau_uniform <= bound_rated + 1e-6)


# -- complete b-ary trees and cut widths ----------------------------------


@dataclass(frozen=True)
class TreeSpec:
    """Complete rooted b-ary tree with ``levels`` levels below the root."""

    branching: int
    levels: int

    def __post_init__(self):
        if self.branching < 2:
            raise ValueError("need branching >= 2")
        if self.levels < 1:
            raise ValueError("need at least one level")

    @property
    def node_count(self):
        b, r = self.branching, self.levels
        return (b ** (r + 1) - 1) // (b - 1)

    @property
    def max_degree(self):
        # internal non-root nodes have b children plus a parent
        return self.branching + 1 if self.levels >= 2 else self.branching

    def site_edges(self):
        return _tree_structure(self.branching, self.levels)["edges"]

    def parents(self):
        return _tree_structure(self.branching, self.levels)["parent"]

    def node_levels(self):
        return _tree_structure(self.branching, self.levels)["level"]

    def child_ranks(self):
        return _tree_structure(self.branching, self.levels)["rank"]

    def children(self):
        return _tree_structure(self.branching, self.levels)["children"]

    def leaves(self):
        level = self.node_levels()
        return [v for v in range(self.node_count) if level[v] == self.levels]


@functools.cache
def _tree_structure(b, r):
    """DFS preorder ids, parent/level/child-rank arrays and edge list."""
    parent, level, rank, edges = [-1], [0], [0], []
    children = [[]]

    def grow(node, node_level):
        for q in range(1, b + 1):
            child = len(parent)
            parent.append(node)
            level.append(node_level + 1)
            rank.append(q)
            children.append([])
            children[node].append(child)
            edges.append((node, child))
            if node_level + 1 < r:
                grow(child, node_level + 1)

    grow(0, 0)
    return {"parent": tuple(parent), "level": tuple(level), "rank": tuple(rank),
            "children": tuple(tuple(c) for c in children), "edges": tuple(edges)}


def node_widths(tree):
    """Per-node cut widths of the DFS ordering, and their maximum.

    The root cuts its b subtree edges; a q-th child at an internal level
    adds b new edges and closes q, and a leaf only closes q.  The maximum
    stays within (b-1) r + 1.
    """
    b, r = tree.branching, tree.levels
    parent, level, rank = tree.parents(), tree.node_levels(), tree.child_ranks()
    widths = np.zeros(tree.node_count, dtype=int)
    widths[0] = b
    for v in range(1, tree.node_count):
        if level[v] < r:
            widths[v] = widths[parent[v]] + b - rank[v]
        else:
            widths[v] = widths[parent[v]] - rank[v]
    return widths, int(widths.max())


def prefix_cut_sizes(n_nodes, edges, order):
    """Edges crossing each ordering prefix; direct count, any graph.

    Entry k is the number of edges with exactly one endpoint among
    ``order[:k+1]``; this is the oracle the tree recursion is checked
    against, and the width source for non-tree site graphs.
    """
    if sorted(order) != list(range(n_nodes)):
        raise ValueError("order must be a permutation of the nodes")
    position = {v: k for k, v in enumerate(order)}
    sizes = []
    for k in range(n_nodes):
        cut = 0
        for v, w in edges:
            if (position[v] <= k) != (position[w] <= k):
                cut += 1
        sizes.append(cut)
    return sizes


# -- per-site congestion bounds and rates ---------------------------------


def _log_expm1(x):
    return math.log(math.expm1(x)) if x < 30.0 else x + math.log1p(-math.exp(-x))


def _logsumexp(values):
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def zeta(b, beta):
    """Level growth factor (e^{4 b beta} - 1)/(e^{4 beta} - 1)."""
    lz = log_zeta(b, beta)
    return math.exp(lz) if lz < 700.0 else math.inf


def log_zeta(b, beta):
    return _log_expm1(4.0 * b * beta) - _log_expm1(4.0 * beta)


def log_site_bounds(n_sites, widths, delta, beta):
    """log B_v = 2 log|V| + (4 width + 2 delta) beta, any site graph."""
    widths = np.asarray(widths, dtype=float)
    return 2.0 * math.log(n_sites) + (4.0 * widths + 2.0 * delta) * beta


@dataclass(frozen=True)
class SiteBoundReport:
    """Per-site congestion bounds for a tree, kept in log space."""

    widths: np.ndarray
    max_width: int
    log_values: np.ndarray
    log_mean: float            # log( sum_v B_v / |V| )
    log_max: float
    log_total: float
    log_total_closed: float    # level recursion in closed form

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def mean(self):
        return math.exp(self.log_mean) if self.log_mean < 700 else math.inf

    @property
    def max_value(self):
        return math.exp(self.log_max) if self.log_max < 700 else math.inf


def site_bounds(tree, beta):
    """B_v for every tree node plus aggregates and the closed-form total.

    The closed form sums the level recursion B^(l) = B^(l-1) zeta(b, beta)
    (with the leaf level damped by e^{-4 b beta}), so it must agree with the
    node-by-node total up to rounding.
    """
    b, r = tree.branching, tree.levels
    widths, max_width = node_widths(tree)
    log_bv = log_site_bounds(tree.node_count, widths, tree.max_degree, beta)
    log_total = _logsumexp(list(log_bv))
    lz = log_zeta(b, beta)
    log_b0 = 2.0 * math.log(tree.node_count) + (4.0 * b + 2.0 * tree.max_degree) * beta
    level_terms = [l * lz for l in range(r)] + [r * lz - 4.0 * b * beta]
    log_total_closed = log_b0 + _logsumexp(level_terms)
    return SiteBoundReport(widths=widths, max_width=max_width,
                           log_values=log_bv,
                           log_mean=log_total - math.log(tree.node_count),
                           log_max=float(log_bv.max()),
                           log_total=log_total,
                           log_total_closed=log_total_closed)


def rates_from_log_bounds(log_bv):
    """Normalize site bounds into rates in log space (a softmax)."""
    log_bv = np.asarray(log_bv, dtype=float)
    shifted = np.exp(log_bv - log_bv.max())
    return RateVector(shifted / shifted.sum())


def optimal_rates(tree, beta):
    """Rates proportional to B_v; these equalize the per-site congestion bounds."""
    return rates_from_log_bounds(site_bounds(tree, beta).log_values)


# -- recursive majority lower bound ---------------------------------------


def recursive_majority(tree, sigma):
    """Bottom-up majority of the leaf spins; internal spins are ignored."""
    if tree.branching % 2 == 0:
        raise ValueError("majority needs odd branching")
    sigma = np.asarray(sigma)
    if sigma.shape != (tree.node_count,):
        raise ValueError("one spin per tree node required")
    if not np.all(np.isin(sigma, (-1, 1))):
        raise ValueError("spins must be -1/+1")
    level = tree.node_levels()
    children = tree.children()
    m = np.array(sigma, dtype=np.int64)
    for v in range(tree.node_count - 1, -1, -1):
        if level[v] < tree.levels:
            m[v] = 1 if sum(m[c] for c in children[v]) > 0 else -1
    return int(m[0])


def _majority_table(tree):
    """recursive_majority over every +-1 configuration, vectorized on bits."""
    n = tree.node_count
    states = np.arange(1 << n)
    spins = np.where((states[:, None] >> np.arange(n)[None, :]) & 1 == 1, 1, -1)
    level = tree.node_levels()
    children = tree.children()
    m = spins.astype(np.int64).copy()
    for v in range(n - 1, -1, -1):
        if level[v] < tree.levels:
            total = sum(m[:, c] for c in children[v])
            m[:, v] = np.where(total > 0, 1, -1)
    return m[:, 0]


@dataclass(frozen=True)
class ExactMajorityStats:
    """Enumerated quantities behind the majority-cut bound (small trees)."""

    pi_S: float
    flip_probability: float    # recursive majority flips when the first leaf flips
    boundary_measure: float    # pi(dS^c): S-side configurations with a cut neighbor
    phi_S: float               # conductance of S under the uniform-rate chain


@dataclass(frozen=True)
class MajorityCutBound:
    """Majority-cut lower bounds on the configuration-graph mixing problem."""

    epsilon: float
    flip_probability_bound: float     # (2 eps + 8 eps^2)^(r-1)
    boundary_measure_bound: float     # (3^r / 2) * flip bound
    lambda2_lower: float              # for the fastest chain, via the cut S
    uniform_lambda2_lower: float      # for the uniform-rate chain, via Phi_S
    vacuous: bool
    exact: Optional[ExactMajorityStats]


def majority_cut_bound(tree, beta, enumerate_cap_levels=2):
    """Lower bounds from the recursive-majority cut S = {m(sigma) = +1}.

    Works for branching 3.  With eps = (1 + e^{2 beta})^{-1}, a fixed-leaf
    flip changes the majority with probability at most
    (2 eps + 8 eps^2)^{r-1}; a union bound over the 3^r leaves and the spin
    flip symmetry (pi(S) = 1/2) then cap the cut boundary, and the
    vertex-expansion bound turns that into lambda2 lower bounds.  For r <= 2
    the same quantities are also enumerated exactly.
    """
    if tree.branching != 3:
        raise ValueError("the majority-cut analysis assumes branching 3")
    r = tree.levels
    eps = 1.0 / (1.0 + math.exp(2.0 * beta))
    z = 2.0 * eps + 8.0 * eps ** 2
    flip_bound = z ** (r - 1)
    boundary_bound = (3.0 ** r / 2.0) * flip_bound
    lambda2_lower = 1.0 - 2.0 * 3.0 ** r * flip_bound
    uniform_lower = 1.0 - 2.0 * flip_bound

    exact = None
    if r <= enumerate_cap_levels:
        # the general constructor also covers the infinite-temperature edge case
        system = SpinSystem(tree.node_count, tree.site_edges(), colors=(-1, +1),
                            coupling=lambda v, w, a, b: math.exp(beta * a * b),
                            beta=beta)
        pi = gibbs_distribution(system)
        majority = _majority_table(tree)
        states = np.arange(1 << tree.node_count)
        in_S = majority == 1
        leaves = tree.leaves()

        first_leaf = leaves[0]
        pivotal = majority != majority[states ^ (1 << first_leaf)]
        flip_probability = float(pi[pivotal].sum())

        on_boundary = np.zeros(len(states), dtype=bool)
        parent = tree.parents()
        phi_sum = 0.0
        spins = np.where((states[:, None] >> np.arange(tree.node_count)[None, :]) & 1 == 1,
                         1, -1)
        for leaf in leaves:
            flipped = states ^ (1 << leaf)
            exits = in_S & (majority[flipped] == -1)
            on_boundary |= exits
            s_parent = spins[:, parent[leaf]]
            new_spin = -spins[:, leaf]
            kernel = np.exp(beta * new_spin * s_parent) / (2.0 * np.cosh(beta * s_parent))
            phi_sum += float((pi[exits] * kernel[exits]).sum()) / tree.node_count
        pi_S = float(pi[in_S].sum())
        exact = ExactMajorityStats(pi_S=pi_S,
                                   flip_probability=flip_probability,
                                   boundary_measure=float(pi[on_boundary].sum()),
                                   phi_S=phi_sum / pi_S)

    return MajorityCutBound(epsilon=eps,
                            flip_probability_bound=flip_bound,
                            boundary_measure_bound=boundary_bound,
                            lambda2_lower=lambda2_lower,
                            uniform_lambda2_lower=uniform_lower,
                            vacuous=lambda2_lower <= -1.0,
                            exact=exact)
