"""Numerical oracle for the fastest-mixing problem on small instances.

Minimizes the second eigenvalue over reversible chains supported on the
graph by projected subgradient descent in the symmetric edge-flow variables
Q(i,j) = pi(i)P(i,j): reversibility is then plain symmetry and the feasible
set is the box {Q >= 0, node budgets sum_j Q(i,j) <= pi(i)}.  A brute-force
grid oracle over the same variables is provided for cross-checking on
instances with very few edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chains import (ReversibleChain, chain_from_flows, max_degree_chain,
                     saturate_flows, symmetric_walk, validate_chain)
from .spectral import spectrum

DEGENERACY_TOL = 1e-12
GRID_MAX_EDGES = 4
GRID_MAX_RESOLUTION = 200
GRID_MAX_POINTS = 20_000_000
_EIG_CHUNK = 200_000


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    step_constant: float = 0.1       # step at iteration t is c / sqrt(t)
    projection_tol: float = 1e-10
    seed: int = 0                    # reserved; the descent itself is deterministic

    def __post_init__(self):
        if self.max_iters < 1 or self.step_constant <= 0 or self.projection_tol <= 0:
            raise ValueError("solver parameters must be positive")


@dataclass(frozen=True)
class SolverResult:
    chain: ReversibleChain
    lambda2_star: float
    tau2_star: float
    iterations: int
    certificate_gap: float
    history: list = field(repr=False, default_factory=list)

    def to_json_dict(self):
        return {"lambda2_star": self.lambda2_star, "tau2_star": self.tau2_star,
                "iterations": self.iterations, "certificate_gap": self.certificate_gap}


def _symmetrized_from_flows(q, pi, sqrt_pi, ei, ej, n):
    S = np.zeros((n, n))
    S[ei, ej] = q / (sqrt_pi[ei] * sqrt_pi[ej])
    S += S.T
    row_off = np.zeros(n)
    np.add.at(row_off, ei, q)
    np.add.at(row_off, ej, q)
    np.fill_diagonal(S, 1.0 - row_off / pi)
    return S


def _second_pair(w, V):
    """Second-largest eigenvalue and a deterministic eigenvector for it.

    ``np.linalg.eigh`` sorts ascending; near-degenerate columns are broken
    by the lexicographically largest absolute vector (any of them is a valid
    subgradient generator).
    """
    lam2 = w[-2]
    cand = [k for k in range(len(w) - 1) if abs(w[k] - lam2) <= DEGENERACY_TOL]
    best = cand[0]
    for k in cand[1:]:
        a, b = np.abs(V[:, k]), np.abs(V[:, best])
        for x, y in zip(a, b):
            if x != y:
                if x > y:
                    best = k
                break
    return lam2, V[:, best]


def _project_flows(q, pi, incident, tol, max_rounds=500):
    """Alternating projections onto {Q >= 0} and the node budget half-spaces."""
    n = len(pi)
    for _ in range(max_rounds):
        np.maximum(q, 0.0, out=q)
        worst = 0.0
        for i in range(n):
            idx = incident[i]
            excess = q[idx].sum() - pi[i]
            if excess > tol:
                q[idx] -= excess / len(idx)
                worst = max(worst, excess)
        if worst <= tol and q.min() >= -tol:
            break
    np.maximum(q, 0.0, out=q)
    return q


def _exact_feasible(q, pi, incident):
    """Scale stars over budget back; a single ordered pass only shrinks sums."""
    np.maximum(q, 0.0, out=q)
    for i in range(len(pi)):
        idx = incident[i]
        total = q[idx].sum()
        if total > pi[i]:
            q[idx] *= pi[i] / total
    return q


def _candidate_flows(graph, best_q):
    """Deterministic finishers compared against the best descent iterate.

    lambda2 is non-increasing in every flow (each Rayleigh quotient is
    linear with a nonpositive flow coefficient), so saturating the iterate
    can only help; the symmetric walk and the congestion-equalized chain
    catch the symmetric instances where those are exactly optimal.
    """
    from .upper_bounds import equalize_congestion, shortest_path_system

    candidates = [saturate_flows(graph, best_q), best_q]
    degrees = {graph.degree(i) for i in range(graph.n)}
    if graph.uniform_pi() and len(degrees) == 1:
        walk = symmetric_walk(graph)
        candidates.append(walk.flows()[[e[0] for e in graph.edges],
                                       [e[1] for e in graph.edges]])
    equalized = equalize_congestion(graph, shortest_path_system(graph))
    candidates.append(equalized.flows()[[e[0] for e in graph.edges],
                                        [e[1] for e in graph.edges]])
    return candidates


def solve_fastest_mixing(graph, config=None):
    """Minimize lambda2 by projected subgradient descent on the flow box.

    The subgradient at Q comes from the second eigenvector u of the
    symmetrized matrix: d lambda2 / d Q(i,j) = -(u_i/sqrt(pi_i) -
    u_j/sqrt(pi_j))^2, so the descent step raises flow where that squared
    mismatch is largest, normalized to unit length, with step c/sqrt(t).
    The best iterate is kept, then compared against a few deterministic
    closed-form candidates (its saturated version, the symmetric walk when
    it is reversible, the congestion-equalized chain), and the winner is
    returned as a feasible, validated chain.
    """
    config = config or SolverConfig()
    n = graph.n
    if n < 2:
        raise ValueError("need at least two states")
    pi = graph.pi
    sqrt_pi = np.sqrt(pi)
    ei = np.array([e[0] for e in graph.edges])
    ej = np.array([e[1] for e in graph.edges])
    incident = [np.array(graph.incident_edges(i)) for i in range(n)]

    q = max_degree_chain(graph).flows()[ei, ej].copy()

    best_lambda = math.inf
    best_q = q.copy()
    last_lambda = math.nan
    history = []
    iterations = 0
    for t in range(1, config.max_iters + 1):
        iterations = t
        S = _symmetrized_from_flows(q, pi, sqrt_pi, ei, ej, n)
        w, V = np.linalg.eigh(S)
        lam2, u = _second_pair(w, V)
        last_lambda = lam2
        if lam2 < best_lambda:
            best_lambda = lam2
            best_q = q.copy()
        history.append(best_lambda)

        direction = (u[ei] / sqrt_pi[ei] - u[ej] / sqrt_pi[ej]) ** 2
        norm = np.linalg.norm(direction)
        if norm <= 1e-15:
            break
        q = q + (config.step_constant / math.sqrt(t)) * direction / norm
        q = _project_flows(q, pi, incident, config.projection_tol)

    best_q = _exact_feasible(best_q, pi, incident)
    winner, winner_lambda = best_q, math.inf
    for candidate in _candidate_flows(graph, best_q):
        S = _symmetrized_from_flows(candidate, pi, sqrt_pi, ei, ej, n)
        lam2 = np.linalg.eigvalsh(S)[-2]
        if lam2 < winner_lambda:
            winner, winner_lambda = candidate, lam2

    chain = chain_from_flows(graph, winner)
    report = validate_chain(chain)
    if report:
        raise RuntimeError("solver produced an infeasible chain: " + report[0])
    summary = spectrum(chain)
    return SolverResult(chain=chain,
                        lambda2_star=summary.lambda2,
                        tau2_star=summary.relaxation_time,
                        iterations=iterations,
                        certificate_gap=abs(best_lambda - last_lambda),
                        history=history)


@dataclass(frozen=True)
class OracleResult:
    chain: ReversibleChain
    lambda2: float
    spacing: float


def grid_oracle(graph, resolution):
    """Exhaustive grid search over the free edge flows.

    Only meant for instances with at most four non-loop edges; every grid
    point respecting the node budgets is evaluated with a batched
    eigensolver and the minimizer is returned.
    """
    m = len(graph.edges)
    if m > GRID_MAX_EDGES:
        raise ValueError(f"{m} free edge flows exceed the grid oracle cap of {GRID_MAX_EDGES}")
    if not (1 <= resolution <= GRID_MAX_RESOLUTION):
        raise ValueError(f"resolution must be in 1..{GRID_MAX_RESOLUTION}")
    n, pi = graph.n, graph.pi
    sqrt_pi = np.sqrt(pi)
    ei = np.array([e[0] for e in graph.edges])
    ej = np.array([e[1] for e in graph.edges])

    caps = np.minimum(pi[ei], pi[ej])
    axes = [np.linspace(0.0, c, resolution + 1) for c in caps]
    if (resolution + 1) ** m > GRID_MAX_POINTS:
        raise ValueError("grid too fine; lower the resolution")
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)

    incidence = np.zeros((n, m))
    incidence[ei, np.arange(m)] = 1.0
    incidence[ej, np.arange(m)] = 1.0
    feasible = np.all(points @ incidence.T <= pi + 1e-12, axis=1)
    points = points[feasible]

    best_lambda = math.inf
    best_q = None
    scale = 1.0 / (sqrt_pi[ei] * sqrt_pi[ej])
    for start in range(0, len(points), _EIG_CHUNK):
        block = points[start:start + _EIG_CHUNK]
        S = np.zeros((len(block), n, n))
        S[:, ei, ej] = block * scale
        S[:, ej, ei] = block * scale
        row_off = block @ incidence.T
        diag = 1.0 - row_off / pi
        S[:, np.arange(n), np.arange(n)] = diag
        lams = np.linalg.eigvalsh(S)[:, -2]
        k = int(np.argmin(lams))
        if lams[k] < best_lambda:
            best_lambda = float(lams[k])
            best_q = block[k].copy()

    chain = chain_from_flows(graph, best_q)
    return OracleResult(chain=chain, lambda2=best_lambda,
                        spacing=float(caps.max() / resolution))
