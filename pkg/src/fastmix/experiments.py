"""Benchmark harness: one row of certified bounds per instance.

Graph families get the full sandwich (analytic embedding bound, expansion
bound, solver value, equalized-congestion and Cheeger upper bounds, plus the
max-degree reference chain); Ising trees get the rate-optimization row
(widths, per-site bounds, exact spectra when the state space is small).
Rows violating lower <= solver <= upper abort the run.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import families, glauber, lower_bounds, upper_bounds
from .chains import max_degree_chain
from .solver import SolverConfig, solve_fastest_mixing
from .spectral import spectrum

SANDWICH_SLACK = 1e-6
EXPANSION_ENUM_CAP = 16        # 2^16 subsets is still cheap
EXACT_SPIN_STATE_CAP = 512     # dense spectra beyond this are not worth the wait

GRAPH_COLUMNS = ("family", "params", "lb_embed", "lb_expansion", "tau2_solver",
                 "ub_congestion", "ub_cheeger", "tau2_standard")
ISING_COLUMNS = ("family", "params", "max_width", "log_mean_bound", "log_max_bound",
                 "tau2_majority_lower", "tau2_uniform", "tau2_rated", "prop_ok")


class BoundInversionError(RuntimeError):
    """A certified inequality failed; the emitted table would be wrong."""


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    params: dict
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_path: str | None = None

    def __post_init__(self):
        if self.family not in families.FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")


def _family_embedding(family, params):
    if family == "knkn" and int(params["n"]) >= 3:
        return lower_bounds.make_knkn_embedding(int(params["n"]))
    if family == "cycle":
        return lower_bounds.make_cycle_embedding(int(params["n"]))
    if family == "torus":
        return lower_bounds.make_torus_embedding(int(params["m"]), int(params["d"]))
    if family == "geometric":
        return lower_bounds.make_geometric_embedding(
            int(params["m"]), int(params["k"]), int(params.get("d", 1)))
    return None


def _graph_row(spec, graph):
    embedding = _family_embedding(spec.family, spec.params)
    lb_embed = (lower_bounds.embedding_bound(graph, embedding)
                if embedding is not None else None)

    lb_expansion = ub_cheeger = None
    if graph.n <= EXPANSION_ENUM_CAP:
        lb_expansion = lower_bounds.expansion_lower_bound(graph).value
        ub_cheeger = upper_bounds.cheeger_upper_bound(graph)

    result = solve_fastest_mixing(graph, spec.solver)
    paths = upper_bounds.shortest_path_system(graph)
    equalized = upper_bounds.equalize_congestion(graph, paths)
    ub_congestion = upper_bounds.congestion(equalized, paths).rho_bar
    tau2_standard = spectrum(max_degree_chain(graph)).relaxation_time

    row = {"family": spec.family, "params": dict(spec.params),
           "lb_embed": lb_embed, "lb_expansion": lb_expansion,
           "tau2_solver": result.tau2_star,
           "ub_congestion": ub_congestion, "ub_cheeger": ub_cheeger,
           "tau2_standard": tau2_standard}
    _check_graph_row(row)
    return row


def _check_graph_row(row):
    lowers = [row[k] for k in ("lb_embed", "lb_expansion") if row[k] is not None]
    uppers = [row[k] for k in ("ub_congestion", "ub_cheeger") if row[k] is not None]
    tau = row["tau2_solver"]
    for lb in lowers:
        if lb > tau + SANDWICH_SLACK:
            raise BoundInversionError(
                f"lower bound {lb!r} exceeds solver value {tau!r} on {row['family']} "
                f"{row['params']}")
    for ub in uppers:
        if tau > ub + SANDWICH_SLACK:
            raise BoundInversionError(
                f"solver value {tau!r} exceeds upper bound {ub!r} on {row['family']} "
                f"{row['params']}")


def _ising_row(spec):
    tree, system = families.generate("ising_tree", spec.params)
    beta = float(spec.params["beta"])
    bounds = glauber.site_bounds(tree, beta)

    tau_major = None
    if tree.branching == 3:
        cut = glauber.majority_cut_bound(tree, beta)
        if not cut.vacuous:
            tau_major = 1.0 / (1.0 - cut.lambda2_lower)

    tau_uniform = tau_rated = None
    ok = None
    if system.n_states <= EXACT_SPIN_STATE_CAP:
        uniform = glauber.build_glauber_chain(system, glauber.uniform_rates(system.n_sites))
        rated = glauber.build_glauber_chain(system, glauber.optimal_rates(tree, beta))
        tau_uniform = spectrum(uniform).relaxation_time
        tau_rated = spectrum(rated).relaxation_time
        ok = (tau_uniform <= bounds.max_value + SANDWICH_SLACK
              and tau_rated <= bounds.mean + SANDWICH_SLACK)
        if not ok:
            raise BoundInversionError(
                f"per-site congestion bounds failed on ising_tree {spec.params}")
        if tau_major is not None and tau_major > tau_rated + SANDWICH_SLACK:
            raise BoundInversionError(
                f"majority-cut lower bound exceeds the rated chain on {spec.params}")

    return {"family": spec.family, "params": dict(spec.params),
            "max_width": bounds.max_width,
            "log_mean_bound": bounds.log_mean, "log_max_bound": bounds.log_max,
            "tau2_majority_lower": tau_major,
            "tau2_uniform": tau_uniform, "tau2_rated": tau_rated, "prop_ok": ok}


def run_experiment(spec):
    """Evaluate one instance; returns the row dict (and writes it if asked)."""
    if spec.family == "ising_tree":
        row = _ising_row(spec)
    else:
        graph = families.generate(spec.family, spec.params)
        row = _graph_row(spec, graph)
    if spec.output_path:
        write_rows([row], spec.output_path, fmt="json")
    return row


def run_sweep(specs):
    """Rows for a list of specs, ordered as given (never by completion time)."""
    return [run_experiment(s) for s in specs]


def _flatten(row):
    flat = dict(row)
    flat["params"] = json.dumps(row["params"], sort_keys=True)
    for key, value in flat.items():
        if value is None:
            flat[key] = ""
        elif value is True or value is False:
            flat[key] = int(value)
        elif isinstance(value, float) and math.isinf(value):
            flat[key] = "inf"
    return flat


def write_rows(rows, path, fmt="csv"):
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(rows, indent=2, default=str) + "\n")
        return
    columns = ISING_COLUMNS if rows and rows[0]["family"] == "ising_tree" else GRAPH_COLUMNS
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(_flatten(row))
