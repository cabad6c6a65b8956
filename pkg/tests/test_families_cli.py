import json

import numpy as np
import pytest

from fastmix import cli, experiments, families
from fastmix.chains import TransitionGraph
from fastmix.solver import SolverConfig


class TestGenerators:
    def test_linked_cliques_counts(self):
        graph = families.knkn_graph(3)
        assert graph.n == 6
        assert len(graph.edges) == 7
        assert (0, 3) in graph.edges

    def test_torus_counts(self):
        graph = families.torus_graph(3, 2)
        assert graph.n == 9
        assert len(graph.edges) == 18

    def test_geometric_degrees(self):
        graph = families.geometric_graph(6, 2, d=1)
        assert all(graph.degree(i) == 4 for i in range(6))

    def test_torus_indexing_row_major(self):
        assert families.torus_coordinates(5, 3, 2) == (1, 2)
        assert families.torus_index((1, 2), 3) == 5

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            families.cycle_graph(2)
        with pytest.raises(ValueError):
            families.geometric_graph(6, 3)
        with pytest.raises(ValueError):
            families.geometric_graph(7, 2)
        with pytest.raises(ValueError):
            families.generate("nope", {})

    def test_generate_dispatch(self):
        graph = families.generate("cycle", {"n": "5"})
        assert graph.n == 5
        tree, system = families.generate("ising_tree", {"b": 3, "r": 1, "beta": 1.0})
        assert tree.node_count == 4 and system.n_sites == 4

    def test_round_trip_bitwise(self, tmp_path):
        for family, params in [("knkn", {"n": 4}), ("cycle", {"n": 6}),
                               ("torus", {"m": 3, "d": 2}),
                               ("geometric", {"m": 6, "k": 2})]:
            graph = families.generate(family, params)
            path = tmp_path / f"{family}.json"
            graph.save(path)
            back = TransitionGraph.load(path)
            assert back.edges == graph.edges
            assert np.array_equal(back.pi, graph.pi)


class TestExperiments:
    def test_cycle_row_sandwich(self):
        spec = experiments.ExperimentSpec(
            family="cycle", params={"n": 4},
            solver=SolverConfig(max_iters=1500))
        row = experiments.run_experiment(spec)
        assert row["lb_embed"] == pytest.approx(1.0, abs=1e-9)
        assert row["lb_embed"] <= row["tau2_solver"] + 1e-6
        assert row["tau2_solver"] <= row["ub_congestion"] + 1e-6
        assert row["tau2_solver"] <= row["ub_cheeger"] + 1e-6

    def test_linked_cliques_sweep_monotone(self):
        config = SolverConfig(max_iters=2000)
        rows = experiments.run_sweep([
            experiments.ExperimentSpec(family="knkn", params={"n": n}, solver=config)
            for n in (3, 4, 5)])
        for col in ("lb_embed", "tau2_solver", "ub_congestion"):
            values = [row[col] for row in rows]
            assert values == sorted(values)
        for row in rows:
            # the two closed forms stay within a few percent of each other
            assert 1.0 <= row["ub_congestion"] / row["lb_embed"] <= 1.04

    def test_ising_row(self):
        spec = experiments.ExperimentSpec(family="ising_tree",
                                          params={"b": 3, "r": 1, "beta": 1.0})
        row = experiments.run_experiment(spec)
        assert row["prop_ok"] is True
        assert row["max_width"] == 3
        assert row["tau2_rated"] is not None

    def test_bound_inversion_detected(self):
        row = {"family": "cycle", "params": {"n": 4}, "lb_embed": 2.0,
               "lb_expansion": None, "tau2_solver": 1.0,
               "ub_congestion": 3.0, "ub_cheeger": None, "tau2_standard": 1.5}
        with pytest.raises(experiments.BoundInversionError, match="lower bound"):
            experiments._check_graph_row(row)
        row.update(lb_embed=0.5, ub_congestion=0.9)
        with pytest.raises(experiments.BoundInversionError, match="upper bound"):
            experiments._check_graph_row(row)

    def test_write_rows_csv(self, tmp_path):
        spec = experiments.ExperimentSpec(
            family="cycle", params={"n": 4}, solver=SolverConfig(max_iters=1000))
        rows = experiments.run_sweep([spec])
        out = tmp_path / "rows.csv"
        experiments.write_rows(rows, out, fmt="csv")
        text = out.read_text().splitlines()
        assert text[0].startswith("family,params,lb_embed")
        assert len(text) == 2


class TestCli:
    def test_gen_and_lower(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        assert cli.main(["gen", "--family", "knkn", "--param", "n=3",
                         "--out", str(path)]) == 0
        capsys.readouterr()
        assert cli.main(["lower", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["lb_expansion"] == pytest.approx(1.5)

    def test_lower_with_embedding(self, tmp_path, capsys):
        from fastmix.lower_bounds import make_cycle_embedding
        gpath = tmp_path / "c4.json"
        families.cycle_graph(4).save(gpath)
        epath = tmp_path / "emb.json"
        make_cycle_embedding(4).save(epath)
        assert cli.main(["lower", str(gpath), "--embedding", str(epath)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["lb_embed"] == pytest.approx(1.0)

    def test_upper_writes_chain(self, tmp_path, capsys):
        gpath = tmp_path / "g.json"
        families.knkn_graph(3).save(gpath)
        cpath = tmp_path / "eq.csv"
        assert cli.main(["upper", str(gpath), "--out-chain", str(cpath)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["rho_bar"] == pytest.approx(6.5)
        assert cpath.exists()

    def test_solve_subcommand(self, tmp_path, capsys):
        gpath = tmp_path / "g.json"
        families.cycle_graph(4).save(gpath)
        assert cli.main(["solve", str(gpath), "--iters", "500"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["tau2_star"] == pytest.approx(1.0, abs=1e-3)

    def test_spectral_with_chain(self, tmp_path, capsys):
        gpath = tmp_path / "g.json"
        families.cycle_graph(4).save(gpath)
        assert cli.main(["spectral", str(gpath), "--standard", "walk"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["lambda2"] == pytest.approx(0.0, abs=1e-10)

    def test_glauber_subcommand(self, capsys):
        assert cli.main(["glauber", "--tree", "3,1", "--beta", "1.0",
                         "--exact"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["widths"] == [3, 2, 1, 0]
        assert payload["tau2_exact"] > 0

    def test_report_subcommand(self, tmp_path, capsys):
        out = tmp_path / "table.csv"
        code = cli.main(["report", "--family", "cycle", "--sweep", "n=4",
                         "--iters", "1500", "--out", str(out), "--format", "csv"])
        assert code == 0
        assert out.read_text().startswith("family,")

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"n\": 2, \"edges\": [[0, 0]]}")
        assert cli.main(["lower", str(bad)]) == cli.EXIT_VALIDATION

    def test_inversion_exit_code(self, monkeypatch, capsys):
        def boom(specs):
            raise experiments.BoundInversionError("forced")
        monkeypatch.setattr(experiments, "run_sweep", boom)
        code = cli.main(["report", "--family", "knkn", "--sweep", "n=3"])
        assert code == cli.EXIT_INVERSION

    def test_missing_file_exit_code(self, capsys):
        assert cli.main(["spectral", "/nonexistent/g.json"]) == cli.EXIT_VALIDATION
