import json

import pytest

from conftest import line_instance
from vrasp import io as vio
from vrasp.bench import generate_instance
from vrasp.cli import main
from vrasp.domain import Route, Solution


def json_from_stdout(capsys) -> dict:
    out = capsys.readouterr().out
    payload = out.split("\nwrote ")[0]
    return json.loads(payload)


class TestGen:
    def test_writes_requested_clients(self, tmp_path, capsys):
        path = tmp_path / "inst.json"
        assert main(["gen", "--n", "10", "--seed", "4", "--out", str(path)]) == 0
        inst = vio.read_instance(path)
        assert inst.n == 10
        assert inst.caregiver_count == 2

    def test_zero_clients_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["gen", "--n", "0", "--out", str(tmp_path / "x.json")])
        assert err.value.code == 2

    def test_same_seed_identical_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["gen", "--n", "6", "--seed", "9", "--out", str(a)])
        main(["gen", "--n", "6", "--seed", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestSolve:
    def test_det_single_client_singleton_route(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(line_instance([10.0]), inst_path)
        out = tmp_path / "sol.json"
        code = main(
            ["solve", "--instance", str(inst_path), "--model", "det", "--m", "3",
             "--tau", "5", "--out", str(out)]
        )
        assert code == 0
        sol = vio.read_solution(out)
        assert sol.routes[0].visits == [1]
        assert out.with_suffix(".log.csv").exists()

    def test_saa_with_one_sample_equals_det(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(generate_instance(5, seed=2), inst_path)
        det, saa = tmp_path / "det.json", tmp_path / "saa.json"
        base = ["--instance", str(inst_path), "--m", "1", "--seed", "3", "--tau", "10"]
        main(["solve", *base, "--model", "det", "--out", str(det)])
        main(["solve", *base, "--model", "saa", "--out", str(saa)])
        assert det.read_bytes() == saa.read_bytes()

    def test_missing_instance_is_io_error(self, tmp_path, capsys):
        code = main(
            ["solve", "--instance", str(tmp_path / "none.json"), "--out", str(tmp_path / "s.json")]
        )
        assert code == 4

    def test_malformed_instance_is_validation_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["solve", "--instance", str(bad), "--out", str(tmp_path / "s.json")])
        assert code == 3
        assert "line" in capsys.readouterr().err

    def test_plot_flag_renders_figures(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(generate_instance(4, seed=1), inst_path)
        png = tmp_path / "routes.png"
        main(
            ["solve", "--instance", str(inst_path), "--m", "2", "--tau", "3",
             "--out", str(tmp_path / "s.json"), "--plot", str(png)]
        )
        assert png.stat().st_size > 0
        assert png.with_suffix(".convergence.png").exists()


class TestEvaluate:
    def test_reproduces_solver_reported_cost(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(generate_instance(5, seed=7), inst_path)
        sol_path = tmp_path / "sol.json"
        main(
            ["solve", "--instance", str(inst_path), "--model", "saa", "--m", "4",
             "--seed", "11", "--tau", "8", "--out", str(sol_path)]
        )
        solver_breakdown = json_from_stdout(capsys)
        code = main(
            ["evaluate", "--instance", str(inst_path), "--solution", str(sol_path),
             "--m", "4", "--seed", "11"]
        )
        assert code == 0
        eval_breakdown = json.loads(capsys.readouterr().out)
        assert eval_breakdown == solver_breakdown

    def test_penalty_mode_flag_switches_wait_semantics(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(line_instance([10.0]), inst_path)
        # scheduled start 0 guarantees a late arrival in every scenario
        sol_path = vio.write_solution(Solution([Route(1, [1])], {1: 0.0}), tmp_path / "s.json")
        main(["evaluate", "--instance", str(inst_path), "--solution", str(sol_path),
              "--m", "2", "--penalty-mode", "earliness"])
        early = json.loads(capsys.readouterr().out)
        main(["evaluate", "--instance", str(inst_path), "--solution", str(sol_path),
              "--m", "2", "--penalty-mode", "tardiness"])
        late = json.loads(capsys.readouterr().out)
        assert early["wait_penalty"] == 0.0
        assert late["wait_penalty"] > 0.0

    def test_invalid_solution_is_validation_error(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(line_instance([10.0, 20.0], k=2), inst_path)
        sol_path = vio.write_solution(
            Solution([Route(1, [1]), Route(2, [])], {1: 0.0}), tmp_path / "s.json"
        )
        code = main(["evaluate", "--instance", str(inst_path), "--solution", str(sol_path)])
        assert code == 3
        assert "unserved" in capsys.readouterr().err


class TestSaaCommand:
    def test_report_written_and_deterministic(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(generate_instance(4, seed=3), inst_path)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["saa", "--instance", str(inst_path), "--q", "2", "--m", "2",
                "--m-eval", "4", "--seed", "5", "--tau", "5"]
        assert main([*args, "--out", str(a)]) == 0
        assert main([*args, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        doc = json.loads(a.read_text())
        assert doc["gap"] == pytest.approx(doc["ub_costs"][doc["selected"]] - doc["lb_mean"])


class TestExportLp:
    def test_file_parses_and_matches_flags(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        vio.write_instance(line_instance([10.0, 20.0]), inst_path)
        out = tmp_path / "model.lp"
        code = main(
            ["export-lp", "--instance", str(inst_path), "--model", "saa", "--m", "2",
             "--out", str(out)]
        )
        assert code == 0
        from vrasp.oracle import parse_lp

        model = parse_lp(out.read_text())
        assert "a_1_2" in model.variables  # per-scenario arrivals present

    def test_unknown_model_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["export-lp", "--instance", "x.json", "--model", "qp", "--out", "y.lp"])
        assert err.value.code == 2


class TestBenchCommand:
    def test_two_sizes_emit_two_report_groups(self, tmp_path, capsys):
        config = {
            "sizes": [3, 4],
            "instances_per_size": 1,
            "sample_sizes": [2],
            "m_eval": 3,
            "seed": 2,
            "solver": {"tau": 3},
            "mode": "det_vs_saa",
        }
        cfg_path = tmp_path / "bench.json"
        cfg_path.write_text(json.dumps(config))
        out_dir = tmp_path / "out"
        code = main(["bench", "--config", str(cfg_path), "--out", str(out_dir)])
        assert code == 0
        assert (out_dir / "det_vs_saa_n3_m2.csv").exists()
        assert (out_dir / "det_vs_saa_n4_m2.csv").exists()

    def test_malformed_config_is_validation_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "bench.json"
        cfg_path.write_text('{"instances_per_size": 2}')
        assert main(["bench", "--config", str(cfg_path)]) == 3
