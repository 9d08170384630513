"""Tests for the command-line interface."""

import json

import numpy as np

from multiphase import SATURATES, builtin_model, save_model
from multiphase.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCompute:
    def test_three_mode_origin_values(self, capsys, tmp_path):
        out_path = tmp_path / "pair.json"
        code, out, _ = run(capsys, "compute", "--model", "mzi3",
                           "--theta", "0,0", "--out", str(out_path))
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert np.allclose(payload["qfim"],
                           (8.0 / 3.0) * np.array([[2, -1], [-1, 2]]), atol=1e-9)
        assert np.allclose(payload["fim"],
                           (4.0 / 3.0) * np.ones((2, 2)), atol=1e-6)
        assert "gap" in out

    def test_four_mode_origin_saturates(self, capsys):
        code, out, _ = run(capsys, "compute", "--model", "mzi4", "--theta", "0,0")
        assert code == 0
        payload = json.loads(out[out.index("{"):])
        assert payload["gap"] < 1e-6

    def test_matches_finite_difference_cross_check(self, capsys):
        from multiphase import ProjectorSet, fim_finite_difference

        code, out, _ = run(capsys, "compute", "--model", "mzi3",
                           "--theta", "0.7,0.3")
        assert code == 0
        payload = json.loads(out[out.index("{"):])
        model = builtin_model("mzi3")
        oracle = fim_finite_difference(model, [0.7, 0.3],
                                       ProjectorSet.fock(model.basis), delta=1e-4)
        assert np.max(np.abs(np.array(payload["fim"]) - oracle)) < 1e-5

    def test_model_file_input(self, capsys, tmp_path):
        path = tmp_path / "model.json"
        save_model(builtin_model("mzi3"), path)
        code, out, _ = run(capsys, "compute", "--model", str(path),
                           "--theta", "0.2,0.4")
        assert code == 0

    def test_bad_model_name_is_config_error(self, capsys):
        code, _, err = run(capsys, "compute", "--model", "nope", "--theta", "0,0")
        assert code == 2
        assert "configuration error" in err

    def test_bad_theta_arity_is_config_error(self, capsys):
        code, _, _ = run(capsys, "compute", "--model", "mzi3", "--theta", "0,0,0")
        assert code == 2


class TestScan:
    def test_csv_layout_and_summary(self, capsys, tmp_path):
        out_path = tmp_path / "grid.csv"
        code, out, _ = run(capsys, "scan", "--model", "mzi4",
                           "--resolution", "5,5", "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header == ["theta1", "theta2", "gap", "verdict",
                          "f11", "f12", "f22", "fq11", "fq12", "fq22"]
        assert len(lines) == 1 + 25
        summary = json.loads(out)
        assert summary["min_gap"] < 1e-6
        diagonal = {(c["i"], c["j"]) for c in summary["saturating_cells"]}
        assert {(i, i) for i in range(5)} <= diagonal

    def test_deterministic_output(self, capsys, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        run(capsys, "scan", "--model", "mzi3", "--resolution", "4,4",
            "--out", str(first))
        run(capsys, "scan", "--model", "mzi3", "--resolution", "4,4",
            "--out", str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_summary_extrema_match_sequential_recount(self, capsys, tmp_path):
        out_path = tmp_path / "grid.csv"
        _, out, _ = run(capsys, "scan", "--model", "mzi3",
                        "--resolution", "4,4", "--out", str(out_path))
        summary = json.loads(out)
        gaps = [float(line.split(",")[2])
                for line in out_path.read_text().strip().splitlines()[1:]]
        assert summary["min_gap"] == min(gaps)
        assert summary["max_gap"] == max(gaps)

    def test_degenerate_grid_rejected(self, capsys):
        code, _, err = run(capsys, "scan", "--model", "mzi3", "--resolution", "1,1")
        assert code == 2
        assert "resolution" in err

    def test_json_format(self, capsys, tmp_path):
        out_path = tmp_path / "grid.json"
        code, _, _ = run(capsys, "scan", "--model", "mzi3",
                         "--resolution", "3,3", "--format", "json",
                         "--out", str(out_path))
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert len(payload["cells"]) == 9

    def test_three_mode_grid_gap_floor(self, capsys, tmp_path):
        out_path = tmp_path / "grid.csv"
        _, out, _ = run(capsys, "scan", "--model", "mzi3",
                        "--resolution", "9,9", "--out", str(out_path))
        summary = json.loads(out)
        assert summary["min_gap"] > 0.75
        assert summary["saturating_cells"] == []


class TestCheckSaturation:
    def test_exit_zero_for_both_verdicts(self, capsys):
        code, out, _ = run(capsys, "check-saturation", "--model", "mzi3",
                           "--theta", "0,0")
        assert code == 0
        report = json.loads(out)
        assert report["verdict"] == "DoesNotSaturate"
        values = {entry["projector"]: entry["value"] for entry in report["t1"]}
        expected = 1.0 / (3.0 * np.sqrt(3.0))
        nonzero = [v for v in values.values() if v > 1e-9]
        assert len(nonzero) == 6
        assert np.allclose(sorted(nonzero), [expected] * 6, atol=1e-9)

        code, out, _ = run(capsys, "check-saturation", "--model", "mzi4",
                           "--theta", "0,0")
        assert code == 0
        assert json.loads(out)["verdict"] == "Saturates"

    def test_generic_four_mode_point(self, capsys):
        code, out, _ = run(capsys, "check-saturation", "--model", "mzi4",
                           "--theta", "0.3,1.1")
        assert code == 0
        report = json.loads(out)
        assert report["verdict"] == "DoesNotSaturate"
        assert report["gap"] > 0


class TestConstructOptimal:
    def test_orthogonal_emits_set_and_verification(self, capsys, tmp_path):
        out_path = tmp_path / "set.json"
        code, out, _ = run(capsys, "construct-optimal", "--model", "mzi3",
                           "--theta", "0,0", "--variant", "orthogonal",
                           "--out", str(out_path))
        assert code == 0
        assert "verification: verdict=Saturates" in out
        payload = json.loads(out_path.read_text())
        assert len(payload["projectors"]) == 10
        assert payload["complete"]

    def test_nonorthogonal_overlaps(self, capsys, tmp_path):
        out_path = tmp_path / "set.json"
        code, out, _ = run(capsys, "construct-optimal", "--model", "mzi3",
                           "--theta", "0,0", "--variant", "nonorthogonal",
                           "--mix", "0.5", "--out", str(out_path))
        assert code == 0
        from multiphase import ProjectorSet

        pset = ProjectorSet.from_dict(json.loads(out_path.read_text()))
        psi = builtin_model("mzi3").output_state([0.0, 0.0])
        overlaps = np.abs(pset.vectors[:3].conj() @ psi)
        assert np.all(overlaps > 1e-3)

    def test_constructed_set_round_trips_into_check(self, capsys, tmp_path):
        set_path = tmp_path / "set.json"
        run(capsys, "construct-optimal", "--model", "mzi4", "--theta", "1.0,1.0",
            "--variant", "orthogonal", "--out", str(set_path))
        code, out, _ = run(capsys, "check-saturation", "--model", "mzi4",
                           "--theta", "1.0,1.0", "--projectors", str(set_path))
        assert code == 0
        assert json.loads(out)["verdict"] == SATURATES


class TestVerifyPaper:
    def test_single_check_selection(self, capsys):
        code, out, _ = run(capsys, "verify-paper", "--only", "qfim3")
        assert code == 0
        assert "qfim3" in out and "PASS" in out

    def test_unknown_check_rejected(self, capsys):
        code, _, err = run(capsys, "verify-paper", "--only", "bogus")
        assert code == 2
        assert "unknown check" in err


class TestConfiguration:
    def test_config_file_applies_and_flags_win(self, capsys, tmp_path):
        config = tmp_path / "settings.cfg"
        config.write_text("# thresholds\ntol-gap = 4.1\n")
        # With a loose gap threshold, mildly non-saturating cells are
        # counted as saturating in the summary.
        out_path = tmp_path / "grid.csv"
        code, out, _ = run(capsys, "scan", "--model", "mzi4",
                           "--resolution", "5,5", "--config", str(config),
                           "--out", str(out_path))
        assert code == 0
        summary = json.loads(out)
        assert len(summary["saturating_cells"]) > 5

        code, out, _ = run(capsys, "scan", "--model", "mzi4",
                           "--resolution", "5,5", "--config", str(config),
                           "--tol-gap", "1e-6", "--out", str(out_path))
        summary = json.loads(out)
        assert len(summary["saturating_cells"]) == 5

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        config = tmp_path / "settings.cfg"
        config.write_text("tol-bogus = 1\n")
        code, _, err = run(capsys, "compute", "--model", "mzi3",
                           "--theta", "0,0", "--config", str(config))
        assert code == 2
        assert "unknown key" in err
