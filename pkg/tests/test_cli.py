import json
import subprocess
import sys

import numpy as np
import pytest

from threestage import cli, harness


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def manifest_of(err):
    for line in err.splitlines():
        if line.startswith("{"):
            document = json.loads(line)
            if "manifest" in document:
                return document["manifest"]
    raise AssertionError(f"no manifest line on stderr: {err!r}")


class TestRun:
    def test_noiseless_round(self, capsys):
        code, out, err = run_cli(
            capsys, "run", "--noise", "none", "--xi", "0.3",
            "--alice-angle", "1.0", "--bob-angle", "2.0", "--bit", "0",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert payload["p0"] == pytest.approx(1.0, abs=1e-12)
        assert manifest_of(err)["version"]

    def test_collective_rotation_period_point(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", "--noise", "cr", "--param", "1.0471975511965976", "--bit", "1",
        )
        assert code == 0
        assert json.loads(out)["fidelity"] == pytest.approx(1.0, abs=1e-12)

    def test_degrees_flag_converts_angles(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", "--noise", "cr", "--param", "60", "--degrees", "--bit", "0",
        )
        assert code == 0
        assert json.loads(out)["fidelity"] == pytest.approx(1.0, abs=1e-12)

    def test_out_of_range_param_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "run", "--noise", "ad", "--param", "2.0", "--bit", "0")
        assert code == 2
        assert "--param" in err

    def test_unknown_flag_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "run", "--noise", "none", "--frequency", "1")
        assert code == 2

    def test_unknown_noise_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "run", "--noise", "xx")
        assert code == 2


class TestSweep:
    def test_default_grid_has_101_rows(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        code, out, err = run_cli(
            capsys, "sweep", "--noise", "pd", "--xi-avg",
            "--mode", "closed_form", "--out", str(path),
        )
        assert code == 0
        assert out == ""
        lines = path.read_text().splitlines()
        assert lines[0] == "kind,param,xi,closed_form,oracle,deviation"
        assert len(lines) == 102
        assert manifest_of(err)["seed"] == 0

    def test_explicit_grid_row_count(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        code, _, _ = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0:1:101", "--xi-avg",
            "--mode", "closed_form", "--out", str(path),
        )
        assert code == 0
        assert len(path.read_text().splitlines()) == 102

    def test_both_mode_with_xi_grid(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        code, _, _ = run_cli(
            capsys, "sweep", "--noise", "cd",
            "--grid", "0:6.283185307179586:11",
            "--xi-grid", "0,0.7853981633974483",
            "--mode", "both", "--rotation-points", "16", "--out", str(path),
        )
        assert code == 0
        rows = harness.load_rows(path, "csv")
        assert len(rows) == 22
        assert all(row.deviation is not None for row in rows)

    def test_phase_damping_average_value(self, capsys, tmp_path):
        path = tmp_path / "f.csv"
        code, _, _ = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0:1:3", "--xi-avg",
            "--mode", "closed_form", "--out", str(path),
        )
        assert code == 0
        rows = harness.load_rows(path, "csv")
        last = rows[-1]
        assert last.param == 1.0 and last.xi is None
        assert last.closed_form == pytest.approx(0.5625, abs=1e-12)

    def test_repeat_runs_are_byte_identical(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            code, _, _ = run_cli(
                capsys, "sweep", "--noise", "ad", "--grid", "0:1:5",
                "--xi-grid", "0,0.5,1.0", "--mode", "both",
                "--rotation-points", "16", "--seed", "3", "--out", str(path),
            )
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_json_format(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        code, _, _ = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0:1:3", "--xi-avg",
            "--format", "json", "--out", str(path),
        )
        assert code == 0
        document = json.loads(path.read_text())
        assert document["manifest"]["version"]
        assert len(document["rows"]) == 3

    def test_missing_xi_selection_is_usage_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0:1:3",
            "--out", str(tmp_path / "f.csv"),
        )
        assert code == 2
        assert "--xi-grid" in err

    def test_malformed_grid_names_flag(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0;1;3", "--xi-avg",
            "--out", str(tmp_path / "f.csv"),
        )
        assert code == 2
        assert "--grid" in err

    def test_identity_kind_rejected(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "sweep", "--noise", "none", "--xi-avg",
            "--out", str(tmp_path / "f.csv"),
        )
        assert code == 2

    def test_unwritable_path_is_io_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "sweep", "--noise", "pd", "--grid", "0:1:3", "--xi-avg",
            "--out", str(tmp_path / "missing" / "f.csv"),
        )
        assert code == 1
        assert "error" in err


class TestVerify:
    def test_collective_rotation_exact(self, capsys):
        code, out, err = run_cli(
            capsys, "verify", "--kinds", "cr", "--tolerance", "1e-12",
            "--resolution", "32",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        assert payload["reports"][0]["kind"] == "cr"
        assert payload["reports"][0]["max_abs_deviation"] < 1e-12
        assert "PASS" in err

    def test_damping_and_dephasing_campaign_at_default_resolution(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--kinds", "ad,pd,cd", "--tolerance", "1e-6",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        assert [entry["kind"] for entry in payload["reports"]] == ["ad", "pd", "cd"]

    def test_unachievable_tolerance_fails_with_exit_3(self, capsys):
        code, out, err = run_cli(
            capsys, "verify", "--kinds", "ad", "--tolerance", "1e-30",
            "--resolution", "16",
        )
        assert code == 3
        assert json.loads(out)["passed"] is False
        assert "FAIL" in err

    def test_unknown_kind_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--kinds", "xx")
        assert code == 2
        assert "--kinds" in err

    def test_no_ansi_color_when_not_a_tty(self, capsys):
        _, _, err = run_cli(
            capsys, "verify", "--kinds", "cr", "--tolerance", "1e-6",
            "--resolution", "16",
        )
        assert "\x1b[" not in err


class TestCommutators:
    def test_noiseless_case_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "commutators", "--eta", "0", "--theta", "1.0")
        assert code == 0
        payload = json.loads(out)
        for entry in payload["commutators"]:
            assert np.max(np.abs(np.array(entry["commutator"]))) == 0.0
            assert entry["closed_form_residual"] <= 1e-12

    def test_trivial_rotation_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "commutators", "--eta", "1", "--theta", "0")
        assert code == 0
        for entry in json.loads(out)["commutators"]:
            assert np.max(np.abs(np.array(entry["commutator"]))) == 0.0

    def test_exchange_pattern_magnitude(self, capsys):
        code, out, _ = run_cli(
            capsys, "commutators", "--eta", "0.75", "--theta", "1.5707963267948966",
        )
        assert code == 0
        payload = json.loads(out)
        first = np.array(payload["commutators"][0]["commutator"])
        real = first[..., 0]
        np.testing.assert_allclose(real, [[0.0, -0.5], [-0.5, 0.0]], atol=1e-12)
        assert payload["commutators"][0]["closed_form_residual"] <= 1e-12

    def test_out_of_range_eta_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "commutators", "--eta", "2", "--theta", "1")
        assert code == 2
        assert "--eta" in err


class TestMessage:
    def test_noiseless_transmission(self, capsys):
        code, out, _ = run_cli(
            capsys, "message", "--noise", "none", "--bits", "010011", "--seed", "1",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["decoded"] == "010011"
        assert payload["qber"] == 0.0

    def test_collective_rotation_pi_over_six_flips_all(self, capsys):
        code, out, _ = run_cli(
            capsys, "message", "--noise", "cr", "--param", "0.5235987755982988",
            "--bits", "0101", "--seed", "1",
        )
        assert code == 0
        assert json.loads(out)["qber"] == 1.0

    def test_malformed_bits_rejected(self, capsys):
        code, _, err = run_cli(capsys, "message", "--noise", "none", "--bits", "01x")
        assert code == 2
        assert "--bits" in err

    def test_empty_bits_rejected(self, capsys):
        code, _, err = run_cli(capsys, "message", "--noise", "none", "--bits", "")
        assert code == 2
        assert "--bits" in err

    def test_negative_seed_rejected(self, capsys):
        code, _, err = run_cli(
            capsys, "message", "--noise", "none", "--bits", "01", "--seed", "-1",
        )
        assert code == 2
        assert "--seed" in err


class TestEndToEnd:
    """Exit-code contract through the real interpreter."""

    def invoke(self, *argv):
        return subprocess.run(
            [sys.executable, "-m", "threestage", *argv],
            capture_output=True, text=True,
        )

    def test_success_is_zero(self):
        result = self.invoke("run", "--noise", "none", "--bit", "0")
        assert result.returncode == 0
        assert json.loads(result.stdout)["fidelity"] == pytest.approx(1.0, abs=1e-12)

    def test_usage_error_is_two(self):
        assert self.invoke("run", "--noise", "ad", "--param", "2.0").returncode == 2

    def test_verification_failure_is_three(self):
        result = self.invoke(
            "verify", "--kinds", "cr", "--tolerance", "1e-30", "--resolution", "16",
        )
        assert result.returncode == 3

    def test_io_failure_is_one(self, tmp_path):
        result = self.invoke(
            "sweep", "--noise", "pd", "--grid", "0:1:3", "--xi-avg",
            "--out", str(tmp_path / "no_dir" / "f.csv"),
        )
        assert result.returncode == 1
