import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from antimeans.service import schemas as S

PKG_ROOT = Path(__file__).resolve().parents[1]


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "antimeans.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture()
def center_file(tmp_path):
    path = tmp_path / "center.json"
    path.write_text(json.dumps([[1.0, 0.2, -0.3, 0.5]]))
    return path


def make_group_file(tmp_path, name, seeds, n=25):
    """Synthesize one or more groups into a shapes JSON file."""
    groups = {}
    for gname, seed in seeds.items():
        res = run_cli(
            "synth", "--center", str(tmp_path / "center.json"), "--n", str(n),
            "--seed", str(seed), "--out", str(tmp_path / f"_{gname}.json"),
        )
        assert res.returncode == 0, res.stderr
        payload = json.loads((tmp_path / f"_{gname}.json").read_text())
        groups[gname] = payload["shapes"]
    path = tmp_path / name
    path.write_text(json.dumps({"groups": groups}))
    return path


class TestAntimeanCommand:
    def test_json_report_round_trips(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "one.json", {"g": 11})
        res = run_cli("antimean", "--input", str(data), "--format", "json")
        assert res.returncode == 0, res.stderr
        report = S.AntimeanReport.model_validate_json(res.stdout)
        assert report.schema_version == S.SCHEMA_VERSION
        assert report.n == 25

    def test_antimean_matches_moment_oracle(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "one.json", {"g": 12}, n=400)
        res = run_cli("antimean", "--input", str(data))
        report = S.AntimeanReport.model_validate_json(res.stdout)
        shapes = json.loads(data.read_text())["groups"]["g"]
        rows = np.array([s[0] for s in shapes])
        moment = rows.T @ rows / len(rows)
        vals, vecs = np.linalg.eigh(moment)
        dot = abs(float(vecs[:, 0] @ np.array(report.antimean[0])))
        assert dot >= 0.999999

    def test_focal_input_exits_2_with_block(self, tmp_path):
        path = tmp_path / "focal.json"
        path.write_text(json.dumps({"shapes": [[[1.0, 0, 0, 0]], [[0, 1.0, 0, 0]]]}))
        res = run_cli("antimean", "--input", str(path))
        assert res.returncode == 2
        assert "block 0" in res.stderr

    def test_single_observation_rp3_is_focal(self, tmp_path):
        path = tmp_path / "single.json"
        path.write_text(json.dumps({"shapes": [[[1.0, 0.2, 0.1, -0.4]]]}))
        res = run_cli("antimean", "--input", str(path))
        assert res.returncode == 2
        assert "focal" in res.stderr.lower()

    def test_missing_file_exits_3(self):
        res = run_cli("antimean", "--input", "/nonexistent/nope.json")
        assert res.returncode == 3

    def test_usage_error_exits_1(self):
        res = run_cli("antimean")
        assert res.returncode == 1
        res = run_cli("frobnicate")
        assert res.returncode == 1


class TestSynthCommand:
    def test_deterministic_output(self, tmp_path, center_file):
        args = ("synth", "--center", str(center_file), "--n", "15", "--seed", "9")
        a = run_cli(*args)
        b = run_cli(*args)
        assert a.returncode == 0
        assert a.stdout == b.stdout
        report = S.SynthReport.model_validate_json(a.stdout)
        assert report.n == 15

    def test_scales_flag(self, tmp_path, center_file):
        res = run_cli(
            "synth", "--center", str(center_file), "--n", "5", "--seed", "1",
            "--scales", "1,2,4",
        )
        assert res.returncode == 0


class TestCoordsCommand:
    def test_standard_frame_identity(self, tmp_path):
        path = tmp_path / "marks.csv"
        lines = ["config_id,landmark_id,x,y,z,w"]
        frame_rows = np.vstack([np.eye(4), np.ones((1, 4))])
        extras = np.array([[2.0, 1.0, -0.5, 1.0], [0.3, 0.4, 0.5, 1.0]])
        for j, row in enumerate(np.vstack([frame_rows, extras])):
            lines.append("c1," + str(j) + "," + ",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        res = run_cli("coords", "--input", str(path), "--frame", "1,2,3,4,5")
        assert res.returncode == 0, res.stderr
        report = S.CoordsReport.model_validate_json(res.stdout)
        assert report.q == 2
        for got, raw in zip(report.shapes[0].components, extras):
            expected = raw / np.linalg.norm(raw)
            assert np.allclose(got, expected, atol=1e-12)

    def test_missing_frame_is_usage_error(self, tmp_path):
        path = tmp_path / "marks.csv"
        path.write_text("config_id,landmark_id,x,y,z\n" + "\n".join(
            f"c1,{j},{j},{j + 1},{j + 2}" for j in range(6)
        ) + "\n")
        res = run_cli("coords", "--input", str(path))
        assert res.returncode == 1


class TestManovaCommand:
    def test_identical_groups_no_rejections(self, tmp_path, center_file):
        one = make_group_file(tmp_path, "one.json", {"a": 21})
        shapes = json.loads(one.read_text())["groups"]["a"]
        both = tmp_path / "both.json"
        both.write_text(json.dumps({"groups": {"a": shapes, "b": shapes, "c": shapes}}))
        res = run_cli(
            "manova", "--input", str(both), "--pairwise", "--boot", "25", "--seed", "2",
        )
        assert res.returncode == 0, res.stderr
        report = S.TestReport.model_validate_json(res.stdout)
        assert report.statistic <= 1e-12
        assert not report.reject
        assert all(entry.verdict == "No" for entry in report.pairwise)

    def test_separated_groups_reject_with_minimal_p(self, tmp_path, center_file):
        from antimeans.data import SynthSpec, synth_sample
        from antimeans.simulate import default_center, separation_rotor, translate_shape

        base = synth_sample(
            SynthSpec(center=default_center(1), concentration=20.0, n=30, seed=31)
        )
        moved = [
            translate_shape(s, separation_rotor(2.2))
            for s in synth_sample(
                SynthSpec(center=default_center(1), concentration=20.0, n=30, seed=32)
            )
        ]
        payload = {
            "groups": {
                "a": [[list(map(float, p.coords)) for p in s.points] for s in base],
                "b": [[list(map(float, p.coords)) for p in s.points] for s in moved],
            }
        }
        path = tmp_path / "sep.json"
        path.write_text(json.dumps(payload))
        res = run_cli(
            "test2", "--input", str(path), "--boot", "99", "--seed", "3", "--alpha", "0.05",
        )
        assert res.returncode == 0, res.stderr
        report = S.TestReport.model_validate_json(res.stdout)
        assert report.reject
        assert abs(report.p_value - 1.0 / 100.0) <= 1e-12

    def test_df_mode_flag(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "two.json", {"a": 41, "b": 42})
        res = run_cli("manova", "--input", str(data), "--df-mode", "g3q")
        report = S.TestReport.model_validate_json(res.stdout)
        assert report.df == 6
        assert report.df_mode == "g3q"


class TestTest1Command:
    def test_runs_with_nu(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "one.json", {"g": 51})
        nu = tmp_path / "nu.json"
        nu.write_text(json.dumps([[0.0, 1.0, 0.0, 0.0]]))
        res = run_cli(
            "test1", "--input", str(data), "--nu", str(nu), "--boot", "30", "--seed", "4",
        )
        assert res.returncode == 0, res.stderr
        report = S.TestReport.model_validate_json(res.stdout)
        assert report.command == "test1"
        assert report.bootstrap is not None


class TestCalibrateCommand:
    def test_small_run(self):
        res = run_cli(
            "calibrate", "--kind", "one-sample-size", "--n", "50", "--reps", "20", "--seed", "6",
        )
        assert res.returncode == 0, res.stderr
        report = S.CalibrateReport.model_validate_json(res.stdout)
        assert report.reps == 20
        assert "rejection_rate" in report.metrics


class TestRunConfig:
    def test_flags_override_config(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "one.json", {"g": 61})
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"input": [str(data)], "format": "json", "alpha": 0.10}))
        out = tmp_path / "report.json"
        res = run_cli("antimean", "--config", str(cfg), "--out", str(out))
        assert res.returncode == 0, res.stderr
        S.AntimeanReport.model_validate_json(out.read_text())

    def test_unknown_config_key_is_usage_error(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"inpt": ["x.json"]}))
        res = run_cli("antimean", "--config", str(cfg))
        assert res.returncode == 1

    def test_table_format(self, tmp_path, center_file):
        data = make_group_file(tmp_path, "one.json", {"g": 71})
        res = run_cli("antimean", "--input", str(data), "--format", "table")
        assert res.returncode == 0
        assert "sample antimean" in res.stdout
        assert "gap diagnostics" in res.stdout


class TestServerRoundTrip:
    def test_cli_against_live_server(self, tmp_path, center_file):
        import socket
        import time

        import httpx

        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "antimeans.cli", "serve", "--port", str(port)],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        try:
            base = f"http://127.0.0.1:{port}"
            for _ in range(100):
                try:
                    if httpx.get(base + "/v1/health", timeout=1.0).status_code == 200:
                        break
                except httpx.HTTPError:
                    time.sleep(0.1)
            else:
                pytest.fail("server did not come up")
            data = make_group_file(tmp_path, "one.json", {"g": 81})
            local = run_cli("antimean", "--input", str(data))
            remote = run_cli("antimean", "--input", str(data), "--server", base)
            assert remote.returncode == 0, remote.stderr
            assert json.loads(local.stdout) == json.loads(remote.stdout)
        finally:
            proc.terminate()
            proc.wait(timeout=10)
