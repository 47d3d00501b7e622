import json
import shutil
import subprocess

import pytest

from kowtype.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_SINGULAR, main, parse_config
from kowtype.errors import ConfigError


def _write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_catalog_text(capsys):
    assert main(["catalog"]) == EXIT_OK
    out = capsys.readouterr().out
    for sid in ("S1_REAL", "S1_COMPLEX", "S2_TWOPARAM", "S3_CUBIC"):
        assert sid in out


def test_catalog_json(capsys):
    assert main(["catalog", "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    ids = [s["id"] for s in data["systems"]]
    assert ids == ["S1_REAL", "S1_COMPLEX", "S2_TWOPARAM", "S3_CUBIC"]
    assert data["systems"][3]["equation"] == "eq. (34)"


def test_verify_separability_passes(tmp_path, capsys):
    assert main(["verify", "separability", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "verify-separability.json").read_text())
    assert report["summary"]["fail"] == 0
    assert all({"identity", "status", "threshold", "value"} <= set(c) for c in report["checks"])


def test_verify_all_for_s3(capsys):
    assert main(["verify", "all", "--system", "S3_CUBIC", "--seed", "0", "--t-end", "5"]) == EXIT_OK
    assert "0 fail" in capsys.readouterr().out


def test_unknown_key_is_a_config_error(tmp_path, capsys):
    path = _write_config(tmp_path, {"system": "S3_CUBIC", "tol": {"rtol": 1e-9, "bogus": 1}})
    assert main(["simulate", "--config", path]) == EXIT_CONFIG
    assert "$.tol.bogus" in capsys.readouterr().err


def test_malformed_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"system": "S3_CUBIC",\n "t_end": }')
    assert main(["verify", "integrals", "--config", str(path)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_bad_values_have_locations():
    with pytest.raises(ConfigError, match=r"\$\.t_end"):
        parse_config({"t_end": -1})
    with pytest.raises(ConfigError, match=r"\$\.system"):
        parse_config({"system": "S9"})
    with pytest.raises(ConfigError, match=r"\$\.params\.g2"):
        parse_config({"params": {"g2": "x"}})


def test_bad_flag_exit_code(capsys):
    assert main(["verify", "nonsense"]) == EXIT_CONFIG
    assert main(["simulate", "--system", "S9"]) == EXIT_CONFIG


def test_simulate_is_deterministic(tmp_path, capsys):
    cfg = {"system": "S3_CUBIC", "initial": {"seed": 3}, "t_end": 0.5, "sample_dt": 0.05}
    outs = []
    for run in ("a", "b"):
        cfg["out"] = str(tmp_path / run)
        assert main(["simulate", "--config", _write_config(tmp_path, cfg, f"{run}.json")]) == EXIT_OK
        outs.append(tmp_path / run)
    for name in ("trajectory.json", "trajectory.csv", "drift.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_simulate_equilibrium_rows_are_constant(tmp_path, capsys):
    cfg = {"system": "S1_REAL", "initial": {"state": [1, 0, 0, 5, 0, 0]}, "t_end": 1, "sample_dt": 0.25, "out": str(tmp_path)}
    assert main(["simulate", "--config", _write_config(tmp_path, cfg)]) == EXIT_OK
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()[1:]
    assert len(rows) == 5
    assert len({r.split(",", 1)[1] for r in rows}) == 1


def test_singular_start_exit_3(tmp_path, capsys):
    cfg = {"system": "S1_REAL", "initial": {"state": [1e-9, 1, 1, 0, 0, 0]}, "t_end": 1, "out": str(tmp_path)}
    assert main(["simulate", "--config", _write_config(tmp_path, cfg)]) == EXIT_SINGULAR
    traj = json.loads((tmp_path / "trajectory.json").read_text())
    assert traj["termination"] == "singularity" and len(traj["times"]) == 1


def test_verify_singular_start_exit_3(tmp_path, capsys):
    cfg = {"system": "S1_REAL", "initial": {"state": [1e-9, 1, 1, 0, 0, 0]}, "t_end": 1}
    assert main(["verify", "integrals", "--config", _write_config(tmp_path, cfg)]) == EXIT_SINGULAR


def test_verify_failure_exit_1(tmp_path, capsys):
    # an off-set start makes the relation drifts of the modal system fail
    cfg = {"system": "S1_COMPLEX", "initial": {"seed": 0, "on_invariant_set": False}, "t_end": 0.5, "params": {"g2": 0.3, "k": 1}}
    assert main(["verify", "integrals", "--config", _write_config(tmp_path, cfg)]) == EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out


def test_env_var_sets_eps_sing(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("KOWTYPE_EPS_SING", "0.9")
    cfg = {"system": "S1_REAL", "initial": {"state": [0.5, 1, 1, 0, 0, 0]}, "t_end": 1, "out": str(tmp_path)}
    assert main(["simulate", "--config", _write_config(tmp_path, cfg)]) == EXIT_SINGULAR


@pytest.mark.skipif(shutil.which("kowtype") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["kowtype", "catalog", "--json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["systems"]) == 4
    proc = subprocess.run(["kowtype", "verify", "bogus"], capture_output=True, text=True, check=False)
    assert proc.returncode == 2
