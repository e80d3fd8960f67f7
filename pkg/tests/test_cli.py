import json
import os
import subprocess
import sys

import pytest

from minkfield import cli

SQUARE = {"type": "box", "lower": [0.0, 0.0], "upper": [1.0, 1.0]}
L1 = {"type": "ellp", "p": 1.0, "scales": [1.0, 1.0]}


def _run(argv):
    return cli.main([str(a) for a in argv])


def _read(path):
    return path.read_bytes()


# --- configuration errors --------------------------------------------------------------


def test_missing_subcommand_exits_2(capsys):
    assert _run([]) == 2
    assert "config.command" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    assert _run(["simulate-poisson", "--spec", "{bad", "--seed", 1, "--output-dir", tmp_path]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_unknown_spec_field_named(tmp_path, capsys):
    spec = {"H": 0.25, "body": SQUARE, "points": [[1, 0]], "colour": "red"}
    assert _run(["simulate-poisson", "--spec", json.dumps(spec), "--seed", 1, "--output-dir", tmp_path]) == 2
    assert "spec.colour" in capsys.readouterr().err


def test_bad_body_field_named(tmp_path, capsys):
    spec = {"H": 0.25, "body": {"type": "box", "lower": [0, 0]}, "points": [[1, 0]]}
    assert _run(["simulate-poisson", "--spec", json.dumps(spec), "--seed", 1, "--output-dir", tmp_path]) == 2
    assert "spec.body" in capsys.readouterr().err


def test_origin_point_rejected(tmp_path, capsys):
    spec = {"H": 0.25, "body": SQUARE, "points": [[0, 0]]}
    assert _run(["simulate-poisson", "--spec", json.dumps(spec), "--seed", 1, "--output-dir", tmp_path]) == 2
    assert "origin" in capsys.readouterr().err


def test_stochastic_command_needs_seed(tmp_path, capsys):
    spec = {"H": 0.25, "body": SQUARE, "points": [[1, 0]]}
    assert _run(["simulate-poisson", "--spec", json.dumps(spec), "--output-dir", tmp_path]) == 2
    assert "seed" in capsys.readouterr().err


def test_config_file_unknown_field(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "constants", "spec": {"H": 0.25, "d": 2}, "extra": 1}))
    assert _run(["--config", cfg]) == 2
    assert "config.extra" in capsys.readouterr().err


def test_config_bad_budget():
    with pytest.raises(cli.ConfigError, match="budgets.n_paths"):
        cli.ExperimentConfig.from_dict({"command": "verify", "budgets": {"n_paths": 0}})


def test_gauss_star_body_required(tmp_path, capsys):
    spec = {"H": 0.25, "body": SQUARE, "points": [[1, 0]]}
    assert _run(["simulate-gauss", "--spec", json.dumps(spec), "--seed", 1, "--output-dir", tmp_path]) == 2
    assert "star body" in capsys.readouterr().err


# --- successful runs ----------------------------------------------------------------------


def test_constants_prints_json(capsys):
    assert _run(["constants", "--H", 0.25, "--d", 2]) == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["c_H"] - 2.5066282746310002) < 1e-12
    assert abs(data["normalisation_residual"]) < 1e-12


def test_body_gauge_csv(tmp_path):
    spec = {"body": L1, "points": [[3, 4], [1, -1]]}
    assert _run(["body", "gauge", "--spec", json.dumps(spec), "--output-dir", tmp_path]) == 0
    lines = (tmp_path / "gauge.csv").read_text().splitlines()
    assert lines == ["z0,z1,gauge", "3.0,4.0,7.0", "1.0,-1.0,2.0"]
    meta = json.loads((tmp_path / "gauge.csv.meta.json").read_text())
    assert meta["artifact"] == "gauge.csv"
    assert meta["config"]["command"] == "body"
    assert "runtime_s" not in json.dumps(meta)


def test_polar_projection_transform(tmp_path):
    spec = {"body": SQUARE, "transform": "polar_projection"}
    assert _run(["body", "transform", "--spec", json.dumps(spec), "--grid", 8, "--output-dir", tmp_path]) == 0
    rows = (tmp_path / "body_polar_projection.csv").read_text().splitlines()
    assert rows[0] == "u0,u1,gauge"
    assert float(rows[1].split(",")[2]) == pytest.approx(1.0)


def test_gauss_indefinite_exits_1(tmp_path, capsys):
    pts = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [2.0, 1.0], [-1.0, 2.0], [0.5, 0.5], [0.3, -0.8]]
    spec = {"H": 0.99, "body": L1, "points": pts}
    code = _run(["simulate-gauss", "--spec", json.dumps(spec), "--seed", 1, "--output-dir", tmp_path, "--n-paths", 10])
    assert code == 1
    assert "not an L_p-ball" in capsys.readouterr().err
    assert not (tmp_path / "gauss_paths.csv").exists()


def test_poisson_xi_artifact(tmp_path):
    spec = {"H": 0.25, "body": SQUARE, "points": [[1, 0], [0.5, 0.5]]}
    assert _run(["simulate-poisson", "--spec", json.dumps(spec), "--seed", 3, "--n-paths", 50, "--output-dir", tmp_path]) == 0
    lines = (tmp_path / "poisson_xi.csv").read_text().splitlines()
    assert lines[0] == "1.0 0.0,0.5 0.5"
    assert len(lines) == 51
    assert all("." not in v for v in lines[1].split(","))
    meta = json.loads((tmp_path / "poisson_xi.csv.meta.json").read_text())
    assert meta["config"]["seed"] == 3
    assert meta["meta"]["counters"]["proposals"] > 0


def test_verify_single_target(tmp_path, capsys):
    assert _run(["verify", "identities", "--seed", 0, "--output-dir", tmp_path]) == 0
    assert "PASS identities" in capsys.readouterr().out
    assert json.loads((tmp_path / "verify_identities.json").read_text())["passed"] is True


def test_verify_unknown_target(tmp_path):
    assert _run(["verify", "nothing", "--seed", 0, "--output-dir", tmp_path]) == 2


# --- determinism ---------------------------------------------------------------------------


def _subprocess(args, cwd, threads):
    # same relative output directory so the sidecars are comparable byte for byte
    cwd.mkdir()
    env = {**os.environ, "MINKFIELD_THREADS": str(threads)}
    cmd = [sys.executable, "-m", "minkfield.cli", *map(str, args), "--output-dir", "out"]
    res = subprocess.run(cmd, cwd=cwd, env=env, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return cwd / "out"


@pytest.mark.parametrize(
    "args,artifact",
    [
        (["simulate-poisson", "--spec", json.dumps({"H": 0.3, "body": SQUARE, "points": [[1, 0], [0.2, 0.7]]}),
          "--seed", 11, "--n-paths", 1200], "poisson_xi.csv"),
        (["simulate-gauss", "--spec", json.dumps({"H": 0.4, "body": L1, "points": [[1, 0], [0.2, 0.7]]}),
          "--seed", 11, "--n-paths", 1200], "gauss_paths.csv"),
        (["body", "transform", "--spec", json.dumps({"body": SQUARE, "transform": "associated", "H": 0.25}),
          "--seed", 11, "--n-samples", 20000, "--grid", 16], "body_associated.csv"),
    ],
    ids=["poisson", "gauss", "associated-body"],
)
def test_byte_identical_across_runs_and_threads(tmp_path, args, artifact):
    outs = []
    for i, threads in enumerate((1, 3, 3)):
        out = _subprocess(args, tmp_path / f"run{i}", threads)
        outs.append((_read(out / artifact), _read(out / (artifact + ".meta.json"))))
    assert outs[0] == outs[1] == outs[2]
