import json

import numpy as np
import pytest
from click.testing import CliRunner

from rankone import cli
from rankone.core import make_module, sample_sphere
from rankone.glwc import ADiag, LambdaMatrix, n_from_lambda
from rankone.wspace import WPoint, k_to_point


@pytest.fixture
def runner():
    return CliRunner()


def test_info(runner):
    res = runner.invoke(cli.main, ["info", "--d", "2", "--n", "1"])
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["name"] == "CP^2"
    assert data["dim_w"] == 4
    assert abs(data["volume"] - np.pi ** 2 / 2) < 1e-12
    res = runner.invoke(cli.main, ["info", "--d", "8", "--n", "1"])
    assert json.loads(res.output)["name"] == "OP^2"
    res = runner.invoke(cli.main, ["info", "--d", "1", "--n", "2"])
    assert json.loads(res.output)["name"] == "RP^3"
    res = runner.invoke(cli.main, ["info", "--d", "5", "--n", "0"])
    assert json.loads(res.output)["name"] == "S^5"
    res = runner.invoke(cli.main, ["info", "--d", "3", "--n", "1"])
    assert res.exit_code == 2


def test_info_deterministic(runner):
    outs = [runner.invoke(cli.main, ["info", "--d", "4", "--n", "2"]).output
            for _ in range(2)]
    assert outs[0] == outs[1]


@pytest.mark.parametrize("suite", ["algebra", "j2", "volume", "curvature",
                                   "charts", "decompositions",
                                   "collineations", "appendix", "isometry"])
def test_verify_suites(runner, suite):
    res = runner.invoke(cli.main, ["verify", "--d", "2", "--n", "1",
                                   "--suite", suite, "--samples", "20"])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["passed"] is True
    assert all(c["passed"] for c in data["checks"])


def test_verify_all_deterministic(runner):
    args = ["verify", "--d", "1", "--n", "2", "--suite", "all",
            "--samples", "10"]
    outs = [runner.invoke(cli.main, args).output for _ in range(2)]
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["passed"] is True


def test_verify_csv(runner):
    res = runner.invoke(cli.main, ["verify", "--d", "2", "--n", "1",
                                   "--suite", "volume", "--format", "csv"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "name,max_violation,tol,passed"
    assert lines[1].startswith("volume_quadrature_rel,")


def test_verify_sphere(runner):
    res = runner.invoke(cli.main, ["verify", "--d", "4", "--n", "0",
                                   "--suite", "all", "--samples", "10"])
    assert res.exit_code == 0, res.output


def test_apply(runner, tmp_path):
    payload = {"space": {"d": 2, "n": 1},
               "word": [{"kind": "btheta", "theta": np.pi / 4}],
               "point": {"finite": {"zeta": [0.0, 0.0], "v": [0.0, 0.0]}}}
    path = tmp_path / "in.json"
    path.write_text(json.dumps(payload))
    res = runner.invoke(cli.main, ["apply", "--in", str(path)])
    assert res.exit_code == 0
    out = json.loads(res.output)
    np.testing.assert_allclose(out["point"]["finite"]["zeta"], [1.0, 0.0],
                               atol=1e-12)
    # schema error
    path.write_text(json.dumps({"space": {"d": 2, "n": 1}}))
    res = runner.invoke(cli.main, ["apply", "--in", str(path)])
    assert res.exit_code == 3


def test_distance(runner, tmp_path):
    payload = {"space": {"d": 2, "n": 1},
               "p": {"finite": {"zeta": [0.0, 0.0], "v": [0.0, 0.0]}},
               "q": {"infinity": {"frame": [[1.0, 0.0, 0.0, 0.0],
                                            [0.0, 1.0, 0.0, 0.0]]}}}
    path = tmp_path / "in.json"
    path.write_text(json.dumps(payload))
    res = runner.invoke(cli.main, ["distance", "--in", str(path)])
    assert res.exit_code == 0
    assert json.loads(res.output)["distance"] == 1.5707963267948966
    # ball model rejects infinity points
    res = runner.invoke(cli.main, ["distance", "--in", str(path),
                                   "--model", "ball"])
    assert res.exit_code == 4


def test_decompose(runner, tmp_path, rng):
    spec = make_module(2, 1)
    entries = np.zeros((2, 2, 2))
    entries[1, 0] = [0.3, -0.2]
    g = k_to_point(spec, WPoint.from_vector(
        spec, sample_sphere(rng, 4))).mat \
        @ ADiag([1.5, 0.7]).as_matrix(spec) \
        @ n_from_lambda(spec, LambdaMatrix(entries)).mat
    path = tmp_path / "in.json"
    path.write_text(json.dumps({"space": {"d": 2, "n": 1},
                                "mat": g.tolist()}))
    for kind in ("kan", "kak"):
        res = runner.invoke(cli.main, ["decompose", "--in", str(path),
                                       "--kind", kind])
        assert res.exit_code == 0
        assert json.loads(res.output)["round_trip_error"] < 1e-12
    path.write_text(json.dumps({"space": {"d": 2, "n": 1},
                                "mat": [[1.0, 0.0], [0.0, 1.0]]}))
    res = runner.invoke(cli.main, ["decompose", "--in", str(path)])
    assert res.exit_code == 3


def test_cayley(runner, tmp_path):
    payload = {"space": {"d": 2, "n": 1},
               "point": {"zeta": [0.0, 0.0], "v": [0.0, 0.0]}}
    path = tmp_path / "in.json"
    path.write_text(json.dumps(payload))
    res = runner.invoke(cli.main, ["cayley", "--in", str(path)])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["zeta"] == [1, 0] and out["v"] == [0, 0]
    # round trip through the inverse
    path.write_text(json.dumps({"space": {"d": 2, "n": 1},
                                "point": out}))
    # drop the extra key for the schema
    data = json.loads(path.read_text())
    data["point"].pop("height", None)
    path.write_text(json.dumps(data))
    res = runner.invoke(cli.main, ["cayley", "--in", str(path),
                                   "--inverse"])
    out = json.loads(res.output)
    np.testing.assert_allclose(out["zeta"], [0.0, 0.0], atol=1e-14)
    # domain error outside the ball
    path.write_text(json.dumps({"space": {"d": 2, "n": 1},
                                "point": {"zeta": [2.0, 0.0],
                                          "v": [0.0, 0.0]}}))
    res = runner.invoke(cli.main, ["cayley", "--in", str(path)])
    assert res.exit_code == 4


def test_out_file(runner, tmp_path):
    target = tmp_path / "out.json"
    res = runner.invoke(cli.main, ["info", "--d", "2", "--n", "0",
                                   "--out", str(target)])
    assert res.exit_code == 0
    assert json.loads(target.read_text())["name"] == "S^2"
