import json

import numpy as np
import pytest

from weylab import cli
from weylab.discretize import load_matrix
from weylab.errors import BranchLoss


@pytest.fixture()
def config_path(tmp_path):
    raw = {
        "symbol": {"n": 1, "m": 2,
                   "coeffs": {"0": [[0, 0, 1, 0.0, 1.0]],
                              "2": [[0, 0, 0, 1.0, 0.0]]}},
        "perturbation": {"alpha_min": 0, "alpha_max": 0, "rho": 1.2,
                         "K_q": 16},
        "domains": [{"type": "rectangle", "re_min": 0.1, "re_max": 0.7,
                     "im_min": -0.5, "im_max": 0.5}],
        "experiment": {"mode": "semiclassical", "h_list": [0.1],
                       "trials": 2},
        "seed": 9,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return str(path)


@pytest.fixture()
def he_config_path(tmp_path):
    raw = {
        "symbol": {"n": 1, "m": 2, "semiclassical": False,
                   "coeffs": {"2": [[0, 0, 1, 1.0, 0.0]]}},
        "perturbation": {"alpha_min": 0, "alpha_max": 0, "rho": 1.1,
                         "K_q": 16},
        "domains": [{"type": "sector", "theta_min": 0.05,
                     "theta_max": 6.2331853, "r_out": 1.0}],
        "experiment": {"mode": "highenergy", "lambda_list": [2.0, 4.0],
                       "trials": 2},
        "seed": 5,
    }
    path = tmp_path / "he_config.json"
    path.write_text(json.dumps(raw))
    return str(path)


class TestSubcommands:
    def test_roots(self, config_path, capsys):
        assert cli.main(["roots", "--config", config_path,
                         "--z", "0.5,0.0"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["beta"] == out["gamma"] == 1
        xs = sorted(r["x"] for r in out["roots"])
        assert xs[0] == pytest.approx(xs[1])

    def test_weyl(self, config_path, capsys):
        assert cli.main(["weyl", "--config", config_path,
                         "--domain", "0"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["measure"] > 0.0
        assert out["prediction"]["0.1"] == pytest.approx(
            out["measure"] / (2 * np.pi * 0.1))

    def test_symbol_scan(self, config_path, tmp_path, capsys):
        rc = cli.main(["symbol-scan", "--config", config_path,
                       "--grid", "4x4", "--zbox", "0.2,0.6,-0.3,0.3",
                       "--out", str(tmp_path / "scan")])
        assert rc == 0
        lines = (tmp_path / "scan" / "region_map.csv").read_text().strip()
        rows = lines.split("\n")
        assert rows[0] == "re,im,region,beta,gamma"
        assert len(rows) == 17

    def test_assemble_and_reload(self, config_path, tmp_path, capsys):
        out = tmp_path / "mat.txt"
        rc = cli.main(["assemble", "--config", config_path, "--h", "0.2",
                       "--K", "8", "--out", str(out)])
        assert rc == 0
        mat = load_matrix(out)
        assert mat.trunc.K == 8

    def test_spectrum_deterministic(self, config_path, tmp_path):
        args = ["spectrum", "--config", config_path, "--h", "0.1",
                "--delta", "1e-4", "--trial", "1"]
        assert cli.main(args + ["--out", str(tmp_path / "s1")]) == 0
        assert cli.main(args + ["--out", str(tmp_path / "s2")]) == 0
        a = (tmp_path / "s1" / "spectrum.csv").read_bytes()
        b = (tmp_path / "s2" / "spectrum.csv").read_bytes()
        assert a == b

    def test_pseudospec(self, config_path, tmp_path):
        rc = cli.main(["pseudospec", "--config", config_path, "--h", "0.2",
                       "--grid", "0.2:0.6:3,-0.2:0.2:3",
                       "--out", str(tmp_path / "ps")])
        assert rc == 0
        rows = (tmp_path / "ps" / "sigma_min.csv").read_text().strip()
        assert len(rows.split("\n")) == 10

    def test_quasimode(self, config_path, tmp_path):
        rc = cli.main(["quasimode", "--config", config_path,
                       "--z", "0.5,0.0", "--h", "0.1",
                       "--out", str(tmp_path / "qm")])
        assert rc == 0
        table = (tmp_path / "qm" / "quasimode_plus_0.csv").read_text()
        assert table.startswith("x re0 im0")

    def test_mc_semiclassical(self, config_path, tmp_path):
        rc = cli.main(["mc-semiclassical", "--config", config_path,
                       "--out", str(tmp_path / "mc")])
        assert rc == 0
        assert (tmp_path / "mc" / "trials.csv").exists()
        assert (tmp_path / "mc" / "summary.json").exists()

    def test_mc_highenergy(self, he_config_path, tmp_path):
        rc = cli.main(["mc-highenergy", "--config", he_config_path,
                       "--out", str(tmp_path / "he")])
        assert rc == 0
        summary = json.loads(
            (tmp_path / "he" / "summary.json").read_text())
        assert summary["mode"] == "highenergy"


class TestExitCodes:
    def test_missing_config_is_config_error(self, tmp_path, capsys):
        rc = cli.main(["roots", "--config", str(tmp_path / "nope.json"),
                       "--z", "0,0"])
        assert rc == 2

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["roots", "--config", str(bad), "--z", "0,0"]) == 2

    def test_mode_mismatch(self, config_path, tmp_path, capsys):
        rc = cli.main(["mc-highenergy", "--config", config_path,
                       "--out", str(tmp_path / "x")])
        assert rc == 2

    def test_no_plus_root_is_hypothesis_violation(self, config_path,
                                                  tmp_path, capsys):
        rc = cli.main(["quasimode", "--config", config_path, "--z", "5,5",
                       "--h", "0.1", "--out", str(tmp_path / "qm")])
        assert rc == 2

    def test_numerical_failure_maps_to_three(self, config_path, tmp_path,
                                             monkeypatch, capsys):
        def boom(*a, **kw):
            raise BranchLoss("stalled")
        monkeypatch.setattr(cli.quasimode, "build_quasimode", boom)
        rc = cli.main(["quasimode", "--config", config_path, "--z", "0.5,0.0",
                       "--h", "0.1", "--out", str(tmp_path / "qm")])
        assert rc == 3
