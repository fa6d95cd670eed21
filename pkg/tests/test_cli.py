import csv
import json
import math

import numpy as np
import pytest

from kho import __version__
from kho.cli import ConfigError, main, parse_angle, read_config_file, resolve_config
from kho.export import read_pgm

PI = math.pi


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def sidecar(path):
    return json.loads((path.parent / (path.name + ".json")).read_text())


class TestParseAngle:
    @pytest.mark.parametrize("text,value", [("pi/3", PI / 3), ("2pi/3", 2 * PI / 3),
                                            ("2*pi/3", 2 * PI / 3), ("pi", PI), ("-pi/2", -PI / 2),
                                            ("1.33pi", 1.33 * PI), ("0.44 * pi", 0.44 * PI),
                                            ("1.0471975511965976", 1.0471975511965976), ("0", 0.0)])
    def test_values(self, text, value):
        assert parse_angle(text) == value

    def test_symbolic_equals_raw(self):
        assert parse_angle("pi/3") == parse_angle(repr(PI / 3))
        assert parse_angle("2pi/3") == parse_angle(repr(2 * PI / 3))

    @pytest.mark.parametrize("bad", ["pie", "pi/0", "", "3/pi", "two pi"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            parse_angle(bad)


class TestConfig:
    def test_file_with_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# kicked oscillator\nK = 2, 0.5\nalpha = 2pi/3  # crystal\n\nhbar-target = 1\n")
        assert read_config_file(p) == {"K": "2, 0.5", "alpha": "2pi/3", "hbar_target": "1"}

    def test_flags_override_file(self):
        cfg = resolve_config("wigner", {"alpha": "pi/2", "n": "2"}, {"n": 4})
        assert cfg["alpha"] == PI / 2 and cfg["n"] == 4

    def test_defaults(self):
        cfg = resolve_config("web", {}, {})
        assert cfg["seed"] == 0 and cfg["K"] == [2.0] and cfg["n_iter"] == 5000

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            resolve_config("wigner", {"n_iter": "10"}, {})

    def test_grid_override_needs_both(self):
        with pytest.raises(ConfigError):
            resolve_config("evolve", {"n_points": "512"}, {})

    def test_validation_before_running(self):
        with pytest.raises(ConfigError):
            resolve_config("evolve", {"hbar": "0.9, -1"}, {})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "absent.cfg")


class TestExitCodes:
    def test_unknown_key_in_file(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("frobnicate = 1\n")
        assert main(["wigner", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_bad_angle(self, tmp_path):
        assert main(["evolve", "--alpha", "pie", "--out", str(tmp_path)]) == 2

    def test_unknown_flag(self, capsys):
        assert main(["evolve", "--bogus", "1"]) == 2

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_grid_overflow(self, tmp_path, capsys):
        code = main(["evolve", "--K", "7.4", "--hbar", "0.9", "--n", "2", "--n-points", "128",
                     "--q-max", "6", "--out", str(tmp_path)])
        assert code == 3
        err = capsys.readouterr().err
        assert "kho_step" in err and "step" in err

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["evolve", "--n", "0", "--out", str(blocker / "sub")]) == 4


@pytest.fixture(scope="module")
def wigner_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("wigner")
    argv = ["wigner", "--K", "2", "--alpha", "pi/3", "--phi", "0", "--hbar", "0.9", "--n", "1",
            "--out", str(out)]
    assert main(argv) == 0
    return out, argv


class TestWignerCommand:
    def test_outputs(self, wigner_run):
        out, _ = wigner_run
        names = sorted(p.name for p in out.iterdir())
        assert names == ["wigner_K2_hbar0p9_n1.csv", "wigner_K2_hbar0p9_n1.csv.json",
                         "wigner_K2_hbar0p9_n1.pgm", "wigner_K2_hbar0p9_n1.pgm.json"]

    def test_sidecar(self, wigner_run):
        out, _ = wigner_run
        meta = sidecar(out / "wigner_K2_hbar0p9_n1.csv")
        assert meta["artifact_version"] == __version__
        assert meta["config"]["alpha"] == PI / 3 and meta["config"]["hbar"] == [0.9]
        assert meta["negativity_volume"] > 0

    def test_csv_round_trips(self, wigner_run):
        out, _ = wigner_run
        rows = read_rows(out / "wigner_K2_hbar0p9_n1.csv")
        assert rows[0] == ["Q", "P", "W"]
        W = np.array([float(r[2]) for r in rows[1:]])
        meta = sidecar(out / "wigner_K2_hbar0p9_n1.csv")["axes"]
        assert len(W) == meta["q_axis"]["count"] * meta["p_axis"]["count"]
        total = W.sum() * meta["q_axis"]["step"] * meta["p_axis"]["step"]
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_pgm(self, wigner_run):
        out, _ = wigner_run
        img = read_pgm(out / "wigner_K2_hbar0p9_n1.pgm")
        meta = sidecar(out / "wigner_K2_hbar0p9_n1.pgm")
        assert img.shape == (meta["axes"]["p_axis"]["count"], meta["axes"]["q_axis"]["count"])
        assert img.max() == 65535 or img.min() == 0
        assert meta["image"]["zero_level"] == 32767.5

    def test_rerun_is_byte_identical(self, wigner_run, tmp_path):
        out, argv = wigner_run
        argv = argv[:-1] + [str(tmp_path)]
        assert main(argv) == 0
        for p in out.iterdir():
            again = tmp_path / p.name
            if p.suffix == ".json":
                a, b = json.loads(p.read_text()), json.loads(again.read_text())
                assert a["config"].pop("out") != b["config"].pop("out")
                assert a == b
            else:
                assert again.read_bytes() == p.read_bytes()


def test_purity_sweep(tmp_path):
    code = main(["purity", "--K", "2", "--K", "0.5", "--alpha", "2pi/3",
                 "--hbar", "0.05,0.1,0.5,1.0,1.5", "--n", "3", "--out", str(tmp_path)])
    assert code == 0
    curves = sorted(tmp_path.glob("purity_K*.csv"))
    assert len(curves) == 10
    for path in curves:
        rows = read_rows(path)
        assert rows[0] == ["n", "purity", "abs_f", "arg_f"]
        assert len(rows) == 5 and float(rows[1][1]) == pytest.approx(1.0, abs=1e-12)
        assert sidecar(path)["config"]["alpha"] == 2 * PI / 3
    summary = read_rows(tmp_path / "purity_summary.csv")
    assert len(summary) == 11 and all(r[3] == "ok" for r in summary[1:])


class TestParams:
    def test_report(self, capsys):
        assert main(["params", "--lambda", "632.8e-9", "--f", "0.15", "--alpha", "pi/3",
                     "--hbar-target", "0.9"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["lens_spacing_m"] == pytest.approx(0.075, abs=1e-15)
        assert report["kick_frequency_per_m"] == pytest.approx(8.29e3, rel=1e-3)

    def test_max_kicks(self, capsys):
        assert main(["params", "--t-slm", "0.955", "--floor", "0.01"]) == 0
        assert json.loads(capsys.readouterr().out)["max_kicks"] == 100

    def test_text_format(self, capsys):
        assert main(["params", "--format", "text"]) == 0
        assert "lens_spacing_m" in capsys.readouterr().out

    def test_alpha_out_of_range(self):
        assert main(["params", "--alpha", "pi"]) == 2


def test_evolve_outputs(tmp_path):
    assert main(["evolve", "--K", "1", "--hbar", "0.9", "--n", "2", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "moments_K1_hbar0p9.csv")
    assert len(rows) == 4
    assert all(abs(float(r[1]) - 1.0) < 1e-12 for r in rows[1:])
    assert (tmp_path / "state_K1_hbar0p9_n2.csv.json").exists()


def test_web_seeded_and_deterministic(tmp_path):
    argv = ["web", "--K", "0", "--K", "2", "--alpha", "2pi/3", "--n-iter", "200"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    for name in ("web_K0.csv", "web_K2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifold_with_liouville(tmp_path):
    code = main(["manifold", "--K", "2", "--alpha", "2pi/3", "--phi", "1.33pi", "--n", "2",
                 "--samples", "10000", "--bins", "50", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "manifold_K2_hbar0p9.csv").exists()
    rows = read_rows(tmp_path / "liouville_K2_hbar0p9_n2.csv")
    assert len(rows) == 1 + 50 * 50
