import csv
import json
import math

import pytest

from levysearch.cli import (
    DETECTION_COLUMNS,
    ExperimentConfig,
    main,
    parse_config,
    run,
)
from levysearch.errors import ConfigError


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class TestParseConfig:
    def test_defaults_give_cauchy(self):
        cfg = parse_config("n=10000\nwalk=levy\nmu=2.0\n")
        spec = cfg.walk_spec()
        assert spec.kind == "levy"
        assert spec.mu == 2.0
        assert spec.ell_max == 50.0        # forced to sqrt(n)/2

    def test_comments_and_blanks(self):
        cfg = parse_config("# a comment\n\nn=2500   # torus area\nseed=9\n")
        assert cfg.n == 2500.0
        assert cfg.seed == 9

    def test_mu_out_of_range(self):
        with pytest.raises(ConfigError, match="mu"):
            parse_config("mu=3.5\n")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="wlak"):
            parse_config("wlak=levy\n")

    def test_type_mismatch_named(self):
        with pytest.raises(ConfigError, match="n_trials"):
            parse_config("n_trials=many\n")

    def test_ell_max_override_rejected(self):
        with pytest.raises(ConfigError, match="ell_max"):
            parse_config("ell_max=100\n")

    def test_small_area_rejected(self):
        with pytest.raises(ConfigError, match="n"):
            parse_config("n=4\n")

    def test_seed_range(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_config(f"seed={2**64}\n")

    def test_two_scales_tau_in_header(self, tmp_path):
        cfg = parse_config("walk=two_scales\nL=100\nq=0.1\nn=2500\n"
                           "n_trials=20\nD=2\n")
        cfg = ExperimentConfig(**{**cfg.__dict__, "command": "simulate",
                                  "out": str(tmp_path)})
        assert run(cfg) == 0
        header = json.loads((tmp_path / "simulate_header.json").read_text())
        assert header["results"]["tau_analytic"] == pytest.approx(10.9,
                                                                  rel=1e-12)

    def test_bad_walk_kind(self):
        with pytest.raises(ConfigError, match="walk"):
            parse_config("walk=brownian\n")


class TestMainExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        code = main(["simulate", "--mu", "3.5", "--out", str(tmp_path)])
        assert code == 2
        assert "mu" in capsys.readouterr().err

    def test_domain_error_is_2_and_cleans_up(self, tmp_path, capsys):
        # diameter beyond sqrt(n)/2 passes static checks, fails in the run
        code = main(["simulate", "--n", "2500", "--D", "40", "--trials", "5",
                     "--out", str(tmp_path)])
        assert code == 2
        assert not list(tmp_path.iterdir())

    def test_success_is_0(self, tmp_path):
        code = main(["simulate", "--n", "2500", "--D", "3", "--trials", "30",
                     "--seed", "4", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "detection.csv")
        assert len(rows) == 1
        assert rows[0]["walk_kind"] == "levy"
        assert list(rows[0].keys()) == DETECTION_COLUMNS


class TestSweep:
    def test_grid_rows(self, tmp_path):
        code = main(["sweep", "--n", "2500", "--mu-grid", "1.6,2.0",
                     "--D-grid", "1,4", "--shapes", "disc,segment_h",
                     "--trials", "25", "--seed", "3", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "detection.csv")
        assert len(rows) == 2 * 2 * 2
        assert {r["shape"] for r in rows} == {"disc", "segment_h"}

    def test_byte_identical_rerun(self, tmp_path):
        args = ["sweep", "--n", "2500", "--mu-grid", "2.0", "--D-grid", "1,2",
                "--trials", "40", "--seed", "5", "--workers", "1"]
        out = tmp_path / "a"
        assert main(args + ["--out", str(out)]) == 0
        first_csv = (out / "detection.csv").read_bytes()
        first_header = (out / "sweep_header.json").read_bytes()
        assert main(args + ["--out", str(out)]) == 0
        assert (out / "detection.csv").read_bytes() == first_csv
        assert (out / "sweep_header.json").read_bytes() == first_header
        # a different output directory changes nothing but the header path
        other = tmp_path / "b"
        assert main(args + ["--out", str(other)]) == 0
        assert (other / "detection.csv").read_bytes() == first_csv


class TestSensitivity:
    def test_degenerate_grid(self, tmp_path):
        code = main(["sensitivity", "--n", "2500", "--D-grid", "1",
                     "--trials", "50", "--seed", "6", "--out", str(tmp_path)])
        assert code == 0
        header = json.loads((tmp_path / "sensitivity_header.json").read_text())
        rows = read_csv(tmp_path / "sensitivity.csv")
        assert len(rows) == 1
        ratio = float(rows[0]["ratio_to_opt"])
        assert header["results"]["phi"] == pytest.approx(ratio, rel=1e-12)
        assert header["results"]["argmax_D"] == 1.0

    def test_phi_is_max_ratio(self, tmp_path):
        code = main(["sensitivity", "--n", "900", "--D-grid", "1,2,4",
                     "--trials", "40", "--seed", "7", "--out", str(tmp_path)])
        assert code == 0
        header = json.loads((tmp_path / "sensitivity_header.json").read_text())
        rows = read_csv(tmp_path / "sensitivity.csv")
        ratios = [float(r["ratio_to_opt"]) for r in rows]
        assert header["results"]["phi"] == pytest.approx(max(ratios), rel=1e-12)


class TestFig2:
    def test_cartesian_contract(self, tmp_path):
        code = main(["fig2", "--n", "2500", "--mu-grid", "1.8,2.0,2.6",
                     "--D-grid", "1,3,9", "--trials", "20", "--seed", "8",
                     "--out", str(tmp_path)])
        assert code == 0
        heat = read_csv(tmp_path / "heatmap.csv")
        assert len(heat) == 3 * 3
        assert list(heat[0].keys()) == ["mu", "D", "ratio_to_opt"]
        curve = read_csv(tmp_path / "mu_sensitivity.csv")
        assert len(curve) == 3
        assert [float(r["mu"]) for r in curve] == [1.8, 2.0, 2.6]

    def test_rerun_identical(self, tmp_path):
        args = ["fig2", "--n", "2500", "--mu-grid", "2.0", "--D-grid", "1,2",
                "--trials", "15", "--seed", "9"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("heatmap.csv", "mu_sensitivity.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestVerify:
    def test_subset_and_artifacts(self, tmp_path):
        code = main(["verify", "--checks", "lb,distance", "--n-samples",
                     "60000", "--seed", "10", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "checks.csv")
        names = [r["name"] for r in rows]
        assert "lemma_lb_ring" in names
        assert sum(n.startswith("distance_claims_m") for n in names) == 3
        for row in rows:
            detail = tmp_path / row["detail_file"]
            doc = json.loads(detail.read_text())
            assert doc["name"] == row["name"]
            assert doc["passed"] == (row["passed"] == "True")

    def test_unknown_check_rejected(self, tmp_path, capsys):
        code = main(["verify", "--checks", "nonsense", "--out", str(tmp_path)])
        assert code == 2
        assert "checks" in capsys.readouterr().err


class TestConfigObject:
    def test_caps_default(self):
        cfg = ExperimentConfig(n=1e4)
        max_steps, max_time = cfg.caps(5.0)
        assert max_time == pytest.approx(200.0 * (1e4 / 5.0)
                                         * math.log(1e4) ** 3)

    def test_caps_override(self):
        cfg = ExperimentConfig(n=1e4, max_steps=100, max_time=50.0)
        assert cfg.caps(1.0) == (100, 50.0)
