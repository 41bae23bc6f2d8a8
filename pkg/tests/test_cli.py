import json

import numpy as np
import pytest

from sumou.analytic import MSDCurve
from sumou.cli import build_model, main, run_experiment


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSpectrumCommand:
    def test_rouse_eight(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--family", "rouse", "--n", "8")
        assert code == 0
        doc = json.loads(out)
        expected = np.sort(np.unique(np.round(4 * np.sin(np.pi * np.arange(8) / 8) ** 2, 12)))
        assert np.allclose(doc["values"], [0.0, 2 - np.sqrt(2), 2.0, 2 + np.sqrt(2), 4.0])
        assert doc["multiplicities"] == [1, 2, 2, 2, 1]
        assert len(expected) == 5

    def test_complete_paper_normalization(self, capsys):
        code, out, _ = run_cli(
            capsys, "spectrum", "--family", "complete", "--n", "3", "--kappa", "0.5"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["values"] == [0.0, 1.5]
        assert doc["multiplicities"] == [1, 2]

    def test_product_pairwise_sums(self, capsys):
        code, out, _ = run_cli(
            capsys, "spectrum", "--family", "product", "--of", "rouse:4,rouse:4"
        )
        assert code == 0
        doc = json.loads(out)
        lam = 4 * np.sin(np.pi * np.arange(4) / 4) ** 2
        pairwise = np.sort((lam[:, None] + lam[None, :]).ravel())
        flat = np.repeat(doc["values"], doc["multiplicities"])
        assert flat.size == 16
        assert np.allclose(flat, pairwise, atol=1e-8)

    def test_shape_check(self, capsys):
        code, out, _ = run_cli(
            capsys, "spectrum", "--family", "rouse", "--n", "32", "--shape-check"
        )
        assert code == 0
        assert json.loads(out)["shape_sup_distance"] < 1e-12


class TestMsdCommands:
    def test_analytic_finite_csv(self, capsys, tmp_path):
        out_file = tmp_path / "msd.csv"
        code, _, _ = run_cli(
            capsys,
            "msd-analytic", "--family", "rouse", "--n", "64",
            "--t-min", "0.1", "--t-max", "10", "--n-points", "12",
            "--out", str(out_file),
        )
        assert code == 0
        text = out_file.read_text()
        assert "config_digest=" in text and "version=" in text
        curve = MSDCurve.from_csv(text)
        assert curve.provenance == "analytic-finite"
        assert curve.times.size == 12

    def test_analytic_limit_csv(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "msd-analytic", "--family", "power", "--rho", "2", "--n", "10",
            "--method", "analytic-limit",
            "--t-min", "1", "--t-max", "100", "--n-points", "8",
        )
        assert code == 0
        assert MSDCurve.from_csv(out).provenance == "analytic-limit"

    def test_simulate_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = [
            "msd-simulate", "--family", "rouse", "--n", "8",
            "--t-min", "0.5", "--t-max", "5", "--n-points", "4",
            "--n-paths", "200", "--seed", "7",
        ]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
        curve = MSDCurve.from_csv(a.read_text())
        assert curve.stderr is not None

    def test_simulate_requires_seed(self, capsys):
        # argparse exits directly on missing required flags, code 2
        with pytest.raises(SystemExit) as exc:
            main([
                "msd-simulate", "--family", "rouse", "--n", "8",
                "--t-min", "0.5", "--t-max", "5",
            ])
        capsys.readouterr()
        assert exc.value.code == 2


class TestFitCommand:
    def test_fit_from_csv(self, capsys, tmp_path):
        t = np.geomspace(0.1, 100, 20)
        curve = MSDCurve(t, 3.0 * t ** 0.5, "analytic-limit")
        csv = tmp_path / "msd.csv"
        csv.write_text(curve.to_csv())
        code, out, _ = run_cli(capsys, "fit-exponent", "--csv", str(csv), "--window", "0.09:101")
        assert code == 0
        doc = json.loads(out)
        assert doc["nu"] == pytest.approx(0.5, abs=1e-10)


class TestRunCommand:
    def config(self):
        return {
            "model": {"family": "rouse", "n": 256, "kappa": 1.0},
            "grid": {"kind": "geometric", "t_min": 2.6, "t_max": 400.0, "n_points": 24},
            "method": "analytic-finite",
            "window": "auto",
        }

    def test_run_outputs(self, capsys, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(self.config()))
        code, out, _ = run_cli(
            capsys, "run", "--config", str(cfg), "--outdir", str(tmp_path / "out")
        )
        assert code == 0
        assert out.startswith("family=rouse method=analytic-finite nu=0.5")
        fit = json.loads((tmp_path / "out" / "fit.json").read_text())
        assert fit["nu"] == pytest.approx(0.5, abs=0.03)
        assert "config_digest" in fit

    def test_rerun_byte_identical(self, capsys, tmp_path):
        cfg = tmp_path / "config.json"
        config = self.config()
        config["method"] = "monte-carlo"
        config["seed"] = 11
        config["n_paths"] = 300
        config["window"] = [2.6, 400.0]
        cfg.write_text(json.dumps(config))
        for sub in ("out1", "out2"):
            assert main(["run", "--config", str(cfg), "--outdir", str(tmp_path / sub)]) == 0
        capsys.readouterr()
        for name in ("msd.csv", "fit.json"):
            assert (tmp_path / "out1" / name).read_bytes() == (
                tmp_path / "out2" / name
            ).read_bytes()

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        config = self.config()
        config["typo_key"] = 1
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        code, _, err = run_cli(capsys, "run", "--config", str(cfg))
        assert code == 2
        assert json.loads(err)["error"] == "invalid-argument"

    def test_monte_carlo_needs_seed(self, tmp_path):
        config = self.config()
        config["method"] = "monte-carlo"
        with pytest.raises(ValueError, match="seed"):
            run_experiment(config)

    def test_config_round_trip_lossless(self, tmp_path):
        config = self.config()
        text = json.dumps(config, sort_keys=True)
        assert json.dumps(json.loads(text), sort_keys=True) == text


class TestReportCommand:
    def test_only_rouse(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "report", "--only", "rouse", "--outdir", str(tmp_path)
        )
        assert code == 0
        assert out.count("\n") == 1 and "rouse" in out
        table = (tmp_path / "report.csv").read_text().strip().splitlines()
        assert len(table) == 2  # header + one row

    def test_unmatched_filter(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "report", "--only", "nonsense", "--outdir", str(tmp_path)
        )
        assert code == 2


class TestBuildModel:
    def test_all_families_build(self):
        specs = [
            {"family": "rouse", "n": 8},
            {"family": "circulant", "n": 12, "kappas": [1.0, 0.5]},
            {"family": "repulsive", "n": 24, "order": 2},
            {"family": "complete", "n": 5},
            {"family": "hypercube", "n_dims": 3},
            {"family": "product", "of": "rouse:4,rouse:6"},
            {"family": "power", "rho": 2.0, "n": 32},
            {"family": "random-coeff", "n": 16, "coeff_seed": 1},
            {"family": "random-string", "n": 8},
        ]
        for spec in specs:
            model = build_model(dict(spec))
            assert model.total_mass > 0

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            build_model({"family": "erdos-renyi", "n": 8})

    def test_serialized_model_document_accepted(self):
        from sumou.graph import rouse_cycle
        from sumou.model import distinguished_model

        original = distinguished_model(rouse_cycle(8, 1.0))
        doc = json.loads(original.to_json())
        rebuilt = build_model(doc)
        assert np.array_equal(rebuilt.lambdas, original.lambdas)
        assert np.array_equal(rebuilt.coefficients, original.coefficients)


class TestPathsOut:
    def test_raw_path_dump(self, capsys, tmp_path):
        paths_file = tmp_path / "paths.csv"
        code, out, _ = run_cli(
            capsys,
            "msd-simulate", "--family", "rouse", "--n", "4",
            "--t-min", "0.5", "--t-max", "2", "--n-points", "3",
            "--n-paths", "5", "--seed", "1", "--paths-out", str(paths_file),
        )
        assert code == 0
        lines = [l for l in paths_file.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "path_id,t,x"
        assert len(lines) == 1 + 5 * 3
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 0.5
