"""Command-line pipeline: exit codes, file formats, round trips."""

import csv
import json

import numpy as np
import pytest

from portdyn.cli import load_design, main, save_design
from portdyn.config import ConfigError


def run(argv):
    return main([str(a) for a in argv])


class TestDesignFile:
    def test_round_trip(self, tmp_path):
        k = np.arange(32.0).reshape(4, 8) * 0.01
        p = tmp_path / "design.csv"
        save_design(p, 0.0234, k)
        theta, k2 = load_design(p)
        assert theta == pytest.approx(0.0234, rel=1e-7)
        assert np.allclose(k2, k, atol=1e-9)

    def test_header_line(self, tmp_path):
        p = tmp_path / "design.csv"
        save_design(p, 0.03, np.zeros((4, 8)))
        lines = p.read_text().splitlines()
        assert lines[0] == "# portdyn design v1"
        assert lines[1].startswith("theta_hat,k00,k01")

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "junk.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigError):
            load_design(p)


class TestValidateCube:
    def test_passes_at_reference_mesh(self, tmp_path):
        rc = run(["validate-cube", "--out", tmp_path, "--n-elem", 5])
        assert rc == 0
        head = (tmp_path / "modes.csv").read_text().splitlines()
        assert head[0] == "# portdyn modes v1"
        rows = [r for r in head[2:]]
        assert len(rows) == 8
        fr = (tmp_path / "freqresp.csv").read_text().splitlines()
        assert fr[0] == "# portdyn freqresp v1"
        assert len(fr) == 202  # banner, header, 200 grid points

    def test_mode_table_content(self, tmp_path):
        run(["validate-cube", "--out", tmp_path, "--n-elem", 2])
        with open(tmp_path / "modes.csv") as fh:
            rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
        first = dict(zip(rows[0], rows[1]))
        # coarse mesh still lands within a percent of the fine port model
        assert float(first["omega_port"]) == pytest.approx(16.82, rel=2e-2)
        assert float(first["omega_oracle"]) == pytest.approx(
            float(first["omega_port"]), rel=1e-4
        )


class TestAnalyze:
    def test_outputs(self, tmp_path):
        rc = run(["analyze", "--out", tmp_path, "--n-elem", 2])
        assert rc == 0
        orders = dict(
            ln.split() for ln in (tmp_path / "orders.txt").read_text().splitlines()
        )
        assert orders["order_full"] == "1584"
        assert orders["removed_near_zero"] == "540"
        assert int(orders["order_reduced"]) < int(orders["order_low"])
        mass = dict(
            ln.split() for ln in (tmp_path / "mass.txt").read_text().splitlines()
        )
        assert float(mass["truss_mass_kg"]) == pytest.approx(183.113, rel=1e-4)
        assert float(mass["total_mass_kg"]) == pytest.approx(1165.513, rel=1e-4)
        with open(tmp_path / "reduction.csv") as fh:
            rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
        body = np.array(rows[1:], dtype=float)
        assert body.shape == (200, 4)
        # the kept band reproduces the full response where it matters
        in_band = body[(body[:, 0] > 0.1) & (body[:, 0] < 100.0)]
        assert np.max(in_band[:, 2] / in_band[:, 1]) < 1e-6


class TestErrorPaths:
    def test_malformed_config_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"truss": {"hh": 1}}')
        rc = run(["analyze", "--config", bad, "--out", tmp_path])
        assert rc == 1
        assert "truss.hh" in capsys.readouterr().err

    def test_json_syntax_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        rc = run(["analyze", "--config", bad, "--out", tmp_path])
        assert rc == 1
        assert ":1:" in capsys.readouterr().err

    def test_missing_design_exit_1(self, tmp_path):
        missing = tmp_path / "none.csv"
        missing.write_text("a,b\n")
        rc = run(["worstcase", "--design", missing, "--out", tmp_path])
        assert rc == 1


class TestCodesignRoundTrip:
    def test_degenerate_run_and_sweep(self, tmp_path):
        doc = {
            "codesign": {
                "n_particles": 1,
                "n_iter": 1,
                "inner_budget": 0,
                "nominal_only": True,
                "fixed_h": 0.03,
            },
            "sweep": {"n_tau": 2, "polish_evals": 0},
        }
        cfgp = tmp_path / "run.json"
        cfgp.write_text(json.dumps(doc))
        rc = run(
            ["codesign", "--config", cfgp, "--out", tmp_path, "--n-elem", 2]
        )
        assert rc == 0
        theta, k = load_design(tmp_path / "design.csv")
        assert theta == pytest.approx(0.03)
        assert np.array_equal(k, -np.ones((4, 8)))  # untouched warm start
        with open(tmp_path / "pso_log.csv") as fh:
            rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
        assert rows[0][:3] == ["iteration", "particle", "h"]
        assert len(rows) == 2

        # the saved design feeds straight into the sweep; zero gain so
        # the effort check passes
        save_design(tmp_path / "design.csv", 0.03, np.zeros((4, 8)))
        rc = run(
            [
                "worstcase", "--config", cfgp, "--design",
                tmp_path / "design.csv", "--out", tmp_path, "--n-elem", 2,
            ]
        )
        assert rc == 0
        with open(tmp_path / "sweep.csv") as fh:
            rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
        assert rows[0][0] == "tau"
        assert len(rows) == 3
        body = np.array(rows[1:], dtype=float)
        assert np.all(body[:, 4] <= 1.0)  # sup_effort column
