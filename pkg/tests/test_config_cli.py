import os

import pytest

from cavityparity.cli import (EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, main,
                              run_experiment)
from cavityparity.config import (ExperimentConfig, parse_config,
                                 serialize_config)
from cavityparity.errors import ConfigError
from cavityparity.params import SystemParams


MINIMAL_ANALYTICS = """
[run]
experiment = analytics-table

[grid]
c_values = 1,5,10,20,40
"""

TRAJECTORY_STYLE = """
[run]
experiment = trajectory
runs = 3
base_seed = 42

[params]
gamma0 = 0.1
gamma1 = 0.1
g = 1.0
omega = 1.0
delta = 50.0

[trajectory]
n_samples = 12
"""


class TestParseConfig:
    def test_minimal_analytics(self):
        cfg = parse_config(MINIMAL_ANALYTICS)
        assert cfg.experiment == "analytics-table"
        assert cfg.c_values == (1.0, 5.0, 10.0, 20.0, 40.0)
        assert cfg.model == "effective"
        assert cfg.params.eta == 1.0
        assert cfg.params.n_max == 3

    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigError, match="run.bogus"):
            parse_config("[run]\nexperiment = trajectory\nbogus = 1\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="mystery"):
            parse_config("[run]\nexperiment = trajectory\n[mystery]\na = 1\n")

    def test_constraint_violation(self):
        with pytest.raises(ConfigError, match="eta"):
            parse_config("[run]\nexperiment = trajectory\n"
                         "[params]\neta = 1.5\n")

    def test_type_mismatch_names_key(self):
        with pytest.raises(ConfigError, match="runs"):
            parse_config("[run]\nexperiment = trajectory\nruns = many\n")

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            parse_config("[run]\nexperiment = frobnicate\n")

    def test_round_trip(self):
        cfg = parse_config(TRAJECTORY_STYLE)
        again = parse_config(serialize_config(cfg))
        assert again == cfg

    def test_g_shorthand_sets_both_couplings(self):
        cfg = parse_config("[run]\nexperiment = trajectory\n"
                           "[params]\ng = 2.0\n")
        assert cfg.params.g1 == 2.0
        assert cfg.params.g2 == 2.0

    def test_default_t_max(self):
        cfg = parse_config(TRAJECTORY_STYLE)
        # 3 / (eta * kappa_eff) with kappa_eff = 4e-4
        assert cfg.resolved_t_max() == pytest.approx(7500.0)


class TestRunExperiment:
    def test_analytics_reference_row(self, tmp_path):
        cfg = parse_config(MINIMAL_ANALYTICS)
        cfg = ExperimentConfig(**{**cfg.__dict__,
                                  "output_path": str(tmp_path)})
        assert run_experiment(cfg) == EXIT_OK
        lines = (tmp_path / "analytics.csv").read_text().splitlines()
        assert lines[0] == "C,eta,f_av,p_suc"
        first = [float(x) for x in lines[1].split(",")]
        assert first[2] == pytest.approx(0.8791, abs=1e-4)
        assert first[3] == pytest.approx(0.4067, abs=1e-4)

    def test_trajectory_schema_and_determinism(self, tmp_path):
        cfg = parse_config(TRAJECTORY_STYLE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_experiment(ExperimentConfig(**{**cfg.__dict__,
                                           "output_path": str(out1)}))
        run_experiment(ExperimentConfig(**{**cfg.__dict__,
                                           "output_path": str(out2)}))
        t1 = (out1 / "trajectory.csv").read_bytes()
        t2 = (out2 / "trajectory.csv").read_bytes()
        assert t1 == t2
        assert t1.startswith(b"time,p_D,p_L,p_H\n")
        e1 = (out1 / "events.csv").read_bytes()
        e2 = (out2 / "events.csv").read_bytes()
        assert e1 == e2
        assert e1.startswith(b"run,time,channel,detected\n")
        assert b"\r" not in t1

    def test_robustness_closed_form_column(self, tmp_path):
        text = ("[run]\nexperiment = robustness\nruns = 20\n"
                "[params]\ngamma0 = 0.1\ngamma1 = 0.1\n"
                "[grid]\nepsilon_values = 0.0,0.5\n")
        cfg = parse_config(text)
        run_experiment(ExperimentConfig(**{**cfg.__dict__,
                                           "output_path": str(tmp_path)}))
        lines = (tmp_path / "robustness.csv").read_text().splitlines()
        assert lines[0].startswith("epsilon,f_av_closed")
        rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
        assert rows[0][1] == pytest.approx(1.0)
        assert rows[1][1] == pytest.approx(1 - 0.5 ** 2 / 2)

    def test_cluster_grow_schema(self, tmp_path):
        text = ("[run]\nexperiment = cluster-grow\nruns = 4\n"
                "[cluster]\np_suc = 1.0\ntarget_size = 10\n")
        cfg = parse_config(text)
        run_experiment(ExperimentConfig(**{**cfg.__dict__,
                                           "output_path": str(tmp_path)}))
        lines = (tmp_path / "cluster_grow.csv").read_text().splitlines()
        assert lines[1].split(",")[1] == "9"  # attempts at p_suc = 1


class TestMainExitCodes:
    def test_success(self, tmp_path):
        cfg_file = tmp_path / "c.ini"
        cfg_file.write_text(MINIMAL_ANALYTICS)
        code = main(["analytics-table", "--config", str(cfg_file),
                     "--out", str(tmp_path / "o")])
        assert code == EXIT_OK

    def test_config_error(self, tmp_path):
        cfg_file = tmp_path / "c.ini"
        cfg_file.write_text("[run]\nexperiment = trajectory\nbogus = 1\n")
        assert main(["trajectory", "--config", str(cfg_file)]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["trajectory", "--config",
                     str(tmp_path / "nope.ini")]) == EXIT_CONFIG

    def test_capacity_error(self, tmp_path):
        cfg_file = tmp_path / "c.ini"
        cfg_file.write_text("[run]\nexperiment = trajectory\nruns = 1\n"
                            "model = full\n"
                            "[params]\nn_max = 500\ngamma0 = 0.1\n"
                            "gamma1 = 0.1\n"
                            "[trajectory]\nn_samples = 5\n")
        code = main(["trajectory", "--config", str(cfg_file),
                     "--out", str(tmp_path / "o")])
        assert code == EXIT_CAPACITY

    def test_seed_override_changes_output(self, tmp_path):
        cfg_file = tmp_path / "c.ini"
        cfg_file.write_text(TRAJECTORY_STYLE)
        main(["trajectory", "--config", str(cfg_file),
              "--out", str(tmp_path / "s1"), "--seed", "1"])
        main(["trajectory", "--config", str(cfg_file),
              "--out", str(tmp_path / "s2"), "--seed", "2"])
        a = (tmp_path / "s1" / "events.csv").read_bytes()
        b = (tmp_path / "s2" / "events.csv").read_bytes()
        assert a != b
