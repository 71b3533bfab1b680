import json
import math

import numpy as np
import pytest

from photonic_tns import cli
from photonic_tns.config import PRESETS, ConfigError, PhysicalParams, RunConfig, load_config, parse_config_text


def test_units_switch():
    plain = PRESETS["heeres"]
    angular = PhysicalParams(**{**vars(plain), "units": "angular"})
    assert plain.rates().dephasing == pytest.approx(23.26e3)
    assert angular.rates().dephasing == pytest.approx(2 * math.pi * 23.26e3)
    assert plain.chi == angular.chi == pytest.approx(-2 * math.pi * 2.194e6)
    with pytest.raises(ConfigError):
        PhysicalParams(1, 1, 1, -200, -2, 2, units="radians")


def test_presets_values():
    b = PRESETS["besse"]
    assert (b.gamma_t_khz, b.gamma_phi_khz, b.alpha_mhz, b.chi_mhz) == (47.62, 58.82, -303.0, -5.0)


def test_parse_config_text():
    d = parse_config_text("preset = besse  # comment\nn_grid = 1, 2, 4\nt_em_us = 0.8\nchi_mhz = none\n")
    assert d == {"preset": "besse", "n_grid": (1, 2, 4), "t_em_us": 0.8, "chi_mhz": None}
    with pytest.raises(ConfigError):
        parse_config_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        parse_config_text("sweep_points = many\n")


def test_load_config_overrides(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("preset = besse\njobs = 2\nchi_mhz = -4.0\n")
    cfg = load_config(f, jobs=3, seed=None)
    assert cfg.jobs == 3 and cfg.preset == "besse"
    assert cfg.physical().chi_mhz == -4.0
    assert RunConfig(**{**cfg.to_dict(), "n_grid": tuple(cfg.n_grid)}) == cfg
    json.loads(cfg.to_json())
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize("kw", [dict(preset="nope"), dict(transmon_levels=4), dict(sweep_points=3),
                                dict(jobs=0), dict(units="x"), dict(pulse_dir="/no/such/dir")])
def test_run_config_validation(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_optimizer_options_follow_config():
    opts = RunConfig(harmonics=5, n_slices=90, seed=7).optimizer()
    assert (opts.harmonics, opts.n_slices, opts.seed) == (5, 90, 7)


def test_cli_verify_without_pulses(tmp_path, capsys):
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0
    assert "skipping propagator check" in capsys.readouterr().out


def test_cli_missing_pulses_exit_code(tmp_path, capsys):
    assert cli.main(["fit-budget", "--out", str(tmp_path)]) == 2
    assert "missing pulse artifacts" in capsys.readouterr().err


def test_cli_bad_config_exit_code(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("unknown_key = 1\n")
    assert cli.main(["verify", "--config", str(f)]) == 2


def test_cli_argparse_rejects_preset():
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--preset", "nope"])
    assert exc.value.code == 2


def test_cli_optimize_not_converged(tmp_path):
    f = tmp_path / "tiny.cfg"
    f.write_text("max_iterations = 1\nn_starts = 1\nn_slices = 20\nharmonics = 2\n"
                 "target_infidelity = 1e-9\n")
    assert cli.main(["optimize-pulse", "--config", str(f), "--out", str(tmp_path)]) == 3
    report = json.loads((tmp_path / "pulse_report.json").read_text())
    assert set(report) == {"bulk", "last"} and not report["bulk"]["converged"]


@pytest.mark.parametrize("lattice", ["cluster3x3", "toric4x4", "generic"])
def test_cli_rppeps(tmp_path, lattice):
    assert cli.main(["rppeps", "--out", str(tmp_path), "--lattice", lattice, "--size", "4", "4"]) == 0
    out = json.loads((tmp_path / f"rppeps_{lattice}.json").read_text())
    assert out["estimate"]["n"] == 4
    assert len(out["tradeoff"]) == 6
    assert (tmp_path / f"circuit_{lattice}.json").is_file()


def test_cli_fidelity_curve_and_budget(tmp_path, cluster_pulses):
    cluster_pulses.save(tmp_path)
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_grid = 1, 2, 4, 8, 16\nt_em_us = 0.85\n")
    assert cli.main(["fidelity-curve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fidelity_summary.json").read_text())
    assert summary["R2"] >= 0.999
    rows = (tmp_path / "fidelity_curve.csv").read_text().splitlines()
    assert rows[0] == "n,F,params_hash" and len(rows) == 6
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0


def test_cli_fit_budget_parallel_matches_serial(tmp_path, cluster_pulses):
    serial, par = tmp_path / "s", tmp_path / "p"
    for d in (serial, par):
        cluster_pulses.save(d)
    assert cli.main(["fit-budget", "--out", str(serial)]) == 0
    assert cli.main(["fit-budget", "--out", str(par), "--jobs", "2"]) == 0
    a = json.loads((serial / "budget.json").read_text())
    b = json.loads((par / "budget.json").read_text())
    for key in ("beta_C", "beta_T", "beta_alpha", "beta_em"):
        assert a[key] == pytest.approx(b[key], rel=1e-12)
    head = json.loads((serial / "budget_summary.json").read_text())
    assert np.isfinite(head["N_ph"]) and "band" in head
