import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from su11osc.cli import main
from su11osc.config import ConfigError, RunConfig
from su11osc.io import complex_columns, read_table, write_sidecar, write_table

# small grids keep the command tests fast
FAST = dict(q_max=12.0, n_points=4000, truncation=64, samples=5, levels=4, dt=2e-3)


def _write_config(tmp_path, **changes):
    cfg = RunConfig(out_dir=str(tmp_path / "out")).replace(**changes)
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    return path


def _run(tmp_path, command, capsys=None, **changes):
    code = main([command, "--config", str(_write_config(tmp_path, **changes))])
    return code, (capsys.readouterr() if capsys else None)


# ---------------------------------------------------------------------------
# configuration


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60, deadline=None)
@given(
    c=finite, q_max=finite, t0=finite, z_phase=finite, tol=finite,
    truncation=st.integers(-10, 10**6), kind=st.sampled_from(["constant", "power_law", "sampled"]),
    path=st.text(alphabet="abcxyz/._-0123456789", max_size=20),
)
def test_config_round_trip(c, q_max, t0, z_phase, tol, truncation, kind, path):
    cfg = RunConfig(c=c, q_max=q_max, t0=t0, z_phase=z_phase, tol_ode=tol, truncation=truncation,
                    profile_kind=kind, profile_path=path)
    assert RunConfig.from_ini(cfg.to_ini()) == cfg


def test_readme_config_block_parses():
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    block = readme.split("```ini\n", 1)[1].split("```", 1)[0]
    assert RunConfig.from_ini(block).validate() == RunConfig()


def test_config_defaults_validate():
    assert RunConfig().validate() == RunConfig()


def test_config_partial_file_uses_defaults():
    cfg = RunConfig.from_ini("[model]\nc = 0.5\n")
    assert cfg.c == 0.5 and cfg.truncation == RunConfig().truncation


@pytest.mark.parametrize("text,match", [
    ("[model]\nspin = 2\n", "unknown key"),
    ("[model]\ntruncation = many\n", "not a valid int"),
    ("no section header", "unreadable"),
])
def test_config_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        RunConfig.from_ini(text)


@pytest.mark.parametrize("changes,match", [
    (dict(c=-0.2), r"c > -1/8"),
    (dict(branch="middle"), "branch"),
    (dict(profile_kind="power_law", t0=0.0), "t0 > 0"),
    (dict(profile_kind="sampled"), "path"),
    (dict(truncation=1), "truncation"),
    (dict(t0=1.0, t1=0.5), "t1 >= t0"),
    (dict(tol_ode=1e-2), "tolerances ode"),
    (dict(c=1.0, branch="minus"), "c < 3/8"),
])
def test_config_validation_names_precondition(changes, match):
    with pytest.raises(ConfigError, match=match):
        RunConfig().replace(**changes).validate()


def test_replace_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        RunConfig().replace(spin=1)


def test_representation_scale_defaults_to_initial_frequency():
    cfg = RunConfig(profile_kind="power_law", profile_omega0=2.0, profile_alpha=2.0, t0=1.5, t1=2.0)
    assert cfg.rep_omega() == pytest.approx(3.0)
    assert RunConfig(omega_rep=0.7).rep_omega() == 0.7


# ---------------------------------------------------------------------------
# tables and sidecars


def test_table_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    cols = {"t": rng.normal(size=5)}
    cols.update(complex_columns("z", rng.normal(size=5) + 1j * rng.normal(size=5)))
    path = write_table(tmp_path / "sub" / "a.csv", cols)
    back = read_table(path)
    assert list(back) == ["t", "z_re", "z_im"]
    for k in cols:
        assert np.array_equal(back[k], cols[k])


def test_sidecar_is_sorted_json(tmp_path):
    path = write_sidecar(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(2), "c": 1 + 2j})
    text = path.read_text()
    assert json.loads(text) == {"a": [0, 1], "b": 1.5, "c": [1.0, 2.0]}
    assert text.index('"a"') < text.index('"b"')


# ---------------------------------------------------------------------------
# commands and exit codes


def test_verify_default_passes(tmp_path, capsys):
    code, out = _run(tmp_path, "verify", capsys)
    assert code == 0
    assert "checks passed" in out.out and "FAIL" not in out.out
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert report["command"] == "verify" and report["versions"]["numpy"] == np.__version__


def test_verify_reports_truncation_failure(tmp_path, capsys):
    code, out = _run(tmp_path, "verify", capsys, truncation=8, z_abs=0.9 * 8)
    assert code == 1
    assert "FAIL  coherent" in out.out and "increase N" in out.out


def test_invalid_coupling_exits_with_config_error(tmp_path, capsys):
    code, out = _run(tmp_path, "verify", capsys, c=-0.2)
    assert code == 2
    assert "config error" in out.err and "c > -1/8" in out.err


def test_missing_config_file(tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "none.ini")]) == 2
    assert "cannot read configuration" in capsys.readouterr().err


def test_powerlaw_needs_power_law_profile(tmp_path, capsys):
    code, out = _run(tmp_path, "powerlaw", capsys)
    assert code == 2 and "kind = power_law" in out.err


def test_evolve_reports_weight_beyond_requested_levels(tmp_path, capsys):
    code, out = _run(tmp_path, "evolve", capsys, profile_omega0=2.0, omega_rep=1.0, t1=0.4, **FAST)
    assert code == 1 and "TruncationError" in out.err


def test_evolve_levels_must_fit_truncation(tmp_path, capsys):
    code, out = _run(tmp_path, "evolve", capsys, truncation=8, levels=5)
    assert code == 2 and "N/2" in out.err


def test_invariant_command_is_deterministic(tmp_path):
    kw = dict(profile_kind="power_law", profile_alpha=2.0, t0=1.0, t1=2.0, samples=11)
    assert _run(tmp_path, "invariant", **kw)[0] == 0
    first = (tmp_path / "out" / "invariant.csv").read_bytes()
    assert _run(tmp_path, "invariant", **kw)[0] == 0
    assert (tmp_path / "out" / "invariant.csv").read_bytes() == first
    table = read_table(tmp_path / "out" / "invariant.csv")
    assert table["dev_ode_ermakov"].max() < 1e-7
    assert np.allclose(table["omega0_sq"], 1.0)
    meta = json.loads((tmp_path / "out" / "invariant.json").read_text())
    assert meta["integrator"] == "DOP853" and meta["config"]["t1"] == 2.0


def test_evolve_quench_matches_grid_oracle(tmp_path):
    code, _ = _run(tmp_path, "evolve", profile_omega0=2.0, omega_rep=1.0, t1=0.4, **{**FAST, "levels": 8})
    assert code == 0
    table = read_table(tmp_path / "out" / "evolve.csv")
    assert table["max_pop_dev"].max() < 1e-4
    assert np.ptp(table["grid_invariant"]) < 1e-4
    assert table["xi_abs"][0] == 0 and table["xi_abs"][-1] > 0.1
    for name in ("wei_norman", "phases"):
        assert (tmp_path / "out" / f"{name}.csv").exists()
        assert (tmp_path / "out" / f"{name}.json").exists()


def test_spectrum_command(tmp_path):
    assert _run(tmp_path, "spectrum", c=1.0, **FAST)[0] == 0
    table = read_table(tmp_path / "out" / "spectrum.csv")
    assert table["rel_dev"].max() < 1e-5
    # the minus branch is not carried by the Dirichlet grid
    assert _run(tmp_path, "spectrum", c=0.0, branch="minus", **FAST)[0] == 0
    assert np.all(np.isnan(read_table(tmp_path / "out" / "spectrum.csv")["E_grid"]))


def test_powerlaw_command(tmp_path):
    code, _ = _run(tmp_path, "powerlaw", profile_kind="power_law", profile_alpha=1.0, t0=1.0, t1=3.0)
    assert code == 0
    assert read_table(tmp_path / "out" / "powerlaw.csv")["dev"].max() < 1e-7


def test_command_line_overrides(tmp_path):
    out = tmp_path / "elsewhere"
    assert main(["spectrum", "--out", str(out), "--tol", "1e-9"]) == 0
    meta = json.loads((out / "spectrum.json").read_text())
    assert meta["config"]["tol_ode"] == 1e-9


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "su11osc", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("verify", "invariant", "evolve", "spectrum", "powerlaw"):
        assert name in res.stdout
