"""Command-line front end: determinism, exit codes, configuration handling."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from vanhove.cli import (
    ConfigError,
    config_hash,
    main,
    parallel_map,
    resolve_config,
    splitmix64,
    worker_count,
)

# a fast shared configuration for commands that take grid keys
_SMALL = ["panels=8", "points=16", "r_min=1e-4"]


def _run(tmp_path: Path, command: str, *overrides: str) -> tuple[int, str, str]:
    out = tmp_path / f"out_{command.replace('-', '_')}"
    code = main([command, "--out", str(out), *overrides])
    csv = out.with_suffix(".csv").read_text() if out.with_suffix(".csv").exists() else ""
    js = out.with_suffix(".json").read_text() if out.with_suffix(".json").exists() else ""
    return code, csv, js


def test_splitmix64_is_deterministic_and_spread():
    a = splitmix64(12345, 8)
    b = splitmix64(12345, 8)
    assert a == b
    assert len(set(a)) == 8
    assert splitmix64(12346, 8) != a
    assert all(0 <= x < 2**64 for x in a)


def test_worker_count_reads_the_environment(monkeypatch):
    monkeypatch.delenv("VANHOVE_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("VANHOVE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("VANHOVE_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("VANHOVE_THREADS", "nope")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.setenv("VANHOVE_THREADS", "-2")
    with pytest.raises(ConfigError):
        worker_count()


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("VANHOVE_THREADS", "4")
    items = list(range(20))
    assert parallel_map(lambda x: x * x, items) == [x * x for x in items]


def test_resolve_config_layers_file_then_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# comment\nbeta_h = 2.0\nhbar=0.25  # trailing\n")
    defaults = {"beta_h": 1.0, "hbar": 0.5, "pairs": 5}
    cfg = resolve_config(defaults, str(cfg_file), ["pairs=7"])
    assert cfg == {"beta_h": 2.0, "hbar": 0.25, "pairs": 7}


def test_resolve_config_rejects_unknown_keys_and_bad_values(tmp_path):
    defaults = {"hbar": 0.5}
    with pytest.raises(ConfigError, match="unknown key"):
        resolve_config(defaults, None, ["nope=1"])
    with pytest.raises(ConfigError, match="cannot parse"):
        resolve_config(defaults, None, ["hbar=abc"])
    with pytest.raises(ConfigError, match="not key=value"):
        resolve_config(defaults, None, ["hbar"])
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError, match="malformed"):
        resolve_config(defaults, str(bad), [])
    with pytest.raises(ConfigError, match="cannot read"):
        resolve_config(defaults, str(tmp_path / "missing.cfg"), [])


def test_config_hash_is_order_independent():
    a = config_hash({"b": 2, "a": 1.5})
    b = config_hash({"a": 1.5, "b": 2})
    assert a == b and len(a) == 16
    assert config_hash({"a": 1.5, "b": 3}) != a


def test_energy_command_writes_csv_and_json(tmp_path):
    code, csv, js = _run(tmp_path, "energy", "gamma=0.3", *_SMALL)
    assert code == 0
    assert "# config_hash=" in csv
    assert "spectral_bottom" in csv
    payload = json.loads(js)
    assert payload["failures"] == []
    assert payload["summary"]["identity_residual"] <= 1e-10
    assert payload["config"]["gamma"] == 0.3


def test_outputs_are_byte_identical_across_runs(tmp_path):
    _, csv1, js1 = _run(tmp_path, "energy", "gamma=0.3", *_SMALL)
    _, csv2, js2 = _run(tmp_path, "energy", "gamma=0.3", *_SMALL)
    assert csv1 == csv2
    assert js1 == js2


def test_kms_command_is_thread_count_invariant(tmp_path, monkeypatch):
    args = ["pairs=3", "t_points=5", *_SMALL]
    monkeypatch.delenv("VANHOVE_THREADS", raising=False)
    code, csv_serial, _ = _run(tmp_path, "kms", *args)
    assert code == 0
    monkeypatch.setenv("VANHOVE_THREADS", "4")
    code, csv_threaded, _ = _run(tmp_path, "kms", *args)
    assert code == 0
    assert csv_serial == csv_threaded


def test_classify_command_agrees_with_itself(tmp_path):
    code, csv, js = _run(tmp_path, "classify", "gamma=0.8")
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["analytic_class"] == "type_i"
    assert payload["summary"]["numeric_class"] == "type_i"
    assert payload["summary"]["agreement"] is True


def test_classify_reports_out_of_scope_without_failing(tmp_path):
    code, csv, js = _run(tmp_path, "classify", "gamma=1.6")
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["analytic_class"] == "out_of_scope"
    assert payload["summary"]["numeric_class"] == "not_applicable"
    assert "nan" in csv


def test_unknown_key_is_a_configuration_error(tmp_path, capsys):
    code, _, _ = _run(tmp_path, "energy", "nonsense=1")
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_type_ii_source_is_an_invariant_failure(tmp_path, capsys):
    # the dressed system cannot be built, which surfaces as exit 1
    code, _, _ = _run(tmp_path, "energy", "gamma=1.2")
    assert code == 1
    assert "invariant failed" in capsys.readouterr().err


def test_evolve_command_conserves_energy(tmp_path):
    code, csv, js = _run(
        tmp_path, "evolve", "gamma=0.3", "steps=5", "t_max=10", *_SMALL
    )
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["max_energy_drift"] <= 1e-10
    assert payload["summary"]["max_equilibrium_char_drift"] <= 1e-13


def test_groundstate_command_annihilates_negative_windows(tmp_path):
    code, _, js = _run(tmp_path, "groundstate", *_SMALL)
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["negative_support"] is True
    assert payload["summary"]["window_value"] <= 1e-6


def test_equilibrium_command_validates_the_regime(tmp_path, capsys):
    code, _, _ = _run(tmp_path, "equilibrium", "regime=warp")
    assert code == 2
    assert "regime" in capsys.readouterr().err


def test_equilibrium_command_linear_regime(tmp_path):
    code, _, js = _run(
        tmp_path, "equilibrium", "regime=linear", "k_max=10", *_SMALL
    )
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["fitted_order"] == pytest.approx(2.0, abs=0.1)


def test_egorov_command_converges(tmp_path):
    # the full default ladder: convergence needs devs[-1] well under the peak
    code, _, js = _run(tmp_path, "egorov", *_SMALL)
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["verdict"] == "converged"
    assert payload["summary"]["fitted_order"] == pytest.approx(1.0, abs=0.05)


def test_scattering_command_reports_the_round_trip(tmp_path):
    # keep the default points=32: the long-time overlap rule needs deep nodes
    code, _, js = _run(
        tmp_path, "scattering", "k_max=10", "t_points=5", "panels=8", "r_min=1e-4"
    )
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["round_trip"] <= 1e-15
    assert payload["summary"]["transport_mismatch"] <= 1e-15
    assert payload["summary"]["final_overlap"] < 1e-2


def test_fock_spectrum_command_matches_closed_forms(tmp_path):
    code, _, js = _run(tmp_path, "fock-spectrum", "hbar=0.25", "cutoff=64")
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["ground_energy"] == pytest.approx(-0.25, abs=1e-10)
    assert payload["summary"]["overlap_sq"] == pytest.approx(1.0, abs=1e-8)


def test_soft_photons_command_flags_divergence(tmp_path):
    code, _, js = _run(tmp_path, "soft-photons", "gamma=0.8")
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["diverging"] is True
    assert payload["summary"]["increment_slope"] == pytest.approx(0.6, abs=0.05)


def test_garding_command_reports_the_bound(tmp_path):
    code, _, js = _run(tmp_path, "garding")
    assert code == 0
    payload = json.loads(js)
    assert payload["summary"]["bound_margin"] >= -1e-9
    assert payload["summary"]["symbol_min"] == pytest.approx(0.0, abs=1e-12)


def test_config_file_feeds_a_command(tmp_path):
    cfg = tmp_path / "energy.cfg"
    cfg.write_text("gamma=0.3\npanels=8\npoints=16\nr_min=1e-4\n")
    out = tmp_path / "filed"
    code = main(["energy", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert "# gamma=0.29999999999999999" in out.with_suffix(".csv").read_text()


def test_csv_header_records_the_full_configuration(tmp_path):
    _, csv, js = _run(tmp_path, "energy", "gamma=0.3", *_SMALL)
    payload = json.loads(js)
    for key, value in payload["config"].items():
        assert f"# {key}=" in csv
    assert payload["config_hash"] in csv
