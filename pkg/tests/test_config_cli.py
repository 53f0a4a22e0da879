"""Config validation and the command-line front end.

Commands run in-process through ``main(argv)``: same code path as the
installed entry point, but with capturable output and no interpreter
startup per case.
"""

import json

import numpy as np
import pytest

from chernoff_heat import ConfigError
from chernoff_heat.cli import main
from chernoff_heat.config import load_config, validate_config


def _write(tmp_path, cfg, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _robin_cfg(**overrides):
    cfg = {
        "domain": {"type": "interval", "a": 0.0, "b": 1.0},
        "beta": {"left": 1.0, "right": 1.0},
        "scheme": {"variant": "robin", "t": 0.05, "steps": [4, 8], "h": 0.005},
        "u0": {"type": "polynomial", "coeffs": [1.0, 1.0, -1.0]},
        "reference": "eigen",
    }
    for key, value in overrides.items():
        if value is None:
            cfg.pop(key, None)
        else:
            cfg[key] = value
    return cfg


# ---------------------------------------------------------------------------
# validation


def test_valid_config_loads(tmp_path):
    path = _write(tmp_path, _robin_cfg())
    cfg = load_config(path)
    assert cfg["scheme"]["steps"] == [4, 8]


def test_missing_scheme_key_names_it():
    cfg = _robin_cfg()
    del cfg["scheme"]["t"]
    with pytest.raises(ConfigError, match="'t' is a required property"):
        validate_config(cfg)


def test_missing_top_level_block_names_it():
    cfg = _robin_cfg()
    del cfg["u0"]
    with pytest.raises(ConfigError, match="'u0' is a required property"):
        validate_config(cfg)


def test_unknown_keys_rejected():
    cfg = _robin_cfg()
    cfg["extras"] = {}
    with pytest.raises(ConfigError, match="extras"):
        validate_config(cfg)


def test_beta_block_cross_rules():
    cfg = _robin_cfg()
    cfg["scheme"]["variant"] = "dirichlet"
    with pytest.raises(ConfigError, match="does not take a 'beta' block"):
        validate_config(cfg)
    cfg = _robin_cfg(beta=None)
    with pytest.raises(ConfigError, match="requires a 'beta' block"):
        validate_config(cfg)
    cfg = _robin_cfg(beta={"cos": [1.0]})  # wrong style for an interval
    with pytest.raises(ConfigError, match="left/right"):
        validate_config(cfg)


def test_u0_domain_cross_rules():
    cfg = _robin_cfg(u0={"type": "radial_polynomial", "coeffs": [1.0]})
    with pytest.raises(ConfigError, match="two-dimensional"):
        validate_config(cfg)
    cfg = _robin_cfg(
        domain={"type": "disk", "center": [0.0, 0.0], "radius": 1.0},
        beta={"cos": [1.0]},
        u0={"type": "sine", "k": 1},
        reference=None,
    )
    with pytest.raises(ConfigError, match="interval domain"):
        validate_config(cfg)


def test_reference_cross_rules():
    cfg = _robin_cfg(
        domain={"type": "disk", "center": [0.0, 0.0], "radius": 1.0},
        beta={"cos": [1.0]},
        u0={"type": "constant", "value": 1.0},
        reference="eigen",
    )
    with pytest.raises(ConfigError, match="'eigen' applies only to an interval"):
        validate_config(cfg)
    cfg["reference"] = "radial_cn"
    validate_config(cfg)  # the radial march covers exactly this setup
    cfg["beta"] = {"cos": [1.0, 0.5]}
    with pytest.raises(ConfigError, match="constant beta"):
        validate_config(cfg)


def test_variant_override_is_revalidated():
    cfg = _robin_cfg()
    with pytest.raises(ConfigError, match="does not take a 'beta' block"):
        validate_config(cfg, variant="neumann")
    with pytest.raises(ConfigError, match="unknown variant override"):
        validate_config(cfg, variant="plasma")


def test_collar_block_is_dirichlet_only():
    cfg = _robin_cfg()
    cfg["scheme"]["collar"] = {"cw": 0.5, "alpha": 0.5}
    with pytest.raises(ConfigError, match="collar"):
        validate_config(cfg)


# ---------------------------------------------------------------------------
# run command


def test_run_writes_snapshots_and_summary(tmp_path, capsys):
    path = _write(tmp_path, _robin_cfg())
    rc = main(["run", "--config", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("n=4 sup_norm=") and "wrote field_robin_n4.csv" in lines[0]
    assert lines[1].startswith("n=8 sup_norm=")
    for n in (4, 8):
        snapshot = tmp_path / "out" / f"field_robin_n{n}.csv"
        text = snapshot.read_text().splitlines()
        assert text[0] == "x,value"
        data = np.array([row.split(",") for row in text[1:]], dtype=float)
        assert data.shape[1] == 2
        assert np.all(np.diff(data[:, 0]) > 0)
        assert np.all(np.abs(data[:, 1]) < 3.25)  # below the initial sup


def test_run_output_is_byte_identical(tmp_path, capsys):
    path = _write(tmp_path, _robin_cfg())
    main(["run", "--config", path, "--out", str(tmp_path / "a")])
    first_out = capsys.readouterr().out
    main(["run", "--config", path, "--out", str(tmp_path / "b")])
    second_out = capsys.readouterr().out
    assert first_out == second_out
    for n in (4, 8):
        name = f"field_robin_n{n}.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_honours_configured_output_dir(tmp_path, capsys):
    cfg = _robin_cfg(output={"dir": str(tmp_path / "configured")})
    cfg["scheme"]["steps"] = [4]
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", path]) == 0
    capsys.readouterr()
    assert (tmp_path / "configured" / "field_robin_n4.csv").exists()
    # --out wins over the configured directory
    assert main(["run", "--config", path, "--out", str(tmp_path / "flag")]) == 0
    capsys.readouterr()
    assert (tmp_path / "flag" / "field_robin_n4.csv").exists()


def test_run_star_domain_smoke(tmp_path, capsys):
    cfg = {
        "domain": {
            "type": "star2d",
            "center": [0.0, 0.0],
            "cos": [1.0, 0.0, 0.0, 0.2],
            "sin": [0.0],
        },
        # the wavy boundary has a thin tube; h = 0.02 keeps four collar layers
        "scheme": {"variant": "neumann", "t": 0.01, "steps": [4], "h": 0.02},
        "u0": {"type": "constant", "value": 1.0},
    }
    path = _write(tmp_path, cfg)
    rc = main(["run", "--config", path, "--out", str(tmp_path / "star")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "field_neumann_n4.csv" in out
    # insulated boundary: the constant must survive to a percent or so
    sup = float(out.split("sup_norm=")[1].split()[0])
    assert abs(sup - 1.0) < 5e-2


# ---------------------------------------------------------------------------
# converge command


def test_converge_table_against_eigen_reference(tmp_path, capsys):
    path = _write(tmp_path, _robin_cfg())
    rc = main(["converge", "--config", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "variant=robin reference=eigen"
    assert out.strip().endswith("wrote convergence_robin.csv")
    table = (tmp_path / "out" / "convergence_robin.csv").read_text().splitlines()
    assert table[0] == "n,sup_error,l2_error,observed_order,seconds"
    assert len(table) == 3
    rows = [line.split(",") for line in table[1:]]
    assert [r[0] for r in rows] == ["4", "8"]
    assert float(rows[1][1]) < float(rows[0][1])  # error drops with n
    assert rows[0][3] == "" and float(rows[1][3]) > 0.0


def test_converge_without_reference_self_compares(tmp_path, capsys):
    cfg = _robin_cfg(reference=None)
    path = _write(tmp_path, cfg)
    rc = main(["converge", "--config", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    assert capsys.readouterr().out.splitlines()[0] == "variant=robin reference=self"
    table = (tmp_path / "out" / "convergence_robin.csv").read_text().splitlines()
    last = table[-1].split(",")
    assert last[0] == "8" and last[1] == "" and last[2] == "" and last[3] == ""


def test_converge_single_step_count_has_empty_order(tmp_path, capsys):
    cfg = _robin_cfg()
    cfg["scheme"]["steps"] = [8]
    path = _write(tmp_path, cfg)
    rc = main(["converge", "--config", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    capsys.readouterr()
    table = (tmp_path / "out" / "convergence_robin.csv").read_text().splitlines()
    assert len(table) == 2
    assert table[1].split(",")[3] == ""


def test_converge_deterministic_apart_from_timings(tmp_path, capsys):
    path = _write(tmp_path, _robin_cfg())
    main(["converge", "--config", path, "--out", str(tmp_path / "a")])
    main(["converge", "--config", path, "--out", str(tmp_path / "b")])
    capsys.readouterr()
    read = lambda p: [
        line.split(",")[:4]
        for line in (p / "convergence_robin.csv").read_text().splitlines()
    ]
    assert read(tmp_path / "a") == read(tmp_path / "b")


def test_converge_radial_reference_on_disk(tmp_path, capsys):
    cfg = {
        "domain": {"type": "disk", "center": [0.0, 0.0], "radius": 1.0},
        "beta": {"cos": [1.0]},
        "scheme": {"variant": "robin", "t": 0.01, "steps": [8], "h": 0.02},
        "u0": {"type": "radial_polynomial", "coeffs": [1.0, -0.5]},
        "reference": "radial_cn",
    }
    path = _write(tmp_path, cfg)
    rc = main(["converge", "--config", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "variant=robin reference=radial_cn"
    row = (tmp_path / "out" / "convergence_robin.csv").read_text().splitlines()[1]
    assert float(row.split(",")[1]) < 5e-2


# ---------------------------------------------------------------------------
# selftest command


def test_selftest_passes_and_reports_groups(capsys):
    rc = main(["selftest"])
    assert rc == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == ["PASS"] * 5
    names = {line.split()[1] for line in out}
    assert "kink_properties" in names and "extension_contractivity" in names


def test_selftest_fault_hook_fails_the_right_group(capsys):
    rc = main(["selftest", "--fault", "kink_sign"])
    assert rc == 1
    out = capsys.readouterr().out
    assert "FAIL kink_properties" in out
    assert out.count("FAIL") == 1


# ---------------------------------------------------------------------------
# exit codes and environment


def test_exit_two_for_broken_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_exit_two_for_missing_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_exit_two_for_schema_violation(tmp_path, capsys):
    cfg = _robin_cfg()
    del cfg["scheme"]["t"]
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", path]) == 2
    err = capsys.readouterr().err
    assert err.startswith("config error:") and "'t'" in err


def test_exit_three_for_unresolvable_step(tmp_path, capsys):
    cfg = _robin_cfg()
    cfg["scheme"].update(t=1e-6, steps=[1], h=0.01)
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", path, "--out", str(tmp_path / "out")]) == 3
    assert "numeric failure: StepTooSmall" in capsys.readouterr().err


def test_exit_three_for_incompatible_dirichlet_data(tmp_path, capsys):
    cfg = _robin_cfg(beta=None, reference=None)
    cfg["scheme"]["variant"] = "dirichlet"
    cfg["u0"] = {"type": "constant", "value": 1.0}
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", path, "--out", str(tmp_path / "out")]) == 3
    assert "must vanish" in capsys.readouterr().err


def test_thread_flag_and_env(tmp_path, capsys, monkeypatch):
    assert main(["selftest", "--threads", "0"]) == 2
    assert "at least 1" in capsys.readouterr().err
    monkeypatch.setenv("CHERNOFF_HEAT_THREADS", "charm")
    assert main(["selftest"]) == 2
    assert "must be an integer" in capsys.readouterr().err
    monkeypatch.setenv("CHERNOFF_HEAT_THREADS", "1")
    cfg = _robin_cfg(reference=None)
    cfg["scheme"]["steps"] = [4]
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", path, "--out", str(tmp_path / "out")]) == 0
    capsys.readouterr()
