import configparser
import json
import os

import numpy as np
import pytest

import vacuumforge.runner as runner_mod
from vacuumforge.cli import EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK, main
from vacuumforge.config import (
    COMMANDS,
    paper_defaults,
    parse_config,
    render_config,
)
from vacuumforge.errors import ConfigError, ContractViolationError

SMALL = """
[grid]
x_min = -10.0
x_max = 10.0
n_points = 32

[ramp]
t_list = 1.0, 2.0

[run]
nmax = 4
"""


def test_paper_defaults_validate_for_every_command():
    for command in COMMANDS:
        cfg = paper_defaults(command).validate()
        assert cfg.command == command
        assert cfg.grid.n_points == 512
    assert paper_defaults("spectrum").V0_list[0] == pytest.approx(-5.0)
    assert paper_defaults("spectrum").V0_list[-1] == pytest.approx(0.0)
    assert paper_defaults("evolve").potential.V0 == pytest.approx(-2.85)
    assert paper_defaults("observables").T == pytest.approx(90.0)
    assert len(paper_defaults("decay").T_list) >= 5
    with pytest.raises(ConfigError):
        paper_defaults("render")


def test_render_parse_round_trip():
    for command in COMMANDS:
        cfg = paper_defaults(command)
        assert parse_config(render_config(cfg), command) == cfg


def test_range_and_comma_lists():
    cfg = parse_config("[ramp]\nt_list = 3:93:3\n", "evolve")
    assert cfg.T_list == tuple(float(t) for t in range(3, 94, 3))
    cfg = parse_config("[ramp]\nt_list = 1.5, 2, 8.25\n", "evolve")
    assert cfg.T_list == (1.5, 2.0, 8.25)
    with pytest.raises(ConfigError):
        parse_config("[ramp]\nt_list = 1:2\n", "evolve")
    with pytest.raises(ConfigError):
        parse_config("[ramp]\nt_list = 5:1:-1\n", "evolve")
    with pytest.raises(ConfigError):
        parse_config("[ramp]\nt_list = one, two\n", "evolve")


def test_unknown_sections_and_keys():
    with pytest.raises(ConfigError, match="lattice: unknown config section"):
        parse_config("[lattice]\nn = 3\n", "evolve")
    with pytest.raises(ConfigError, match=r"grid\.spacing: unknown config key"):
        parse_config("[grid]\nspacing = 0.1\n", "evolve")
    with pytest.raises(ConfigError, match=r"grid\.n_points: expected an integer"):
        parse_config("[grid]\nn_points = tiny\n", "evolve")
    with pytest.raises(ConfigError, match=r"observables\.rho2: expected a boolean"):
        parse_config("[observables]\nrho2 = maybe\n", "observables")


def test_validation_failures():
    with pytest.raises(ConfigError, match=r"ramp\.t_list"):
        parse_config("[ramp]\nt_list =\n", "evolve")
    with pytest.raises(ConfigError, match=r"ramp\.t_list"):
        parse_config("[ramp]\nt_list = 1, -2\n", "evolve")
    with pytest.raises(ConfigError, match=r"run\.pair_index"):
        parse_config("[run]\npair_index = 9\n", "decay")
    with pytest.raises(ConfigError, match=r"run\.ramp_step"):
        parse_config("[run]\nramp_step = 1.0\n", "evolve")


def test_main_requires_some_config(tmp_path, capsys):
    assert main(["evolve", "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "--config" in err and "--paper-defaults" in err


def test_main_bad_config_path(tmp_path):
    missing = str(tmp_path / "nope.ini")
    assert main(["evolve", "--config", missing]) == EXIT_CONFIG


def test_main_flag_overrides_must_validate(tmp_path):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL)
    code = main(["evolve", "--config", str(ini), "--out",
                 str(tmp_path / "o"), "--decimate", "0"])
    assert code == EXIT_CONFIG


def test_main_contract_violation_maps_to_exit_3(tmp_path, monkeypatch):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL)

    def boom(cfg, out_dir):
        raise ContractViolationError("synthetic breakage")

    monkeypatch.setitem(runner_mod.RUNNERS, "evolve", boom)
    code = main(["evolve", "--config", str(ini), "--out", str(tmp_path / "o")])
    assert code == EXIT_CONTRACT


def test_evolve_end_to_end_deterministic(tmp_path, capsys):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL)
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["evolve", "--config", str(ini), "--out", out1]) == EXIT_OK
    assert main(["evolve", "--config", str(ini), "--out", out2]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert out1 in stdout and out2 in stdout

    with open(os.path.join(out1, "manifest.json")) as fh:
        m1 = json.load(fh)
    with open(os.path.join(out2, "manifest.json")) as fh:
        m2 = json.load(fh)
    assert m1 == m2  # identical hashes: byte-identical outputs
    names = {entry["name"] for entry in m1["files"]}
    assert {"pairs.csv", "pairs.svg", "config_echo.ini"} <= names

    # the echoed config reproduces the effective run settings
    echo = configparser.ConfigParser()
    echo.read(os.path.join(out1, "config_echo.ini"))
    assert echo.getint("grid", "n_points") == 32
    assert echo.get("ramp", "t_list").startswith("1, 2")

    data = np.genfromtxt(os.path.join(out1, "pairs.csv"),
                         delimiter=",", names=True)
    assert data["T"].tolist() == [1.0, 2.0]
    total = data["C_0"] + data["C_1"] + data["C_2"] + data["C_3"] + data["C_4"]
    np.testing.assert_allclose(total, 1.0, atol=1e-8)


def test_no_plots_and_save_matrices_flags(tmp_path):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL)
    out = str(tmp_path / "noplot")
    assert main(["evolve", "--config", str(ini), "--out", out,
                 "--no-plots", "--save-matrices"]) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as fh:
        names = {entry["name"] for entry in json.load(fh)["files"]}
    assert not any(n.endswith(".svg") for n in names)
    assert "transition_T1.npy" in names
    assert "s_electron_T1.npy" in names
    mat = np.load(os.path.join(out, "transition_T1.npy"))
    assert mat.shape == (64, 64)


def test_observables_decimate_flag(tmp_path):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL + "\n[ramp]\nt = 1.0\n")
    # configparser forbids duplicate sections; build a clean one instead
    ini.write_text("""
[grid]
x_min = -10.0
x_max = 10.0
n_points = 32

[ramp]
t = 1.0

[run]
nmax = 4
""")
    out = str(tmp_path / "obs")
    assert main(["observables", "--config", str(ini), "--out", out,
                 "--decimate", "4"]) == EXIT_OK
    rho2 = np.genfromtxt(os.path.join(out, "rho2.csv"),
                         delimiter=",", names=True)
    # 32 points decimated by 4 -> 8 axis samples -> 64 rows
    assert rho2.shape[0] == 64
