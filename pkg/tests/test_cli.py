import pytest

from secure_ura.cli import main

MINI = """
M = 8
E = 8
Ka = 2
L = 8
np = 32
nc = 64
ns = 16
B = 30
Bp = 5
Br = 11
S = 8
sigma_c2 = 1e-9
sigma_u2 = 1e-9
trials = 2
seed = 7
"""


@pytest.fixture()
def mini_file(tmp_path):
    path = tmp_path / "mini.cfg"
    path.write_text(MINI)
    return str(path)


def test_run_subcommand(mini_file, tmp_path, capsys):
    out = tmp_path / "run.csv"
    assert main(["run", "--config", mini_file, "--out", str(out)]) == 0
    assert "pupe=" in capsys.readouterr().out
    assert out.read_text().startswith("ka,ratio,pa,pk,trials,")


def test_sweep_writes_deterministic_csv(mini_file, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--config", mini_file, "--ka", "1,2", "--ratio", "1,3",
            "--trials", "2"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().splitlines()) == 5  # header + 4 grid points


def test_seed_flag_changes_output(mini_file, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["sweep", "--config", mini_file, "--ka", "1", "--ratio", "1",
            "--trials", "2"]
    assert main(base + ["--seed", "1", "--out", str(out1)]) == 0
    assert main(base + ["--seed", "2", "--out", str(out2)]) == 0
    assert out1.read_bytes() != out2.read_bytes()


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("S = 41\n")
    assert main(["run", "--config", str(bad)]) == 2


def test_zero_trials_is_config_error(mini_file):
    assert main(["run", "--config", mini_file, "--trials", "0"]) == 2


def test_io_error_exit_code(mini_file, tmp_path):
    missing_dir = tmp_path / "nope" / "out.csv"
    code = main(["sweep", "--config", mini_file, "--ka", "1", "--ratio", "1",
                 "--trials", "1", "--out", str(missing_dir)])
    assert code == 3


def test_unknown_flag_exits_with_usage(capsys):
    with pytest.raises(SystemExit) as err:
        main(["run", "--no-such-flag"])
    assert err.value.code == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_missing_subcommand_exits(capsys):
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_selftest_subcommand(tmp_path, capsys):
    cfg = tmp_path / "st.cfg"
    cfg.write_text(MINI.replace("1e-9", "0.01"))
    assert main(["selftest", "--config", str(cfg)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_leakage_subcommand(mini_file, tmp_path, capsys):
    out = tmp_path / "leak.csv"
    code = main(["leakage", "--config", mini_file, "--ratio", "1,3,7",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "ratio,pa,pk,zeta_lower_mean"
    assert len(lines) == 4
    zetas = [float(l.split(",")[3]) for l in lines[1:]]
    assert zetas == sorted(zetas)  # masking share raises the bound


def test_desk_scale_flag(mini_file, capsys):
    # desk scale overrides antennas and defaults trials to 200; keep it tiny
    assert main(["run", "--config", mini_file, "--desk-scale", "--trials", "2"]) == 0
    assert "trials=2" in capsys.readouterr().out
