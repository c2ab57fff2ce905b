import pytest

from nspolar import bench, cli


def test_missing_seed_is_usage_error(tmp_path, capsys):
    assert cli.main(["permclass", "--out", str(tmp_path / "x")]) == 2
    assert "seed" in capsys.readouterr().err


def test_passing_run_exits_zero(tmp_path):
    out = tmp_path / "pc"
    assert cli.main(["permclass", "--seed", "4", "--permclass-trials", "20", "--out", str(out)]) == 0
    assert (tmp_path / "pc.csv").exists()
    assert (tmp_path / "pc.manifest.txt").exists()


def test_failing_check_exits_one(tmp_path):
    # with no noise every scenario is error-free, so the strict ordering checks fail
    argv = [
        "synthetic-bsc", "--seed", "1", "--n", "5", "--p-centers", "0.0", "--max-dev", "0",
        "--frames", "50", "--max-frames", "50", "--block", "50",
        "--n-random-perms", "2", "--frames-per-random-perm", "10", "--out", str(tmp_path / "s"),
    ]
    assert cli.main(argv) == 1
    assert "check: FAIL" in (tmp_path / "s.manifest.txt").read_text()


def test_config_file_and_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\nseed = 7\nRw = 25, 35\nframes = 300\nminsum = yes\n")
    cfg = cli.make_config("crossbar-ber", str(ini), {"frames": "400", "max_frames": "400"})
    assert cfg.seed == 7 and cfg.Rw == (25.0, 35.0)
    assert cfg.frames == 400 and cfg.minsum is True
    assert cfg.kind == "crossbar-ber"


def test_config_errors(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[experiment]\nseed = 1\nbogus = 3\n")
    with pytest.raises(ValueError):
        cli.make_config("permclass", str(ini))
    ini.write_text("[other]\nseed = 1\n")
    with pytest.raises(ValueError):
        cli.make_config("permclass", str(ini))
    assert cli.main(["permclass", "--config", str(tmp_path / "missing.ini")]) == 2


def test_convert():
    assert cli.convert("frames", "1e4") == 10000
    assert cli.convert("np_grid", "0, 8,16") == (0, 8, 16)
    assert cli.convert("perm_kinds", "identity,ordered") == ("identity", "ordered")
    with pytest.raises(ValueError):
        cli.convert("minsum", "maybe")


def test_every_experiment_has_a_subcommand():
    parser = cli.build_parser()
    for kind in bench.EXPERIMENTS:
        assert parser.parse_args([kind, "--seed", "1"]).kind == kind
