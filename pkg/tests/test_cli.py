"""Command line entry point."""
import json

import pytest

from oio_bench.cli import build_parser, load_config, main
from oio_bench.cli.main import EXIT_INVALID, EXIT_OK, EXIT_VIOLATIONS
from oio_bench.core.exceptions import ConfigurationError


def test_run_exit_ok(make_config, write_config, tmp_path, capsys):
    path = write_config(make_config())
    code = main(["run", path, "--output", str(tmp_path / "out"), "--json"])
    assert code == EXIT_OK
    aggregate = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert aggregate["replications"] == 2
    assert aggregate["violations"] == 0


def test_run_table_output(make_config, write_config, tmp_path, capsys):
    path = write_config(make_config(replications=1))
    assert main(["run", path, "--output", str(tmp_path / "out")]) == EXIT_OK
    assert "mean R_T" in capsys.readouterr().out


def test_violations_exit_code(make_config, write_config, tmp_path):
    config = make_config(policy={"name": "osd", "rate": "constant", "eta": 5.0, "y1": 10.0}, horizon=200)
    assert main(["run", write_config(config), "--output", str(tmp_path / "out")]) == EXIT_VIOLATIONS


def test_invalid_field_names_it(make_config, write_config, tmp_path, capsys):
    path = write_config(make_config(horizon=0))
    assert main(["run", path, "--output", str(tmp_path / "out")]) == EXIT_INVALID
    assert "horizon" in capsys.readouterr().out


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == EXIT_INVALID


def test_seed_override(make_config, write_config):
    config = load_config(write_config(make_config()), seed=9)
    assert config.seed == 9


def test_load_config_rejects_unknown_field(make_config, write_config):
    with pytest.raises(ConfigurationError, match="colour"):
        load_config(write_config(make_config(colour="red")))


def test_sweep_json(make_config, write_config, tmp_path, capsys):
    path = write_config(make_config(replications=1, horizon=20))
    code = main([
        "sweep", path, "--gamma-min", "0.01", "--gamma-max", "0.1", "--points", "2",
        "--output", str(tmp_path / "sweep"), "--json",
    ])
    assert code == EXIT_OK
    rows = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert len(rows) == 2
    assert (tmp_path / "sweep" / "sweep.svg").exists()


def test_fit_json(make_config, write_config, tmp_path, capsys):
    path = write_config(make_config(replications=1))
    code = main(["fit", path, "--horizons", "20", "40", "--output", str(tmp_path / "fit"), "--json"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert [row["T"] for row in payload["rows"]] == [20, 40]
    assert "slope" in payload["fit"]


def test_parser_requires_horizons():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["fit", "config.json"])
