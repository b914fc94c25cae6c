import json
import math

import pytest

from bergman.artifacts import config_sha256, manifest_path
from bergman.cli import EXIT_CONFIG, EXIT_OK, build_parser, config_from_args, function_from_spec, main, parse_grid
from bergman.errors import ConfigError
from bergman.geometry import BIDISC, HARTOGS_TRIANGLE


def test_parse_grid_forms():
    assert parse_grid("1, 2.5,4") == [1.0, 2.5, 4.0]
    assert parse_grid("geom:1:100:3") == pytest.approx([1.0, 10.0, 100.0])
    assert parse_grid("lin:0:1:5") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    for bad in ("geom:0:1:3", "lin:0:1", "geom:1:10:0", "a,b"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_function_from_spec():
    assert function_from_spec("const:2", HARTOGS_TRIANGLE).dimension == 2
    assert function_from_spec("fs-bidisc:0.5", BIDISC).label == "f_0.5"
    with pytest.raises(ConfigError):
        function_from_spec("fs-bidisc:0.5", HARTOGS_TRIANGLE)
    with pytest.raises(ConfigError):
        function_from_spec("bump:1", BIDISC)
    with pytest.raises(ConfigError):
        function_from_spec(None, BIDISC)
    with pytest.raises(ConfigError):
        function_from_spec("fp-hartogs:abc", HARTOGS_TRIANGLE)


def test_kernel_eval_prints_one_over_pi(output_dir, capsys):
    status = main(["kernel", "eval", "--domain", "disc", "--z", "0", "--w", "0"])
    assert status == EXIT_OK
    printed = capsys.readouterr().out.strip()
    assert float(printed.split("+")[0]) == pytest.approx(1 / math.pi, rel=1e-15)
    assert (output_dir / "kernel-eval.csv").exists()
    assert manifest_path(output_dir / "kernel-eval.csv").exists()


def test_e1_prints_values(output_dir, capsys):
    assert main(["e1", "--x", "1.0,2.0"]) == EXIT_OK
    lines = capsys.readouterr().out.split()
    assert float(lines[0]) == pytest.approx(0.21938393439552029, rel=1e-14)
    assert len(lines) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["kernel", "eval", "--domain", "disc", "--z", "1.5", "--w", "0"],
        ["kernel", "eval", "--domain", "annulus", "--z", "0", "--w", "0"],
        ["e1", "--x", "2,1"],
        ["e1"],
        ["sweep", "weak43", "--lam", "geom:1e2:1e4:9"],
        ["project", "--domain", "hartogs", "--function", "fp-hartogs:abc", "--z", "0.1,0.5"],
    ],
)
def test_config_errors_exit_2_without_files(argv, output_dir):
    assert main(argv) == EXIT_CONFIG
    assert list(output_dir.iterdir()) == []


def test_rerun_is_byte_identical(tmp_path):
    target = tmp_path / "kernel.csv"
    argv = ["kernel", "eval", "--domain", "hartogs", "--z", "0.1,0.5", "--w", "0.2j,0.6", "--output", str(target)]
    assert main(argv) == EXIT_OK
    first = target.read_bytes()
    assert main(argv) == EXIT_OK
    assert target.read_bytes() == first
    assert b"\r" not in first


def test_csv_header_carries_config_hash(tmp_path):
    target = tmp_path / "e1.csv"
    argv = ["e1", "--x", "0.5,1,2", "--output", str(target)]
    assert main(argv) == EXIT_OK
    config = config_from_args(build_parser().parse_args(argv))
    header, columns, *rows = target.read_text().splitlines()
    assert header == f"# config_sha256: {config_sha256(config)}"
    assert columns == "x,e1,lower,upper"
    assert len(rows) == 3
    manifest = json.loads(manifest_path(target).read_text())
    assert manifest["config_sha256"] == config_sha256(config)
    assert manifest["flagged_rows"] == 0


def test_json_format(tmp_path):
    target = tmp_path / "fr.json"
    argv = ["forelli-rudin", "--eps", "0", "--delta", "0", "--x", "0.5,0.9", "--format", "json", "--output", str(target)]
    assert main(argv) == EXIT_OK
    payload = json.loads(target.read_text())
    assert len(payload["rows"]) == 2
    assert len(payload["config_sha256"]) == 64


def test_battery_file_with_overrides(tmp_path):
    battery = tmp_path / "e1.conf"
    battery.write_text("command=e1\nx=geom:1e-3:10:5\nformat=csv\n")
    args = build_parser().parse_args(["e1", "--config", str(battery), "--seed", "7"])
    config = config_from_args(args)
    assert config.command == "e1"
    assert config.x == pytest.approx([1e-3, 1e-2, 1e-1, 1.0, 10.0])
    assert config.seed == 7


def test_missing_battery_file_is_a_config_error(tmp_path, output_dir):
    assert main(["e1", "--config", str(tmp_path / "absent.conf")]) == EXIT_CONFIG


def test_battery_runner(tmp_path):
    from scripts.run_battery import battery_argv, battery_files, run_battery

    (tmp_path / "a-e1.conf").write_text("command=e1\nx=0.5,1\n")
    (tmp_path / "b-broken.conf").write_text("x=1\n")
    files = battery_files(str(tmp_path))
    assert [f.name for f in files] == ["a-e1.conf", "b-broken.conf"]
    out = tmp_path / "out"
    assert battery_argv(files[0], str(out))[:3] == ["e1", "--config", str(files[0])]
    assert run_battery(files, str(out)) == (1, 1)
    assert (out / "a-e1.csv").exists()
