import json
import math

import pytest

from bergman.artifacts import (
    atomic_write,
    config_sha256,
    default_output,
    manifest_path,
    render_csv,
    render_json,
    write_manifest,
    write_result,
)
from bergman.models import RunConfig


def test_config_hash_is_stable_and_sensitive():
    a = RunConfig(command="e1", x=[1.0, 2.0], seed=1)
    b = RunConfig(command="e1", x=[1.0, 2.0], seed=1)
    c = RunConfig(command="e1", x=[1.0, 2.0], seed=2)
    assert config_sha256(a) == config_sha256(b)
    assert config_sha256(a) != config_sha256(c)
    assert len(config_sha256(a)) == 64


def test_csv_keeps_seventeen_digits():
    text = render_csv([{"x": 0.1, "y": math.pi}], "abc")
    header, columns, row = text.splitlines()
    assert header == "# config_sha256: abc"
    assert columns == "x,y"
    x, y = row.split(",")
    assert float(x) == 0.1
    assert float(y) == math.pi
    assert text.endswith("\n")


def test_json_writes_non_finite_as_null():
    payload = json.loads(render_json([{"value": math.inf, "z": 1 + 2j}], "abc", {"nan": math.nan}))
    assert payload["rows"][0]["value"] is None
    assert payload["rows"][0]["z"] == [1.0, 2.0]
    assert payload["meta"]["nan"] is None


def test_atomic_write_leaves_only_the_target(tmp_path):
    target = tmp_path / "nested" / "out.csv"
    atomic_write(target, "a\n")
    atomic_write(target, "b\n")
    assert target.read_text() == "b\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.csv"]


def test_default_output_names(output_dir):
    assert default_output(RunConfig(command="sweep weak43")) == output_dir / "sweep-weak43.csv"
    assert default_output(RunConfig(command="e1", format="json")) == output_dir / "e1.json"
    assert manifest_path(output_dir / "e1.json").name == "e1.json.manifest.json"


def test_result_and_manifest_round_trip(tmp_path):
    config = RunConfig(command="e1", x=[1.0], output=str(tmp_path / "e1.csv"))
    path = write_result(config, [{"x": 1.0, "e1": 0.2}])
    manifest = json.loads(write_manifest(config, path, 2, {"compute_seconds": 0.5}).read_text())
    assert manifest["flagged_rows"] == 2
    assert manifest["config"]["x"] == [1.0]
    assert manifest["output"] == str(path)
    assert manifest["timings"] == {"compute_seconds": 0.5}


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(command="e1", x=[2.0, 1.0])
    with pytest.raises(ValueError):
        RunConfig(command="e1", format="xml")
    with pytest.raises(ValueError):
        RunConfig(command="e1", radial_order=0)
