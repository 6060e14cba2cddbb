import json

import numpy as np
import pytest

from errors import ConfigurationError, SchemaMismatchError
from schemas import RunConfig
from utils.io_utils import (
    canonical_json,
    config_hash,
    load_config,
    parse_config,
    read_json,
    read_table,
    write_json,
    write_manifest,
    write_table,
)


# ============================================
# Configuration
# ============================================

def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"n_sites": 5, "seed": 3}))
    config = load_config(path, {"n_sites": 4})
    assert config.n_sites == 4 and config.seed == 3


def test_missing_config(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.json")


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_malformed_config(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_empty_config_file_needs_ring_size(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    with pytest.raises(ConfigurationError) as exc:
        load_config(path)
    assert exc.value.details["fields"][0]["field"] == "n_sites"
    assert load_config(path, {"n_sites": 2}).n_sites == 2


def test_parse_config_lists_every_violation():
    with pytest.raises(ConfigurationError) as exc:
        parse_config({"n_sites": 0, "ring": {"tau_l": -1}})
    fields = {f["field"] for f in exc.value.details["fields"]}
    assert fields == {"n_sites", "ring.tau_l"}
    assert exc.value.code == "invalid_configuration"


def test_shipped_configs_are_valid():
    from pathlib import Path

    data_dir = Path(__file__).resolve().parent.parent / "data"
    for name in ("pentamer", "grid", "scaling", "phasemap", "ensemble"):
        assert isinstance(load_config(data_dir / f"{name}.json"), RunConfig)


# ============================================
# Hashing
# ============================================

def test_canonical_json_is_key_order_independent():
    assert canonical_json({"b": 1, "a": [1.5, 2]}) == canonical_json({"a": [1.5, 2], "b": 1})
    assert canonical_json({"a": 1}) == '{"a":1}'


def test_config_hash_tracks_content():
    a = RunConfig.model_validate({"n_sites": 3})
    b = RunConfig.model_validate({"n_sites": 3, "seed": 0})
    c = RunConfig.model_validate({"n_sites": 3, "seed": 1})
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 64


# ============================================
# Tables & JSON
# ============================================

def test_table_keeps_column_order_and_blanks(tmp_path):
    path = write_table([{"b": 2.5, "a": 1}, {"a": 2}], ["a", "b"], tmp_path / "out" / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[2] == "2,"
    frame = read_table(path, required=["a"])
    assert list(frame["a"]) == [1, 2]


def test_read_table_schema_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaMismatchError):
        read_table(empty)
    header_only = write_table([], ["a", "b"], tmp_path / "header.csv")
    with pytest.raises(SchemaMismatchError):
        read_table(header_only)
    path = write_table([{"a": 1}], ["a"], tmp_path / "a.csv")
    with pytest.raises(SchemaMismatchError) as exc:
        read_table(path, required=["a", "p_net"])
    assert exc.value.details["missing"] == ["p_net"]


def test_json_handles_numpy_values(tmp_path):
    path = write_json({"x": np.float64(1.5), "v": np.arange(3), "s": frozenset({"b", "a"})}, tmp_path / "d.json")
    assert read_json(path) == {"s": ["a", "b"], "v": [0, 1, 2], "x": 1.5}


def test_read_json_missing(tmp_path):
    with pytest.raises(SchemaMismatchError):
        read_json(tmp_path / "nope.json")


# ============================================
# Manifest
# ============================================

def test_manifest_records_run(tmp_path):
    config = RunConfig.model_validate({"n_sites": 3, "seed": 9})
    artifact = write_table([{"a": 1}], ["a"], tmp_path / "grid.csv")
    path = write_manifest(tmp_path, "grid", config, 2, 1.25, [artifact])
    manifest = read_json(path)
    assert manifest["subcommand"] == "grid"
    assert manifest["seed"] == 9 and manifest["workers"] == 2
    assert manifest["config_hash"] == config_hash(config)
    assert manifest["artifacts"] == ["grid.csv"]
    assert "numpy" in manifest["versions"]
