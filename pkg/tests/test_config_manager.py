"""
JSON configuration with defaults and change callbacks.
"""

import json

from instanton.algebra import RingSpec
from instanton.config_manager import ConfigManager


def test_defaults_without_file(tmp_path):
    config = ConfigManager(str(tmp_path / "missing.json"))
    assert config.get_ring() is RingSpec.GENERIC
    assert config.get_int("CATALOG_MAX_P") == 99
    assert config.get("CERTIFICATE_LOG_PATH") == "certificates.jsonl"


def test_file_values_override_defaults(tmp_path):
    path = tmp_path / "instanton.json"
    path.write_text(json.dumps({"DEFAULT_RING": "char2", "REPRODUCE_WORKERS": 2}), encoding='utf-8')
    config = ConfigManager(str(path))
    assert config.get_ring() is RingSpec.CHAR2
    assert config.get_int("REPRODUCE_WORKERS") == 2
    assert config.get_int("TORUS_MAX_K") == 6


def test_bad_integer_falls_back(tmp_path):
    config = ConfigManager(str(tmp_path / "missing.json"))
    config.set("CLASP74_ROWS", "many")
    assert config.get_int("CLASP74_ROWS") == 10


def test_invalid_json_keeps_previous_values(tmp_path):
    path = tmp_path / "instanton.json"
    path.write_text("[1, 2]", encoding='utf-8')
    config = ConfigManager(str(path))
    assert config.get_int("CLASP74_ROWS") == 10


def test_update_saves_and_reload_notifies(tmp_path):
    path = tmp_path / "instanton.json"
    config = ConfigManager(str(path))
    assert config.update_config({"TORUS_MAX_K": 3})
    assert json.loads(path.read_text(encoding='utf-8'))["TORUS_MAX_K"] == 3

    seen = []
    config.register_change_callback(lambda old, new: seen.append((old["TORUS_MAX_K"], new["TORUS_MAX_K"])))
    path.write_text(json.dumps({"TORUS_MAX_K": 4}), encoding='utf-8')
    config.reload_config()
    assert seen == [(3, 4)]
    assert config.get_all()["TORUS_MAX_K"] == 4
