import json
import logging
import threading
from typing import Any, Callable, Dict, List

from instanton.algebra import RingSpec

logger = logging.getLogger(__name__)

ChangeCallback = Callable[[Dict[str, Any], Dict[str, Any]], None]


class ConfigManager:
    """JSON settings for the command line tool.

    Keys missing from the file fall back to _get_default_config(). The file
    is read once at start-up; call reload_config() to pick up edits.
    """

    def __init__(self, config_path: str = 'instanton.json'):
        self.config_path = config_path
        self._config: Dict[str, Any] = self._get_default_config()
        self._lock = threading.RLock()
        self._change_callbacks: List[ChangeCallback] = []

        self.reload_config()

    def reload_config(self):
        with self._lock:
            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise json.JSONDecodeError("top level must be an object", "", 0)
                new_config = self._get_default_config()
                new_config.update(loaded)
                old_config = self._config.copy()
                self._config = new_config

                if old_config != new_config:
                    self._notify_changes(old_config, new_config)

            except FileNotFoundError:
                logger.debug(f"Config file {self.config_path} not found. Using defaults.")
                self._config = self._get_default_config()
            except json.JSONDecodeError as e:
                logger.warning(f"Error parsing config file {self.config_path}: {e}")
            except UnicodeDecodeError as e:
                logger.warning(f"Unicode decode error reading config file: {e}. Using defaults.")
                self._config = self._get_default_config()

    def _get_default_config(self) -> Dict[str, Any]:
        return {
            "DEFAULT_RING": RingSpec.GENERIC.value,
            "CATALOG_MAX_P": 99,
            "TORUS_MAX_K": 6,
            "CLASP74_ROWS": 10,
            "DTWIST_MAX_MN": 4,
            "DTWIST_MAX_K": 6,
            "REPRODUCE_WORKERS": 4,
            "CERTIFICATE_LOG_PATH": "certificates.jsonl",
            "LOG_FILE": "instanton.log",
            "LOG_MAX_BYTES": 200000,
            "LOG_LEVEL": "INFO",
        }

    def get(self, key: str, default: Any = None) -> Any:
        with self._lock:
            return self._config.get(key, default)

    def get_int(self, key: str) -> int:
        value = self.get(key)
        try:
            return int(value)
        except (TypeError, ValueError):
            fallback = self._get_default_config()[key]
            logger.warning(f"Config value {key}={value!r} is not an integer, using {fallback}")
            return fallback

    def get_ring(self) -> RingSpec:
        return RingSpec.from_name(self.get("DEFAULT_RING", RingSpec.GENERIC.value))

    def get_all(self) -> Dict[str, Any]:
        with self._lock:
            return self._config.copy()

    def set(self, key: str, value: Any):
        with self._lock:
            self._config[key] = value

    def save(self) -> bool:
        with self._lock:
            try:
                with open(self.config_path, 'w', encoding='utf-8') as f:
                    json.dump(self._config, f, indent=2)
                return True
            except OSError as e:
                logger.error(f"Error saving config: {e}")
                return False

    def update_config(self, updates: Dict[str, Any]) -> bool:
        with self._lock:
            self._config.update(updates)
            return self.save()

    def register_change_callback(self, callback: ChangeCallback):
        self._change_callbacks.append(callback)

    def _notify_changes(self, old_config: Dict, new_config: Dict):
        for callback in self._change_callbacks:
            try:
                callback(old_config, new_config)
            except Exception as e:
                logger.error(f"Error in config change callback: {type(e).__name__}: {e}", exc_info=True)
