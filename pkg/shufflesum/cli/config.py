"""
実験設定の読み込みと検証

設定はUTF-8のJSONオブジェクト。`--set key=value` でトップレベルのキーを上書きする
（値はJSONとして解釈し、解釈できなければ文字列として扱う）。
受け付けるキー・型・デフォルト値は config-schema/<command>-config-schema.json に定義する。
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from attrs import frozen

from ..errors import InvalidParameterError

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parents[2] / "config-schema"

COMMAND_SCHEMAS = {
    "params": "params-config-schema.json",
    "simulate": "simulate-config-schema.json",
    "verify": "verify-config-schema.json",
}


class ConfigValidationError(InvalidParameterError):
    """実験設定の不備（必須キーの欠落・型の誤り・未知のキー）"""
    pass


@frozen
class ExperimentConfig:
    """デフォルト値を補完済みの実験設定"""
    command: str
    check: Optional[str]
    values: Dict[str, Any]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]


def load_schema(command: str, check: Optional[str] = None) -> Dict[str, Any]:
    """
    コマンド（verifyではチェック名）の inputSchema を取得

    Raises:
        ConfigValidationError: コマンドまたはチェック名が未知の場合
    """
    if command not in COMMAND_SCHEMAS:
        raise ConfigValidationError(f"Unknown command: {command}")
    with open(SCHEMA_DIR / COMMAND_SCHEMAS[command], encoding="utf-8") as f:
        entries = json.load(f)
    name = check if command == "verify" else command
    for entry in entries:
        if entry["name"] == name:
            return entry["inputSchema"]
    raise ConfigValidationError(f"Unknown check: {check}")


def parse_overrides(pairs: Iterable[str]) -> Dict[str, Any]:
    """key=value の列を辞書に変換"""
    overrides: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigValidationError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            overrides[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key.strip()] = raw
    return overrides


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    """設定ファイルを読む（パスなしなら空の設定）"""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"config file is not valid JSON: {path} ({e})")
    if not isinstance(raw, dict):
        raise ConfigValidationError("config must be a JSON object")
    return raw


def _type_matches(value: Any, expected: str) -> bool:
    if expected == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if expected == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected == "string":
        return isinstance(value, str)
    if expected == "boolean":
        return isinstance(value, bool)
    if expected == "object":
        return isinstance(value, dict)
    if expected == "array":
        return isinstance(value, list)
    return True


def resolve_config(command: str, raw: Dict[str, Any], check: Optional[str] = None) -> ExperimentConfig:
    """
    スキーマに従ってデフォルト値を補完し、必須キー・型・seedを検証する

    Raises:
        ConfigValidationError: 検証に失敗した場合
    """
    schema = load_schema(command, check)
    properties: Dict[str, Dict[str, Any]] = schema.get("properties", {})

    unknown = sorted(set(raw) - set(properties))
    if unknown:
        raise ConfigValidationError(f"Unknown config keys for {check or command}: {', '.join(unknown)}")

    missing: List[str] = [key for key in schema.get("required", []) if key not in raw]
    if missing:
        raise ConfigValidationError(f"Missing required config keys: {', '.join(missing)}")

    values: Dict[str, Any] = {}
    for key, prop in properties.items():
        if key in raw:
            value = raw[key]
            expected = prop.get("type")
            if expected and not _type_matches(value, expected):
                raise ConfigValidationError(f"{key} must be of type {expected}, got {value!r}")
            values[key] = value
        elif "default" in prop:
            values[key] = prop["default"]

    if values.get("seed", 0) < 0:
        raise ConfigValidationError(f"seed must be >= 0, got {values['seed']}")
    values.setdefault("seed", 0)
    logger.debug(f"Resolved config for {check or command}: {values}")
    return ExperimentConfig(command=command, check=check, values=values)
