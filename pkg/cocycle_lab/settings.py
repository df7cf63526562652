"""
Run settings
Loads an ExperimentConfig from JSON, applies --override edits and resolves the
CLI > environment > config > default precedence for run-wide settings.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.export import dumps_stable

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "COCYCLE_LAB_LOG_LEVEL"
OUT_ENV = "COCYCLE_LAB_OUT"
CONFIG_DIR_ENV = "COCYCLE_LAB_CONFIGS"
DEFAULT_CONFIG_DIR = "configs"
DEFAULT_LOG_LEVEL = "INFO"


def load_environment(dotenv_path: Optional[Path] = None) -> bool:
    """Load .env from the working directory without overriding variables already set"""
    return load_dotenv(dotenv_path=dotenv_path, override=False)


def resolve_log_level(cli_value: Optional[str] = None) -> str:
    return (cli_value or os.getenv(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()


def shipped_config(command: str, name: str) -> Optional[Path]:
    """<configs>/<command>_<name>.json when it exists, for runs started without --config"""
    path = Path(os.getenv(CONFIG_DIR_ENV) or DEFAULT_CONFIG_DIR) / f"{command}_{name}.json"
    return path if path.exists() else None


def _cocycle_shorthand(raw: str) -> Dict[str, Any]:
    """kind[:args], e.g. constant:1 or constant:1,-1 or indicator:0.25"""
    kind, _, arg = raw.partition(":")
    base: Dict[str, Any] = {"kind": kind}
    if kind == "constant":
        if not arg:
            raise ConfigurationError("constant shorthand needs a value, e.g. constant:1")
        base["value"] = [float(v) for v in arg.split(",")]
    elif kind in ("indicator", "indicator_minus_mean"):
        base["beta"] = float(arg)
    elif arg:
        raise ConfigurationError(f"no shorthand arguments for cocycle kind {kind!r}")
    return {"base": base, "modifiers": []}


def parse_override(text: str) -> Tuple[List[str], Any]:
    """key=value with a dotted key; the value is JSON when it parses, a string otherwise"""
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigurationError(f"override {text!r} is not of the form key=value")
    path = key.strip().split(".")
    raw = raw.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = _cocycle_shorthand(raw) if path == ["cocycle"] else raw
    return path, value


def apply_overrides(tree: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    for text in overrides:
        path, value = parse_override(text)
        node = tree
        for part in path[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[path[-1]] = value
        logger.debug(f"🔧 Override {'.'.join(path)} = {value!r}")
    return tree


def validation_messages(error: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()]


def read_config_tree(config_path: Optional[Path]) -> Dict[str, Any]:
    if config_path is None:
        return {}
    path = Path(config_path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    try:
        tree = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(tree, dict):
        raise ConfigurationError("a config file must hold a JSON object")
    return tree


def build_config(tree: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(tree)
    except ValidationError as e:
        raise ConfigurationError("invalid config: " + "; ".join(validation_messages(e))) from e


def load_config(
    config_path: Optional[Path],
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> ExperimentConfig:
    """Config file, then overrides, then --seed and --out (or COCYCLE_LAB_OUT)"""
    tree = apply_overrides(read_config_tree(config_path), overrides)
    if seed is not None:
        tree["master_seed"] = seed
    output_dir = out or os.getenv(OUT_ENV)
    if output_dir:
        tree["output_dir"] = output_dir
    config = build_config(tree)
    logger.info(f"✅ Loaded config (seed {config.master_seed}, schema v{config.schema_version})")
    return config


def config_sha256(config: ExperimentConfig) -> str:
    return hashlib.sha256(dumps_stable(config.model_dump(mode="json")).encode("utf-8")).hexdigest()


def file_sha256(config_path: Optional[Path]) -> str:
    """Hash of the raw config file, for runs whose config may not validate"""
    if config_path is None or not Path(config_path).exists():
        return hashlib.sha256(b"").hexdigest()
    return hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
