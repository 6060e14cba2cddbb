"""
Result and configuration I/O
Config parsing, CSV tables, JSON documents and run manifests
"""

import hashlib
import json
import logging
from datetime import datetime
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from errors import ConfigurationError, SchemaMismatchError
from schemas import RunConfig, RunManifest

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "matplotlib", "pydantic", "pydantic-settings")


# ============================================
# Configuration
# ============================================

def parse_config(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a configuration mapping

    Raises:
        ConfigurationError: With one "field: message" entry per violation
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        fields = [
            {"field": ".".join(str(p) for p in err["loc"]) or "<root>", "message": err["msg"]}
            for err in exc.errors()
        ]
        summary = "; ".join(f"{f['field']}: {f['message']}" for f in fields)
        raise ConfigurationError(f"Invalid configuration: {summary}", details={"fields": fields}) from exc


def load_config(path: PathLike, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read and validate a JSON config file; an empty file counts as {}.

    Args:
        path: Config file
        overrides: Top-level keys replacing the file's values (CLI flags)
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}", details={"path": str(path)})
    text = path.read_text(encoding="utf-8").strip()
    try:
        data = json.loads(text) if text else {}
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Config file is not valid JSON: {exc}", details={"path": str(path)}) from exc
    if not isinstance(data, dict):
        raise ConfigurationError("Config file must hold a JSON object", details={"path": str(path)})
    data.update(overrides or {})
    logger.info(f"Loaded config from {path}")
    return parse_config(data)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True, default=_json_default)


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of the validated config."""
    return hashlib.sha256(canonical_json(config.model_dump(mode="json")).encode("utf-8")).hexdigest()


# ============================================
# Tables
# ============================================

def write_table(rows: Iterable[Dict[str, Any]], columns: Sequence[str], path: PathLike) -> Path:
    """
    Write rows as CSV with a fixed column order

    Floats use Python's shortest round-trip representation; missing values
    are written as empty cells.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_table(path: PathLike, required: Sequence[str] = ()) -> pd.DataFrame:
    """
    Read a result CSV

    Raises:
        SchemaMismatchError: If the file is empty or lacks a required column
    """
    path = Path(path)
    if not path.is_file() or path.stat().st_size == 0:
        raise SchemaMismatchError(f"Result file is missing or empty: {path}", details={"path": str(path)})
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise SchemaMismatchError(f"Result file has no data: {path}", details={"path": str(path)}) from exc
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaMismatchError(
            f"Result file {path.name} lacks columns {missing}",
            details={"path": str(path), "missing": missing},
        )
    if frame.empty:
        raise SchemaMismatchError(f"Result file has no rows: {path}", details={"path": str(path)})
    return frame


# ============================================
# JSON Documents
# ============================================

def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, (datetime, Path)):
        return str(value)
    raise TypeError(f"Not JSON serialisable: {type(value).__name__}")


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    path = Path(path)
    if not path.is_file():
        raise SchemaMismatchError(f"JSON file not found: {path}", details={"path": str(path)})
    return json.loads(path.read_text(encoding="utf-8"))


# ============================================
# Manifest
# ============================================

def package_versions(packages: Sequence[str] = TRACKED_PACKAGES) -> Dict[str, str]:
    versions = {}
    for name in packages:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(
    out_dir: PathLike,
    subcommand: str,
    config: RunConfig,
    workers: int,
    wall_time: float,
    artifacts: List[PathLike],
) -> Path:
    """Write manifest.json tying every artifact to the config hash and seed."""
    manifest = RunManifest(
        subcommand=subcommand,
        config_hash=config_hash(config),
        seed=config.seed,
        workers=workers,
        versions=package_versions(),
        wall_time=wall_time,
        artifacts=[Path(a).name for a in artifacts],
        created_at=datetime.now(),
    )
    return write_json(manifest.model_dump(mode="json"), Path(out_dir) / "manifest.json")
