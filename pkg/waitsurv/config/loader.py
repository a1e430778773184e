import yaml
from pathlib import Path
from typing import Any, Dict

from waitsurv.config.models import AppConfig, SearchSpace, SyntheticSpec
from waitsurv.domain.models import TableSchema


def _read_mapping(path: Path, label: str) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"{label} not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    if not isinstance(data, dict):
        raise ValueError(f"{label} {path} must be a YAML mapping")
    return data


def load_config(config_path: Path) -> AppConfig:
    """Loads YAML config and parses it into AppConfig Pydantic model."""
    return AppConfig(**_read_mapping(config_path, "Config file"))


def load_schema(schema_path: Path) -> TableSchema:
    """Loads a column schema (duration/event designations plus column types)."""
    return TableSchema.model_validate(_read_mapping(schema_path, "Schema file"))


def load_search_space(space_path: Path) -> SearchSpace:
    """Loads a search-space file; unspecified fields keep their default ranges."""
    data = _read_mapping(space_path, "Search-space file")
    # A full config file is accepted too; its `search` section is used.
    if "search" in data and isinstance(data["search"], dict):
        data = data["search"]
    return SearchSpace.model_validate(data)


def load_synthetic_spec(spec_path: Path) -> SyntheticSpec:
    """Loads a synthetic-data generator spec."""
    return SyntheticSpec.model_validate(_read_mapping(spec_path, "Synthetic spec"))


def dump_yaml(data: Dict[str, Any], path: Path) -> None:
    """Write a mapping as block-style YAML, preserving key order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, default_flow_style=False, allow_unicode=True, sort_keys=False)
