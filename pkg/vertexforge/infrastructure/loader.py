"""
Infrastructure Layer - Scenario Loader
Чтение файла сценария (JSON, YAML) и проверка конверта
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

import yaml
from pydantic import ValidationError

from vertexforge.application.dto import ScenarioDTO, error_message, error_pointer
from vertexforge.domain.exceptions import ScenarioError

logger = logging.getLogger("vertexforge.loader")

YAML_SUFFIXES = (".yaml", ".yml")


def read_document(path: Union[str, Path]) -> Any:
    """UTF-8 JSON, or YAML for .yaml/.yml files"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() in YAML_SUFFIXES:
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError(f"{path.name} is not well-formed: {exc}") from exc


def parse_scenario(document: Any) -> ScenarioDTO:
    if not isinstance(document, dict):
        raise ScenarioError("a scenario is a JSON object", "")
    try:
        return ScenarioDTO.model_validate(document)
    except ValidationError as exc:
        raise ScenarioError(error_message(exc), error_pointer(exc)) from exc


def load_scenario(path: Union[str, Path]) -> ScenarioDTO:
    scenario = parse_scenario(read_document(path))
    logger.debug("loaded %s: %s", path, scenario.command)
    return scenario
