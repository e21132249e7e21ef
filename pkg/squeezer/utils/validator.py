import json
from typing import Any, Dict, Type, TypeVar

from pydantic import BaseModel, ValidationError

from squeezer.utils.errors import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)


def format_validation_error(error: ValidationError) -> str:
    """Flatten a pydantic ValidationError into 'key.path: message' details"""
    error_details = []
    for item in error.errors():
        field = ".".join(str(x) for x in item["loc"]) or "<root>"
        error_details.append(f"{field}: {item['msg']}")
    return ", ".join(error_details)


def validate_model(model: Type[ModelT], data: Dict[str, Any], label: str) -> ModelT:
    """
    Validate a dict against a pydantic model

    Raises:
        ConfigError: with the offending key paths listed
    """
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid {label}: {format_validation_error(e)}", "cli")


def parse_json_text(text: str, source: str) -> Dict[str, Any]:
    """Parse JSON text, reporting line/column on syntax errors"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}", "cli")
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top-level value must be an object", "cli")
    return data
