import json
from pathlib import Path
from typing import Union

from squeezer.models.scenario import Scenario
from squeezer.utils.errors import ConfigError
from squeezer.utils.validator import parse_json_text, validate_model


class ScenarioRepository:
    """Repository for scenario files (JSON)"""

    @staticmethod
    def loads(text: str, source: str = "<string>") -> Scenario:
        """Parse and validate scenario text"""
        data = parse_json_text(text, source)
        return validate_model(Scenario, data, f"scenario {source}")

    @staticmethod
    def load(path: Union[str, Path]) -> Scenario:
        """Read a scenario file"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e.strerror}", "cli")
        return ScenarioRepository.loads(text, str(path))

    @staticmethod
    def dumps(scenario: Scenario) -> str:
        """Serialize a scenario; the result re-parses to an equivalent scenario"""
        return json.dumps(scenario.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True)

    @staticmethod
    def save(scenario: Scenario, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ScenarioRepository.dumps(scenario) + "\n", encoding="utf-8")
        return path
