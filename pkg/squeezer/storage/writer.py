"""
Result artifacts: CSV with a '#' metadata header, or JSON with a metadata block

Every artifact echoes the full scenario and the package version.
"""
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from squeezer import __version__
from squeezer.models.scenario import Scenario
from squeezer.utils.errors import ConfigError

logger = logging.getLogger(__name__)


def metadata(scenario: Scenario, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    meta = {
        "artifact": "squeezer",
        "version": __version__,
        "scenario": scenario.model_dump(mode="json", exclude_none=True),
    }
    if extra:
        meta.update(extra)
    return meta


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def render_csv(frame: pd.DataFrame, meta: Dict[str, Any]) -> str:
    buffer = io.StringIO()
    for key, value in meta.items():
        buffer.write(f"# {key}: {json.dumps(_jsonable(value), sort_keys=True)}\n")
    frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return buffer.getvalue()


def render_json(payload: Dict[str, Any], meta: Dict[str, Any]) -> str:
    return json.dumps({"metadata": _jsonable(meta), "result": _jsonable(payload)}, indent=2, sort_keys=True)


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read back a CSV artifact, skipping its metadata header"""
    return pd.read_csv(path, comment="#")


class ResultWriter:
    """Single writer for one output target (a path, or stdout when path is None)"""

    def __init__(self, scenario: Scenario, path: Optional[Union[str, Path]] = None, fmt: Optional[str] = None):
        self.scenario = scenario
        self.path = Path(path) if path else None
        self.format = fmt or scenario.output.format
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unsupported output format {self.format!r}", "cli")

    def _emit(self, text: str) -> Optional[Path]:
        if self.path is None:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
            return None
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot write {self.path}: {e.strerror}", "cli")
        logger.info(f"wrote {self.path}")
        return self.path

    def write_table(self, frame: pd.DataFrame, extra: Optional[Dict[str, Any]] = None) -> Optional[Path]:
        meta = metadata(self.scenario, extra)
        if self.format == "json":
            return self._emit(render_json({"rows": frame.to_dict(orient="records")}, meta))
        return self._emit(render_csv(frame, meta))

    def write_report(self, payload: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> Optional[Path]:
        """Scalar reports are always structured text"""
        return self._emit(render_json(payload, metadata(self.scenario, extra)))
