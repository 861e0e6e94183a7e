import json
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from ..core.errors import ConfigParseError
from ..core.logger import msg_logger
from ..schemas.scenario import ScenarioConfig


def _key_path(loc) -> str:
    # pydantic reports the model validator as an empty location
    return ".".join(str(part) for part in loc if part != "__root__")


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Load a scenario file, or the `config` section of a run manifest.

    Parameters:
    - path: JSON file

    Returns:
    - config (ScenarioConfig): validated scenario with defaults filled in

    Raises:
    - ConfigParseError: unreadable file, invalid JSON, unknown keys or out-of-range values;
      key_path names the first offending key
    """
    p = Path(path)
    try:
        document: Any = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigParseError(f"config file not found: {p}") from exc
    except OSError as exc:
        raise ConfigParseError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc

    if not isinstance(document, dict):
        raise ConfigParseError("the document must be a JSON object")
    if "config" in document and "version" in document:
        msg_logger.debug("reading scenario from run manifest %s (version %s)", p, document.get("version"))
        document = document["config"]
        if not isinstance(document, dict):
            raise ConfigParseError("must be a JSON object", "config")
    return parse_document(document)


def parse_document(document: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigParseError(first["msg"], _key_path(first["loc"])) from exc
