"""Parameter files and the bundled canonical fixtures."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .models import model_from_dict

__all__ = ["ParamFile", "ConfigError", "load_param_file", "fixture_path", "load_fixture",
           "schema", "canonical_sw_slice", "FIXTURES"]

FIXTURES = {"sw": "sw_fixture.json", "cnls": "cnls_fixture.json"}


class ConfigError(ValueError):
    """A parameter file is missing, malformed or has invalid fields."""


@dataclass
class ParamFile:
    model: object
    fixed_state: list
    guess: list | None = None
    pin: int = 1
    window: dict = field(default_factory=dict)
    source: str = ""

    def window_by_index(self) -> dict:
        """Window keyed by slice-parameter index, as ``trace_curve`` expects."""
        names = list(self.model.slice_names)
        return {names.index(k): tuple(v) for k, v in self.window.items()}


def fixture_path(name: str) -> Path:
    fname = FIXTURES.get(name, name)
    return Path(str(resources.files("modwave") / "data" / fname))


def schema(name: str) -> dict:
    path = resources.files("modwave") / "data" / "schemas" / f"{name}.schema.json"
    return json.loads(path.read_text())


def _parse(doc: dict, source: str) -> ParamFile:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    for key in ("model", "params", "fixed_state"):
        if key not in doc:
            raise ConfigError(f"{source}: missing field '{key}'")
    try:
        model, state = model_from_dict(doc)
    except TypeError as exc:
        raise ConfigError(f"{source}: field 'params': {exc}") from exc
    except KeyError as exc:
        raise ConfigError(f"{source}: field 'fixed_state' lacks {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    guess = doc.get("guess")
    if guess is not None and len(guess) != 3:
        raise ConfigError(f"{source}: field 'guess' must list 3 slice parameters")
    window = doc.get("window", {})
    bad = set(window) - set(model.slice_names)
    if bad:
        raise ConfigError(f"{source}: field 'window' has unknown keys {sorted(bad)}")
    pin = int(doc.get("pin", 1))
    if pin not in (0, 1, 2):
        raise ConfigError(f"{source}: field 'pin' must be 0, 1 or 2")
    return ParamFile(model, state, None if guess is None else [float(g) for g in guess],
                     pin, window, source)


def load_param_file(path) -> ParamFile:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"parameter file not found: {path}")
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return _parse(doc, str(path))


def load_fixture(name: str) -> ParamFile:
    """``"sw"`` or ``"cnls"``."""
    return load_param_file(fixture_path(name))


def canonical_sw_slice() -> np.ndarray:
    """Exact double-critical slice ``(r, k1, k2)`` of the shallow-water fixture
    (``F1^2 = 1/2``, ``F2^2 = 2 - sqrt 3`` at ``eta0 = 10``, ``chi0 = 5``)."""
    s3 = np.sqrt(3.0)
    return np.array([(s3 - 1) / 2, np.sqrt(5.0), np.sqrt(5 * (2 - s3))])
