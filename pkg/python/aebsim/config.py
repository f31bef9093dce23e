"""Scenario files: TOML sections mapped onto the frozen settings dataclasses.

Every key is optional; missing keys keep their built-in defaults. Unknown sections or keys
and out-of-range values raise :class:`ConfigError` naming ``section.key``.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import tomllib
import typing
from pathlib import Path
from typing import Any

from aebsim._errors import ConfigError, InvalidParameter
from aebsim.command import Controller
from aebsim.simulation import SimulationConfig

logger = logging.getLogger(__name__)

SECTIONS: dict[str, str] = {
    "vehicle": "Vehicle data. Iz is carried but unused by straight-line motion.",
    "scenario": "Initial conditions, road friction and lead-vehicle behaviour.",
    "supervisor": "Rule-based supervisor.",
    "smc": "Sliding-mode wheel-slip controller.",
    "lqr": "Gain-scheduled LQR wheel-slip controller.",
    "pid": "PID speed regulator between threats.",
    "simulation": "Integrator and metric settings.",
}


def _coerce(value: object, hint: object, where: str) -> object:
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            msg = f"expected a number, got {value!r}"
            raise ConfigError(msg, field=where)
        return float(value)
    if hint is bool:
        if not isinstance(value, bool):
            msg = f"expected true or false, got {value!r}"
            raise ConfigError(msg, field=where)
        return value
    if hint is str:
        if not isinstance(value, str):
            msg = f"expected a string, got {value!r}"
            raise ConfigError(msg, field=where)
        return value
    if hint is Controller:
        try:
            return Controller(value)
        except ValueError:
            choices = ", ".join(c.value for c in Controller)
            msg = f"expected one of {choices}, got {value!r}"
            raise ConfigError(msg, field=where) from None
    if hint == float | None:
        return _coerce(value, float, where)
    if typing.get_origin(hint) is tuple:
        if not isinstance(value, list):
            msg = f"expected an array, got {value!r}"
            raise ConfigError(msg, field=where)
        args = typing.get_args(hint)
        if len(value) != len(args):
            msg = f"expected {len(args)} entries, got {len(value)}"
            raise ConfigError(msg, field=where)
        return tuple(_coerce(v, a, where) for v, a in zip(value, args, strict=True))
    msg = f"unsupported setting type {hint!r}"
    raise ConfigError(msg, field=where)


def _section(cls: type[Any], table: object, section: str) -> Any:
    if not isinstance(table, dict):
        msg = "expected a table"
        raise ConfigError(msg, field=section)
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in table.items():
        where = f"{section}.{key}"
        if key not in known:
            msg = "unknown key"
            raise ConfigError(msg, field=where)
        kwargs[key] = _coerce(value, hints[key], where)
    try:
        return cls(**kwargs)
    except InvalidParameter as e:
        raise ConfigError(str(e).removeprefix(f"{e.field}: "), field=f"{section}.{e.field}") from e


def config_from_mapping(data: dict[str, Any]) -> SimulationConfig:
    """Build a configuration from parsed TOML."""
    hints = typing.get_type_hints(SimulationConfig)
    sections = {}
    for section, table in data.items():
        if section not in SECTIONS:
            msg = "unknown section"
            raise ConfigError(msg, field=section)
        sections[section] = _section(hints[section], table, section)
    try:
        return SimulationConfig(**sections)
    except InvalidParameter as e:
        raise ConfigError(str(e).removeprefix(f"{e.field}: "), field=e.field) from e


def load_config(path: Path) -> SimulationConfig:
    """Read a scenario file.

    Raises:
        ConfigError: if the file cannot be read, is not valid TOML, or holds an invalid entry.
    """
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        msg = f"cannot read scenario file: {e.strerror or e}"
        raise ConfigError(msg, field=str(path)) from e
    except tomllib.TOMLDecodeError as e:
        msg = f"invalid TOML: {e}"
        raise ConfigError(msg, field=str(path)) from e
    config = config_from_mapping(data)
    logger.debug("Loaded scenario %r from %s", config.scenario.name, path)
    return config


def _toml_value(value: object) -> str:
    match value:
        case bool():
            return "true" if value else "false"
        case Controller():
            return json.dumps(value.value)
        case str():
            return json.dumps(value)
        case float() | int():
            return repr(float(value))
        case tuple():
            return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    msg = f"cannot write {value!r} as TOML"
    raise TypeError(msg)


def dump_config(config: SimulationConfig) -> str:
    """Annotated TOML for ``config``; reading it back yields an equal configuration.

    Unset optional values are written as comments.
    """
    lines = ["# aebsim scenario file. Every key is optional; omitted keys take these values."]
    for section, comment in SECTIONS.items():
        settings = getattr(config, section)
        lines += ["", f"[{section}]", f"# {comment}"]
        for f in dataclasses.fields(settings):
            value = getattr(settings, f.name)
            doc = f.metadata.get("doc", "")
            if value is None:
                lines.append(f"# {f.name} = <unset>  # {doc}")
            else:
                lines.append(f"{f.name} = {_toml_value(value)}  # {doc}")
    return "\n".join(lines) + "\n"


def write_config(config: SimulationConfig, path: Path) -> None:
    path.write_text(dump_config(config), encoding="utf-8")
