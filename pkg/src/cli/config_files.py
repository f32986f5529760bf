"""
Archivos de configuración `clave = valor` (comentarios con `#`). Un archivo puede declarar
`problem = <nombre>` y sobrescribir solo algunas claves: antes se mezcla
`defaults/<nombre>.cfg`. Las constantes del problema (c, lambda1, k1, ...) se agrupan en
`RunConfig.constants`.
"""

import logging
from pathlib import Path
from typing import Mapping, Optional

import regex

from hcsp.errors import ConfigurationError
from src.cli.schemas import RunConfig
from src.settings.config import settings

LINE_PATTERN = regex.compile(r"^\s*(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>[^#]*?)\s*(?:#.*)?$")
BLANK_PATTERN = regex.compile(r"^\s*(?:#.*)?$")
CONSTANT_KEYS = frozenset({"c", "lambda1", "lambda2", "k1", "k2", "k3", "x0", "v0", "a0", "time_horizon"})
NONE_VALUES = frozenset({"none", "null", ""})

logger = logging.getLogger("hcsp")


def parse_config_text(text: str, source: str = "<texto>") -> dict[str, str]:
    values: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if BLANK_PATTERN.match(line):
            continue
        match_ = LINE_PATTERN.match(line)
        if match_ is None:
            raise ConfigurationError(f"{source}:{number}: línea no válida {line.strip()!r}")
        key = match_.group("key").lower()
        if key in values:
            logger.warning(f"[CLI] {source}:{number}: la clave '{key}' aparece repetida; se usa el último valor")
        values[key] = match_.group("value")
    return values


def read_config_file(path) -> dict[str, str]:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=path.name)


def default_config_path(problem: str) -> Path:
    return settings.DEFAULTS_DIR / f"{problem}.cfg"


def build_run_config(values: Mapping[str, object]) -> RunConfig:
    fields: dict[str, object] = {}
    constants: dict[str, float] = {}
    for key, value in values.items():
        if isinstance(value, str) and value.strip().lower() in NONE_VALUES:
            value = None
        if key in CONSTANT_KEYS:
            if value is None:
                continue
            try:
                constants[key] = float(value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"la constante '{key}' no es numérica: {value!r}") from e
        elif key not in RunConfig.model_fields:
            raise ConfigurationError(f"clave de configuración desconocida: '{key}'")
        else:
            fields[key] = value
    return RunConfig(**fields, constants=constants)


def load_run_config(path=None, overrides: Optional[Mapping[str, object]] = None) -> RunConfig:
    """Valores por defecto del problema < archivo < opciones de la línea de órdenes."""
    file_values = read_config_file(path) if path is not None else {}
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    problem = overrides.get("problem") or file_values.get("problem")
    if not problem:
        raise ConfigurationError("falta 'problem' (en el archivo o con --problem)")

    defaults_path = default_config_path(str(problem))
    defaults = read_config_file(defaults_path) if defaults_path.exists() else {}
    if not defaults:
        logger.warning(f"[CLI] sin archivo de valores por defecto para '{problem}' en {settings.DEFAULTS_DIR}")
    return build_run_config({**defaults, **file_values, **overrides})


def expand_config_paths(paths) -> list[Path]:
    """Archivos `.cfg` sueltos o directorios completos, en orden estable."""
    expanded = []
    for path in map(Path, paths):
        if path.is_dir():
            expanded.extend(sorted(path.glob("*.cfg")))
        else:
            expanded.append(path)
    return expanded
