"""
Run configuration

Merges the per-module config models into one RunConfig. Precedence is
flag > file > default, and every key remembers which source set it.

Config files are YAML (``.yaml`` / ``.yml``) or JSON and accept flat keys
(``dt: 0.05``) as well as section mappings (``reachability: {dt: 0.05}``).
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml
from pydantic import ValidationError

from analysis.criticality import CriticalityConfig
from analysis.evaluation import EvaluationConfig
from analysis.loss import LossParams
from analysis.reachability import ReachabilityConfig
from errors import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = {
    "reachability": ReachabilityConfig,
    "criticality": CriticalityConfig,
    "loss": LossParams,
    "evaluation": EvaluationConfig,
}

KEY_SECTION = {key: name for name, model in SECTIONS.items() for key in model.model_fields}

DEFAULT = "default"
FLAG = "flag"


def load_config_file(path) -> dict:
    """
    Read a YAML or JSON mapping.

    Raises:
        ConfigError: for unreadable files, parse errors or a non-mapping top level.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: config file is not valid UTF-8 (byte {exc.start})") from exc

    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot parse config file: {exc}") from exc

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config file must contain a mapping")
    return data


def flatten_config(raw: dict, source: str = "config") -> dict:
    """
    Normalize flat and sectioned keys into ``{(section, key): value}``.

    Raises:
        ConfigError: for unknown keys.
    """
    flat = {}
    for key, value in raw.items():
        if key in SECTIONS and isinstance(value, dict):
            fields = SECTIONS[key].model_fields
            for inner, inner_value in value.items():
                if inner not in fields:
                    raise ConfigError(f"{source}: unknown key {key}.{inner}")
                flat[(key, inner)] = inner_value
        elif key in KEY_SECTION:
            flat[(KEY_SECTION[key], key)] = value
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return flat


@dataclass(frozen=True)
class RunConfig:
    """
    Attributes:
        reachability (ReachabilityConfig)
        criticality (CriticalityConfig)
        loss (LossParams)
        evaluation (EvaluationConfig)
        provenance (dict): ``"section.key"`` -> ``"default"``, ``"file:<path>"`` or ``"flag"``.
    """

    reachability: ReachabilityConfig = field(default_factory=ReachabilityConfig)
    criticality: CriticalityConfig = field(default_factory=CriticalityConfig)
    loss: LossParams = field(default_factory=LossParams)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    provenance: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, config_path=None, overrides: dict = None) -> "RunConfig":
        """
        Resolve every key before any computation.

        ``overrides`` holds flag values by flat key; ``None`` values are ignored.
        Unless set by file or flag, ``horizon`` follows ``ttc_max``.

        Raises:
            ConfigError: for unknown keys or values the config models reject.
        """
        values, provenance = {}, {}
        if config_path is not None:
            source = f"file:{config_path}"
            for locus, value in flatten_config(load_config_file(config_path), str(config_path)).items():
                values[locus] = value
                provenance[locus] = source

        flags = {k: v for k, v in (overrides or {}).items() if v is not None}
        for locus, value in flatten_config(flags, "flags").items():
            values[locus] = value
            provenance[locus] = FLAG

        horizon = ("reachability", "horizon")
        ttc_max = ("criticality", "ttc_max")
        if horizon not in values:
            values[horizon] = values.get(ttc_max, CriticalityConfig.model_fields["ttc_max"].default)
            provenance[horizon] = f"{DEFAULT} (ttc_max)"

        sections = {}
        for name, model in SECTIONS.items():
            section_values = {key: v for (sec, key), v in values.items() if sec == name}
            try:
                sections[name] = model(**section_values)
            except ValidationError as exc:
                first = exc.errors()[0]
                locus = ".".join(str(part) for part in first["loc"]) or "<section>"
                raise ConfigError(f"invalid {name} config, {locus}: {first['msg']}") from exc

        labelled = {}
        for name, model in SECTIONS.items():
            for key in model.model_fields:
                labelled[f"{name}.{key}"] = provenance.get((name, key), DEFAULT)

        logger.debug("resolved run config", extra={"provenance": labelled})
        return cls(provenance=labelled, **sections)

    def to_dict(self) -> dict:
        """JSON-ready snapshot embedded in every output file."""
        return {name: getattr(self, name).model_dump(mode="json") for name in SECTIONS}

    def explain(self) -> list:
        """One ``section.key = value  (source)`` line per key."""
        lines = []
        for name, values in self.to_dict().items():
            for key, value in values.items():
                locus = f"{name}.{key}"
                lines.append(f"{locus} = {value}  ({self.provenance.get(locus, DEFAULT)})")
        return lines
