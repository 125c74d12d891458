"""Flat key=value run configuration files with command-line overrides.

One `key = value` per line, `#` starts a comment, keys name RunConfig
fields by dotted path (e.g. `apd.gate_width_ns = 2.5`). Every parameter is
scalar, so a flat file diffs cleanly in experiment logs. Unknown keys are
rejected and all physical ranges are checked while building the config, so
a bad file never reaches the engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .engine import Receiver, RunConfig
from .errors import ConfigError
from .homodyne import HomodyneParams
from .optics import ChannelParams, VisibilityParams
from .photon_counting import ApdParams


def _parse_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_receiver(raw: str) -> Receiver:
    try:
        return Receiver(raw.lower())
    except ValueError:
        valid = ", ".join(r.value for r in Receiver)
        raise ValueError(f"expected one of {{{valid}}}, got {raw!r}") from None


def _parse_seed(raw: str) -> int:
    return int(raw, 0)


# key -> (engine section or None for top-level/cli, field name, caster)
_KEYS: dict[str, tuple[str | None, str, object]] = {
    "receiver": (None, "receiver", _parse_receiver),
    "n_symbols": (None, "n_symbols", int),
    "mean_photons_per_bit": (None, "mean_photons_per_bit", float),
    "rep_rate_hz": (None, "rep_rate_hz", float),
    "seed": (None, "seed", _parse_seed),
    "channel.loss_db": ("channel", "loss_db", float),
    "channel.drift_sigma": ("channel", "drift_sigma", float),
    "channel.pol_angle": ("channel", "pol_angle", float),
    "channel.phase_mod_sigma": ("channel", "phase_mod_sigma", float),
    "visibility.intrinsic_visibility": ("visibility", "intrinsic_visibility", float),
    "visibility.extinction_ratio_db": ("visibility", "extinction_ratio_db", float),
    "apd.quantum_efficiency": ("apd", "quantum_efficiency", float),
    "apd.dark_prob_per_gate": ("apd", "dark_prob_per_gate", float),
    "apd.gate_width_ns": ("apd", "gate_width_ns", float),
    "apd.dead_time_us": ("apd", "dead_time_us", float),
    "apd.rep_rate_hz": ("apd", "rep_rate_hz", float),
    "apd.afterpulse_prob": ("apd", "afterpulse_prob", float),
    "homodyne.lo_mean_photons": ("homodyne", "lo_mean_photons", float),
    "homodyne.quantum_efficiency": ("homodyne", "quantum_efficiency", float),
    "homodyne.electronic_noise_ratio": ("homodyne", "electronic_noise_ratio", float),
    "homodyne.cmrr_db": ("homodyne", "cmrr_db", float),
    "homodyne.decision_threshold": ("homodyne", "decision_threshold", float),
    # CLI-only keys
    "trace": ("cli", "trace", _parse_bool),
    "output_csv": ("cli", "output_csv", str),
    "trace_csv": ("cli", "trace_csv", str),
    "sweep_csv": ("cli", "sweep_csv", str),
}

_SECTION_TYPES = {
    "channel": ChannelParams,
    "visibility": VisibilityParams,
    "apd": ApdParams,
    "homodyne": HomodyneParams,
}


@dataclass
class CliConfig:
    """RunConfig plus front-end output paths and the trace toggle."""

    run: RunConfig = field(default_factory=RunConfig)
    trace: bool = False
    output_csv: str = "run_stats.csv"
    trace_csv: str = "trace.csv"
    sweep_csv: str = "sweep.csv"


def parse_entries(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse key=value lines into cast values, rejecting unknown keys."""
    entries: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _KEYS:
            raise ConfigError(
                f"{source}:{lineno}: unknown key '{key}' (valid keys: "
                + ", ".join(sorted(_KEYS))
                + ")"
            )
        _, _, caster = _KEYS[key]
        try:
            entries[key] = caster(raw_value)
        except ValueError as err:
            raise ConfigError(f"{source}:{lineno}: {key}: {err}") from err
    return entries


def parse_overrides(pairs: list[str]) -> dict[str, object]:
    """Parse --set key=value overrides with the same key table."""
    entries: dict[str, object] = {}
    for pair in pairs:
        parsed = parse_entries(pair, source="override")
        entries.update(parsed)
    return entries


def build_config(entries: dict[str, object]) -> CliConfig:
    """Assemble a validated CliConfig from parsed entries."""
    top: dict[str, object] = {}
    sections: dict[str, dict[str, object]] = {name: {} for name in _SECTION_TYPES}
    cli_fields: dict[str, object] = {}
    for key, value in entries.items():
        section, field_name, _ = _KEYS[key]
        if section is None:
            top[field_name] = value
        elif section == "cli":
            cli_fields[field_name] = value
        else:
            sections[section][field_name] = value

    built_sections = {}
    for name, cls in _SECTION_TYPES.items():
        try:
            built_sections[name] = cls(**sections[name])
        except ValueError as err:
            raise ConfigError(f"{name}.{err}") from err
    try:
        run = RunConfig(**top, **built_sections)
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err
    return CliConfig(run=run, **cli_fields)


def load_config(path: str | Path, overrides: list[str] | None = None) -> CliConfig:
    """Read a config file, apply overrides, and build a validated CliConfig."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    entries = parse_entries(text, source=str(path))
    if overrides:
        entries.update(parse_overrides(overrides))
    return build_config(entries)
