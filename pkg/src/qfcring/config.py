"""Experiment configuration: strict schema, YAML I/O, overrides, hashing.

Every physical quantity carries its unit in the key name.  Unknown keys are
errors; required keys without committed defaults must be present.  The
resolved configuration is echoed into every output's .meta.json sidecar,
keyed by a canonical sha256 hash.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import yaml

from .errors import ConfigError

# Schema: section -> key -> (type, required).  `dict` values hold
# width-keyed maps ("1400", "1500", ...); `list` values are numeric arrays.
_NUM = (int, float)
SCHEMA = {
    "device": {
        "ring_length_um": (_NUM, True),
        "width_nm": (_NUM, True),
        "dc_gap_nm": (_NUM, True),
        "dc_length_um": (_NUM, True),
        "mzi_arm_delta_um": (_NUM, True),
        "mzi_heater_length_um": (_NUM, True),
        "mzi_delta_T_K": (_NUM, True),
        "ambient_temperature_K": (_NUM, True),
        "ppln_fraction": (_NUM, True),
        "poling_period_um_by_width": (dict, True),
        "propagation_loss_dB_per_m": (_NUM, True),
    },
    "dispersion": {
        "table_file": ((str, type(None)), True),
        "fit_order": (int, True),
        "dn_dT_per_K": (_NUM, True),
    },
    "physics": {
        "signal_wavelength_nm": (_NUM, True),
        "signal_input_rate_Hz": (_NUM, True),
        "pump_detuning_MHz": (_NUM, True),
        "fwm_companion_linewidth_over_2pi_GHz": (_NUM, True),
        "fwm_companion_detuning_THz_by_width": (dict, True),
    },
    "constraints": {
        "max_signal_detuning_MHz": (_NUM, True),
        "max_mismatch_MHz": (_NUM, True),
        "pump_base_wavelength_nm": (_NUM, True),
        "idler_base_wavelength_nm": (_NUM, True),
        "half_window_nm": (_NUM, True),
        "t_ring_min_K": (_NUM, True),
        "t_ring_max_K": (_NUM, True),
        "t_step_mK": (_NUM, True),
        "require_qpm": (bool, True),
    },
    "experiment": {
        "power_min_mW": (_NUM, True),
        "power_max_mW": (_NUM, True),
        "power_points": (int, True),
        "power_spacing": (str, True),
        # non-null pins convert/noise to this single drive power
        "pump_power_mW": ((int, float, type(None)), True),
        "spectrum_span_GHz": (_NUM, True),
        "spectrum_points": (int, True),
        "mzi_sweep_max_K": (_NUM, True),
        "mzi_sweep_points": (int, True),
        "dc_grid_min_nm": (_NUM, True),
        "dc_grid_max_nm": (_NUM, True),
        "dc_grid_points": (int, True),
        "widths_nm": (list, True),
    },
    "calibration_targets": {
        "eta_pump": (_NUM, True),
        "eta_signal": (_NUM, True),
        "eta_idler": (_NUM, True),
        "g0_over_2pi_MHz": (_NUM, True),
        "fwm_rate_Hz": (_NUM, True),
        "fwm_rate_power_mW": (_NUM, True),
        "fwm_anchor_detuning_over_2pi_THz": (_NUM, True),
        "max_heater_length_um": (_NUM, True),
    },
    # Produced by the `calibrate` experiment; optional until then.
    "calibration": {
        "g0_full_over_2pi_MHz": (_NUM, True),
        "g_chi3_over_2pi_Hz": (_NUM, True),
        "by_width": (dict, True),
    },
}
_OPTIONAL_SECTIONS = ("calibration",)


def _check_value(path: str, value, expected):
    if expected is list:
        if not isinstance(value, list) or not all(isinstance(v, _NUM) for v in value):
            raise ConfigError(f"config key '{path}' must be a list of numbers")
        return
    if expected is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"config key '{path}' must be a mapping")
        return
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"config key '{path}' must be a boolean")
        return
    if isinstance(value, bool) and bool not in (expected if isinstance(expected, tuple) else (expected,)):
        raise ConfigError(f"config key '{path}' must be a number, got boolean")
    if not isinstance(value, expected):
        raise ConfigError(f"config key '{path}' has wrong type {type(value).__name__}")


def validate_config(cfg: dict) -> dict:
    """Validate against the strict schema; returns the config unchanged."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping of sections")
    for section in cfg:
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section '{section}'")
    for section, keys in SCHEMA.items():
        if section not in cfg:
            if section in _OPTIONAL_SECTIONS:
                continue
            raise ConfigError(f"missing config section '{section}'")
        body = cfg[section]
        if not isinstance(body, dict):
            raise ConfigError(f"config section '{section}' must be a mapping")
        for key in body:
            if key not in keys:
                raise ConfigError(f"unknown config key '{section}.{key}'")
        for key, (expected, required) in keys.items():
            if key not in body:
                if required:
                    raise ConfigError(f"missing config key '{section}.{key}'")
                continue
            _check_value(f"{section}.{key}", body[key], expected)
    _validate_width_maps(cfg)
    return cfg


def _normalize_width_keys(mapping: dict, where: str) -> dict:
    # YAML parses bare `1500:` as an int; canonical form is the string of
    # the float's %g rendering, so hashing and comparisons are stable.
    out = {}
    for w, v in mapping.items():
        try:
            width = float(w)
        except (TypeError, ValueError):
            raise ConfigError(f"'{where}' keys must be widths in nm, got {w!r}") from None
        out[f"{width:g}"] = v
    return out


def _validate_width_maps(cfg: dict):
    for path in (("device", "poling_period_um_by_width"),
                 ("physics", "fwm_companion_detuning_THz_by_width")):
        section, key = path
        mapping = cfg.get(section, {}).get(key)
        if mapping is None:
            continue
        mapping = _normalize_width_keys(mapping, f"{section}.{key}")
        cfg[section][key] = mapping
        for w, v in mapping.items():
            if not isinstance(v, _NUM):
                raise ConfigError(f"'{section}.{key}[{w}]' must be a number")
    cal = cfg.get("calibration")
    if cal:
        cal["by_width"] = _normalize_width_keys(cal.get("by_width", {}),
                                                "calibration.by_width")
        for w, body in cal.get("by_width", {}).items():
            if not isinstance(body, dict):
                raise ConfigError(f"'calibration.by_width[{w}]' must be a mapping")
            for key in body:
                if key not in ("heater_scale", "lc_quad_um"):
                    raise ConfigError(f"unknown config key 'calibration.by_width[{w}].{key}'")
            for key in ("heater_scale", "lc_quad_um"):
                if key not in body:
                    raise ConfigError(f"missing config key 'calibration.by_width[{w}].{key}'")


def load_config(path=None) -> dict:
    """Load and validate a YAML config; None loads the packaged default."""
    if path is None:
        text = default_config_text()
        source = "<packaged default>"
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        source = str(path)
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: YAML parse error: {exc}") from None
    return validate_config(cfg)


def default_config_text() -> str:
    ref = resources.files("qfcring.data").joinpath("default_config.yaml")
    return ref.read_text(encoding="utf-8")


def default_config() -> dict:
    return validate_config(yaml.safe_load(default_config_text()))


# --------------------------------------------------------------------------
# Overrides
# --------------------------------------------------------------------------

def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply `key=value` strings; equivalent to editing the file by hand.

    Keys are dotted paths (`physics.signal_wavelength_nm=727`); a bare key
    is accepted when it is unique across the schema.  Values are parsed as
    YAML scalars.  The result is re-validated.
    """
    out = json.loads(json.dumps(cfg))  # deep copy, plain types only
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            raise ConfigError(f"override '{item}': unparseable value") from None
        path = key.split(".")
        if len(path) == 1:
            hits = [s for s, keys in SCHEMA.items() if path[0] in keys]
            if len(hits) == 1:
                path = [hits[0], path[0]]
            elif not hits:
                raise ConfigError(f"unknown config key '{key}'")
            else:
                raise ConfigError(
                    f"override key '{key}' is ambiguous (sections {hits}); "
                    "use section.key"
                )
        node = out
        for part in path[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"unknown config key '{key}'")
            node = node[part]
        if not isinstance(node, dict) or path[-1] not in node:
            raise ConfigError(f"unknown config key '{key}'")
        node[path[-1]] = value
    return validate_config(out)


def config_hash(cfg: dict) -> str:
    """sha256 of the canonical JSON form of the resolved config."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Emission (deterministic, with per-key comments)
# --------------------------------------------------------------------------

def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    return str(v)


def _emit(node, indent: int, lines, comments, path):
    pad = "  " * indent
    if isinstance(node, dict):
        for key, value in node.items():
            kpath = f"{path}.{key}" if path else key
            note = comments.get(kpath)
            if note:
                for line in note.splitlines():
                    lines.append(f"{pad}# {line}")
            if isinstance(value, dict):
                lines.append(f"{pad}{key}:")
                _emit(value, indent + 1, lines, comments, kpath)
            elif isinstance(value, list):
                body = ", ".join(_fmt_scalar(v) for v in value)
                lines.append(f"{pad}{key}: [{body}]")
            else:
                lines.append(f"{pad}{key}: {_fmt_scalar(value)}")
    else:
        lines.append(f"{pad}{_fmt_scalar(node)}")


def emit_config(cfg: dict, comments=None, header: str = "") -> str:
    """Serialize a config to YAML with optional per-key comments.

    Sections and keys are emitted in schema order so output is stable.
    """
    ordered = {}
    for section in SCHEMA:
        if section not in cfg:
            continue
        body = cfg[section]
        ordered[section] = {k: body[k] for k in SCHEMA[section] if k in body}
        for k in body:
            if k not in ordered[section]:
                ordered[section][k] = body[k]
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    _emit(ordered, 0, lines, comments or {}, "")
    return "\n".join(lines) + "\n"
