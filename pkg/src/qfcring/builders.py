"""Assemble physics objects from a validated configuration."""

from __future__ import annotations

from functools import lru_cache

from .config import config_hash
from .constants import TWO_PI
from .conversion import ModeChannel, TwmSystem, g0_effective
from .dispersion import (
    DispersionModel,
    default_model,
    load_dispersion_table,
)
from .elements import Device, DirectionalCoupler, MziCoupler, RingCavity
from .errors import ConfigError
from .matching import MatchResult, SearchConstraints
from .noise import FwmChannel


@lru_cache(maxsize=8)
def _load_model(table_file, fit_order: int) -> DispersionModel:
    if table_file is None:
        return default_model()
    return load_dispersion_table(table_file, order=fit_order)


def build_dispersion_model(cfg: dict) -> DispersionModel:
    d = cfg["dispersion"]
    return _load_model(d["table_file"], int(d["fit_order"]))


def _width_entry(mapping: dict, width_nm: float, what: str):
    for key, value in mapping.items():
        if abs(float(key) - width_nm) < 1e-6:
            return value
    raise ConfigError(f"no {what} entry for width {width_nm} nm")


def build_device(cfg: dict, width_nm=None, with_coupler=True) -> Device:
    """Device for the given width (default: the config's device width).

    with_coupler=False builds the bare ring (used by matching before any
    calibration exists).  A coupler requires the calibration block.
    """
    dev = cfg["device"]
    width = float(dev["width_nm"] if width_nm is None else width_nm)
    model = build_dispersion_model(cfg)
    poling_um = _width_entry(dev["poling_period_um_by_width"], width, "poling period")
    ring = RingCavity(
        length_um=float(dev["ring_length_um"]),
        width_nm=width,
        alpha_prop_dB_per_m=float(dev["propagation_loss_dB_per_m"]),
        ppln_fraction=float(dev["ppln_fraction"]),
        poling_period_um=float(poling_um),
    )
    mzi = None
    if with_coupler:
        cal = cfg.get("calibration")
        if not cal:
            raise ConfigError(
                "no calibration block in the config; run the `calibrate` "
                "experiment first"
            )
        entry = _width_entry(cal["by_width"], width, "calibration")
        lc = tuple(float(c) for c in entry["lc_quad_um"])
        dc = DirectionalCoupler(
            gap_nm=float(dev["dc_gap_nm"]),
            length_um=float(dev["dc_length_um"]),
            lc_coeffs_um=lc,
            lambda_ref_nm=model.lambda_ref_nm,
            lambda_window_nm=model.lambda_window_nm,
        )
        mzi = MziCoupler(
            dc_in=dc,
            dc_out=dc,
            delta_len_um=float(dev["mzi_arm_delta_um"]),
            heater_len_um=float(dev["mzi_heater_length_um"]) * float(entry["heater_scale"]),
            delta_T_K=float(dev["mzi_delta_T_K"]),
            dn_dT_per_K=float(cfg["dispersion"]["dn_dT_per_K"]),
            dispersion=model,
            width_nm=width,
            t_base_K=float(dev["ambient_temperature_K"]),
        )
    return Device(
        dispersion=model,
        ring=ring,
        mzi=mzi,
        t_ambient_K=float(dev["ambient_temperature_K"]),
    )


def build_constraints(cfg: dict) -> SearchConstraints:
    c = cfg["constraints"]
    step_mK = float(c["t_step_mK"])
    return SearchConstraints(
        signal_wavelength_nm=float(cfg["physics"]["signal_wavelength_nm"]),
        max_signal_detuning_Hz=float(c["max_signal_detuning_MHz"]) * 1e6,
        max_mismatch_Hz=float(c["max_mismatch_MHz"]) * 1e6,
        pump_base_nm=float(c["pump_base_wavelength_nm"]),
        idler_base_nm=float(c["idler_base_wavelength_nm"]),
        half_window_nm=float(c["half_window_nm"]),
        t_min_K=float(c["t_ring_min_K"]),
        t_max_K=float(c["t_ring_max_K"]),
        t_step_K=None if step_mK == 0.0 else step_mK * 1e-3,
        require_qpm=bool(c["require_qpm"]),
    )


def g0_from_config(cfg: dict) -> float:
    """Effective vacuum coupling rate g0 (rad/s) from the calibration block."""
    cal = cfg.get("calibration")
    if not cal:
        raise ConfigError("no calibration block; run `calibrate` first")
    g0_full = TWO_PI * float(cal["g0_full_over_2pi_MHz"]) * 1e6
    return g0_effective(g0_full, float(cfg["device"]["ppln_fraction"]))


def build_twm_system(cfg: dict, match: MatchResult) -> TwmSystem:
    """Conversion system at a matched operating point.

    The signal drive sits at the memory transition, so its detuning is
    -(signal resonance - target); the pump laser detuning comes from the
    config (default 0: locked on the pump resonance).
    """
    delta_p = TWO_PI * float(cfg["physics"]["pump_detuning_MHz"]) * 1e6
    delta_s = -TWO_PI * match.signal_detuning_Hz
    mk = {}
    for role, sol in (("pump", match.pump), ("signal", match.signal),
                      ("idler", match.idler)):
        mk[role] = dict(m=sol.m, omega=sol.omega, kappa_ex=sol.kappa_ex,
                        kappa_0=sol.kappa_0)
    return TwmSystem(
        pump=ModeChannel(role="pump", delta=delta_p, **mk["pump"]),
        signal=ModeChannel(role="signal", delta=delta_s, **mk["signal"]),
        idler=ModeChannel(role="idler", delta=0.0, **mk["idler"]),
        g0=g0_from_config(cfg),
        mismatch=TWO_PI * match.mismatch_Hz,
        pump_power_W=0.0,
    )


def companion_table_rad_s(cfg: dict) -> dict:
    """Per-width companion detuning table, THz (ordinary) -> rad/s."""
    raw = cfg["physics"]["fwm_companion_detuning_THz_by_width"]
    return {float(w): TWO_PI * float(v) * 1e12 for w, v in raw.items()}


def build_fwm_channel(cfg: dict, match: MatchResult, companion_rad_s: float) -> FwmChannel:
    cal = cfg.get("calibration")
    if not cal:
        raise ConfigError("no calibration block; run `calibrate` first")
    kappa_comp = TWO_PI * float(cfg["physics"]["fwm_companion_linewidth_over_2pi_GHz"]) * 1e9
    return FwmChannel(
        g_chi3=TWO_PI * float(cal["g_chi3_over_2pi_Hz"]),
        delta_comp=float(companion_rad_s),
        kappa_comp=kappa_comp,
        kappa_idler=match.idler.kappa_ex + match.idler.kappa_0,
        kappa_p=match.pump.kappa_ex + match.pump.kappa_0,
        kappa_p_ex=match.pump.kappa_ex,
        omega_p=match.pump.omega,
    )


def resolved_metadata(cfg: dict, experiment: str, extra=None) -> dict:
    """Deterministic .meta.json payload: hash, version, resolved config."""
    from . import __version__

    meta = {
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "experiment": experiment,
        "resolved_config": cfg,
        "conventions": {
            "rates": "kappa are total energy decay rates in rad/s; reported as /2pi",
            "companion_detuning": "config THz values are ordinary frequency, "
                                  "converted as 2*pi*1e12 rad/s",
        },
    }
    if extra:
        meta.update(extra)
    return meta
