"""Calibration of the committed device defaults against the design anchors.

Anchors (all from the calibration_targets section):
  1. coupling ratios at the operating MZI drive: eta_pump ~ 0.5 (critical),
     eta_signal / eta_idler overcoupled, evaluated at the matched carriers;
  2. effective vacuum rate g0 at the configured poled fraction;
  3. four-wave-mixing noise rate at the anchor power and companion detuning.

Solved per width: a heater length (as a scale on the base length) and the
three coupling-length anchor points that make the MZI cross-coupling land
exactly on the eta targets; shared: g0_full and g_chi3 (closed forms).
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .builders import build_constraints, build_device, build_dispersion_model
from .constants import DB_TO_NEPERS_POWER, TWO_PI
from .dispersion import U_SCALE_NM
from .elements import Device, DirectionalCoupler, MziCoupler
from .errors import CalibrationInfeasible, NoFeasibleMatch
from .matching import MatchResult, find_triple_resonance
from .noise import FwmChannel, fwm_noise_rate

# Heater-length scan used to place the pump near an MZI envelope null while
# the signal/idler envelopes stay strong: coarse grid, then the branch
# nearest the base length wins.
_HEATER_GRID_UM = 0.25


def solve_g0_full_over_2pi_MHz(targets: dict, ppln_fraction: float) -> float:
    """g0_full such that g0_full * f_ppln hits the g0 target."""
    if ppln_fraction <= 0.0:
        raise CalibrationInfeasible(
            "anchor 'g0': poled fraction is zero, no finite g0_full exists"
        )
    return float(targets["g0_over_2pi_MHz"]) / ppln_fraction


def _required_cross_couplings(device: Device, match: MatchResult, targets: dict):
    """Composite K needed at each carrier for the eta anchors."""
    model, ring = device.dispersion, device.ring
    t = match.t_ring_K
    out = {}
    for label, sol, eta_key in (
        ("pump", match.pump, "eta_pump"),
        ("signal", match.signal, "eta_signal"),
        ("idler", match.idler, "eta_idler"),
    ):
        eta = float(targets[eta_key])
        if not 0.0 < eta < 1.0:
            raise CalibrationInfeasible(
                f"anchor 'coupling ratios': target {eta_key}={eta} must be in (0, 1)"
            )
        vg = float(model.group_velocity(sol.lambda_nm, t, ring.width_nm))
        kappa_0 = ring.alpha_prop_dB_per_m * DB_TO_NEPERS_POWER * vg
        kappa_ex = kappa_0 * eta / (1.0 - eta)
        out[label] = (sol.lambda_nm, kappa_ex * ring.length_m / vg)
    return out


def _mzi_phase(model, width_nm, t_base_K, dn_dT_per_K, lambda_nm, delta_len_um,
               heater_um, delta_T_K):
    beta = float(model.propagation_constant(lambda_nm, t_base_K, width_nm))
    geo = beta * delta_len_um * 1e-6
    thermal = TWO_PI / (lambda_nm * 1e-9) * dn_dT_per_K * delta_T_K * heater_um * 1e-6
    return geo + thermal


def _lc_quadratic(points_um, lambda_ref_nm):
    """Exact quadratic through three (lambda_nm, L_c um) anchor points."""
    lam = np.array([p[0] for p in points_um])
    val = np.array([p[1] for p in points_um])
    u = (lam - lambda_ref_nm) / U_SCALE_NM
    vander = np.vander(u, 3, increasing=True)
    return np.linalg.solve(vander, val)


def solve_width_couplings(cfg: dict, device: Device, match: MatchResult) -> dict:
    """(heater_scale, lc_quad_um) hitting the eta anchors at the matched carriers.

    For a candidate heater length the envelope cos^2(dtheta/2) at each
    carrier fixes the bare coupler strength |k|^2 needed there; feasibility
    requires the three |k|^2 to be solvable, ordered increasing with
    wavelength, and the through-quadratic coupling length positive and
    non-increasing over the window.  Among feasible heater lengths the one
    nearest the configured base wins.
    """
    dev_cfg = cfg["device"]
    targets = cfg["calibration_targets"]
    model = device.dispersion
    width = device.width_nm
    base_um = float(dev_cfg["mzi_heater_length_um"])
    max_um = float(targets["max_heater_length_um"])
    delta_len_um = float(dev_cfg["mzi_arm_delta_um"])
    delta_T = float(dev_cfg["mzi_delta_T_K"])
    dn_dT = float(cfg["dispersion"]["dn_dT_per_K"])
    t_base = float(dev_cfg["ambient_temperature_K"])
    dc_len_um = float(dev_cfg["dc_length_um"])

    needed = _required_cross_couplings(device, match, targets)
    order = ("signal", "idler", "pump")  # increasing wavelength
    lams = [needed[r][0] for r in order]
    ks = [needed[r][1] for r in order]

    lo, hi = model.lambda_window_nm
    probe = np.linspace(lo, hi, 97)

    best = None
    n_grid = int(max_um / _HEATER_GRID_UM)
    for j in range(1, n_grid + 1):
        heater = j * _HEATER_GRID_UM
        x = []
        feasible = True
        for lam, k_req in zip(lams, ks):
            phase = _mzi_phase(model, width, t_base, dn_dT, lam, delta_len_um,
                               heater, delta_T)
            env = math.cos(0.5 * phase) ** 2
            if env <= k_req:
                feasible = False
                break
            # K = 4 x (1-x) env  ->  small root
            x.append(0.5 * (1.0 - math.sqrt(1.0 - k_req / env)))
        if not feasible or not (x[0] < x[1] < x[2]):
            continue
        lc_pts = [
            (lam, math.pi * dc_len_um / (2.0 * math.asin(math.sqrt(xi))))
            for lam, xi in zip(lams, x)
        ]
        coeffs = _lc_quadratic(lc_pts, model.lambda_ref_nm)
        u = (probe - model.lambda_ref_nm) / U_SCALE_NM
        lc_curve = coeffs[0] + coeffs[1] * u + coeffs[2] * u**2
        slope = coeffs[1] + 2.0 * coeffs[2] * u
        if np.any(lc_curve <= 0.0) or np.any(slope > 0.0):
            continue
        cost = abs(heater - base_um)
        if best is None or cost < best[0]:
            best = (cost, heater, coeffs)
    if best is None:
        raise CalibrationInfeasible(
            "anchor 'coupling ratios at the operating MZI drive': no heater "
            f"length up to {max_um} um places the pump near an envelope null "
            "while keeping the signal/idler envelopes strong"
        )
    _, heater, coeffs = best
    return {
        "heater_scale": heater / base_um,
        "lc_quad_um": [float(c) for c in coeffs],
    }


def solve_g_chi3_over_2pi_Hz(cfg: dict, match: MatchResult) -> float:
    """g_chi3 so the noise rate hits the anchor at the anchor power/detuning."""
    targets = cfg["calibration_targets"]
    kappa_comp = TWO_PI * float(cfg["physics"]["fwm_companion_linewidth_over_2pi_GHz"]) * 1e9
    probe = FwmChannel(
        g_chi3=1.0,
        delta_comp=TWO_PI * float(targets["fwm_anchor_detuning_over_2pi_THz"]) * 1e12,
        kappa_comp=kappa_comp,
        kappa_idler=match.idler.kappa_ex + match.idler.kappa_0,
        kappa_p=match.pump.kappa_ex + match.pump.kappa_0,
        kappa_p_ex=match.pump.kappa_ex,
        omega_p=match.pump.omega,
    )
    unit_rate = fwm_noise_rate(probe, float(targets["fwm_rate_power_mW"]) * 1e-3)
    if unit_rate <= 0.0:
        raise CalibrationInfeasible(
            "anchor 'noise rate': zero unit-rate; pump coupling not calibrated"
        )
    g = math.sqrt(float(targets["fwm_rate_Hz"]) / unit_rate)
    return g / TWO_PI


def _attach_coupler(cfg: dict, device: Device, entry: dict) -> Device:
    dev = cfg["device"]
    model = device.dispersion
    dc = DirectionalCoupler(
        gap_nm=float(dev["dc_gap_nm"]),
        length_um=float(dev["dc_length_um"]),
        lc_coeffs_um=tuple(entry["lc_quad_um"]),
        lambda_ref_nm=model.lambda_ref_nm,
        lambda_window_nm=model.lambda_window_nm,
    )
    mzi = MziCoupler(
        dc_in=dc,
        dc_out=dc,
        delta_len_um=float(dev["mzi_arm_delta_um"]),
        heater_len_um=float(dev["mzi_heater_length_um"]) * entry["heater_scale"],
        delta_T_K=float(dev["mzi_delta_T_K"]),
        dn_dT_per_K=float(cfg["dispersion"]["dn_dT_per_K"]),
        dispersion=model,
        width_nm=device.width_nm,
        t_base_K=float(dev["ambient_temperature_K"]),
    )
    return replace(device, mzi=mzi)


def calibrate_config(cfg: dict) -> dict:
    """Return a copy of cfg with a freshly solved calibration block.

    Per width in experiment.widths_nm: match (dispersion only), then solve
    the coupling anchors at the matched carriers.  g_chi3 is anchored on the
    primary width's pump mode.  Raises CalibrationInfeasible naming the
    violated anchor (matching failures surface as the triple-resonance
    anchor).
    """
    import json

    out = json.loads(json.dumps({k: v for k, v in cfg.items() if k != "calibration"}))
    constraints = build_constraints(cfg)
    build_dispersion_model(cfg)  # fail early on table problems

    widths = [float(w) for w in cfg["experiment"]["widths_nm"]]
    primary = float(cfg["device"]["width_nm"])
    if primary not in widths:
        widths.append(primary)

    by_width = {}
    matches = {}
    for width in sorted(widths):
        device = build_device(cfg, width_nm=width, with_coupler=False)
        try:
            match = find_triple_resonance(device, constraints)[0]
        except NoFeasibleMatch as exc:
            raise CalibrationInfeasible(
                f"anchor 'triple resonance' (width {width:g} nm): {exc}"
            ) from exc
        matches[width] = match
        by_width[f"{width:g}"] = solve_width_couplings(cfg, device, match)

    g0_full = solve_g0_full_over_2pi_MHz(cfg["calibration_targets"],
                                         float(cfg["device"]["ppln_fraction"]))
    out["calibration"] = {
        "g0_full_over_2pi_MHz": g0_full,
        "g_chi3_over_2pi_Hz": 0.0,  # placeholder until pump coupling is known
        "by_width": by_width,
    }

    # g_chi3 needs the calibrated pump rates: rebuild the primary device with
    # its fresh coupler and re-derive the matched rates.
    device = _attach_coupler(out, build_device(out, width_nm=primary,
                                               with_coupler=False),
                             by_width[f"{primary:g}"])
    match = find_triple_resonance(device, constraints)[0]
    out["calibration"]["g_chi3_over_2pi_Hz"] = solve_g_chi3_over_2pi_Hz(out, match)
    return out


CALIBRATION_COMMENTS = {
    "calibration": "Solved by the `calibrate` experiment; do not edit by hand.",
    "calibration.g0_full_over_2pi_MHz":
        "unpoled-ring vacuum rate: g0 target / poled fraction",
    "calibration.g_chi3_over_2pi_Hz":
        "chi(3) vacuum rate anchored to the noise-rate target at the anchor "
        "power and companion detuning",
    "calibration.by_width":
        "per-width heater length (as a scale on the base) and coupling-length "
        "quadratic hitting the coupling-ratio targets at the matched carriers",
}
