"""Shared fixtures: synthetic dispersion models and planted matcher devices."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qfcring.config import default_config
from qfcring.constants import C_M_PER_S, freq_hz
from qfcring.dispersion import DispersionModel
from qfcring.elements import Device, RingCavity, solve_resonance_wavelength
from qfcring.matching import SearchConstraints

WIDTH = 1500.0


def simple_model(coeffs, dn_dt=3.9e-5, lambda_ref=1200.0, t_ref=350.0,
                 window=(600.0, 1800.0), t_window=(250.0, 450.0), slope=0.0):
    return DispersionModel(
        coeffs_by_width={WIDTH: list(coeffs)},
        dn_dT_per_K=dn_dt,
        lambda_ref_nm=lambda_ref,
        t_ref_K=t_ref,
        lambda_window_nm=window,
        temperature_window_K=t_window,
        dn_dT_slope_per_K_nm=slope,
    )


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def constant_model():
    return simple_model([2.0])


def _bare_ring(length_um, ppln_fraction=0.0, poling_um=5.0, alpha=30.0):
    return RingCavity(
        length_um=length_um,
        width_nm=WIDTH,
        alpha_prop_dB_per_m=alpha,
        ppln_fraction=ppln_fraction,
        poling_period_um=poling_um,
    )


def planted_fixture_a():
    """Dispersionless device with an exact triple at T = 350 K.

    An equidistant comb satisfies the energy match with zero mismatch only
    for m_s = m_p + m_i, so the poled fraction is 0 (M = 0).  The signal
    target is the m_s = 1357 line of the T = 350 K comb; pump/idler lines
    616 and 741 land inside the default windows.
    """
    model = simple_model([2.0])
    ring = _bare_ring(500.0, ppln_fraction=0.0)
    device = Device(dispersion=model, ring=ring)
    length_nm = 500.0 * 1e3
    lam_target = 2.0 * length_nm / 1357.0
    # every m_p + m_i = 1357 pair is an exact solution of the equidistant
    # comb, so the windows are narrowed to a single pump/idler line each
    constraints = SearchConstraints(
        signal_wavelength_nm=lam_target,
        pump_base_nm=2.0 * length_nm / 616.0,
        idler_base_nm=2.0 * length_nm / 741.0,
        half_window_nm=1.2,
        t_min_K=340.0,
        t_max_K=360.0,
        t_step_K=0.01,
    )
    planted = {"t_ring_K": 350.0, "m": (1357, 616, 741), "mismatch_Hz": 0.0}
    return device, constraints, planted


def planted_fixture_curved(n2=0.30, length_um=500.0, n0=2.0,
                           n1=0.0, delta_target_hz=5.0e4, sweep_half_K=5.0,
                           t_step_K=0.005):
    """Device with quadratic index curvature and a planted nonzero-M triple.

    The poling offset is the comb's own: M = m_s - m_p - m_i with m_i the
    line nearest the energy-conserving frequency, which keeps the planted
    mismatch within a comb spacing.  The curvature makes the group indices
    of the three bands differ, so that mismatch drifts smoothly with
    temperature (~GHz/K); the planted temperature is the root of
    mismatch(T) = delta_target_hz for fixed mode numbers, and the signal
    target is defined from the device's own comb there, so the solution
    exists by construction.
    """
    length_nm = length_um * 1e3
    model = simple_model([n0, n1, n2])

    def lines(m_s, m_p, m_i, t):
        lam_s = float(solve_resonance_wavelength(model, WIDTH, length_nm, m_s, t))
        lam_p = float(solve_resonance_wavelength(model, WIDTH, length_nm, m_p, t))
        lam_i = float(solve_resonance_wavelength(model, WIDTH, length_nm, m_i, t))
        return lam_s, lam_p, lam_i

    m_s = int(round(float(model.n_eff(737.0, 350.0, WIDTH)) * length_nm / 737.0))
    m_p0 = int(round(float(model.n_eff(1623.0, 350.0, WIDTH)) * length_nm / 1623.0))
    lam_s0 = float(solve_resonance_wavelength(model, WIDTH, length_nm, m_s, 350.0))
    lam_p0 = float(solve_resonance_wavelength(model, WIDTH, length_nm, m_p0, 350.0))
    f_i_guess = freq_hz(lam_s0) - freq_hz(lam_p0)
    lam_i_guess = C_M_PER_S / f_i_guess * 1e9
    m_i0 = int(round(float(model.n_eff(lam_i_guess, 350.0, WIDTH))
                     * length_nm / lam_i_guess))
    m_offset = m_s - m_p0 - m_i0
    assert m_offset > 0, "fixture parameters give a nonpositive poling offset"

    solution = None
    for dmp in (0, 1, -1, 2, -2, 3, -3):
        m_p = m_p0 + dmp
        m_i = m_s - m_p - m_offset

        def delta_at(t):
            lam_s, lam_p, lam_i = lines(m_s, m_p, m_i, t)
            return freq_hz(lam_s) - freq_hz(lam_p) - freq_hz(lam_i)

        ts = np.linspace(302.0, 398.0, 193)
        vals = [delta_at(t) - delta_target_hz for t in ts]
        for a, b, fa, fb in zip(ts, ts[1:], vals, vals[1:]):
            if fa * fb <= 0.0:
                t_star = brentq(lambda t: delta_at(t) - delta_target_hz, a, b,
                                xtol=1e-10)
                solution = (t_star, m_p, m_i)
                break
        if solution is not None:
            break
    if solution is None:
        raise RuntimeError("no planted temperature for the curved fixture")

    t_star, m_p, m_i = solution
    lams = lines(m_s, m_p, m_i, t_star)
    poling_um = 0.25 * length_um / m_offset
    ring = _bare_ring(length_um, ppln_fraction=0.25, poling_um=poling_um)
    device = Device(dispersion=model, ring=ring)
    constraints = SearchConstraints(
        signal_wavelength_nm=lams[0],
        t_min_K=t_star - sweep_half_K,
        t_max_K=t_star + sweep_half_K,
        t_step_K=t_step_K,
        pump_base_nm=lams[1],
        idler_base_nm=lams[2],
        half_window_nm=10.0,
    )
    planted = {"t_ring_K": t_star, "m": (m_s, m_p, m_i),
               "mismatch_Hz": delta_target_hz, "n2": n2, "lambda_nm": lams}
    return device, constraints, planted


def oracle_fixtures():
    """Five small devices for the coarse-vs-fine sweep equivalence check."""
    out = [planted_fixture_a(), planted_fixture_curved()]
    out.append(planted_fixture_curved(n2=0.27, length_um=420.0,
                                      delta_target_hz=2.0e4))
    out.append(planted_fixture_curved(n2=0.33, length_um=610.0, n0=1.9,
                                      delta_target_hz=8.0e4))
    out.append(planted_fixture_curved(n2=0.29, length_um=500.0, n0=2.1,
                                      n1=-0.05, delta_target_hz=-4.0e4))
    return out


def brute_force_best(device, constraints, step_K):
    """Independent exhaustive sweep: plain loops + bisection root solving.

    Returns (t_K, (m_s, m_p, m_i), signal_detuning_Hz, mismatch_Hz) of the
    best candidate under the same (|mismatch|, |detuning|, T) order, or None.
    """
    model = device.dispersion
    width = device.width_nm
    length_nm = device.ring.length_m * 1e9
    f_target = constraints.signal_target_hz
    tol_s = constraints.max_signal_detuning_Hz
    tol_d = constraints.max_mismatch_Hz
    m_off = device.ring.m_offset

    def solve_lambda(m, t, lo, hi):
        f = lambda lam: m * lam - float(model._n_eff_unchecked(lam, t, width)) * length_nm
        if f(lo) * f(hi) > 0:
            return None
        return brentq(f, lo, hi, xtol=1e-12)

    lo_w, hi_w = model.lambda_window_nm
    p_lo, p_hi = constraints.pump_window_nm
    i_lo, i_hi = constraints.idler_window_nm
    best = None
    n_steps = int(math.floor((constraints.t_max_K - constraints.t_min_K) / step_K + 1e-9))
    for j in range(n_steps + 1):
        t = constraints.t_min_K + j * step_K
        lam_t = constraints.signal_wavelength_nm
        m_float = float(model.n_eff(lam_t, t, width)) * length_nm / lam_t
        cand = None
        for m_s in (int(math.floor(m_float)), int(math.ceil(m_float))):
            lam = solve_lambda(m_s, t, lam_t - 30.0, lam_t + 30.0)
            if lam is None:
                continue
            det = C_M_PER_S / (lam * 1e-9) - f_target
            if cand is None or abs(det) < abs(cand[1]):
                cand = (m_s, det, lam)
        if cand is None or abs(cand[1]) > tol_s:
            continue
        m_s, det_s, lam_s = cand
        f_s = C_M_PER_S / (lam_s * 1e-9)
        pumps = []
        m_plo = int(math.ceil(float(model.n_eff(p_hi, t, width)) * length_nm / p_hi))
        m_phi = int(math.floor(float(model.n_eff(p_lo, t, width)) * length_nm / p_lo))
        for m_p in range(m_plo, m_phi + 1):
            lam = solve_lambda(m_p, t, max(p_lo - 20.0, lo_w), min(p_hi + 20.0, hi_w))
            if lam is not None and p_lo <= lam <= p_hi:
                pumps.append((m_p, lam))
        idlers = []
        m_ilo = int(math.ceil(float(model.n_eff(i_hi, t, width)) * length_nm / i_hi))
        m_ihi = int(math.floor(float(model.n_eff(i_lo, t, width)) * length_nm / i_lo))
        for m_i in range(m_ilo, m_ihi + 1):
            lam = solve_lambda(m_i, t, max(i_lo - 20.0, lo_w), min(i_hi + 20.0, hi_w))
            if lam is not None and i_lo <= lam <= i_hi:
                idlers.append((m_i, lam))
        for m_p, lam_p in pumps:
            for m_i, lam_i in idlers:
                if constraints.require_qpm and m_s - m_p - m_i - m_off != 0:
                    continue
                delta = f_s - C_M_PER_S / (lam_p * 1e-9) - C_M_PER_S / (lam_i * 1e-9)
                if abs(delta) > tol_d:
                    continue
                # same 1 Hz mismatch quantum as the production sort
                key = (round(abs(delta)), abs(det_s), t)
                if best is None or key < best[0]:
                    best = (key, (t, (m_s, m_p, m_i), det_s, delta))
    return None if best is None else best[1]
