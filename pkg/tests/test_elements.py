"""Coupler, MZI, ring cavity, and resonance comb tests."""

import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest

from qfcring.builders import build_constraints, build_device
from qfcring.constants import C_M_PER_S, TWO_PI, freq_hz
from qfcring.dispersion import default_model
from qfcring.elements import (
    Device,
    DirectionalCoupler,
    MziCoupler,
    RingCavity,
    coupling_ratio,
    dc_cross_coupling,
    mzi_transfer,
    qpm_mismatch,
    resonance_comb,
    ring_spectrum,
)
from qfcring.errors import NoResonance, OutOfDomain
from qfcring.matching import find_triple_resonance

from conftest import WIDTH, simple_model

WINDOW = (600.0, 1800.0)


def flat_dc(k2, length_um=10.0):
    """Coupler with wavelength-independent cross coupling |k|^2 = k2."""
    lc = math.pi * length_um / (2.0 * math.asin(math.sqrt(k2)))
    return DirectionalCoupler(gap_nm=600.0, length_um=length_um,
                              lc_coeffs_um=(lc,), lambda_ref_nm=1200.0,
                              lambda_window_nm=WINDOW)


def make_mzi(k2=0.3, delta_len_um=1.0, heater_um=100.0, delta_T=0.0,
             model=None, dndt=3.9e-5):
    model = model or simple_model([2.0])
    dc = flat_dc(k2)
    return MziCoupler(dc_in=dc, dc_out=dc, delta_len_um=delta_len_um,
                      heater_len_um=heater_um, delta_T_K=delta_T,
                      dn_dT_per_K=dndt, dispersion=model, width_nm=WIDTH,
                      t_base_K=300.0)


# --- directional coupler ---------------------------------------------------

def test_dc_full_transfer_at_beat_length():
    dc = DirectionalCoupler(gap_nm=600.0, length_um=25.0, lc_coeffs_um=(25.0,),
                            lambda_ref_nm=1200.0, lambda_window_nm=WINDOW)
    assert dc_cross_coupling(dc, 1000.0) == pytest.approx(1.0, abs=1e-15)


def test_dc_zero_length_no_coupling():
    dc = DirectionalCoupler(gap_nm=600.0, length_um=0.0, lc_coeffs_um=(25.0,),
                            lambda_ref_nm=1200.0, lambda_window_nm=WINDOW)
    assert dc_cross_coupling(dc, 1000.0) == 0.0


def test_dc_default_model_wavelength_trend(cfg):
    pinned = json.loads(
        (Path(__file__).parent / "golden" / "regression.json").read_text())
    device = build_device(cfg)
    k2_s = float(device.mzi.dc_in.cross_coupling(737.0))
    k2_p = float(device.mzi.dc_in.cross_coupling(1623.0))
    assert k2_s < k2_p
    assert k2_s == pytest.approx(pinned["dc_cross_737"], rel=1e-9)
    assert k2_p == pytest.approx(pinned["dc_cross_1623"], rel=1e-9)


def test_dc_out_of_window():
    dc = flat_dc(0.2)
    with pytest.raises(OutOfDomain):
        dc.cross_coupling(2500.0)


# --- MZI -------------------------------------------------------------------

def test_mzi_unitarity_1000_draws():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        mzi = make_mzi(k2=rng.uniform(0.02, 0.98),
                       delta_len_um=rng.uniform(0.0, 3.0))
        lam = rng.uniform(*WINDOW)
        m = mzi_transfer(mzi, lam, delta_T_K=rng.uniform(0.0, 60.0))
        dev = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        worst = max(worst, dev)
    assert worst < 1e-12


def test_mzi_composite_closed_form():
    # matrix element vs 4|k|^2|t|^2 cos^2(dtheta/2), as an equality
    rng = np.random.default_rng(4)
    for _ in range(200):
        k2 = rng.uniform(0.05, 0.95)
        mzi = make_mzi(k2=k2, delta_len_um=rng.uniform(0.0, 2.0))
        lam = rng.uniform(*WINDOW)
        dT = rng.uniform(0.0, 50.0)
        m = mzi_transfer(mzi, lam, delta_T_K=dT)
        k_matrix = abs(m[1, 0]) ** 2
        dtheta = float(mzi.arm_phase(lam, dT))
        k_closed = 4.0 * k2 * (1.0 - k2) * math.cos(dtheta / 2.0) ** 2
        assert k_matrix == pytest.approx(k_closed, rel=1e-12, abs=1e-15)


def test_mzi_zero_asymmetry_zero_drive():
    k2 = 0.3
    mzi = make_mzi(k2=k2, delta_len_um=0.0)
    K = float(mzi.cross_coupling(1200.0, delta_T_K=0.0))
    assert K == pytest.approx(4.0 * k2 * (1.0 - k2), rel=1e-12)


def test_mzi_balanced_coupler_full_cross():
    mzi = make_mzi(k2=0.5, delta_len_um=0.0)
    assert float(mzi.cross_coupling(1200.0, delta_T_K=0.0)) == pytest.approx(1.0, rel=1e-12)


def test_envelope_law():
    # K(dL, dT) / K(0, 0) = cos^2((beta dL + phi_T)/2)
    model = simple_model([2.0, -0.1])
    rng = np.random.default_rng(5)
    for _ in range(100):
        k2 = rng.uniform(0.05, 0.95)
        dl = rng.uniform(0.0, 2.0)
        dT = rng.uniform(0.0, 50.0)
        lam = rng.uniform(*WINDOW)
        driven = make_mzi(k2=k2, delta_len_um=dl, model=model)
        ref = make_mzi(k2=k2, delta_len_um=0.0, model=model)
        ratio = float(driven.cross_coupling(lam, delta_T_K=dT)) / \
            float(ref.cross_coupling(lam, delta_T_K=0.0))
        assert ratio == pytest.approx(
            math.cos(float(driven.arm_phase(lam, dT)) / 2.0) ** 2,
            rel=1e-12, abs=1e-15)


def test_mzi_cross_coupling_bounded():
    rng = np.random.default_rng(6)
    mzi = make_mzi(k2=0.4, delta_len_um=1.5)
    lams = rng.uniform(*WINDOW, size=500)
    dts = rng.uniform(0.0, 60.0, size=500)
    for lam, dt in zip(lams, dts):
        K = float(mzi.cross_coupling(lam, delta_T_K=dt))
        assert 0.0 <= K <= 1.0


# --- coupling ratio --------------------------------------------------------

def ring_500(alpha=30.0, f=0.0):
    return RingCavity(length_um=500.0, width_nm=WIDTH, alpha_prop_dB_per_m=alpha,
                      ppln_fraction=f, poling_period_um=5.0)


def test_coupling_ratio_zero_coupling():
    mzi = make_mzi(k2=0.5, delta_len_um=0.0)
    # dtheta = 0 and k2=0.5 gives K=1; instead force K=0 with a zero-length DC
    dc0 = DirectionalCoupler(gap_nm=600.0, length_um=0.0, lc_coeffs_um=(25.0,),
                             lambda_ref_nm=1200.0, lambda_window_nm=WINDOW)
    mzi0 = MziCoupler(dc_in=dc0, dc_out=dc0, delta_len_um=1.0, heater_len_um=100.0,
                      delta_T_K=0.0, dn_dT_per_K=3.9e-5, dispersion=mzi.dispersion,
                      width_nm=WIDTH, t_base_K=300.0)
    eta = coupling_ratio(ring_500(), mzi0, 1200.0, delta_T_K=0.0, t_ring_K=350.0)
    assert eta == 0.0


def test_coupling_ratio_lossless_limit():
    mzi = make_mzi(k2=0.1)
    eta = coupling_ratio(ring_500(alpha=1e-12), mzi, 1200.0, delta_T_K=10.0,
                         t_ring_K=350.0)
    assert eta > 1.0 - 1e-9


def test_coupling_ratio_monotone_in_cross_coupling():
    ring = ring_500(alpha=40.0)
    etas = []
    for k2 in np.linspace(0.001, 0.13, 30):
        mzi = make_mzi(k2=float(k2), delta_len_um=0.0)
        etas.append(coupling_ratio(ring, mzi, 1200.0, delta_T_K=0.0, t_ring_K=350.0))
    assert np.all(np.diff(etas) > 0.0)


def test_coupling_ratio_warns_beyond_weak_coupling():
    mzi = make_mzi(k2=0.5, delta_len_um=0.0)  # K = 1
    with pytest.warns(UserWarning, match="weak-coupling"):
        coupling_ratio(ring_500(), mzi, 1200.0, delta_T_K=0.0, t_ring_K=350.0)


def test_operating_point_coupling_ratios(cfg):
    # calibrated defaults under the operating thermal drive
    device = build_device(cfg)
    match = find_triple_resonance(device, build_constraints(cfg))[0]
    assert 0.45 <= match.pump.eta <= 0.55
    assert match.signal.eta >= 0.8
    assert match.idler.eta >= 0.8


# --- ring spectrum ---------------------------------------------------------

def test_spectrum_all_pass_when_lossless():
    mzi = make_mzi(k2=0.2, delta_len_um=0.5)
    ring = ring_500(alpha=0.0)
    lam = np.linspace(1540.0, 1560.0, 2001)
    t = ring_spectrum(ring, mzi, lam, 350.0, delta_T_K=5.0)
    assert np.max(np.abs(t - 1.0)) < 1e-12


def test_spectrum_critical_coupling_extinction():
    model = simple_model([2.0])
    ring = ring_500(alpha=40.0)
    # kappa_ex = kappa_0  <=>  K = alpha_nepers * L (round-trip loss)
    K_target = 40.0 * math.log(10.0) / 10.0 * 500e-6
    k2 = 0.5 * (1.0 - math.sqrt(1.0 - K_target))
    mzi = make_mzi(k2=k2, delta_len_um=0.0, model=model)
    comb = resonance_comb(Device(dispersion=model, ring=ring), (1540.0, 1560.0), 350.0)
    lam0 = comb[0][1]
    lam = np.linspace(lam0 - 0.05, lam0 + 0.05, 40001)
    t = ring_spectrum(ring, mzi, lam, 350.0, delta_T_K=0.0)
    assert t.min() <= 1e-3


def _fwhm_hz(lam_nm, trans):
    j = int(np.argmin(trans))
    floor_t = trans.min()
    top = trans.max()
    half = 0.5 * (top + floor_t)
    left = np.nonzero(trans[:j] >= half)[0]
    right = np.nonzero(trans[j:] >= half)[0]
    a = np.interp(half, [trans[left[-1] + 1], trans[left[-1]]],
                  [lam_nm[left[-1] + 1], lam_nm[left[-1]]])
    b = np.interp(half, [trans[j + right[0] - 1], trans[j + right[0]]],
                  [lam_nm[j + right[0] - 1], lam_nm[j + right[0]]])
    return abs(freq_hz(a) - freq_hz(b))


def test_spectrum_linewidth_matches_rate_model():
    rng = np.random.default_rng(12)
    model = simple_model([2.0])
    for _ in range(10):
        alpha = rng.uniform(20.0, 60.0)
        ring = ring_500(alpha=alpha)
        k2 = rng.uniform(0.002, 0.02)
        mzi = make_mzi(k2=float(k2), delta_len_um=0.0, model=model)
        device = Device(dispersion=model, ring=ring, mzi=mzi)
        comb = resonance_comb(device, (1540.0, 1560.0), 350.0)
        lam0 = comb[len(comb) // 2][1]
        vg = float(model.group_velocity(lam0, 350.0, WIDTH))
        kappa_ex = float(mzi.cross_coupling(lam0, delta_T_K=0.0)) * vg / ring.length_m
        kappa_0 = float(ring.kappa_0(model, lam0, 350.0))
        kappa_tot = kappa_ex + kappa_0
        fsr = float(model.fsr_hz(lam0, 350.0, WIDTH, ring.length_m))
        assert kappa_tot / TWO_PI < fsr / 10.0  # resolved-resonance regime
        span_nm = 12.0 * kappa_tot / TWO_PI * lam0**2 / C_M_PER_S * 1e-9
        lam = np.linspace(lam0 - span_nm, lam0 + span_nm, 30001)
        t = ring_spectrum(ring, mzi, lam, 350.0, delta_T_K=0.0)
        fwhm = _fwhm_hz(lam, t)
        assert fwhm == pytest.approx(kappa_tot / TWO_PI, rel=0.05)


# --- resonance comb --------------------------------------------------------

def test_comb_dispersionless_closed_form():
    model = simple_model([2.0], dn_dt=0.0)
    ring = RingCavity(length_um=100.0, width_nm=WIDTH, alpha_prop_dB_per_m=30.0,
                      ppln_fraction=0.0, poling_period_um=5.0)
    device = Device(dispersion=model, ring=ring)
    comb = resonance_comb(device, (950.0, 1050.0), 350.0)
    ms = dict((m, lam) for m, lam in comb)
    assert ms[200] == pytest.approx(1000.0, abs=1e-9)


def test_comb_spacing_matches_fsr(cfg):
    device = build_device(cfg, with_coupler=False)
    comb = resonance_comb(device, (1600.0, 1646.0), 350.0)
    lams = np.array([lam for _, lam in comb])
    centers = 0.5 * (lams[1:] + lams[:-1])
    for lam_c, dlam in zip(centers, np.diff(lams)):
        fsr = float(device.dispersion.fsr_hz(lam_c, 350.0, device.width_nm,
                                             device.ring.length_m))
        expect = lam_c**2 * fsr / C_M_PER_S * 1e-9
        assert dlam == pytest.approx(expect, rel=0.01)


def test_comb_thermal_shift_first_order(cfg):
    device = build_device(cfg, with_coupler=False)
    dT = 5.0
    comb_a = resonance_comb(device, (1615.0, 1631.0), 340.0)
    comb_b = resonance_comb(device, (1615.0, 1631.0), 340.0 + dT)
    by_m_a = dict(comb_a)
    model = device.dispersion
    for m, lam_b in comb_b:
        if m not in by_m_a:
            continue
        lam_a = by_m_a[m]
        ng = float(model.group_index(lam_a, 340.0, device.width_nm))
        expect = lam_a * float(model.thermo_optic(lam_a)) * dT / ng
        assert (lam_b - lam_a) == pytest.approx(expect, rel=0.02)


def test_comb_residual_and_ordering(cfg):
    device = build_device(cfg, with_coupler=False)
    comb = resonance_comb(device, (1340.0, 1360.0), 372.0)
    length_nm = device.ring.length_m * 1e9
    for m, lam in comb:
        n = float(device.dispersion.n_eff(lam, 372.0, device.width_nm))
        assert abs(m * lam - n * length_nm) / lam < 1e-10
    ms = [m for m, _ in comb]
    assert ms == sorted(ms, reverse=True)
    assert all(a - b == 1 for a, b in zip(ms, ms[1:]))


def test_comb_empty_narrow_band_raises(cfg):
    device = build_device(cfg, with_coupler=False)
    comb = resonance_comb(device, (1610.0, 1640.0), 350.0)
    lams = np.array([lam for _, lam in comb])
    gap_center = 0.5 * (lams[3] + lams[4])
    with pytest.raises(NoResonance, match="narrower than one FSR"):
        resonance_comb(device, (gap_center - 0.05, gap_center + 0.05), 350.0)


# --- QPM -------------------------------------------------------------------

def test_qpm_mismatch_arithmetic():
    assert qpm_mismatch(2000, 800, 1100, 100) == 0
    assert qpm_mismatch(2000, 800, 1100, 101) == -1
    # swapping pump and idler preserves the mismatch
    assert qpm_mismatch(2000, 1100, 800, 100) == 0


def test_poling_offset_rounding_warns():
    with pytest.warns(UserWarning, match="poling-compensated"):
        RingCavity(length_um=500.0, width_nm=WIDTH, alpha_prop_dB_per_m=30.0,
                   ppln_fraction=0.45, poling_period_um=1.0003)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        RingCavity(length_um=500.0, width_nm=WIDTH, alpha_prop_dB_per_m=30.0,
                   ppln_fraction=0.0, poling_period_um=5.0)
