"""Photonic building blocks: directional coupler, thermally tuned MZI
coupler, and the ring cavity.

The MZI acts as the ring's bus coupler.  Its composite 2x2 transfer matrix
is unitary (lossless model); the power cross-coupling K sets the extrinsic
rate of each cavity mode through the weak-coupling mapping
kappa_ex = K * v_g / L_ring.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import TWO_PI, db_per_m_to_kappa, freq_hz
from .dispersion import DispersionModel, U_SCALE_NM, _polyval
from .errors import DomainError, NoResonance, OutOfDomain

# kappa_ex = K v_g / L is a weak-coupling correspondence; beyond this K it
# degrades and we warn rather than fail.
WEAK_COUPLING_K_MAX = 0.5


@dataclass(frozen=True)
class DirectionalCoupler:
    """Lossless directional coupler with a polynomial coupling-length model.

    lc_coeffs_um are ascending coefficients of L_c (in um) versus
    u = (lambda_nm - lambda_ref_nm)/1000.  `gap_nm` documents the geometry
    the coupling-length model was calibrated for; it does not enter the
    transfer function itself.
    """

    gap_nm: float
    length_um: float
    lc_coeffs_um: tuple
    lambda_ref_nm: float
    lambda_window_nm: tuple

    def __post_init__(self):
        if self.length_um < 0.0:
            raise DomainError("coupler interaction length must be >= 0")

    def _check(self, lambda_nm):
        lo, hi = self.lambda_window_nm
        lam = np.asarray(lambda_nm, dtype=float)
        if np.any(lam < lo) or np.any(lam > hi):
            raise OutOfDomain(f"wavelength {lambda_nm} nm outside coupler window [{lo}, {hi}] nm")

    def coupling_length_um(self, lambda_nm):
        """Full-transfer beat half-length L_c (um) at the given wavelength."""
        self._check(lambda_nm)
        u = (np.asarray(lambda_nm, dtype=float) - self.lambda_ref_nm) / U_SCALE_NM
        lc = _polyval(np.asarray(self.lc_coeffs_um, dtype=float), u)
        if np.any(lc <= 0.0):
            raise DomainError(f"coupling-length model non-positive at {lambda_nm} nm")
        return lc

    def cross_coupling(self, lambda_nm):
        """Power cross-transmission |k|^2 = sin^2(pi L_dc / (2 L_c))."""
        lc = self.coupling_length_um(lambda_nm)
        return np.sin(math.pi * self.length_um / (2.0 * lc)) ** 2


def dc_cross_coupling(dc: DirectionalCoupler, lambda_nm):
    """|k|^2 of a directional coupler; |t|^2 = 1 - |k|^2 (lossless)."""
    return dc.cross_coupling(lambda_nm)


@dataclass(frozen=True)
class MziCoupler:
    """Asymmetric MZI used as a tunable ring-bus coupler.

    Two directional couplers joined by arms whose lengths differ by
    delta_len_um; a heater of length heater_len_um on the long arm applies
    a differential thermo-optic phase with coefficient dn_dT_per_K.
    delta_T_K is the default thermal drive; operations accept an explicit
    override.

    dispersion/width_nm/t_base_K provide beta(lambda) of the arm waveguide
    at the interferometer's ambient temperature.
    """

    dc_in: DirectionalCoupler
    dc_out: DirectionalCoupler
    delta_len_um: float
    heater_len_um: float
    delta_T_K: float
    dn_dT_per_K: float
    dispersion: DispersionModel
    width_nm: float
    t_base_K: float

    def arm_phase(self, lambda_nm, delta_T_K=None):
        """Differential arm phase beta*dL + (2 pi/lambda) dn/dT dT L_h (rad)."""
        dT = self.delta_T_K if delta_T_K is None else delta_T_K
        lam = np.asarray(lambda_nm, dtype=float)
        beta = self.dispersion.propagation_constant(lam, self.t_base_K, self.width_nm)
        geo = beta * self.delta_len_um * 1e-6
        thermal = (TWO_PI / (lam * 1e-9)) * self.dn_dT_per_K * dT * (
            self.heater_len_um * 1e-6
        )
        return geo + thermal

    def transfer(self, lambda_nm, t_base_K=None, delta_T_K=None):
        """Composite 2x2 matrix C2 . diag(e^{i dtheta}, 1) . C1.

        Only the differential arm phase is modeled; the common arm phase
        belongs to the ring round trip.  Returns shape (2, 2) for scalar
        input, (n, 2, 2) for an n-vector of wavelengths.
        """
        if t_base_K is not None and abs(t_base_K - self.t_base_K) > 1e-12:
            mzi = _replace_t_base(self, t_base_K)
            return mzi.transfer(lambda_nm, delta_T_K=delta_T_K)
        lam = np.asarray(lambda_nm, dtype=float)
        k1 = np.sqrt(self.dc_in.cross_coupling(lam))
        t1 = np.sqrt(1.0 - k1**2)
        k2 = np.sqrt(self.dc_out.cross_coupling(lam))
        t2 = np.sqrt(1.0 - k2**2)
        ph = np.exp(1j * self.arm_phase(lam, delta_T_K))
        m00 = t1 * t2 * ph - k1 * k2
        m01 = 1j * (k1 * t2 * ph + t1 * k2)
        m10 = 1j * (t1 * k2 * ph + k1 * t2)
        m11 = -k1 * k2 * ph + t1 * t2
        out = np.stack(
            [np.stack([m00, m01], axis=-1), np.stack([m10, m11], axis=-1)], axis=-2
        )
        return out

    def cross_coupling(self, lambda_nm, delta_T_K=None):
        """Composite power cross-coupling K(lambda, dT) = |M10|^2 in [0, 1]."""
        lam = np.asarray(lambda_nm, dtype=float)
        k1 = np.sqrt(self.dc_in.cross_coupling(lam))
        t1 = np.sqrt(1.0 - k1**2)
        k2 = np.sqrt(self.dc_out.cross_coupling(lam))
        t2 = np.sqrt(1.0 - k2**2)
        ph = np.exp(1j * self.arm_phase(lam, delta_T_K))
        return np.abs(1j * (t1 * k2 * ph + k1 * t2)) ** 2


def _replace_t_base(mzi: MziCoupler, t_base_K: float) -> MziCoupler:
    from dataclasses import replace

    return replace(mzi, t_base_K=t_base_K)


def mzi_transfer(mzi: MziCoupler, lambda_nm, t_base_K=None, delta_T_K=None):
    """Composite MZI transfer matrix (see MziCoupler.transfer)."""
    return mzi.transfer(lambda_nm, t_base_K=t_base_K, delta_T_K=delta_T_K)


@dataclass(frozen=True)
class RingCavity:
    """Ring resonator with a periodically poled section.

    The poling-compensated mode-number offset M = f_ppln * L_ring / Lambda
    is stored exactly; `m_offset` is its nearest integer and
    `m_offset_residual` the rounding gap (a warning is emitted beyond 0.05).
    """

    length_um: float
    width_nm: float
    alpha_prop_dB_per_m: float
    ppln_fraction: float
    poling_period_um: float

    def __post_init__(self):
        if self.length_um <= 0.0:
            raise DomainError("ring length must be positive")
        if not 0.0 <= self.ppln_fraction <= 1.0:
            raise DomainError("ppln_fraction must lie in [0, 1]")
        if self.poling_period_um <= 0.0:
            raise DomainError("poling period must be positive")
        if self.alpha_prop_dB_per_m < 0.0:
            raise DomainError("propagation loss must be >= 0")
        if abs(self.m_offset_residual) > 0.05:
            warnings.warn(
                f"poling-compensated mode number {self.m_offset_exact:.4f} is "
                f"{self.m_offset_residual:+.3f} away from integer {self.m_offset}; "
                "quasi-phase matching treats it as the rounded integer",
                stacklevel=2,
            )

    @property
    def length_m(self) -> float:
        return self.length_um * 1e-6

    @property
    def m_offset_exact(self) -> float:
        return self.ppln_fraction * self.length_um / self.poling_period_um

    @property
    def m_offset(self) -> int:
        return int(round(self.m_offset_exact))

    @property
    def m_offset_residual(self) -> float:
        return self.m_offset_exact - self.m_offset

    def kappa_0(self, dispersion: DispersionModel, lambda_nm, t_K):
        """Intrinsic energy decay rate (rad/s) from the propagation loss."""
        vg = dispersion.group_velocity(lambda_nm, t_K, self.width_nm)
        return db_per_m_to_kappa(self.alpha_prop_dB_per_m, vg)


@dataclass(frozen=True)
class Device:
    """A complete converter: dispersion model + ring + (optionally) MZI coupler.

    t_ambient_K is the chip temperature away from the ring tuner; the MZI
    arm phase is evaluated there.
    """

    dispersion: DispersionModel
    ring: RingCavity
    mzi: MziCoupler | None = None
    t_ambient_K: float = 300.0

    @property
    def width_nm(self) -> float:
        return self.ring.width_nm


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------

def coupling_ratio(ring: RingCavity, mzi: MziCoupler, lambda_nm, delta_T_K=None,
                   dispersion: DispersionModel | None = None, t_ring_K=None):
    """Coupling ratio eta = kappa_ex / (kappa_ex + kappa_0) of one cavity mode.

    kappa_ex = K(lambda, dT) * v_g / L_ring.  Warns when K exceeds the
    weak-coupling bound instead of failing.
    """
    model = dispersion if dispersion is not None else mzi.dispersion
    t_ring = mzi.t_base_K if t_ring_K is None else t_ring_K
    K = mzi.cross_coupling(lambda_nm, delta_T_K)
    if np.any(np.asarray(K) > WEAK_COUPLING_K_MAX):
        warnings.warn(
            f"cross-coupling K={np.max(K):.3f} exceeds the weak-coupling bound "
            f"{WEAK_COUPLING_K_MAX}; the rate mapping kappa_ex = K v_g / L degrades",
            stacklevel=2,
        )
    vg = model.group_velocity(lambda_nm, t_ring, ring.width_nm)
    kappa_ex = K * vg / ring.length_m
    kappa_0 = ring.kappa_0(model, lambda_nm, t_ring)
    return kappa_ex / (kappa_ex + kappa_0)


def mode_rates(device: Device, lambda_nm, t_ring_K, delta_T_K=None):
    """(kappa_ex, kappa_0) in rad/s for a cavity mode at lambda_nm."""
    ring = device.ring
    kappa_0 = ring.kappa_0(device.dispersion, lambda_nm, t_ring_K)
    if device.mzi is None:
        return 0.0, kappa_0
    K = device.mzi.cross_coupling(lambda_nm, delta_T_K)
    vg = device.dispersion.group_velocity(lambda_nm, t_ring_K, ring.width_nm)
    return float(K * vg / ring.length_m), float(kappa_0)


def ring_spectrum(ring: RingCavity, mzi: MziCoupler, lambda_grid_nm, t_ring_K,
                  delta_T_K=None):
    """All-pass power transmission sampled on a wavelength grid.

    Round-trip phase 2 pi n_eff(lambda, T_ring) L / lambda, round-trip field
    amplitude from the propagation loss, composite MZI coupler.
    """
    lam = np.asarray(lambda_grid_nm, dtype=float)
    if lam.size < 2:
        raise DomainError("spectrum needs at least 2 wavelength samples")
    model = mzi.dispersion
    n = model.n_eff(lam, t_ring_K, ring.width_nm)
    phi = TWO_PI * n * ring.length_m / (lam * 1e-9)
    amp = 10.0 ** (-ring.alpha_prop_dB_per_m * ring.length_m / 20.0)
    rt = amp * np.exp(1j * phi)

    m = mzi.transfer(lam, delta_T_K=delta_T_K)
    m00, m01 = m[..., 0, 0], m[..., 0, 1]
    m10, m11 = m[..., 1, 0], m[..., 1, 1]
    out = m00 + m01 * m10 * rt / (1.0 - m11 * rt)
    return np.abs(out) ** 2


def resonance_comb(device: Device, band_nm, t_ring_K):
    """All (m, lambda_m) resonances with lambda_m inside band_nm, sorted by lambda.

    Each pair satisfies m * lambda_m = n_eff(lambda_m, T) * L to machine
    precision (bracketed Newton); consecutive azimuthal numbers differ by 1.
    """
    lo, hi = float(band_nm[0]), float(band_nm[1])
    if not lo < hi:
        raise DomainError(f"empty wavelength band {band_nm}")
    model, ring = device.dispersion, device.ring
    model._check_domain(np.array([lo, hi]), t_ring_K)
    length_nm = ring.length_m * 1e9

    def m_at(lam):
        return model.n_eff(lam, t_ring_K, ring.width_nm) * length_nm / lam

    m_hi = int(math.floor(m_at(lo)))
    m_lo = int(math.ceil(m_at(hi)))
    pairs = []
    for m in range(m_hi, m_lo - 1, -1):
        lam = solve_resonance_wavelength(model, ring.width_nm, length_nm, m, t_ring_K)
        if lo <= lam <= hi:
            pairs.append((m, float(lam)))
    pairs.sort(key=lambda p: p[1])
    if not pairs:
        fsr = device.dispersion.fsr_hz(0.5 * (lo + hi), t_ring_K, ring.width_nm, ring.length_m)
        band_hz = freq_hz(lo) - freq_hz(hi)
        if band_hz < fsr:
            raise NoResonance(
                f"band [{lo}, {hi}] nm is narrower than one FSR and contains no resonance"
            )
        raise NoResonance(f"band [{lo}, {hi}] nm contains no resonance")
    return pairs


def solve_resonance_wavelength(model: DispersionModel, width_nm: float, length_nm: float,
                               m, t_K):
    """Root of m*lambda = n_eff(lambda, T)*L for fixed azimuthal number m (nm).

    Vectorized over t_K (and m when both are arrays of equal shape).
    Fixed-point iterations then two Newton polishes; the map is a strong
    contraction because |dn/dlambda| * lambda / n << 1.
    """
    m_arr = np.asarray(m, dtype=float)
    lo, hi = model.lambda_window_nm
    lam = np.full(np.broadcast(m_arr, np.asarray(t_K, dtype=float)).shape, 0.0)
    # crude seed (n ~ 2), clipped into the window so the first n_eff
    # evaluations stay inside the fitted basin
    lam = np.clip(lam + length_nm * 2.0 / m_arr, lo, hi)
    for _ in range(13):
        lam = model._n_eff_unchecked(lam, t_K, width_nm) * length_nm / m_arr
    for _ in range(2):
        f = m_arr * lam - model._n_eff_unchecked(lam, t_K, width_nm) * length_nm
        fp = m_arr - model._dn_dlambda_unchecked(lam, t_K, width_nm) * length_nm
        lam = lam - f / fp
    if np.isscalar(m) and np.isscalar(t_K):
        return float(lam)
    return lam


def qpm_mismatch(m_s: int, m_p: int, m_i: int, m_offset: int) -> int:
    """Integer quasi-phase-matching mismatch m_s - m_p - m_i - M (0 = matched)."""
    return m_s - m_p - m_i - m_offset
