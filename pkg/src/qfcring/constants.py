"""Physical constants and unit helpers used throughout the package.

Conventions:
  * wavelengths at every interface are vacuum wavelengths in nm,
  * all loss/coupling rates are angular *energy* decay rates in rad/s
    (full linewidth; the field decays at rate kappa/2),
  * reports divide by 2*pi to quote linewidths in ordinary Hz.
"""

from __future__ import annotations

import math

C_M_PER_S = 299_792_458.0        # speed of light in vacuum, exact
HBAR_J_S = 1.054_571_817e-34     # reduced Planck constant (2019 SI)

TWO_PI = 2.0 * math.pi

# Power attenuation alpha_dB (dB/m) -> alpha (1/m, power): alpha = alpha_dB * ln(10)/10
DB_TO_NEPERS_POWER = math.log(10.0) / 10.0


def nm_to_m(lambda_nm: float) -> float:
    return lambda_nm * 1e-9


def omega_rad_s(lambda_nm) -> float:
    """Angular frequency (rad/s) of a vacuum wavelength given in nm."""
    return TWO_PI * C_M_PER_S / (lambda_nm * 1e-9)


def freq_hz(lambda_nm) -> float:
    """Ordinary frequency (Hz) of a vacuum wavelength given in nm."""
    return C_M_PER_S / (lambda_nm * 1e-9)


def wavelength_nm(freq_hz_value: float) -> float:
    """Vacuum wavelength (nm) of an ordinary frequency given in Hz."""
    return C_M_PER_S / freq_hz_value * 1e9


def db_per_m_to_kappa(alpha_db_per_m: float, group_velocity_m_s: float) -> float:
    """Propagation loss (dB/m) -> intrinsic energy decay rate kappa_0 (rad/s)."""
    return alpha_db_per_m * DB_TO_NEPERS_POWER * group_velocity_m_s
