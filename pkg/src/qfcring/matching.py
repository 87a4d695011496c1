"""Triple-resonance search over the ring-tuner temperature.

For each grid temperature the signal comb line nearest the target
frequency is found; where it sits inside the signal tolerance, pump and
idler comb lines inside their wavelength windows are paired and filtered
by the frequency-mismatch bound and by quasi-phase matching.  Accepted
candidates are de-duplicated per mode triple and sorted by
(|mismatch|, |signal detuning|, T).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import C_M_PER_S, TWO_PI, freq_hz
from .elements import Device, qpm_mismatch, solve_resonance_wavelength
from .errors import (
    NoFeasibleMatch,
    OutOfDomain,
    StaleResult,
    SweepStepTooCoarse,
)

THREADS_ENV = "QFCRING_THREADS"
_CHUNK = 8192


@dataclass(frozen=True)
class SearchConstraints:
    """Targets and tolerances of the triple-resonance search.

    signal_wavelength_nm fixes the target frequency (the memory transition);
    the pump/idler windows are base +- half_window_nm.  t_step_K = None
    picks the step adaptively so one step shifts the signal resonance by a
    quarter of the signal tolerance (floor 1 mK).
    """

    signal_wavelength_nm: float = 737.0
    max_signal_detuning_Hz: float = 200e6
    max_mismatch_Hz: float = 150e6
    pump_base_nm: float = 1623.0
    idler_base_nm: float = 1350.0
    half_window_nm: float = 10.0
    t_min_K: float = 300.0
    t_max_K: float = 400.0
    t_step_K: float | None = None
    require_qpm: bool = True

    def __post_init__(self):
        if self.max_signal_detuning_Hz <= 0.0 or self.max_mismatch_Hz <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.half_window_nm <= 0.0:
            raise ValueError("window must be positive")
        if not self.t_min_K < self.t_max_K:
            raise ValueError("temperature sweep range is empty")
        if self.t_step_K is not None and self.t_step_K <= 0.0:
            raise ValueError("sweep step must be positive")

    @property
    def pump_window_nm(self):
        return (self.pump_base_nm - self.half_window_nm, self.pump_base_nm + self.half_window_nm)

    @property
    def idler_window_nm(self):
        return (self.idler_base_nm - self.half_window_nm, self.idler_base_nm + self.half_window_nm)

    @property
    def signal_target_hz(self) -> float:
        return freq_hz(self.signal_wavelength_nm)


@dataclass(frozen=True)
class ModeSolution:
    """One matched cavity mode: azimuthal number, wavelength and rates."""

    m: int
    lambda_nm: float
    kappa_ex: float
    kappa_0: float

    @property
    def eta(self) -> float:
        tot = self.kappa_ex + self.kappa_0
        return self.kappa_ex / tot if tot > 0.0 else 0.0

    @property
    def freq_hz(self) -> float:
        return C_M_PER_S / (self.lambda_nm * 1e-9)

    @property
    def omega(self) -> float:
        return TWO_PI * self.freq_hz


@dataclass(frozen=True)
class MatchResult:
    """A solution of the triple-resonance search.

    signal_detuning_Hz = f_signal_resonance - f_target (ordinary Hz);
    mismatch_Hz = f_s - f_p - f_i between the three resonances.
    """

    t_ring_K: float
    pump: ModeSolution
    signal: ModeSolution
    idler: ModeSolution
    signal_detuning_Hz: float
    mismatch_Hz: float
    qpm_mismatch: int
    constraints: SearchConstraints
    feasible: bool = True
    violations: tuple = ()

    def as_dict(self):
        def mode(ms):
            return {
                "m": ms.m,
                "wavelength_nm": ms.lambda_nm,
                "kappa_ex_over_2pi_GHz": ms.kappa_ex / TWO_PI / 1e9,
                "kappa_0_over_2pi_GHz": ms.kappa_0 / TWO_PI / 1e9,
                "eta": ms.eta,
            }

        return {
            "t_ring_K": self.t_ring_K,
            "pump": mode(self.pump),
            "signal": mode(self.signal),
            "idler": mode(self.idler),
            "signal_detuning_MHz": self.signal_detuning_Hz / 1e6,
            "mismatch_MHz": self.mismatch_Hz / 1e6,
            "qpm_mismatch": self.qpm_mismatch,
            "feasible": self.feasible,
            "violations": list(self.violations),
        }


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, n)


def signal_shift_rate_hz_per_K(device: Device, constraints: SearchConstraints) -> float:
    """|d f_resonance / dT| of the signal mode, evaluated at the target."""
    lam = constraints.signal_wavelength_nm
    t_mid = 0.5 * (constraints.t_min_K + constraints.t_max_K)
    ng = float(device.dispersion.group_index(lam, t_mid, device.width_nm))
    dndt = float(device.dispersion.thermo_optic(lam))
    return constraints.signal_target_hz * abs(dndt) / ng


def sweep_step_K(device: Device, constraints: SearchConstraints) -> float:
    """Adaptive step: one step moves the signal resonance by tol/4 (floor 1 mK)."""
    if constraints.t_step_K is not None:
        return constraints.t_step_K
    rate = signal_shift_rate_hz_per_K(device, constraints)
    return max(1e-3, 0.25 * constraints.max_signal_detuning_Hz / rate)


def _check_domain(device: Device, constraints: SearchConstraints):
    model = device.dispersion
    lo, hi = model.lambda_window_nm
    bands = [
        (constraints.signal_wavelength_nm, constraints.signal_wavelength_nm),
        constraints.pump_window_nm,
        constraints.idler_window_nm,
    ]
    for b in bands:
        if b[0] < lo or b[1] > hi:
            raise OutOfDomain(
                f"search band {b} nm leaves the dispersion window [{lo}, {hi}] nm"
            )
    tlo, thi = model.temperature_window_K
    if constraints.t_min_K < tlo or constraints.t_max_K > thi:
        raise OutOfDomain(
            f"sweep range [{constraints.t_min_K}, {constraints.t_max_K}] K leaves "
            f"the dispersion window [{tlo}, {thi}] K"
        )


def _m_range(device: Device, window_nm, t_values) -> range:
    """Azimuthal numbers whose resonance can fall inside window_nm over t_values."""
    model = device.dispersion
    length_nm = device.ring.length_m * 1e9
    lo, hi = window_nm
    candidates = []
    for t in t_values:
        for lam in (lo, hi):
            n = float(model.n_eff(lam, t, device.width_nm))
            candidates.append(n * length_nm / lam)
    return range(int(math.floor(min(candidates))), int(math.ceil(max(candidates))) + 1)


def _solve_lines(device: Device, ms: range, t_grid: np.ndarray) -> np.ndarray:
    """Resonance wavelengths (nm), shape (len(ms), len(t_grid))."""
    model = device.dispersion
    length_nm = device.ring.length_m * 1e9
    out = np.empty((len(ms), t_grid.size))
    for j, m in enumerate(ms):
        out[j] = solve_resonance_wavelength(model, device.width_nm, length_nm, float(m), t_grid)
    return out


@dataclass
class _Candidate:
    t_K: float
    m_s: int
    m_p: int
    m_i: int
    lam_s: float
    lam_p: float
    lam_i: float
    det_s: float
    delta: float
    qpm: int
    violations: tuple = ()

    # Mismatches are quantized to 1 Hz in the ordering: the root-solver
    # noise on a ~4e14 Hz difference is ~0.1 Hz, and resolving ties on that
    # noise would defeat the signal-detuning tie-break.
    def sort_key(self):
        return (round(abs(self.delta)), abs(self.det_s), self.t_K)


def _scan_chunk(device, constraints, t_chunk, m_s_list, m_p_list, m_i_list, m_offset):
    """Scan one temperature chunk; returns (feasible, near_miss) candidate lists."""
    tol_s = constraints.max_signal_detuning_Hz
    tol_d = constraints.max_mismatch_Hz
    f_target = constraints.signal_target_hz
    p_lo, p_hi = constraints.pump_window_nm
    i_lo, i_hi = constraints.idler_window_nm

    lam_s = _solve_lines(device, m_s_list, t_chunk)          # (n_ms, n_t)
    det_s = C_M_PER_S / (lam_s * 1e-9) - f_target
    pick = np.argmin(np.abs(det_s), axis=0)                  # nearest line per T
    cols = np.arange(t_chunk.size)
    det_best = det_s[pick, cols]
    hit = np.abs(det_best) <= tol_s
    if not np.any(hit):
        return [], []

    t_hit = t_chunk[hit]
    m_s_hit = np.asarray(m_s_list)[pick[hit]]
    lam_s_hit = lam_s[pick[hit], cols[hit]]
    det_hit = det_best[hit]

    lam_p = _solve_lines(device, m_p_list, t_hit)            # (n_mp, n_hit)
    lam_i = _solve_lines(device, m_i_list, t_hit)
    f_p = C_M_PER_S / (lam_p * 1e-9)
    f_i = C_M_PER_S / (lam_i * 1e-9)
    in_p = (lam_p >= p_lo) & (lam_p <= p_hi)
    in_i = (lam_i >= i_lo) & (lam_i <= i_hi)

    feasible, near = [], []
    m_p_arr = np.asarray(m_p_list)
    m_i_arr = np.asarray(m_i_list)
    for h in range(t_hit.size):
        f_s_h = C_M_PER_S / (lam_s_hit[h] * 1e-9)
        delta = f_s_h - np.add.outer(f_p[:, h], f_i[:, h])   # (n_mp, n_mi)
        window_ok = np.logical_and.outer(in_p[:, h], in_i[:, h])
        qpm = int(m_s_hit[h]) - np.add.outer(m_p_arr, m_i_arr) - m_offset
        qpm_ok = (qpm == 0) if constraints.require_qpm else np.ones_like(qpm, bool)
        base = window_ok & qpm_ok
        if not np.any(base):
            continue
        ok = base & (np.abs(delta) <= tol_d)
        target = ok if np.any(ok) else base
        for jp, ji in zip(*np.nonzero(target)):
            cand = _Candidate(
                t_K=float(t_hit[h]),
                m_s=int(m_s_hit[h]), m_p=int(m_p_arr[jp]), m_i=int(m_i_arr[ji]),
                lam_s=float(lam_s_hit[h]), lam_p=float(lam_p[jp, h]),
                lam_i=float(lam_i[ji, h]),
                det_s=float(det_hit[h]), delta=float(delta[jp, ji]),
                qpm=int(qpm[jp, ji]),
            )
            if np.any(ok):
                feasible.append(cand)
            else:
                near.append(cand)
    return feasible, near


def _to_result(device: Device, constraints: SearchConstraints, cand: _Candidate,
               feasible=True, violations=()) -> MatchResult:
    from .elements import mode_rates

    def mode(m, lam):
        kex, k0 = mode_rates(device, lam, cand.t_K, delta_T_K=None)
        return ModeSolution(m=m, lambda_nm=lam, kappa_ex=kex, kappa_0=k0)

    return MatchResult(
        t_ring_K=cand.t_K,
        pump=mode(cand.m_p, cand.lam_p),
        signal=mode(cand.m_s, cand.lam_s),
        idler=mode(cand.m_i, cand.lam_i),
        signal_detuning_Hz=cand.det_s,
        mismatch_Hz=cand.delta,
        qpm_mismatch=cand.qpm,
        constraints=constraints,
        feasible=feasible,
        violations=tuple(violations),
    )


def find_triple_resonance(device: Device, constraints: SearchConstraints):
    """Sweep the ring-tuner temperature and return all feasible matches.

    The list is sorted by (|mismatch|, |signal detuning|, T) and de-duplicated
    per (m_s, m_p, m_i) triple.  Raises SweepStepTooCoarse when one step can
    move the signal resonance past half the signal tolerance, and
    NoFeasibleMatch (carrying the best near-miss) when nothing passes.
    """
    _check_domain(device, constraints)
    step = sweep_step_K(device, constraints)
    rate = signal_shift_rate_hz_per_K(device, constraints)
    if step * rate > 0.5 * constraints.max_signal_detuning_Hz:
        raise SweepStepTooCoarse(
            f"step {step} K shifts the signal resonance by {step * rate / 1e6:.1f} MHz "
            f"> tolerance/2 = {constraints.max_signal_detuning_Hz / 2e6:.1f} MHz"
        )
    span = constraints.t_max_K - constraints.t_min_K
    fsr_s = device.dispersion.fsr_hz(
        constraints.signal_wavelength_nm, 0.5 * (constraints.t_min_K + constraints.t_max_K),
        device.width_nm, device.ring.length_m,
    )
    if rate * span < fsr_s:
        warnings.warn(
            f"sweep range covers {rate * span / 1e9:.1f} GHz of signal shift, "
            f"less than one FSR ({fsr_s / 1e9:.1f} GHz); coverage is incomplete",
            stacklevel=2,
        )

    n_steps = int(math.floor(span / step + 1e-9)) + 1
    t_grid = constraints.t_min_K + step * np.arange(n_steps)

    t_ends = (constraints.t_min_K, constraints.t_max_K)
    target_nm = constraints.signal_wavelength_nm
    m_s_list = _m_range(device, (target_nm, target_nm), t_ends)
    m_p_list = _m_range(device, constraints.pump_window_nm, t_ends)
    m_i_list = _m_range(device, constraints.idler_window_nm, t_ends)
    m_offset = device.ring.m_offset

    chunks = [t_grid[i : i + _CHUNK] for i in range(0, t_grid.size, _CHUNK)]
    workers = _worker_count()
    args = (device, constraints)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda ch: _scan_chunk(*args, ch, m_s_list, m_p_list, m_i_list, m_offset),
                chunks,
            ))
    else:
        parts = [_scan_chunk(*args, ch, m_s_list, m_p_list, m_i_list, m_offset)
                 for ch in chunks]

    feasible, near = [], []
    for f, n in parts:   # ordered reduction keeps determinism regardless of scheduling
        feasible.extend(f)
        near.extend(n)

    best_by_triple = {}
    for cand in feasible:
        key = (cand.m_s, cand.m_p, cand.m_i)
        prev = best_by_triple.get(key)
        if prev is None or cand.sort_key() < prev.sort_key():
            best_by_triple[key] = cand
    results = sorted(best_by_triple.values(), key=_Candidate.sort_key)
    if results:
        return [_to_result(device, constraints, c) for c in results]

    # Diagnostics: best near-miss among window+QPM-passing candidates.
    tol_s, tol_d = constraints.max_signal_detuning_Hz, constraints.max_mismatch_Hz
    if near:
        def miss_key(c):
            return (max(abs(c.det_s) / tol_s, abs(c.delta) / tol_d), c.t_K)

        best = min(near, key=miss_key)
        violations = []
        if abs(best.det_s) > tol_s:
            violations.append(
                f"signal detuning {best.det_s / 1e6:.3f} MHz exceeds {tol_s / 1e6:.1f} MHz")
        if abs(best.delta) > tol_d:
            violations.append(
                f"mismatch {best.delta / 1e6:.3f} MHz exceeds {tol_d / 1e6:.1f} MHz")
        if constraints.require_qpm and best.qpm != 0:
            violations.append(f"QPM mismatch {best.qpm} != 0")
        candidate = _to_result(device, constraints, best, feasible=False,
                               violations=violations)
        raise NoFeasibleMatch(
            "no mode triple satisfies all constraints; best candidate violates: "
            + "; ".join(violations),
            best_candidate=candidate,
            violations=violations,
        )
    raise NoFeasibleMatch(
        "no signal resonance enters the detuning tolerance anywhere in the sweep "
        "range, or no pump/idler lines fall inside their windows",
    )


def verify_match(device: Device, result: MatchResult, rel_tol: float = 1e-9) -> dict:
    """Re-derive a match from raw dispersion and compare against stored fields.

    Raises StaleResult when any re-derived residual disagrees beyond rel_tol
    (absolute floor 1 Hz on frequencies, 1e-12 nm on wavelengths).
    """
    model = device.dispersion
    length_nm = device.ring.length_m * 1e9
    cons = result.constraints
    report = {}

    def close(a, b, scale):
        return abs(a - b) <= rel_tol * scale

    for label, ms in (("pump", result.pump), ("signal", result.signal),
                      ("idler", result.idler)):
        lam = float(solve_resonance_wavelength(model, device.width_nm, length_nm,
                                               ms.m, result.t_ring_K))
        report[f"{label}_lambda_nm"] = lam
        if not close(lam, ms.lambda_nm, max(abs(lam), 1e-3)):
            raise StaleResult(
                f"{label} wavelength re-derives to {lam} nm, stored {ms.lambda_nm} nm"
            )

    f_s = C_M_PER_S / (report["signal_lambda_nm"] * 1e-9)
    f_p = C_M_PER_S / (report["pump_lambda_nm"] * 1e-9)
    f_i = C_M_PER_S / (report["idler_lambda_nm"] * 1e-9)
    det_s = f_s - cons.signal_target_hz
    delta = f_s - f_p - f_i
    qpm = qpm_mismatch(result.signal.m, result.pump.m, result.idler.m,
                       device.ring.m_offset)
    report.update(signal_detuning_Hz=det_s, mismatch_Hz=delta, qpm_mismatch=qpm)
    scale = max(abs(f_s), 1.0)
    if not close(det_s, result.signal_detuning_Hz, scale):
        raise StaleResult(
            f"signal detuning re-derives to {det_s} Hz, stored {result.signal_detuning_Hz} Hz"
        )
    if not close(delta, result.mismatch_Hz, scale):
        raise StaleResult(
            f"mismatch re-derives to {delta} Hz, stored {result.mismatch_Hz} Hz"
        )
    if qpm != result.qpm_mismatch:
        raise StaleResult(
            f"QPM mismatch re-derives to {qpm}, stored {result.qpm_mismatch}"
        )
    return report


@dataclass(frozen=True)
class WidthVariant:
    """Best match for one ring width plus its FWM companion detuning."""

    width_nm: float
    match: MatchResult | None
    companion_detuning: float | None   # rad/s, sign allowed
    companion_source: str              # "comb" | "table" | "none"
    error: str = ""


def companion_mode_detuning(device: Device, match: MatchResult):
    """Comb-derived companion detuning 2 w_p - w_i -> nearest phase-matched line.

    The four-wave-mixing companion carries azimuthal number 2 m_p - m_i.
    Returns delta' in rad/s, or None when that comb line falls outside the
    dispersion window.
    """
    m_comp = 2 * match.pump.m - match.idler.m
    f_target = 2.0 * match.pump.freq_hz - match.idler.freq_hz
    if f_target <= 0.0 or m_comp <= 0:
        return None
    model = device.dispersion
    length_nm = device.ring.length_m * 1e9
    lam = float(solve_resonance_wavelength(model, device.width_nm, length_nm,
                                           m_comp, match.t_ring_K))
    lo, hi = model.lambda_window_nm
    if not lo <= lam <= hi:
        return None
    f_comp = C_M_PER_S / (lam * 1e-9)
    return TWO_PI * (f_comp - f_target)


def dispersion_engineering_sweep(devices, constraints: SearchConstraints,
                                 companion_table=None):
    """Best match per device width plus the companion-mode detuning.

    companion_table maps width (nm) -> delta' (rad/s) and is the fallback
    when the companion comb line leaves the dispersion window.  A width with
    no feasible match yields a WidthVariant carrying the error instead of
    aborting the sweep; results are ordered by width.
    """
    table = companion_table or {}
    out = []
    for device in sorted(devices, key=lambda d: d.width_nm):
        width = device.width_nm
        try:
            match = find_triple_resonance(device, constraints)[0]
        except NoFeasibleMatch as exc:
            out.append(WidthVariant(width, None, None, "none", error=str(exc)))
            continue
        comb = companion_mode_detuning(device, match)
        if comb is not None:
            out.append(WidthVariant(width, match, comb, "comb"))
        elif width in table:
            out.append(WidthVariant(width, match, float(table[width]), "table"))
        else:
            out.append(WidthVariant(width, match, None, "none",
                                    error="companion line outside window and no "
                                          "table entry"))
    return out
