"""Optical forward models for the gated quantum dot.

Charge plateaus and Stark shift set where the emitter line sits as a
function of gate bias; SAW phase modulation splits the line into sidebands
at multiples of the drive frequency with weights J_n(delta)^2; the measured
spectrum is the ideal one convolved with the Fabry-Perot filter lineshape.

The emitter line and the filter are both Lorentzian, so analytic width
addition (fwhm_obs = fwhm_line + fwhm_filter) provides an independent check
on the numerical convolution path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, pi

import numpy as np
from scipy.signal import fftconvolve

from .acoustic import ResonatorParams
from .core import Trace, TraceMeta

BESSEL_MAX_X = 30.0
BESSEL_MAX_N = 60


@dataclass(frozen=True)
class Plateau:
    """One charge plateau: bias interval [v_min, v_max) and the emission
    frequency offset of that charge state."""

    v_min: float
    v_max: float
    frequency_offset: float

    def __post_init__(self) -> None:
        if not self.v_max > self.v_min:
            raise ValueError(f"plateau requires v_max > v_min, got [{self.v_min}, {self.v_max})")


@dataclass(frozen=True)
class EmitterState:
    """Gated-QD emitter: optical reference frequency, linewidth, Stark slope
    and the charge-plateau map.

    base_frequency may be an absolute optical frequency or 0 for a detuning
    axis; all spectra simply add to it. stark_slope is in Hz per volt.
    """

    base_frequency: float
    linewidth_fwhm: float
    stark_slope: float
    plateaus: tuple[Plateau, ...]
    brightness: float = 1.0

    def __post_init__(self) -> None:
        if not self.linewidth_fwhm > 0:
            raise ValueError(f"linewidth_fwhm must be > 0, got {self.linewidth_fwhm}")
        if self.brightness < 0:
            raise ValueError(f"brightness must be >= 0, got {self.brightness}")
        ps = self.plateaus
        if any(b.v_min < a.v_max for a, b in zip(ps, ps[1:])):
            raise ValueError("plateaus must be sorted by v_min and non-overlapping")
        if any(b.v_min < a.v_min for a, b in zip(ps, ps[1:])):
            raise ValueError("plateaus must be sorted by v_min")


@dataclass(frozen=True)
class ModulationDrive:
    """Microwave drive probing one acoustic mode.

    delta_max is the on-resonance phase-modulation index; off resonance the
    index follows the mode's Lorentzian response.
    """

    drive_frequency: float
    mode: ResonatorParams
    delta_max: float

    def __post_init__(self) -> None:
        if not self.drive_frequency > 0:
            raise ValueError(f"drive_frequency must be > 0, got {self.drive_frequency}")
        if self.delta_max < 0:
            raise ValueError(f"delta_max must be >= 0, got {self.delta_max}")


@dataclass(frozen=True)
class FilterSpec:
    """Scanning Fabry-Perot filter: Lorentzian of width fwhm, swept over
    scan_range with n_points samples."""

    fwhm: float
    scan_range: tuple[float, float]
    n_points: int

    def __post_init__(self) -> None:
        if not self.fwhm > 0:
            raise ValueError(f"fwhm must be > 0, got {self.fwhm}")
        lo, hi = self.scan_range
        if not hi > lo:
            raise ValueError(f"scan_range must be increasing, got {self.scan_range}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.scan_range[0], self.scan_range[1], self.n_points)


# ---------------------------------------------------------------------------
# Bessel functions of the first kind (integer order)

def _bessel_downward(nmax: int, x: float) -> np.ndarray:
    """J_0..J_nmax at x > 0 by downward recurrence with sum normalization
    (Miller's method). Start order sits well above the turning point so the
    seeded error has decayed to rounding level by order nmax."""
    m = max(nmax, int(x)) + 52
    if m % 2:
        m += 1
    j = np.zeros(m + 2)
    j[m] = 1.0
    for k in range(m, 0, -1):
        j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1]
        if abs(j[k - 1]) > 1e250:
            j *= 1e-250
    norm = j[0] + 2.0 * np.sum(j[2:m + 1:2])
    return j[:nmax + 1] / norm


def bessel_jn_all(nmax: int, x: float) -> np.ndarray:
    """Array of J_n(x) for n = 0..nmax (validity |x| <= 30, nmax <= 60)."""
    if nmax < 0 or nmax > BESSEL_MAX_N:
        raise ValueError(f"order must be in [0, {BESSEL_MAX_N}], got {nmax}")
    if abs(x) > BESSEL_MAX_X:
        raise ValueError(f"|x| must be <= {BESSEL_MAX_X}, got {x}")
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    out = _bessel_downward(nmax, abs(x))
    if x < 0:
        out = out * np.where(np.arange(nmax + 1) % 2 == 0, 1.0, -1.0)
    return out


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer n; J_{-n}(x) = (-1)^n J_n(x).

    Absolute accuracy is better than 1e-10 on the validity range
    |x| <= 30, |n| <= 60; arguments outside raise ValueError.
    """
    n = int(n)
    if abs(n) > BESSEL_MAX_N:
        raise ValueError(f"|n| must be <= {BESSEL_MAX_N}, got {n}")
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -1.0
    return sign * float(bessel_jn_all(n, x)[n])


def sideband_weights(delta: float, n_max: int, residual_tol: float = 1e-6
                     ) -> tuple[np.ndarray, int]:
    """Sideband weights J_n(delta)^2 for n = 0..n_used.

    n_used starts at n_max and widens until the truncated weight
    1 - (J_0^2 + 2 sum J_n^2) drops below residual_tol. Returns the
    one-sided weight array (index n) and n_used; negative orders carry the
    same weight by parity.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    n_used = min(n_max, BESSEL_MAX_N)
    while True:
        jn = bessel_jn_all(n_used, delta)
        w = jn * jn
        residual = 1.0 - (w[0] + 2.0 * np.sum(w[1:]))
        if residual <= residual_tol:
            return w, n_used
        if n_used >= BESSEL_MAX_N:
            raise ValueError(
                f"sideband truncation residual {residual:.2e} above {residual_tol:.0e} "
                f"even at order {BESSEL_MAX_N}; delta={delta:g} too large")
        n_used = min(n_used + 4, BESSEL_MAX_N)


# ---------------------------------------------------------------------------
# Charge state and Stark shift

def charge_state(bias: float, e: EmitterState) -> int | None:
    """Index of the plateau whose [v_min, v_max) contains bias, else None."""
    for i, p in enumerate(e.plateaus):
        if p.v_min <= bias < p.v_max:
            return i
    return None


def emission_frequency(bias: float, e: EmitterState) -> float | None:
    """Emitter frequency at the given bias, or None when the emitter is dark
    (bias outside every plateau; downstream spectra are all zero)."""
    i = charge_state(bias, e)
    if i is None:
        return None
    p = e.plateaus[i]
    return e.base_frequency + p.frequency_offset + e.stark_slope * (bias - p.v_min)


def modulation_index(drive: ModulationDrive) -> float:
    """Phase-modulation index delta at the drive frequency.

    delta(f) = delta_max / sqrt(1 + (2 (f - f0) / kappa_tot)^2), so delta^2
    traces a Lorentzian of FWHM kappa_tot centered on the mode.
    """
    mode = drive.mode
    detune = 2.0 * (drive.drive_frequency - mode.f0) / mode.kappa_tot
    return drive.delta_max / np.sqrt(1.0 + detune * detune)


# ---------------------------------------------------------------------------
# Spectra

def lorentzian_unit_area(x: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    """Unit-area Lorentzian density."""
    half = fwhm / 2.0
    return (half / pi) / ((x - center) ** 2 + half * half)


def sideband_spectrum(center: float, linewidth: float, delta: float, omega_m: float,
                      n_max: int, brightness: float = 1.0,
                      grid: np.ndarray | None = None) -> Trace:
    """Ideal phase-modulated emission spectrum.

    Sum over sideband orders n in [-n_used, n_used] of unit-area Lorentzian
    lines at center + n*omega_m weighted by brightness * J_n(delta)^2. The
    truncation order widens automatically until the residual weight is below
    1e-6; the line list, weight sum and n_used are recorded in meta.extra.
    """
    if not linewidth > 0:
        raise ValueError(f"linewidth must be > 0, got {linewidth}")
    if not omega_m > 0:
        raise ValueError(f"omega_m must be > 0, got {omega_m}")
    w, n_used = sideband_weights(delta, n_max)
    orders = np.arange(-n_used, n_used + 1)
    weights = w[np.abs(orders)]
    positions = center + orders * omega_m
    if grid is None:
        span = n_used * omega_m + 20.0 * linewidth
        step = linewidth / 8.0
        n_pts = 2 * int(ceil(span / step)) + 1
        grid = np.linspace(center - span, center + span, n_pts)
    else:
        grid = np.asarray(grid, dtype=float)
    y = np.zeros_like(grid)
    for pos, wt in zip(positions, weights):
        if wt > 0.0:
            y += wt * lorentzian_unit_area(grid, pos, linewidth)
    y *= brightness
    meta = TraceMeta(
        x_label="frequency", x_unit="Hz", y_label="intensity", y_unit="counts/Hz",
        provenance=f"sideband_spectrum(delta={delta:g}, omega_m={omega_m:g})",
        extra={
            "lines": [(float(p), float(wt)) for p, wt in zip(positions, weights)],
            "weight_sum": float(weights.sum()),
            "n_used": int(n_used),
            "linewidth": float(linewidth),
            "brightness": float(brightness),
        },
    )
    return Trace(grid, y, meta=meta)


def filtered_comb(x: np.ndarray, center: float, linewidth: float, delta: float,
                  omega_m: float, filter_fwhm: float, n_max: int = 8) -> np.ndarray:
    """Analytic filtered sideband comb (Lorentzian width addition).

    Each sideband appears as a unit-area Lorentzian of width
    linewidth + filter_fwhm; this closed form is what the modulation-index
    estimator fits, independent of the numerical convolution path.
    """
    w, n_used = sideband_weights(abs(delta), n_max)
    fwhm_obs = linewidth + filter_fwhm
    y = w[0] * lorentzian_unit_area(x, center, fwhm_obs)
    for n in range(1, n_used + 1):
        if w[n] > 0.0:
            y = y + w[n] * (lorentzian_unit_area(x, center + n * omega_m, fwhm_obs)
                            + lorentzian_unit_area(x, center - n * omega_m, fwhm_obs))
    return y


def _lorentzian_bin_masses(fwhm: float, dx: float, n_half: int) -> np.ndarray:
    """Kernel bin masses from CDF differences, normalized to exact unit sum.

    Bin-integrating keeps the kernel well behaved even when fwhm << dx (the
    kernel then collapses to a single unit-mass bin and the convolution is
    the identity)."""
    edges = (np.arange(-n_half, n_half + 2) - 0.5) * dx
    cdf = 0.5 + np.arctan(2.0 * edges / fwhm) / pi
    masses = np.diff(cdf)
    return masses / masses.sum()


def filtered_spectrum(ideal: Trace, filt: FilterSpec) -> Trace:
    """Convolve an ideal spectrum with the unit-area Lorentzian filter line
    and sample the result at filt.n_points across filt.scan_range.

    The discrete kernel is normalized to an exact unit sum, so the
    convolution itself conserves integrated counts; mass spread beyond the
    scan window by the filter tails is physics, not an algorithmic loss. If
    the ideal support sits closer than 5 filter FWHM to a scan edge the
    output carries an 'insufficient_padding' warning flag.
    """
    lo, hi = filt.scan_range
    out_x = filt.grid()
    dx = (hi - lo) / (filt.n_points - 1)

    pad = 8.0 * filt.fwhm + 2.0 * dx
    int_lo = min(lo, ideal.x[0]) - pad
    int_hi = max(hi, ideal.x[-1]) + pad
    # phase-align the internal grid with the output grid
    n_before = int(ceil((lo - int_lo) / dx))
    n_after = int(ceil((int_hi - hi) / dx))
    grid = lo + dx * np.arange(-n_before, filt.n_points + n_after)

    ideal_step = float(np.median(np.diff(ideal.x)))
    if ideal_step < 0.7 * dx:
        # input finer than the working grid: deposit bin-averaged densities
        # (mass preserving) instead of point samples, so features narrower
        # than dx keep their integrated counts
        cum = np.concatenate([[0.0], np.cumsum(
            0.5 * (np.real(ideal.y[1:]) + np.real(ideal.y[:-1])) * np.diff(ideal.x))])
        edges = np.concatenate([grid - 0.5 * dx, [grid[-1] + 0.5 * dx]])
        cum_at = np.interp(edges, ideal.x, cum, left=0.0, right=float(cum[-1]))
        y_in = np.diff(cum_at) / dx
    else:
        y_in = np.interp(grid, ideal.x, np.real(ideal.y), left=0.0, right=0.0)
    kernel = _lorentzian_bin_masses(filt.fwhm, dx, n_half=len(grid))
    full = fftconvolve(y_in, kernel, mode="same")
    y_out = np.interp(out_x, grid, full)

    meta = TraceMeta(
        x_label="frequency", x_unit="Hz", y_label="intensity", y_unit="counts/Hz",
        provenance=f"filtered_spectrum(fwhm={filt.fwhm:g})",
        extra=dict(ideal.meta.extra, filter_fwhm=float(filt.fwhm)),
    )
    support = _support_interval(ideal)
    if support is not None:
        margin = 5.0 * filt.fwhm
        if support[0] < lo + margin or support[1] > hi - margin:
            meta = meta.with_warning("insufficient_padding")
    return Trace(out_x, np.clip(y_out, 0.0, None), meta=meta)


def _support_interval(t: Trace) -> tuple[float, float] | None:
    """Where the spectrum lives: the recorded line positions padded by a few
    linewidths when available, else where y exceeds 1e-3 of its peak
    (amplitude thresholds alone are useless against Lorentzian tails)."""
    lines = t.meta.extra.get("lines")
    lw = t.meta.extra.get("linewidth")
    if lines and lw:
        pos = [p for p, w in lines if w > 0.0]
        return min(pos) - 5.0 * lw, max(pos) + 5.0 * lw
    y = np.abs(np.real(t.y))
    top = y.max()
    if top <= 0.0:
        return None
    idx = np.nonzero(y > 1e-3 * top)[0]
    return float(t.x[idx[0]]), float(t.x[idx[-1]])


# ---------------------------------------------------------------------------
# Bias maps

@dataclass(frozen=True)
class PLMap:
    """PL intensity vs (bias, detected frequency). Rows with the emitter
    dark (bias between plateaus) are all zero and flagged with plateau
    index -1."""

    bias: np.ndarray
    frequency: np.ndarray
    counts: np.ndarray
    plateau_index: np.ndarray
    meta: TraceMeta = field(default_factory=TraceMeta)

    def __post_init__(self) -> None:
        bias = np.asarray(self.bias, dtype=float)
        freq = np.asarray(self.frequency, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        pidx = np.asarray(self.plateau_index, dtype=int)
        if counts.shape != (len(bias), len(freq)):
            raise ValueError(
                f"counts shape {counts.shape} does not match (n_bias={len(bias)}, n_freq={len(freq)})")
        if len(pidx) != len(bias):
            raise ValueError("plateau_index must have one entry per bias row")
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "frequency", freq)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "plateau_index", pidx)


def pl_bias_map(bias_grid: np.ndarray, e: EmitterState,
                drive: ModulationDrive | None, filt: FilterSpec) -> PLMap:
    """Filtered PL spectra versus gate bias.

    Within a plateau the whole (possibly phase-modulated) comb translates
    rigidly with bias at the Stark slope; between plateaus rows are dark.
    """
    bias_grid = np.asarray(bias_grid, dtype=float)
    freq = filt.grid()
    counts = np.zeros((len(bias_grid), len(freq)))
    pidx = np.full(len(bias_grid), -1, dtype=int)
    delta = modulation_index(drive) if drive is not None else 0.0
    omega_m = drive.drive_frequency if drive is not None else None
    warnings: tuple[str, ...] = ()
    for i, bias in enumerate(bias_grid):
        state = charge_state(bias, e)
        if state is None:
            continue
        pidx[i] = state
        center = emission_frequency(bias, e)
        if omega_m is not None and delta > 0.0:
            ideal = sideband_spectrum(center, e.linewidth_fwhm, delta, omega_m,
                                      n_max=4, brightness=e.brightness)
        else:
            ideal = sideband_spectrum(center, e.linewidth_fwhm, 0.0, max(e.linewidth_fwhm, 1.0),
                                      n_max=1, brightness=e.brightness)
        row = filtered_spectrum(ideal, filt)
        counts[i] = row.y
        for w in row.meta.warnings:
            if w not in warnings:
                warnings += (w,)
    meta = TraceMeta(
        x_label="frequency", x_unit="Hz", y_label="bias", y_unit="V",
        provenance="pl_bias_map",
        warnings=warnings,
        extra={
            "stark_slope": float(e.stark_slope),
            "drive_frequency": None if omega_m is None else float(omega_m),
            "delta": float(delta),
            "filter_fwhm": float(filt.fwhm),
        },
    )
    return PLMap(bias_grid, freq, counts, pidx, meta=meta)
