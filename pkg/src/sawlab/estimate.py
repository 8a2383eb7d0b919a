"""Parameter recovery from traces and reproducible synthetic data.

All fitters share one damped least-squares core (Levenberg-Marquardt style:
steps interpolate between Gauss-Newton and gradient descent, accepted only
when the residual norm does not increase), with convergence declared when
the relative step drops below 1e-10, capped at 200 iterations. Parameter
uncertainties come from the residual-scaled linearized covariance at the
optimum and are approximate.

Random generation uses numpy's PCG64 so that seeded synthetic data are
identical across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FitError, Trace
from .qd import PLMap, filtered_comb, FilterSpec

MAX_ITER = 200
REL_STEP_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Outcome of one least-squares fit.

    converged=False marks params as best-so-far, not authoritative.
    """

    params: dict[str, float]
    uncertainties: dict[str, float]
    residual_norm: float
    converged: bool
    n_iter: int
    model: str = ""
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name, s in self.uncertainties.items():
            if s < 0:
                raise ValueError(f"uncertainty for {name} must be >= 0, got {s}")

    def to_report(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "sigma": dict(self.uncertainties),
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded noise description; identical seed gives an identical stream."""

    kind: str
    scale: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian_additive", "poisson_counts"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.scale < 0:
            raise ValueError(f"scale must be >= 0, got {self.scale}")


def rng_for(seed: int, trial: int | None = None) -> np.random.Generator:
    """Portable generator; (seed, trial) derives independent per-trial streams."""
    if trial is None:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, trial))))


def synthesize(model_trace: Trace, noise: NoiseSpec) -> Trace:
    """Add seeded noise to a model trace.

    gaussian_additive adds N(0, scale^2) per point (independently to the real
    and imaginary parts of complex traces, real part drawn first);
    poisson_counts draws counts with mean scale*y and requires y >= 0. y_err
    is populated with the per-point 1-sigma noise level.
    """
    if noise.scale == 0.0:
        return model_trace
    rng = rng_for(noise.seed)
    n = len(model_trace)
    meta = model_trace.meta
    if noise.kind == "gaussian_additive":
        if model_trace.is_complex:
            y = model_trace.y + rng.normal(0.0, noise.scale, n) \
                + 1j * rng.normal(0.0, noise.scale, n)
        else:
            y = model_trace.y + rng.normal(0.0, noise.scale, n)
        y_err = np.full(n, noise.scale)
    else:
        if model_trace.is_complex:
            raise ValueError("poisson_counts requires a real-valued trace")
        if np.any(model_trace.y < 0):
            i = int(np.nonzero(model_trace.y < 0)[0][0])
            raise ValueError(f"poisson_counts requires y >= 0, violated at index {i}")
        lam = noise.scale * model_trace.y
        y = rng.poisson(lam).astype(float)
        y_err = np.sqrt(lam)
    return Trace(model_trace.x, y, y_err=y_err, meta=meta)


def synthesize_map(m: PLMap, noise: NoiseSpec) -> PLMap:
    """Apply seeded noise to every row of a PL map (row-major order)."""
    if noise.scale == 0.0:
        return m
    rng = rng_for(noise.seed)
    if noise.kind == "gaussian_additive":
        counts = m.counts + rng.normal(0.0, noise.scale, m.counts.shape)
    else:
        if np.any(m.counts < 0):
            raise ValueError("poisson_counts requires counts >= 0")
        counts = rng.poisson(noise.scale * m.counts).astype(float)
    return PLMap(m.bias, m.frequency, counts, m.plateau_index, meta=m.meta)


# ---------------------------------------------------------------------------
# Damped least-squares core

def _numeric_jacobian(residual_fn, p: np.ndarray, scales: np.ndarray) -> np.ndarray:
    n_res = len(residual_fn(p))
    jac = np.empty((n_res, len(p)))
    for i in range(len(p)):
        h = 1e-6 * max(abs(p[i]), scales[i])
        dp = np.zeros_like(p)
        dp[i] = h
        jac[:, i] = (residual_fn(p + dp) - residual_fn(p - dp)) / (2.0 * h)
    return jac


def lm_least_squares(residual_fn, p0, scales=None, max_iter: int = MAX_ITER,
                     rel_step_tol: float = REL_STEP_TOL):
    """Minimize sum(residual_fn(p)**2) from p0.

    Returns (p, sigma, residual_norm, converged, n_iter). The residual norm
    is monotone non-increasing across accepted steps; sigma is the
    residual-scaled linearized 1-sigma per parameter.
    """
    p = np.asarray(p0, dtype=float).copy()
    if scales is None:
        scales = np.maximum(np.abs(p), 1.0)
    scales = np.asarray(scales, dtype=float)
    r = residual_fn(p)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jac = _numeric_jacobian(residual_fn, p, scales)
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(jtj).copy()
        diag[diag <= 0.0] = max(diag.max(), 1.0) * 1e-12 + 1e-300
        accepted = False
        rel_step = np.inf
        for _ in range(50):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = p + step
            r_new = residual_fn(p_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                rel_step = float(np.max(np.abs(step) / np.maximum(np.abs(p_new), scales)))
                p, r, cost = p_new, r_new, cost_new
                lam = max(lam * 0.3, 1e-14)
                accepted = True
                break
            lam *= 2.5
        if not accepted:
            break
        if rel_step < rel_step_tol:
            converged = True
            break
    jac = _numeric_jacobian(residual_fn, p, scales)
    jtj = jac.T @ jac
    dof = max(len(r) - len(p), 1)
    cov = np.linalg.pinv(jtj) * (cost / dof)
    sigma = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return p, sigma, float(np.sqrt(cost)), converged, n_iter


# ---------------------------------------------------------------------------
# Lorentzian peaks

def lorentzian_peak(x: np.ndarray, center: float, fwhm: float, amplitude: float,
                    offset: float) -> np.ndarray:
    """Peak-normalized Lorentzian: offset + amplitude / (1 + (2(x-c)/w)^2)."""
    u = 2.0 * (x - center) / fwhm
    return offset + amplitude / (1.0 + u * u)


def _half_max_crossings(x: np.ndarray, y: np.ndarray, level: float,
                        i_peak: int) -> tuple[float | None, float | None]:
    left = None
    for i in range(i_peak, 0, -1):
        if y[i - 1] < level <= y[i]:
            t = (level - y[i - 1]) / (y[i] - y[i - 1])
            left = x[i - 1] + t * (x[i] - x[i - 1])
            break
    right = None
    for i in range(i_peak, len(y) - 1):
        if y[i + 1] < level <= y[i]:
            t = (level - y[i + 1]) / (y[i] - y[i + 1])
            right = x[i + 1] - t * (x[i + 1] - x[i])
            break
    return left, right


def _lorentzian_init(x: np.ndarray, y: np.ndarray) -> dict[str, float]:
    n_edge = max(2, len(x) // 10)
    offset = float(np.median(np.concatenate([y[:n_edge], y[-n_edge:]])))
    i_peak = int(np.argmax(y))
    amplitude = float(y[i_peak] - offset)
    if amplitude <= 0.0:
        raise FitError("no peak detected")
    level = offset + amplitude / 2.0
    left, right = _half_max_crossings(x, y, level, i_peak)
    span = float(x[-1] - x[0])
    if left is not None and right is not None:
        fwhm = right - left
    elif left is not None:
        fwhm = 2.0 * (x[i_peak] - left)
    elif right is not None:
        fwhm = 2.0 * (right - x[i_peak])
    else:
        fwhm = span / 4.0
    fwhm = min(max(fwhm, span / (len(x) * 4.0)), span)
    return {"center": float(x[i_peak]), "fwhm": float(fwhm),
            "amplitude": amplitude, "offset": offset}


def fit_lorentzian(t: Trace, init: dict[str, float] | None = None) -> FitResult:
    """Fit offset + amplitude / (1 + (2(x-center)/fwhm)^2) to a trace.

    Requires >= 8 samples spanning at least two estimated FWHM. Without init
    the starting point comes from the peak location and half-maximum
    crossings, so results are reproducible without hand tuning.
    """
    x, y = t.x, np.real(t.y)
    if len(x) < 8:
        raise ValueError(f"need >= 8 samples, got {len(x)}")
    if np.ptp(y) == 0.0:
        raise FitError("no peak detected")
    guess = _lorentzian_init(x, y)
    if init:
        guess.update(init)
    span = x[-1] - x[0]
    if span < 2.0 * guess["fwhm"]:
        raise ValueError(
            f"trace spans {span:g}, less than 2 estimated FWHM ({guess['fwhm']:g})")

    def residual(p):
        return lorentzian_peak(x, p[0], abs(p[1]), p[2], p[3]) - y

    p0 = np.array([guess["center"], guess["fwhm"], guess["amplitude"], guess["offset"]])
    scales = np.array([max(abs(guess["center"]), guess["fwhm"]), guess["fwhm"],
                       abs(guess["amplitude"]), max(abs(guess["amplitude"]), 1e-30)])
    p, sig, rnorm, conv, n_iter = lm_least_squares(residual, p0, scales)
    names = ("center", "fwhm", "amplitude", "offset")
    params = {"center": p[0], "fwhm": abs(p[1]), "amplitude": p[2], "offset": p[3]}
    return FitResult(params, dict(zip(names, sig)), rnorm, conv, n_iter,
                     model="lorentzian_peak")


# ---------------------------------------------------------------------------
# One-port resonator reflection

def _s11_model(f: np.ndarray, f0: float, kappa_int: float, kappa_ext: float,
               xt: complex) -> np.ndarray:
    denom = 1j * (f - f0) + 0.5 * (kappa_int + kappa_ext)
    return 1.0 - kappa_ext / denom + xt


def _mag2_dip_model(f: np.ndarray, f0: float, kappa_tot: float, depth: float) -> np.ndarray:
    u = 2.0 * (f - f0) / kappa_tot
    return 1.0 - depth / (1.0 + u * u)


def fit_s11(t: Trace, init: dict[str, float] | None = None) -> FitResult:
    """Fit the one-port resonator model to a reflection trace.

    Complex-valued traces are fit directly (params f0, kappa_int, kappa_ext
    and the complex crosstalk). Real-valued traces are interpreted as |S11|^2
    and fit with the crosstalk-free magnitude model; the under/over-coupled
    ambiguity of magnitude-only data is flagged and both branches reported.
    q_int = f0/kappa_int is included with propagated uncertainty.
    """
    f = t.x
    if len(f) < 8:
        raise ValueError(f"need >= 8 samples, got {len(f)}")
    if t.is_complex:
        return _fit_s11_complex(f, t.y, init)
    return _fit_s11_mag2(f, np.real(t.y), init)


def _q_int_entry(params: dict[str, float], sigma: dict[str, float]) -> None:
    q = params["f0"] / params["kappa_int"]
    params["q_int"] = q
    rel = np.hypot(sigma.get("f0", 0.0) / params["f0"],
                   sigma.get("kappa_int", 0.0) / params["kappa_int"])
    sigma["q_int"] = q * rel


def _fit_s11_complex(f: np.ndarray, y: np.ndarray,
                     init: dict[str, float] | None) -> FitResult:
    mag = np.abs(y)
    if np.ptp(mag) / max(mag.max(), 1e-300) < 1e-9:
        raise FitError("no resonance detected")
    n_edge = max(3, len(f) // 20)
    baseline = complex(np.mean(np.concatenate([y[:n_edge], y[-n_edge:]])))
    xt0 = baseline - 1.0
    d = y - xt0
    i_min = int(np.argmin(np.abs(d)))
    f0_0 = float(f[i_min])
    dip = 1.0 - np.abs(d) ** 2
    level = dip[i_min] / 2.0
    left, right = _half_max_crossings(f, dip, level, i_min)
    kt0 = (right - left) if (left is not None and right is not None) \
        else (f[-1] - f[0]) / 10.0
    r0 = float(np.real(d[i_min]))
    ke0 = np.clip(kt0 * (1.0 - r0) / 2.0, 1e-3 * kt0, (1.0 - 1e-3) * kt0)
    ki0 = max(kt0 - ke0, 1e-3 * kt0)
    guess = {"f0": f0_0, "kappa_int": float(ki0), "kappa_ext": float(ke0),
             "crosstalk_re": xt0.real, "crosstalk_im": xt0.imag}
    if init:
        guess.update(init)

    def residual(p):
        model = _s11_model(f, p[0], abs(p[1]), abs(p[2]), p[3] + 1j * p[4])
        diff = model - y
        return np.concatenate([diff.real, diff.imag])

    p0 = np.array([guess["f0"], guess["kappa_int"], guess["kappa_ext"],
                   guess["crosstalk_re"], guess["crosstalk_im"]])
    kt_scale = guess["kappa_int"] + guess["kappa_ext"]
    scales = np.array([max(abs(guess["f0"]), kt_scale), kt_scale, kt_scale, 1.0, 1.0])
    p, sig, rnorm, conv, n_iter = lm_least_squares(residual, p0, scales)
    params = {"f0": p[0], "kappa_int": abs(p[1]), "kappa_ext": abs(p[2]),
              "crosstalk_re": p[3], "crosstalk_im": p[4]}
    sigma = dict(zip(("f0", "kappa_int", "kappa_ext", "crosstalk_re", "crosstalk_im"), sig))
    _q_int_entry(params, sigma)
    return FitResult(params, sigma, rnorm, conv, n_iter, model="s11_resonator")


def _fit_s11_mag2(f: np.ndarray, y: np.ndarray,
                  init: dict[str, float] | None) -> FitResult:
    if np.ptp(y) / max(abs(y).max(), 1e-300) < 1e-9:
        raise FitError("no resonance detected")
    i_min = int(np.argmin(y))
    baseline = float(np.median(np.concatenate([y[:max(3, len(f) // 20)],
                                               y[-max(3, len(f) // 20):]])))
    depth0 = max(baseline - y[i_min], 1e-6)
    dip = baseline - y
    left, right = _half_max_crossings(f, dip, depth0 / 2.0, i_min)
    kt0 = (right - left) if (left is not None and right is not None) \
        else (f[-1] - f[0]) / 10.0
    guess = {"f0": float(f[i_min]), "kappa_tot": float(kt0), "depth": float(depth0)}
    if init:
        guess.update(init)

    def residual(p):
        return _mag2_dip_model(f, p[0], abs(p[1]), p[2]) - y

    p0 = np.array([guess["f0"], guess["kappa_tot"], guess["depth"]])
    scales = np.array([max(abs(guess["f0"]), guess["kappa_tot"]), guess["kappa_tot"], 1.0])
    p, sig, rnorm, conv, n_iter = lm_least_squares(residual, p0, scales)
    f0, kt, depth = p[0], abs(p[1]), float(np.clip(p[2], 0.0, 1.0))
    s0 = np.sqrt(1.0 - depth)
    ke_under = kt * (1.0 - s0) / 2.0
    ke_over = kt * (1.0 + s0) / 2.0
    params = {
        "f0": f0, "kappa_int": kt - ke_under, "kappa_ext": ke_under,
        "alt_kappa_int": kt - ke_over, "alt_kappa_ext": ke_over,
        "kappa_tot": kt, "dip_depth": depth,
        "crosstalk_re": 0.0, "crosstalk_im": 0.0,
    }
    # propagate (f0, kt, depth) sigmas onto the branch parameters
    s_f0, s_kt, s_depth = sig
    dke_ddepth = kt / (4.0 * max(s0, 1e-12))
    s_ke = np.hypot((1.0 - s0) / 2.0 * s_kt, dke_ddepth * s_depth)
    sigma = {
        "f0": s_f0, "kappa_int": np.hypot(s_kt, s_ke), "kappa_ext": s_ke,
        "alt_kappa_int": np.hypot(s_kt, s_ke), "alt_kappa_ext": s_ke,
        "kappa_tot": s_kt, "dip_depth": s_depth,
        "crosstalk_re": 0.0, "crosstalk_im": 0.0,
    }
    _q_int_entry(params, sigma)
    return FitResult(params, sigma, rnorm, conv, n_iter, model="s11_mag2",
                     notes=("coupling_sign_ambiguous: magnitude-only input; "
                            "under-coupled branch reported, alternate in alt_kappa_*",))


# ---------------------------------------------------------------------------
# Modulation index from sideband spectra

def extract_modulation_index(spectrum: Trace, omega_m: float, filt: FilterSpec,
                             linewidth: float,
                             init: dict[str, float] | None = None) -> FitResult:
    """Fit the filtered sideband comb to a measured PL spectrum.

    The model is the analytic comb of Lorentzian lines of width
    linewidth + filter FWHM spaced by omega_m, with free modulation index,
    center, amplitude and offset. Requires the sidebands to be resolvable:
    omega_m > filter FWHM / 2.
    """
    if not omega_m > filt.fwhm / 2.0:
        raise FitError("insufficient sideband resolution: omega_m <= filter fwhm / 2")
    x, y = spectrum.x, np.real(spectrum.y)
    if np.ptp(y) == 0.0:
        raise FitError("no peak detected")

    def comb(delta: float, center: float) -> np.ndarray:
        return filtered_comb(x, center, linewidth, abs(delta), omega_m, filt.fwhm)

    # Initialization needs two precautions: delta = 0 is a stationary point
    # of the model (weights are quadratic in delta), so the delta grid must
    # be fine near zero; and for delta beyond ~2 the carrier is weaker than
    # its sidebands, so the strongest peak may sit a whole drive period away
    # from the true center. Scan both, picking the least-squares best.
    i_peak = int(np.argmax(y))
    peak_x = float(x[i_peak])
    best = None
    for k in (-2, -1, 0, 1, 2):
        center_try = peak_x + k * omega_m
        if not x[0] <= center_try <= x[-1]:
            continue
        for delta_try in (0.0, 0.05, 0.1, 0.15, 0.22, 0.3, 0.45, 0.6, 0.8,
                          1.0, 1.3, 1.7, 2.2, 2.8):
            shape = comb(delta_try, center_try)
            design = np.column_stack([shape, np.ones_like(x)])
            coef, res, *_ = np.linalg.lstsq(design, y, rcond=None)
            cost = float(res[0]) if len(res) else float(np.sum((design @ coef - y) ** 2))
            if best is None or cost < best[0]:
                best = (cost, delta_try, center_try, float(coef[0]), float(coef[1]))
    _, delta0, center0, amp0, off0 = best
    guess = {"delta": delta0, "center": center0, "amplitude": amp0, "offset": off0}
    if init:
        guess.update(init)

    def residual(p):
        return p[2] * comb(p[0], p[1]) + p[3] - y

    p0 = np.array([guess["delta"], guess["center"], guess["amplitude"], guess["offset"]])
    amp_scale = max(abs(guess["amplitude"]), 1e-30)
    scales = np.array([1.0, max(abs(center0), omega_m), amp_scale, amp_scale])
    p, sig, rnorm, conv, n_iter = lm_least_squares(residual, p0, scales)
    params = {"delta": abs(p[0]), "center": p[1], "amplitude": p[2], "offset": p[3]}
    sigma = dict(zip(("delta", "center", "amplitude", "offset"), sig))
    return FitResult(params, sigma, rnorm, conv, n_iter, model="filtered_sideband_comb")


# ---------------------------------------------------------------------------
# Linear regressions

def fit_loss_per_length(gaps: np.ndarray, peak_db: np.ndarray,
                        errs: np.ndarray | None = None) -> FitResult:
    """Weighted linear regression of peak transmission [dB] against gap [m].

    Returns slope in dB/mm and intercept in dB. With error bars given, the
    slope uncertainty comes from error propagation through the weighted
    normal equations; without, from the residual variance.
    """
    gaps = np.asarray(gaps, dtype=float)
    peak_db = np.asarray(peak_db, dtype=float)
    if len(gaps) != len(peak_db):
        raise ValueError("gaps and peak_db must have the same length")
    if len(gaps) < 2 or np.ptp(gaps) == 0.0:
        raise ValueError("rank deficiency: need at least 2 distinct gaps")
    x = gaps * 1e3  # mm
    if errs is not None:
        errs = np.asarray(errs, dtype=float)
        if np.any(errs <= 0):
            raise ValueError("error bars must be > 0")
        w = 1.0 / errs**2
    else:
        w = np.ones_like(x)
    sw = w.sum()
    sx = (w * x).sum()
    sxx = (w * x * x).sum()
    sy = (w * peak_db).sum()
    sxy = (w * x * peak_db).sum()
    det = sw * sxx - sx * sx
    if det <= 0:
        raise ValueError("rank deficiency: need at least 2 distinct gaps")
    slope = (sw * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    var_slope = sw / det
    var_intercept = sxx / det
    resid = peak_db - (slope * x + intercept)
    if errs is None and len(x) > 2:
        s2 = float((w * resid**2).sum() / (len(x) - 2))
        var_slope *= s2
        var_intercept *= s2
    params = {"slope_db_per_mm": float(slope), "intercept_db": float(intercept)}
    sigma = {"slope_db_per_mm": float(np.sqrt(var_slope)),
             "intercept_db": float(np.sqrt(var_intercept))}
    return FitResult(params, sigma, float(np.sqrt((w * resid**2).sum())), True, 1,
                     model="loss_per_length")


def compare_slopes(a: FitResult, b: FitResult, k: float = 2.0) -> dict:
    """Whether two loss-per-length slopes agree within k combined sigma."""
    diff = a.params["slope_db_per_mm"] - b.params["slope_db_per_mm"]
    sigma = float(np.hypot(a.uncertainties["slope_db_per_mm"],
                           b.uncertainties["slope_db_per_mm"]))
    z = abs(diff) / sigma if sigma > 0 else np.inf
    return {"slope_diff_db_per_mm": float(diff), "sigma_diff": sigma,
            "z": float(z), "k": float(k), "agree": bool(z <= k)}


# ---------------------------------------------------------------------------
# Stark-slope recovery from PL maps

def track_peak_centers(m: PLMap, window: float | None = None) -> np.ndarray:
    """Per-row carrier position: intensity centroid in a window around the
    row maximum. Dark rows give NaN.

    The window defaults to one drive period when the map records a drive
    (isolating the carrier from its sidebands), else to several filter
    widths: an asymmetric full-scan window would drag the centroid through
    the Lorentzian tails."""
    if window is None:
        drive = m.meta.extra.get("drive_frequency")
        fwhm = m.meta.extra.get("filter_fwhm")
        if drive:
            window = float(drive)
        elif fwhm:
            window = 8.0 * float(fwhm)
        else:
            window = np.inf
    # noise floor from the whole map (lines fill a small pixel fraction, so
    # the MAD tracks the additive noise); rows not clearing it are dark
    med = float(np.median(m.counts))
    sigma_floor = 1.4826 * float(np.median(np.abs(m.counts - med)))
    threshold = med + 6.0 * sigma_floor
    centers = np.full(len(m.bias), np.nan)
    for i in range(len(m.bias)):
        row = m.counts[i]
        if not np.any(row > threshold) or not np.any(row > 0):
            continue
        j = int(np.argmax(row))
        sel = np.abs(m.frequency - m.frequency[j]) <= window / 2.0
        weights = np.clip(row[sel], 0.0, None)
        total = weights.sum()
        if total <= 0:
            continue
        centers[i] = float((m.frequency[sel] * weights).sum() / total)
    return centers


def fit_stark_slope(m: PLMap, window: float | None = None) -> dict[int, FitResult]:
    """Per-plateau linear regression of tracked peak position vs bias.

    Rows are partitioned by plateau; no regression crosses a plateau
    boundary. Plateaus with fewer than 3 usable rows are returned with
    converged=False and a 'skipped' note. Slopes are in Hz per volt.
    """
    centers = track_peak_centers(m, window)
    results: dict[int, FitResult] = {}
    for plateau in sorted(set(int(i) for i in m.plateau_index if i >= 0)):
        sel = (m.plateau_index == plateau) & np.isfinite(centers)
        n = int(sel.sum())
        if n < 3:
            results[plateau] = FitResult(
                {"slope_hz_per_v": 0.0, "intercept_hz": 0.0},
                {"slope_hz_per_v": 0.0, "intercept_hz": 0.0},
                0.0, False, 0, model="stark_slope",
                notes=(f"skipped: only {n} usable rows in plateau {plateau}",))
            continue
        vb = m.bias[sel]
        fc = centers[sel]
        coeffs, cov = np.polyfit(vb, fc, 1, cov=True)
        slope, intercept = float(coeffs[0]), float(coeffs[1])
        resid = fc - (slope * vb + intercept)
        results[plateau] = FitResult(
            {"slope_hz_per_v": slope, "intercept_hz": intercept},
            {"slope_hz_per_v": float(np.sqrt(max(cov[0, 0], 0.0))),
             "intercept_hz": float(np.sqrt(max(cov[1, 1], 0.0)))},
            float(np.sqrt(np.sum(resid**2))), True, 1, model="stark_slope")
    return results


def detect_plateau_edges(m: PLMap) -> list[float]:
    """Bias values where the emission jumps: dark/bright changes or sudden
    shifts of the tracked peak far beyond the within-plateau drift."""
    centers = track_peak_centers(m)
    bright = np.isfinite(centers)
    edges: list[float] = []
    steps = []
    for i in range(len(m.bias) - 1):
        if bright[i] and bright[i + 1]:
            steps.append(abs(centers[i + 1] - centers[i]))
    typical = float(np.median(steps)) if steps else 0.0
    df = float(np.median(np.diff(m.frequency)))
    threshold = max(10.0 * typical, 4.0 * df)
    for i in range(len(m.bias) - 1):
        mid = 0.5 * (m.bias[i] + m.bias[i + 1])
        if bright[i] != bright[i + 1]:
            edges.append(mid)
        elif bright[i] and abs(centers[i + 1] - centers[i]) > threshold:
            edges.append(mid)
    return edges
