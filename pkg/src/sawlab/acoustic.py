"""Frequency-domain models of IDTs, Bragg mirrors, delay lines and one-port
SAW resonators.

Sign conventions: one-port reflection is normalized so |S11| -> 1 far from
resonance (dip-down spectra). Electrical crosstalk is a frequency-constant
complex phasor added to S11/S21; its interference with the acoustic signal
produces the ripple seen in transmission traces.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from math import pi, sqrt

import numpy as np

from .core import MaterialParams


@dataclass(frozen=True)
class IdtSpec:
    """Interdigitated transducer: sinc-envelope (delta-function) model.

    peak_conversion is the on-resonance voltage-to-SAW amplitude conversion;
    k2 is the effective coupling constant used when comparing substrates
    (conversion amplitude scales as sqrt(k2)).
    """

    center_frequency: float
    n_pairs: int
    peak_conversion: float
    k2: float = 7.0e-4

    def __post_init__(self) -> None:
        if not self.center_frequency > 0:
            raise ValueError(f"center_frequency must be > 0, got {self.center_frequency}")
        if self.n_pairs < 1:
            raise ValueError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if not 0 < self.peak_conversion <= 1:
            raise ValueError(f"peak_conversion must be in (0, 1], got {self.peak_conversion}")
        if not 0 < self.k2 < 1:
            raise ValueError(f"k2 must be in (0, 1), got {self.k2}")


@dataclass(frozen=True)
class MirrorSpec:
    """Etched-groove Bragg mirror with per-line reflectivity |r_s| << 1."""

    n_lines: int
    reflectivity_per_line: float
    stopband_center: float
    stopband_width: float

    def __post_init__(self) -> None:
        if self.n_lines < 1:
            raise ValueError(f"n_lines must be >= 1, got {self.n_lines}")
        if not 0 < self.reflectivity_per_line < 1:
            raise ValueError(
                f"reflectivity_per_line must be in (0, 1), got {self.reflectivity_per_line}")
        if not self.stopband_center > 0:
            raise ValueError(f"stopband_center must be > 0, got {self.stopband_center}")
        if not self.stopband_width > 0:
            raise ValueError(f"stopband_width must be > 0, got {self.stopband_width}")


@dataclass(frozen=True)
class ResonatorParams:
    """One-port SAW resonator: mode frequency, loss rates, crosstalk.

    kappa_int and kappa_ext are full-width (FWHM) linewidth contributions in
    Hz; kappa_int + kappa_ext is the loaded linewidth.
    """

    f0: float
    kappa_int: float
    kappa_ext: float
    crosstalk: complex = 0j

    def __post_init__(self) -> None:
        if not self.f0 > 0:
            raise ValueError(f"f0 must be > 0, got {self.f0}")
        if not self.kappa_int > 0:
            raise ValueError(f"kappa_int must be > 0, got {self.kappa_int}")
        if self.kappa_ext < 0:
            raise ValueError(f"kappa_ext must be >= 0, got {self.kappa_ext}")

    @property
    def kappa_tot(self) -> float:
        return self.kappa_int + self.kappa_ext


@dataclass(frozen=True)
class DelayLineSpec:
    """Two IDTs facing each other across a free-propagation gap."""

    idt_a: IdtSpec
    idt_b: IdtSpec
    gap: float
    loss_per_length: float = 0.0
    crosstalk: complex = 0j

    def __post_init__(self) -> None:
        if not self.gap > 0:
            raise ValueError(f"gap must be > 0, got {self.gap}")
        if self.loss_per_length < 0:
            raise ValueError(f"loss_per_length must be >= 0, got {self.loss_per_length}")


def _sinc(x: np.ndarray) -> np.ndarray:
    # sin(x)/x with sinc(0) = 1; np.sinc is normalized to pi, so rescale
    return np.sinc(x / pi)


def idt_response(f: np.ndarray | float, s: IdtSpec) -> np.ndarray | complex:
    """Complex conversion amplitude of the transducer at frequency f [Hz].

    Magnitude is peak_conversion * sinc(n_pairs * pi * (f - f0) / f0); the
    phase is linear in f with the transducer crossing delay n_pairs / f0.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("frequency must be > 0")
    detune = (f_arr - s.center_frequency) / s.center_frequency
    mag = s.peak_conversion * _sinc(s.n_pairs * pi * detune)
    delay = s.n_pairs / s.center_frequency
    out = mag * np.exp(-2j * pi * f_arr * delay)
    return out if np.ndim(f) else complex(out)


def mirror_reflectivity(f: np.ndarray | float, s: MirrorSpec) -> np.ndarray | complex:
    """Complex reflection coefficient of the Bragg mirror.

    In-band magnitude tanh(n_lines * r_s), raised-cosine rolloff over one
    stopband-width beyond the band edge, zero far outside. The rolloff shape
    is cosmetic; only the in-band value enters resonator loss budgets.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("frequency must be > 0")
    peak = np.tanh(s.n_lines * s.reflectivity_per_line)
    half = s.stopband_width / 2.0
    edge = s.stopband_width / 2.0  # taper length beyond the band edge
    d = np.abs(f_arr - s.stopband_center)
    envelope = np.where(
        d <= half,
        1.0,
        np.where(d >= half + edge, 0.0, 0.5 * (1.0 + np.cos(pi * (d - half) / edge))),
    )
    out = (peak * envelope).astype(complex)
    return out if np.ndim(f) else complex(out)


def s11_resonator(f: np.ndarray | float, p: ResonatorParams) -> np.ndarray | complex:
    """One-port reflection S11(f) = 1 - kappa_ext / (i(f - f0) + kappa_tot/2) + crosstalk."""
    f_arr = np.asarray(f, dtype=float)
    denom = 1j * (f_arr - p.f0) + 0.5 * p.kappa_tot
    out = 1.0 - p.kappa_ext / denom + p.crosstalk
    return out if np.ndim(f) else complex(out)


def s21_delay_line(f: np.ndarray | float, d: DelayLineSpec,
                   m: MaterialParams | None = None) -> np.ndarray | complex:
    """Transmission through the delay line.

    S21 = A_a(f) * A_b(f) * exp(-loss_per_length * gap) * exp(i 2 pi f gap / v)
          + crosstalk

    The acoustic term and the constant crosstalk phasor interfere, producing
    ripple with period v/gap in frequency. loss_per_length is an amplitude
    attenuation coefficient [1/m].
    """
    if m is None:
        m = MaterialParams()
    f_arr = np.asarray(f, dtype=float)
    acoustic = (
        idt_response(f_arr, d.idt_a)
        * idt_response(f_arr, d.idt_b)
        * np.exp(-d.loss_per_length * d.gap)
        * np.exp(2j * pi * f_arr * d.gap / m.saw_velocity)
    )
    out = acoustic + d.crosstalk
    return out if np.ndim(f) else complex(out)


def q_factors(p: ResonatorParams) -> dict[str, float]:
    """Internal, external and loaded quality factors of the resonator."""
    q_int = p.f0 / p.kappa_int
    q_ext = p.f0 / p.kappa_ext if p.kappa_ext > 0 else float("inf")
    q_loaded = p.f0 / p.kappa_tot
    return {"q_int": q_int, "q_ext": q_ext, "q_loaded": q_loaded}


def total_propagation_loss(contributions: list[float] | tuple[float, ...]) -> float:
    """Sum of per-length amplitude loss terms [1/m]."""
    total = 0.0
    for c in contributions:
        if c < 0:
            raise ValueError(f"loss contributions must be >= 0, got {c}")
        total += c
    return total


def rate_to_loss_per_length(rate_hz: float, m: MaterialParams) -> float:
    """Convert a temporal loss rate [Hz] to a per-length coefficient [1/m]."""
    if rate_hz < 0:
        raise ValueError(f"rate must be >= 0, got {rate_hz}")
    return rate_hz / m.saw_velocity


def scale_conversion_for_coupling(s: IdtSpec, k2: float) -> IdtSpec:
    """Rescale an IDT's conversion for a different effective coupling.

    Conversion amplitude goes as sqrt(k2), so the new peak conversion is
    peak * sqrt(k2 / s.k2).
    """
    if not 0 < k2 < 1:
        raise ValueError(f"k2 must be in (0, 1), got {k2}")
    return replace(s, peak_conversion=s.peak_conversion * sqrt(k2 / s.k2), k2=k2)
