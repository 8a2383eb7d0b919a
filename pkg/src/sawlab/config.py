"""Device description loading from a single TOML config file.

Every entry point takes one config path; sections and keys are documented in
the shipped data/reference.toml (which also carries the calibrated defaults).
Validation failures raise ConfigError with the offending file line where it
can be located in the source text.

Unit conventions in config keys are explicit suffixes: _hz, _nm, _um, _v,
_m_per_s, _s_per_m, _per_m, _ohm.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import acoustic, layer as layer_mod
from .acoustic import DelayLineSpec, IdtSpec, MirrorSpec, ResonatorParams
from .core import ConfigError, LayerStack, MaterialParams
from .layer import K2Calibration, RelaxationCoeffs
from .qd import EmitterState, FilterSpec, ModulationDrive, Plateau


@dataclass(frozen=True)
class DeviceConfig:
    """Typed bundle of everything a command needs, built from one file."""

    material: MaterialParams
    stack: LayerStack
    k2_cal: K2Calibration
    relaxation: RelaxationCoeffs
    resonator: ResonatorParams
    acoustic_mode: ResonatorParams
    idt: IdtSpec
    mirror: MirrorSpec
    delay_line: DelayLineSpec
    emitter: EmitterState
    drive: ModulationDrive
    filter: FilterSpec
    spectrometer: FilterSpec
    cpw_z_line: float
    cpw_z_ref: float
    path: str


class _Loader:
    def __init__(self, data: dict, text: str, path: str):
        self.data = data
        self.lines = text.splitlines()
        self.path = path

    def _line_of(self, section: str, key: str | None) -> str:
        """Best-effort source location 'path:line' for an error message."""
        sec_re = re.compile(r"^\s*\[+" + re.escape(section) + r"[\].]")
        start = None
        for i, ln in enumerate(self.lines):
            if sec_re.match(ln):
                start = i
                break
        if start is None:
            return self.path
        if key is None:
            return f"{self.path}:{start + 1}"
        key_re = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        for i in range(start + 1, len(self.lines)):
            if re.match(r"^\s*\[", self.lines[i]):
                break
            if key_re.match(self.lines[i]):
                return f"{self.path}:{i + 1}"
        return f"{self.path}:{start + 1}"

    def err(self, section: str, key: str | None, message: str) -> ConfigError:
        where = self._line_of(section, key)
        item = f"[{section}]" + (f" {key}" if key else "")
        return ConfigError(f"{where}: {item}: {message}")

    def section(self, name: str) -> dict:
        sec = self.data.get(name, {})
        if not isinstance(sec, dict):
            raise self.err(name, None, "expected a table")
        return sec

    def number(self, section: str, key: str, default: float | None = None,
               minimum: float | None = None, strict_min: float | None = None) -> float:
        sec = self.section(section)
        if key not in sec:
            if default is None:
                raise self.err(section, key, "required key missing")
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.err(section, key, f"expected a number, got {type(v).__name__}")
        v = float(v)
        if minimum is not None and v < minimum:
            raise self.err(section, key, f"must be >= {minimum:g}, got {v:g}")
        if strict_min is not None and v <= strict_min:
            raise self.err(section, key, f"must be > {strict_min:g}, got {v:g}")
        return v

    def integer(self, section: str, key: str, default: int | None = None,
                minimum: int | None = None) -> int:
        sec = self.section(section)
        if key not in sec:
            if default is None:
                raise self.err(section, key, "required key missing")
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise self.err(section, key, f"expected an integer, got {type(v).__name__}")
        if minimum is not None and v < minimum:
            raise self.err(section, key, f"must be >= {minimum}, got {v}")
        return v

    def boolean(self, section: str, key: str, default: bool) -> bool:
        sec = self.section(section)
        if key not in sec:
            return default
        v = sec[key]
        if not isinstance(v, bool):
            raise self.err(section, key, f"expected a boolean, got {type(v).__name__}")
        return v


def default_config_path() -> Path:
    """The calibrated reference-device config shipped with the package."""
    return Path(resources.files("sawlab").joinpath("data/reference.toml"))


def load_config(path: str | Path) -> DeviceConfig:
    """Load and validate a device config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    ld = _Loader(data, text, str(path))

    def build(factory, section, /, **kwargs):
        try:
            return factory(**kwargs)
        except (ValueError, ConfigError) as exc:
            raise ld.err(section, None, str(exc)) from exc

    material = build(
        MaterialParams, "material",
        saw_velocity=ld.number("material", "saw_velocity_m_per_s", 2864.0, strict_min=0.0),
        k2_bulk=ld.number("material", "k2_bulk", 7.0e-4, strict_min=0.0),
        sigma_m=ld.number("material", "sigma_m_s_per_m", 10.0, strict_min=0.0),
    )
    stack = build(
        LayerStack, "layer",
        depth=ld.number("layer", "depth_nm", 360.0, minimum=0.0) * 1e-9,
        thickness=ld.number("layer", "thickness_nm", 47.0, strict_min=0.0) * 1e-9,
        sigma_xx=ld.number("layer", "sigma_xx_s_per_m", 1.0e5, minimum=0.0),
    )

    anchors_raw = ld.section("k2_calibration").get("anchors")
    if anchors_raw is None:
        k2_cal = layer_mod.default_k2_calibration(material)
    else:
        if not isinstance(anchors_raw, list) or not anchors_raw:
            raise ld.err("k2_calibration", "anchors", "expected a non-empty array of tables")
        pairs = []
        for i, entry in enumerate(anchors_raw):
            if not isinstance(entry, dict) or "depth_nm" not in entry or "k2" not in entry:
                raise ld.err("k2_calibration", "anchors",
                             f"entry {i}: expected {{depth_nm = ..., k2 = ...}}")
            pairs.append((float(entry["depth_nm"]) * 1e-9, float(entry["k2"])))
        k2_cal = build(K2Calibration, "k2_calibration",
                       anchors=tuple(pairs), k2_bulk=material.k2_bulk)

    relaxation = layer_mod.relaxation_for_stack(stack, material, k2_cal)

    resonator = build(
        ResonatorParams, "resonator",
        f0=ld.number("resonator", "f0_hz", 3.5e9, strict_min=0.0),
        kappa_int=ld.number("resonator", "kappa_int_hz", 125.0e3, strict_min=0.0),
        kappa_ext=ld.number("resonator", "kappa_ext_hz", 125.0e3, minimum=0.0),
        crosstalk=complex(ld.number("resonator", "crosstalk_re", 0.0),
                          ld.number("resonator", "crosstalk_im", 0.0)),
    )
    acoustic_mode = build(
        ResonatorParams, "acoustic_mode",
        f0=ld.number("acoustic_mode", "f0_hz", 3.53388e9, strict_min=0.0),
        kappa_int=ld.number("acoustic_mode", "kappa_tot_hz", 232.0e3, strict_min=0.0),
        kappa_ext=0.0,
    )

    k2_eff = layer_mod.k2_effective(stack.depth, k2_cal)
    idt = build(
        IdtSpec, "idt",
        center_frequency=ld.number("idt", "center_frequency_hz", 3.5e9, strict_min=0.0),
        n_pairs=ld.integer("idt", "n_pairs", 80, minimum=1),
        peak_conversion=ld.number("idt", "peak_conversion", 0.35, strict_min=0.0),
        k2=k2_eff,
    )
    mirror = build(
        MirrorSpec, "mirror",
        n_lines=ld.integer("mirror", "n_lines", 300, minimum=1),
        reflectivity_per_line=ld.number("mirror", "reflectivity_per_line", 0.01,
                                        strict_min=0.0),
        stopband_center=ld.number("mirror", "stopband_center_hz", 3.5e9, strict_min=0.0),
        stopband_width=ld.number("mirror", "stopband_width_hz", 60.0e6, strict_min=0.0),
    )

    extra_loss = ld.number("delay_line", "extra_loss_per_m", 0.0, minimum=0.0)
    contributions = [extra_loss]
    if ld.boolean("delay_line", "include_layer_loss", True):
        rate = layer_mod.attenuation_rate_hz(stack.sigma_xx, relaxation,
                                             idt.center_frequency)
        contributions.append(acoustic.rate_to_loss_per_length(rate, material))
    delay_line = build(
        DelayLineSpec, "delay_line",
        idt_a=idt, idt_b=idt,
        gap=ld.number("delay_line", "gap_um", 400.0, strict_min=0.0) * 1e-6,
        loss_per_length=acoustic.total_propagation_loss(contributions),
        crosstalk=complex(ld.number("delay_line", "crosstalk_re", 0.0),
                          ld.number("delay_line", "crosstalk_im", 0.0)),
    )

    plateaus_raw = ld.section("emitter").get("plateaus", [])
    if not isinstance(plateaus_raw, list):
        raise ld.err("emitter", "plateaus", "expected an array of tables")
    plateaus = []
    for i, entry in enumerate(plateaus_raw):
        if not isinstance(entry, dict) or not {"v_min_v", "v_max_v", "offset_hz"} <= set(entry):
            raise ld.err("emitter", "plateaus",
                         f"entry {i}: expected {{v_min_v, v_max_v, offset_hz}}")
        plateaus.append(build(Plateau, "emitter",
                              v_min=float(entry["v_min_v"]),
                              v_max=float(entry["v_max_v"]),
                              frequency_offset=float(entry["offset_hz"])))
    emitter = build(
        EmitterState, "emitter",
        base_frequency=ld.number("emitter", "base_frequency_hz", 0.0, minimum=None),
        linewidth_fwhm=ld.number("emitter", "linewidth_fwhm_hz", 643.6e6, strict_min=0.0),
        stark_slope=ld.number("emitter", "stark_slope_hz_per_v", 1.3e11),
        plateaus=tuple(plateaus),
        brightness=ld.number("emitter", "brightness", 1000.0, minimum=0.0),
    )

    drive = build(
        ModulationDrive, "drive",
        drive_frequency=ld.number("drive", "drive_frequency_hz", acoustic_mode.f0,
                                  strict_min=0.0),
        mode=acoustic_mode,
        delta_max=ld.number("drive", "delta_max", 1.0, minimum=0.0),
    )

    def _filter(section: str, fwhm: float, lo: float, hi: float, n: int) -> FilterSpec:
        return build(
            FilterSpec, section,
            fwhm=ld.number(section, "fwhm_hz", fwhm, strict_min=0.0),
            scan_range=(ld.number(section, "scan_min_hz", lo),
                        ld.number(section, "scan_max_hz", hi)),
            n_points=ld.integer(section, "n_points", n, minimum=2),
        )

    filt = _filter("filter", 600.0e6, -30.0e9, 30.0e9, 1201)
    spectrometer = _filter("spectrometer", 5.0e9, -80.0e9, 80.0e9, 641)

    return DeviceConfig(
        material=material, stack=stack, k2_cal=k2_cal, relaxation=relaxation,
        resonator=resonator, acoustic_mode=acoustic_mode, idt=idt, mirror=mirror,
        delay_line=delay_line, emitter=emitter, drive=drive, filter=filt,
        spectrometer=spectrometer,
        cpw_z_line=ld.number("cpw", "z_line_ohm", 35.0, strict_min=0.0),
        cpw_z_ref=ld.number("cpw", "z_ref_ohm", 50.0, strict_min=0.0),
        path=str(path),
    )
