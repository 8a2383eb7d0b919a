"""Command-line front end: wires configs to the forward models, runs sweeps
and fits, and emits plot-ready CSV/JSON.

    sawlab <subcommand> --config <path> [--out <dir>] [--seed <int>] [flags]

The default output directory comes from SAWLAB_OUT (falling back to the
working directory). Every run writes a manifest.json listing the files it
produced. With a fixed seed and config, all data files are byte-identical
across runs; the manifest differs only in its timestamp.

Exit codes: 0 success, 1 model/fit failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import acoustic, estimate, layer, qd, traceio
from .config import DeviceConfig, default_config_path, load_config
from .core import ConfigError, FitError, SawlabError, Trace, TraceMeta

REPRODUCE_IDS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3c", "fig3d",
                 "figS2a", "figS2b")


@dataclass
class RunManifest:
    command: str
    config_path: str
    seed: int
    tool_version: str
    timestamp: str
    outputs: list[str]

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        obj = {
            "command": self.command, "config_path": self.config_path,
            "seed": self.seed, "tool_version": self.tool_version,
            "timestamp": self.timestamp, "outputs": sorted(self.outputs),
        }
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", newline="\n")
        return path


class _Run:
    """Collects output files for the manifest as they are written."""

    def __init__(self, command: str, config_path: str, seed: int, out_dir: Path):
        self.out_dir = out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(
            command=command, config_path=config_path, seed=seed,
            tool_version=__version__,
            timestamp=datetime.now(timezone.utc).isoformat(),
            outputs=[],
        )

    def path(self, name: str) -> Path:
        self.manifest.outputs.append(name)
        return self.out_dir / name

    def write_text(self, name: str, text: str) -> None:
        self.path(name).write_text(text, newline="\n")

    def write_json(self, name: str, obj) -> None:
        self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def finish(self) -> None:
        self.manifest.write(self.out_dir)
        for name in sorted(self.manifest.outputs):
            print(f"wrote {self.out_dir / name}")
        print(f"wrote {self.out_dir / 'manifest.json'}")


def _fmt(v: float) -> str:
    return repr(float(v))


def _noise_scale(snr_db: float, signal_scale: float = 1.0) -> float:
    if np.isinf(snr_db):
        return 0.0
    return signal_scale / 10.0 ** (snr_db / 20.0)


# ---------------------------------------------------------------------------
# layer-sweep

def cmd_layer_sweep(cfg: DeviceConfig, run: _Run, args) -> int:
    if args.sigma_min <= 0 or args.sigma_max <= args.sigma_min:
        raise ConfigError("sigma sweep requires 0 < sigma-min < sigma-max")
    f = cfg.idt.center_frequency
    sigmas = np.logspace(np.log10(args.sigma_min), np.log10(args.sigma_max), args.n_points)
    lines = ["sigma_S_per_m,dv_over_v,kappa_over_q,loss_hz,regime"]
    for s in sigmas:
        dv = layer.velocity_shift_fraction(s, cfg.relaxation)
        kq = layer.attenuation_per_wavevector(s, cfg.relaxation)
        rate = layer.attenuation_rate_hz(s, cfg.relaxation, f)
        regime = layer.regime_classify(s, cfg.relaxation).value
        lines.append(f"{_fmt(s)},{_fmt(dv)},{_fmt(kq)},{_fmt(rate)},{regime}")
    run.write_text("sigma_sweep.csv", "\n".join(lines) + "\n")

    depths = np.logspace(np.log10(args.depth_min_nm), np.log10(args.depth_max_nm),
                         args.n_depth)
    depths = np.unique(np.concatenate([depths, [d * 1e9 for d, _ in cfg.k2_cal.anchors]]))
    depths = depths[(depths >= args.depth_min_nm) & (depths <= args.depth_max_nm)]
    lines = ["depth_nm,k2"]
    for d in depths:
        lines.append(f"{_fmt(d)},{_fmt(layer.k2_effective(d * 1e-9, cfg.k2_cal))}")
    run.write_text("depth_sweep.csv", "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# delay-line

def _delay_line_band(cfg: DeviceConfig, n_points: int) -> np.ndarray:
    f0 = cfg.idt.center_frequency
    half = 2.5 * f0 / cfg.idt.n_pairs
    return np.linspace(f0 - half, f0 + half, n_points)


def _bulk_variant(cfg: DeviceConfig) -> DeviceConfig:
    """Same device on an insulating substrate: bulk coupling, no layer loss."""
    idt_bulk = acoustic.scale_conversion_for_coupling(cfg.idt, cfg.material.k2_bulk)
    rate = layer.attenuation_rate_hz(cfg.stack.sigma_xx, cfg.relaxation,
                                     cfg.idt.center_frequency)
    layer_loss = acoustic.rate_to_loss_per_length(rate, cfg.material)
    dl = replace(cfg.delay_line, idt_a=idt_bulk, idt_b=idt_bulk,
                 loss_per_length=max(cfg.delay_line.loss_per_length - layer_loss, 0.0))
    return replace(cfg, idt=idt_bulk, delay_line=dl)


def _delay_line_peaks(cfg: DeviceConfig, gaps_m: list[float], n_points: int):
    """Peak |S21| in dB per gap plus the crosstalk-ripple error bar."""
    f = _delay_line_band(cfg, n_points)
    rows = []
    for gap in gaps_m:
        dl = replace(cfg.delay_line, gap=gap)
        s21 = acoustic.s21_delay_line(f, dl, cfg.material)
        peak = float(np.max(np.abs(s21)))
        amp = (dl.idt_a.peak_conversion * dl.idt_b.peak_conversion
               * np.exp(-dl.loss_per_length * gap))
        xt = abs(dl.crosstalk)
        hi = 20.0 * np.log10(amp + xt)
        lo = 20.0 * np.log10(max(amp - xt, 1e-12))
        rows.append((gap, 20.0 * np.log10(peak), (hi - lo) / 2.0))
    return rows


def cmd_delay_line(cfg: DeviceConfig, run: _Run, args) -> int:
    gaps_m = [g * 1e-6 for g in args.gaps_um]
    if not gaps_m:
        raise ConfigError("at least one gap is required")
    f = _delay_line_band(cfg, args.n_points)
    for gap in gaps_m:
        dl = replace(cfg.delay_line, gap=gap)
        s21 = acoustic.s21_delay_line(f, dl, cfg.material)
        t = Trace(f, s21, meta=TraceMeta(x_label="frequency", x_unit="Hz",
                                         y_label="S21", provenance=run.manifest.command))
        traceio.write_sparam_csv(t, run.path(f"s21_gap{gap * 1e6:.0f}um.csv"))

    rows = _delay_line_peaks(cfg, gaps_m, args.n_points)
    lines = ["gap_um,peak_db,err_db"]
    for gap, db, err in rows:
        lines.append(f"{_fmt(gap * 1e6)},{_fmt(db)},{_fmt(err)}")
    run.write_text("peaks.csv", "\n".join(lines) + "\n")

    if args.fit or args.compare:
        gaps = np.array([r[0] for r in rows])
        dbs = np.array([r[1] for r in rows])
        errs = np.array([max(r[2], 1e-6) for r in rows])
        fit = estimate.fit_loss_per_length(gaps, dbs, errs)
        traceio.write_fit_report(fit, run.path("loss_fit.json"))
        if args.compare:
            other = load_config(args.compare)
            rows_b = _delay_line_peaks(other, gaps_m, args.n_points)
            dbs_b = np.array([r[1] for r in rows_b])
            errs_b = np.array([max(r[2], 1e-6) for r in rows_b])
            fit_b = estimate.fit_loss_per_length(gaps, dbs_b, errs_b)
            verdict = estimate.compare_slopes(fit, fit_b, k=2.0)
            verdict["mc_pass_fraction"] = _slope_agreement_mc(
                gaps, dbs, errs, dbs_b, errs_b, seed=run.manifest.seed)
            run.write_json("comparison.json", verdict)
    return 0


def _slope_agreement_mc(gaps, dbs_a, errs_a, dbs_b, errs_b, seed: int,
                        n_trials: int = 1000, k: float = 2.0) -> float:
    """Fraction of noisy redraws in which the two slopes agree at k sigma."""
    passes = 0
    for trial in range(n_trials):
        rng = estimate.rng_for(seed, trial)
        ya = dbs_a + rng.normal(0.0, errs_a)
        yb = dbs_b + rng.normal(0.0, errs_b)
        fa = estimate.fit_loss_per_length(gaps, ya, errs_a)
        fb = estimate.fit_loss_per_length(gaps, yb, errs_b)
        if estimate.compare_slopes(fa, fb, k)["agree"]:
            passes += 1
    return passes / n_trials


# ---------------------------------------------------------------------------
# resonator

def cmd_resonator(cfg: DeviceConfig, run: _Run, args) -> int:
    p = cfg.resonator
    half = args.span_linewidths * p.kappa_tot / 2.0
    f = np.linspace(p.f0 - half, p.f0 + half, args.n_points)
    s11 = acoustic.s11_resonator(f, p)
    t = Trace(f, s11, meta=TraceMeta(x_label="frequency", x_unit="Hz", y_label="S11"))
    noisy = estimate.synthesize(t, estimate.NoiseSpec(
        "gaussian_additive", _noise_scale(args.snr_db), run.manifest.seed))
    traceio.write_sparam_csv(noisy, run.path("s11.csv"))
    fit = estimate.fit_s11(noisy)
    traceio.write_fit_report(fit, run.path("fit.json"))
    qs = acoustic.q_factors(acoustic.ResonatorParams(
        f0=fit.params["f0"], kappa_int=fit.params["kappa_int"],
        kappa_ext=fit.params["kappa_ext"]))
    print(f"{'':>10}  {'value':>14}  {'sigma':>12}")
    print(f"{'q_int':>10}  {qs['q_int']:>14.1f}  {fit.uncertainties['q_int']:>12.1f}")
    print(f"{'q_ext':>10}  {qs['q_ext']:>14.1f}")
    print(f"{'q_loaded':>10}  {qs['q_loaded']:>14.1f}")
    if not fit.converged:
        raise FitError("resonator fit did not converge; best-so-far written to fit.json")
    return 0


# ---------------------------------------------------------------------------
# qd-spectrum

def _check_drive_band(cfg: DeviceConfig, drive_freq: float) -> None:
    mode = cfg.acoustic_mode
    band = 500.0 * mode.kappa_tot
    if abs(drive_freq - mode.f0) > band:
        raise ConfigError(
            f"drive frequency {drive_freq:g} Hz outside the simulated band "
            f"{mode.f0:g} +/- {band:g} Hz around the acoustic mode")


def _single_spectrum(cfg: DeviceConfig, run: _Run, args, drive, filt) -> int:
    bias = args.bias
    center = qd.emission_frequency(bias, cfg.emitter)
    if center is None:
        print(f"warning: bias {bias:g} V lies between charge plateaus; "
              "emitter is dark and the spectrum is all zeros", file=sys.stderr)
        t = Trace(filt.grid(), np.zeros(filt.n_points),
                  meta=TraceMeta(x_label="frequency", x_unit="Hz", y_label="counts"))
    else:
        delta = qd.modulation_index(drive) if drive is not None else 0.0
        omega = drive.drive_frequency if drive is not None else max(cfg.emitter.linewidth_fwhm, 1.0)
        ideal = qd.sideband_spectrum(center, cfg.emitter.linewidth_fwhm, delta, omega,
                                     n_max=4, brightness=cfg.emitter.brightness)
        t = qd.filtered_spectrum(ideal, filt)
        t = estimate.synthesize(t, estimate.NoiseSpec(
            "gaussian_additive", _noise_scale(args.snr_db, float(t.y.max())),
            run.manifest.seed))
    traceio.write_trace_csv(t, run.path("spectrum.csv"))
    if drive is not None and center is not None:
        fit = estimate.extract_modulation_index(
            t, drive.drive_frequency, filt, cfg.emitter.linewidth_fwhm)
        traceio.write_fit_report(fit, run.path("delta_fit.json"))
    return 0


def _bias_map(cfg: DeviceConfig, run: _Run, args, drive, filt) -> int:
    bias_grid = np.arange(args.bias_min, args.bias_max + 0.5 * args.bias_step,
                          args.bias_step)
    m = qd.pl_bias_map(bias_grid, cfg.emitter, drive, filt)
    noisy = estimate.synthesize_map(m, estimate.NoiseSpec(
        "gaussian_additive", _noise_scale(args.snr_db, float(m.counts.max() or 1.0)),
        run.manifest.seed))
    traceio.write_map_csv(noisy, run.path("map.csv"))
    annotations = {
        "plateaus": [
            {"v_min_v": p.v_min, "v_max_v": p.v_max, "offset_hz": p.frequency_offset}
            for p in cfg.emitter.plateaus
        ],
        "detected_edges_v": estimate.detect_plateau_edges(noisy),
    }
    run.write_json("plateaus.json", annotations)
    if drive is not None:
        slopes = estimate.fit_stark_slope(noisy)
        run.write_json("stark_fit.json",
                       {str(k): v.to_report() for k, v in slopes.items()})
    return 0


def _sweep_drive(cfg: DeviceConfig, run: _Run, args, filt) -> int:
    mode = cfg.acoustic_mode
    half = 3.0 * mode.kappa_tot
    freqs = np.linspace(mode.f0 - half, mode.f0 + half, args.sweep_points)
    center = qd.emission_frequency(args.bias, cfg.emitter)
    if center is None:
        raise ConfigError(f"bias {args.bias:g} V lies between charge plateaus")
    lines = ["drive_hz,delta,delta_sq"]
    deltas = []
    for i, fd in enumerate(freqs):
        drive = replace(cfg.drive, drive_frequency=float(fd))
        delta_true = qd.modulation_index(drive)
        ideal = qd.sideband_spectrum(center, cfg.emitter.linewidth_fwhm, float(delta_true),
                                     float(fd), n_max=4, brightness=cfg.emitter.brightness)
        t = qd.filtered_spectrum(ideal, filt)
        noisy = estimate.synthesize(t, estimate.NoiseSpec(
            "gaussian_additive", _noise_scale(args.snr_db, float(t.y.max())),
            int(np.random.SeedSequence((run.manifest.seed, i)).generate_state(1)[0])))
        fit = estimate.extract_modulation_index(noisy, float(fd), filt,
                                                cfg.emitter.linewidth_fwhm)
        deltas.append(fit.params["delta"])
        lines.append(f"{_fmt(fd)},{_fmt(fit.params['delta'])},{_fmt(fit.params['delta'] ** 2)}")
    run.write_text("delta_sweep.csv", "\n".join(lines) + "\n")
    sq = Trace(freqs, np.array(deltas) ** 2)
    fit = estimate.fit_lorentzian(sq)
    report = fit.to_report()
    report["params"]["q_loaded"] = fit.params["center"] / fit.params["fwhm"]
    run.write_json("acoustic_fit.json", report)
    print(f"acoustic mode: fwhm = {fit.params['fwhm']:.4g} Hz, "
          f"Q = {report['params']['q_loaded']:.0f}")
    return 0


def cmd_qd_spectrum(cfg: DeviceConfig, run: _Run, args) -> int:
    drive_freq = args.drive_freq if args.drive_freq is not None \
        else cfg.drive.drive_frequency
    drive = None
    if not args.drive_off:
        _check_drive_band(cfg, drive_freq)
        drive = replace(cfg.drive, drive_frequency=drive_freq)
    filt = cfg.spectrometer if args.spectrometer else cfg.filter
    if args.sweep_drive:
        if args.drive_off:
            raise ConfigError("--sweep-drive needs the drive on")
        return _sweep_drive(cfg, run, args, filt)
    if args.bias is not None:
        return _single_spectrum(cfg, run, args, drive, filt)
    if args.bias_min is None or args.bias_max is None:
        lo = cfg.emitter.plateaus[0].v_min - 0.03
        hi = cfg.emitter.plateaus[-1].v_max + 0.03
        args.bias_min = lo if args.bias_min is None else args.bias_min
        args.bias_max = hi if args.bias_max is None else args.bias_max
    return _bias_map(cfg, run, args, drive, filt)


# ---------------------------------------------------------------------------
# reproduce

def _reproduce_fig2a(cfg: DeviceConfig, run: _Run, args) -> int:
    f = _delay_line_band(cfg, 2001)
    for name, c in (("gated", cfg), ("bulk", _bulk_variant(cfg))):
        converted = np.abs(acoustic.idt_response(f, c.idt)) ** 2
        s11 = (1.0 - converted).astype(complex)
        t = Trace(f, s11, meta=TraceMeta(x_label="frequency", x_unit="Hz", y_label="S11"))
        traceio.write_sparam_csv(t, run.path(f"s11_{name}.csv"))
    return 0


def _reproduce_fig2b(cfg: DeviceConfig, run: _Run, args) -> int:
    f = _delay_line_band(cfg, 4001)
    for name, c in (("gated", cfg), ("bulk", _bulk_variant(cfg))):
        s21 = acoustic.s21_delay_line(f, c.delay_line, c.material)
        t = Trace(f, s21, meta=TraceMeta(x_label="frequency", x_unit="Hz", y_label="S21"))
        traceio.write_sparam_csv(t, run.path(f"s21_{name}.csv"))
    return 0


def _reproduce_fig2c(cfg: DeviceConfig, run: _Run, args) -> int:
    gaps_m = [200e-6, 400e-6, 600e-6, 800e-6]
    fits = {}
    for name, c in (("gated", cfg), ("bulk", _bulk_variant(cfg))):
        rows = _delay_line_peaks(c, gaps_m, 2001)
        lines = ["gap_um,peak_db,err_db"]
        for gap, db, err in rows:
            lines.append(f"{_fmt(gap * 1e6)},{_fmt(db)},{_fmt(err)}")
        run.write_text(f"peaks_{name}.csv", "\n".join(lines) + "\n")
        fits[name] = estimate.fit_loss_per_length(
            np.array(gaps_m), np.array([r[1] for r in rows]),
            np.array([max(r[2], 1e-6) for r in rows]))
        traceio.write_fit_report(fits[name], run.path(f"loss_fit_{name}.json"))
    verdict = estimate.compare_slopes(fits["gated"], fits["bulk"], k=2.0)
    run.write_json("comparison.json", verdict)
    return 0


def _reproduce_fig3a(cfg: DeviceConfig, run: _Run, args) -> int:
    args.bias = None
    args.bias_min = cfg.emitter.plateaus[0].v_min - 0.03
    args.bias_max = cfg.emitter.plateaus[-1].v_max + 0.03
    args.bias_step = 0.007
    args.snr_db = args.snr_db if args.snr_db is not None else 30.0
    return _bias_map(cfg, run, args, None, cfg.spectrometer)


def _reproduce_fig3c(cfg: DeviceConfig, run: _Run, args) -> int:
    args.bias = None
    args.bias_min, args.bias_max, args.bias_step = -0.02, 0.02, 0.001
    args.snr_db = args.snr_db if args.snr_db is not None else 30.0
    return _bias_map(cfg, run, args, cfg.drive, cfg.filter)


def _reproduce_fig3d(cfg: DeviceConfig, run: _Run, args) -> int:
    args.bias = 0.0
    args.sweep_points = 25
    args.snr_db = args.snr_db if args.snr_db is not None else 30.0
    return _sweep_drive(cfg, run, args, cfg.filter)


def _reproduce_fig2d(cfg: DeviceConfig, run: _Run, args) -> int:
    ns = argparse.Namespace(snr_db=args.snr_db if args.snr_db is not None else 30.0,
                            n_points=801, span_linewidths=16.0)
    return cmd_resonator(cfg, run, ns)


def _reproduce_figS2a(cfg: DeviceConfig, run: _Run, args) -> int:
    ns = argparse.Namespace(sigma_min=1e-2, sigma_max=1e8, n_points=101,
                            depth_min_nm=10.0, depth_max_nm=1000.0, n_depth=97)
    return cmd_layer_sweep(cfg, run, ns)


def _reproduce_figS2b(cfg: DeviceConfig, run: _Run, args) -> int:
    depths = np.logspace(1.0, 3.0, 97)
    depths = np.unique(np.concatenate([depths, [d * 1e9 for d, _ in cfg.k2_cal.anchors]]))
    lines = ["depth_nm,k2"]
    for d in depths:
        lines.append(f"{_fmt(d)},{_fmt(layer.k2_effective(d * 1e-9, cfg.k2_cal))}")
    run.write_text("depth_sweep.csv", "\n".join(lines) + "\n")
    return 0


REPRODUCE_DISPATCH = {
    "fig2a": _reproduce_fig2a, "fig2b": _reproduce_fig2b, "fig2c": _reproduce_fig2c,
    "fig2d": _reproduce_fig2d, "fig3a": _reproduce_fig3a, "fig3c": _reproduce_fig3c,
    "fig3d": _reproduce_fig3d, "figS2a": _reproduce_figS2a, "figS2b": _reproduce_figS2b,
}


def cmd_reproduce(cfg: DeviceConfig, run: _Run, args) -> int:
    return REPRODUCE_DISPATCH[args.figure_id](cfg, run, args)


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sawlab",
        description="Forward models and parameter estimation for gated-QD / SAW devices")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None,
                       help="device config TOML (default: shipped calibrated config)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory (default: $SAWLAB_OUT or CWD)")
        p.add_argument("--seed", type=int, default=0, help="noise seed")

    p = sub.add_parser("layer-sweep", help="conductivity and depth sweeps of the layer model")
    common(p)
    p.add_argument("--sigma-min", type=float, default=1e-2)
    p.add_argument("--sigma-max", type=float, default=1e8)
    p.add_argument("--n-points", type=int, default=101)
    p.add_argument("--depth-min-nm", type=float, default=10.0)
    p.add_argument("--depth-max-nm", type=float, default=1000.0)
    p.add_argument("--n-depth", type=int, default=97)
    p.set_defaults(func=cmd_layer_sweep)

    p = sub.add_parser("delay-line", help="delay-line S21 traces and loss-per-length fit")
    common(p)
    p.add_argument("--gaps-um", type=lambda s: [float(v) for v in s.split(",")],
                   default=[200.0, 400.0, 800.0], help="comma-separated gaps in um")
    p.add_argument("--n-points", type=int, default=2001)
    p.add_argument("--fit", action="store_true", help="fit loss per length")
    p.add_argument("--compare", type=str, default=None,
                   help="second config; emit slope-agreement verdict")
    p.set_defaults(func=cmd_delay_line)

    p = sub.add_parser("resonator", help="synthesize and fit a one-port S11 spectrum")
    common(p)
    p.add_argument("--snr-db", type=float, default=30.0,
                   help="amplitude SNR in dB (inf for noiseless)")
    p.add_argument("--n-points", type=int, default=801)
    p.add_argument("--span-linewidths", type=float, default=16.0)
    p.set_defaults(func=cmd_resonator)

    p = sub.add_parser("qd-spectrum", help="PL spectra, bias maps and drive sweeps")
    common(p)
    p.add_argument("--bias", type=float, default=None, help="single-spectrum bias [V]")
    p.add_argument("--bias-min", type=float, default=None)
    p.add_argument("--bias-max", type=float, default=None)
    p.add_argument("--bias-step", type=float, default=0.002)
    p.add_argument("--drive-freq", type=float, default=None)
    p.add_argument("--drive-off", action="store_true")
    p.add_argument("--sweep-drive", action="store_true",
                   help="sweep drive frequency and fit the acoustic line to delta^2")
    p.add_argument("--sweep-points", type=int, default=25)
    p.add_argument("--spectrometer", action="store_true",
                   help="use the coarse spectrometer filter section")
    p.add_argument("--snr-db", type=float, default=30.0)
    p.set_defaults(func=cmd_qd_spectrum)

    p = sub.add_parser("reproduce", help="rebuild one figure dataset at desk scale")
    p.add_argument("figure_id", choices=REPRODUCE_IDS)
    common(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def _default_out(args) -> Path:
    if args.out:
        return Path(args.out)
    base = Path(os.environ.get("SAWLAB_OUT", "."))
    if args.command == "reproduce":
        return base / args.figure_id
    return base / f"sawlab_{args.command.replace('-', '_')}"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config_path = args.config if args.config else default_config_path()
        cfg = load_config(config_path)
        command = args.command if args.command != "reproduce" \
            else f"reproduce {args.figure_id}"
        run = _Run(command, str(config_path), args.seed, _default_out(args))
        code = args.func(cfg, run, args)
        run.finish()
        return code
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FitError, SawlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
