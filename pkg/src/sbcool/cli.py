"""Command-line front end.

Exit codes: 0 success, 2 configuration or data-format error, 3 numerical
failure (integration, truncation, or fit breakdown).  Every run that writes a
file also writes `<stem>.manifest.json` beside it; CSV bytes are reproducible
for a fixed config + seed, manifests carry the only timestamp.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import CONFIG_ENV_VAR, ExperimentConfig, load_config
from .cooling import (
    build_schedule,
    heat_distribution,
    schedule_total_time,
    simulate_cooling,
)
from .dynamics import HeatingChannel, ScanResult, FlopResult, simulate_flop, simulate_scan
from .errors import ConfigError, DataFormatError, FitError, IntegrationError, TruncationError
from .ion import ground_state_extent, lamb_dicke_eff, sideband_rabi
from .qcore import FockDistribution, mean_phonon, thermal_distribution, thermal_fock_cutoff
from .runio import (
    COOL_HEADER,
    DIST_HEADER,
    FLOP_HEADER,
    HEATRATE_HEADER,
    SCAN_HEADER,
    read_csv,
    sample_shots,
    write_csv,
    write_manifest,
)
from .thermometry import (
    doppler_limit,
    fit_heating_rate,
    fit_nbar_flop,
    fit_nbar_spectra,
    noise_density,
)

FIT_HEADER = ("nbar", "nbar_err", "residual_norm", "n_evaluations")
RATE_HEADER = ("ndot_per_s", "ndot_err", "residual_norm")


def _shots_arg(raw: str) -> int:
    """--shots N|inf; inf (or 0) means noiseless probabilities."""
    if raw.lower() in ("inf", "none", "noiseless"):
        return 0
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError("shots must be >= 0 or 'inf'")
    return value


def _parse_overrides(pairs: list[str] | None) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def _load(args: argparse.Namespace) -> ExperimentConfig:
    return load_config(args.config, _parse_overrides(getattr(args, "set", None)))


def _trimmed(dist: FockDistribution, n_support: int, pad: int = 8) -> FockDistribution:
    """Cut a long distribution to scan size; loss is recorded.

    Pulsed cooling leaves a flat residual tail of order 1e-6 per level, so
    the support is cut at n_support (renormalised) and pad zero levels are
    appended; the integrator's top-level guard then measures real spillover
    rather than the carried-in tail.
    """
    cut = min(dist.n_max, n_support)
    head = np.array(dist.populations[: cut + 1])
    loss = float(max(1.0 - head.sum(), 0.0))
    out = np.zeros(cut + 1 + pad)
    out[: cut + 1] = head / head.sum()
    return FockDistribution(out, truncation_loss=dist.truncation_loss + loss)


# ---------------------------------------------------------------------------
# commands


def cmd_constants(args: argparse.Namespace) -> int:
    cfg = _load(args)
    trap = cfg.trap()
    eta = lamb_dicke_eff(trap)
    rows = [
        ("z0_m", ground_state_extent(trap)),
        ("eta_eff", eta),
        ("sideband_rabi_n1_hz", cfg.sideband_rabi_1_hz()),
        ("sideband_rabi_derived_hz", sideband_rabi(1, "red", eta, cfg.carrier_rabi_hz)),
        ("doppler_limit_nbar", doppler_limit(cfg.doppler_linewidth_hz, cfg.nu_z_hz)),
        ("noise_density_v2_m2", noise_density(cfg.heating_rate_per_s, cfg.nu_z_hz,
                                              cfg.mass_amu)),
        ("heating_rate_per_s", cfg.heating_rate_per_s),
    ]
    for key, value in rows:
        print(f"{key} = {value:.6g}")
    return 0


def _scan_grid(cfg: ExperimentConfig, args: argparse.Namespace) -> np.ndarray:
    center = args.center
    if center is None:
        center = -cfg.nu_z_hz if args.sideband == "red" else cfg.nu_z_hz
    if args.span <= 0 or args.points < 2:
        raise ConfigError("span must be > 0 and points >= 2")
    return np.linspace(center - args.span / 2.0, center + args.span / 2.0, args.points)


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = _load(args)
    detunings = _scan_grid(cfg, args)
    probe = cfg.probe(args.sideband, model=args.model)
    t_probe = args.probe_time if args.probe_time is not None else cfg.probe_time_s
    heating = cfg.heating() if args.probe_heating else None
    result = simulate_scan(probe, detunings, t_probe, args.nbar,
                           heating=heating, cfg=cfg.integrator(), jobs=args.jobs)
    rng = np.random.default_rng(cfg.seed)
    shots = args.shots if args.shots is not None else cfg.shots_per_point
    p, shots_col = sample_shots(result.p_f1, shots, rng)
    rows = [(d, pv, shots_col) for d, pv in zip(result.x, p)]
    write_csv(args.out, SCAN_HEADER, rows)
    write_manifest(args.out, "scan", cfg.seed, __version__, cfg.as_dict())
    print(f"wrote {args.out} ({len(rows)} points, sideband={args.sideband})")
    return 0


def cmd_flop(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.tmax <= 0 or args.points < 2:
        raise ConfigError("tmax must be > 0 and points >= 2")
    times = np.linspace(0.0, args.tmax, args.points)
    probe = cfg.probe(args.sideband, model=args.model)
    heating = cfg.heating() if not args.no_heating else None
    result = simulate_flop(probe, times, args.nbar, heating=heating,
                           cfg=cfg.integrator())
    rng = np.random.default_rng(cfg.seed)
    shots = args.shots if args.shots is not None else 0
    p, shots_col = sample_shots(result.p_f1, shots, rng)
    rows = [(t, pv, shots_col) for t, pv in zip(result.x, p)]
    write_csv(args.out, FLOP_HEADER, rows)
    write_manifest(args.out, "flop", cfg.seed, __version__, cfg.as_dict())
    print(f"wrote {args.out} ({len(rows)} points, sideband={args.sideband})")
    return 0


def cmd_cool(args: argparse.Namespace) -> int:
    cfg = _load(args)
    n_start = args.nstart if args.nstart is not None else cfg.n_start
    nbar0 = args.nbar0 if args.nbar0 is not None else cfg.doppler_nbar
    schedule = build_schedule(n_start, cfg.sideband_rabi_1_hz(), cfg.repump())
    dist0 = thermal_distribution(nbar0, thermal_fock_cutoff(nbar0))
    result = simulate_cooling(dist0, schedule, cfg.heating(), cfg.repump())
    rows = list(zip(result.pulse_index, result.nbar, result.t_elapsed_s))
    write_csv(args.out, COOL_HEADER, rows)
    write_manifest(args.out, "cool", cfg.seed, __version__, cfg.as_dict())
    if args.dist_out:
        dist_rows = list(enumerate(result.final.populations))
        write_csv(args.dist_out, DIST_HEADER, dist_rows)
        write_manifest(args.dist_out, "cool", cfg.seed, __version__, cfg.as_dict())
    total = schedule_total_time(schedule)
    drive = schedule_total_time(schedule, kinds=("red_sideband",))
    print(f"final nbar = {mean_phonon(result.final):.4f}")
    print(f"ground-state population = {result.final.populations[0]:.4f}")
    print(f"schedule time: {total * 1e3:.2f} ms total, {drive * 1e3:.2f} ms drive-only")
    print(f"wrote {args.out}")
    return 0


def _heatrate_loop(cfg: ExperimentConfig, delays: list[float],
                   probe_heating: bool) -> tuple[list[tuple], object]:
    """Cool once, heat for each delay, scan both sidebands, fit each pair."""
    schedule = build_schedule(cfg.n_start, cfg.sideband_rabi_1_hz(), cfg.repump())
    dist0 = thermal_distribution(cfg.doppler_nbar, thermal_fock_cutoff(cfg.doppler_nbar))
    cooled = simulate_cooling(dist0, schedule, cfg.heating(), cfg.repump()).final

    ndot = cfg.heating_rate_per_s
    max_delay = max(delays)
    n_support = max(20, int(np.ceil(20.0 * (mean_phonon(cooled)
                                            + ndot * max_delay + 1.0))))
    # the residual cooling tail diffuses by sigma = sqrt(ndot t (2n+1)) during
    # the delay; pad past 2 sigma so the top-level guard sees real spillover
    sigma = np.sqrt(max(ndot * max_delay, 0.0) * (2 * n_support + 1))
    base = _trimmed(cooled, n_support, pad=8 + int(np.ceil(2.0 * sigma)))

    eta = cfg.eta_eff()
    omega_eff = cfg.sideband_rabi_1_hz() / eta
    span, points = 4000.0, 41
    rows = []
    for delay in delays:
        dist = heat_distribution(base, ndot, delay) if delay > 0 else base
        heating = cfg.heating() if probe_heating else None
        scans = {}
        for sideband in ("red", "blue"):
            probe = cfg.probe(sideband)
            center = -cfg.nu_z_hz if sideband == "red" else cfg.nu_z_hz
            grid = np.linspace(center - span / 2.0, center + span / 2.0, points)
            scans[sideband] = simulate_scan(probe, grid, cfg.probe_time_s, dist,
                                            heating=heating, cfg=cfg.integrator())
        fit = fit_nbar_spectra(scans["red"], scans["blue"], cfg.nu_z_hz, omega_eff,
                               cfg.dressing_rabi_hz, cfg.probe_time_s, eta)
        rows.append((delay, fit.value, fit.std_error))
    errors = [r[2] for r in rows]
    use_err = all(e > 0 for e in errors)
    rate = fit_heating_rate([r[0] for r in rows], [r[1] for r in rows],
                            errors if use_err else None)
    return rows, rate


def cmd_heatrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    delays = sorted(float(d) for d in args.delays.split(","))
    if len(delays) < 2:
        raise ConfigError("need at least two delays")
    rows, rate = _heatrate_loop(cfg, delays, args.probe_heating)
    for delay, nbar, err in rows:
        print(f"delay {delay * 1e3:8.3f} ms: nbar = {nbar:.4f} +- {err:.4f}")
    print(f"heating rate = {rate.value:.2f} +- {rate.std_error:.2f} quanta/s")
    if args.out:
        write_csv(args.out, HEATRATE_HEADER, rows)
        write_manifest(args.out, "heatrate", cfg.seed, __version__, cfg.as_dict())
        print(f"wrote {args.out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _load(args)
    eta = cfg.eta_eff()
    omega_eff = cfg.sideband_rabi_1_hz() / eta
    if args.mode == "spectra":
        if len(args.files) != 2:
            raise ConfigError("spectra mode needs two files: red.csv blue.csv")
        red_cols = read_csv(args.files[0], SCAN_HEADER)
        blue_cols = read_csv(args.files[1], SCAN_HEADER)
        red = ScanResult(red_cols["detuning_hz"], red_cols["p_f1"])
        blue = ScanResult(blue_cols["detuning_hz"], blue_cols["p_f1"])
        fit = fit_nbar_spectra(red, blue, cfg.nu_z_hz, omega_eff,
                               cfg.dressing_rabi_hz, cfg.probe_time_s, eta,
                               forward=args.forward)
        label = "nbar"
    elif args.mode == "flop":
        if len(args.files) != 1:
            raise ConfigError("flop mode needs one file")
        cols = read_csv(args.files[0], FLOP_HEADER)
        flop = FlopResult(cols["time_s"], cols["p_f1"])
        fit = fit_nbar_flop(flop, cfg.sideband_rabi_1_hz())
        label = "nbar"
    elif args.mode == "heatrate":
        if len(args.files) != 1:
            raise ConfigError("heatrate mode needs one file")
        cols = read_csv(args.files[0], HEATRATE_HEADER)
        errors = cols["nbar_err"]
        use_err = bool(np.all(errors > 0))
        fit = fit_heating_rate(cols["delay_s"], cols["nbar"],
                               errors if use_err else None)
        label = "ndot_per_s"
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown mode {args.mode!r}")
    print(f"{label} = {fit.value:.6g}")
    print(f"std_error = {fit.std_error:.6g}")
    print(f"residual_norm = {fit.residual_norm:.6g}")
    print(f"n_evaluations = {fit.n_evaluations}")
    return 0


def _repro_fig1(cfg: ExperimentConfig, outdir: Path) -> None:
    """Sideband spectra of the cooled ion plus the thermal fit."""
    schedule = build_schedule(cfg.n_start, cfg.sideband_rabi_1_hz(), cfg.repump())
    dist0 = thermal_distribution(cfg.doppler_nbar, thermal_fock_cutoff(cfg.doppler_nbar))
    cooled = simulate_cooling(dist0, schedule, cfg.heating(), cfg.repump()).final
    n_max = max(20, int(np.ceil(20.0 * (mean_phonon(cooled) + 1.0))))
    dist = _trimmed(cooled, n_max)

    span, points = 4000.0, 41
    scans = {}
    for sideband in ("red", "blue"):
        probe = cfg.probe(sideband)
        center = -cfg.nu_z_hz if sideband == "red" else cfg.nu_z_hz
        grid = np.linspace(center - span / 2.0, center + span / 2.0, points)
        scans[sideband] = simulate_scan(probe, grid, cfg.probe_time_s, dist,
                                        cfg=cfg.integrator())
        out = outdir / f"scan_{sideband}.csv"
        rows = [(d, p, 0) for d, p in zip(scans[sideband].x, scans[sideband].p_f1)]
        write_csv(out, SCAN_HEADER, rows)
        write_manifest(out, "repro", cfg.seed, __version__, cfg.as_dict())
    eta = cfg.eta_eff()
    fit = fit_nbar_spectra(scans["red"], scans["blue"], cfg.nu_z_hz,
                           cfg.sideband_rabi_1_hz() / eta, cfg.dressing_rabi_hz,
                           cfg.probe_time_s, eta)
    out = outdir / "fit_report.csv"
    write_csv(out, FIT_HEADER, [(fit.value, fit.std_error, fit.residual_norm,
                                 fit.n_evaluations)])
    write_manifest(out, "repro", cfg.seed, __version__, cfg.as_dict())
    print(f"cooled nbar = {mean_phonon(cooled):.4f}; fitted nbar = {fit.value:.4f}")


def _repro_fig2(cfg: ExperimentConfig, outdir: Path) -> None:
    """Heating-rate pipeline: cooled, delayed, scanned, fitted."""
    delays = [0.0, 5e-3, 10e-3]
    rows, rate = _heatrate_loop(cfg, delays, probe_heating=False)
    out = outdir / "heatrate.csv"
    write_csv(out, HEATRATE_HEADER, rows)
    write_manifest(out, "repro", cfg.seed, __version__, cfg.as_dict())
    out = outdir / "rate_report.csv"
    write_csv(out, RATE_HEADER, [(rate.value, rate.std_error, rate.residual_norm)])
    write_manifest(out, "repro", cfg.seed, __version__, cfg.as_dict())
    print(f"fitted heating rate = {rate.value:.2f} +- {rate.std_error:.2f} quanta/s")


def _repro_fig3(cfg: ExperimentConfig, outdir: Path) -> None:
    """Long sideband flops of the cooled ion with heating active.

    Uses the reproduction parameter set: sideband Rabi 350 Hz, initial
    n_bar 0.13, heating at the configured rate.
    """
    cfg = ExperimentConfig(**{**cfg.as_dict(), "sideband_rabi_hz": 350.0})
    times = np.linspace(0.0, 10e-3, 201)
    for sideband in ("red", "blue"):
        probe = cfg.probe(sideband)
        result = simulate_flop(probe, times, 0.13, heating=cfg.heating(),
                               cfg=cfg.integrator())
        out = outdir / f"flop_{sideband}.csv"
        rows = [(t, p, 0) for t, p in zip(result.x, result.p_f1)]
        write_csv(out, FLOP_HEADER, rows)
        write_manifest(out, "repro", cfg.seed, __version__, cfg.as_dict())
        print(f"wrote {out}")


def cmd_repro(args: argparse.Namespace) -> int:
    cfg = _load(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.target == "fig1":
        _repro_fig1(cfg, outdir)
    elif args.target == "fig2":
        _repro_fig2(cfg, outdir)
    else:
        _repro_fig3(cfg, outdir)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help=f"config file path (default: ${CONFIG_ENV_VAR} if set)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable)")

    parser = argparse.ArgumentParser(
        prog="sbcool",
        description="Sideband cooling and motional thermometry toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("constants", parents=[common],
                   help="print derived quantities for the configuration")

    p = sub.add_parser("scan", parents=[common],
                       help="simulate a sideband spectrum and write CSV")
    p.add_argument("--sideband", choices=("red", "blue"), required=True)
    p.add_argument("--center", type=float, default=None,
                   help="grid centre, Hz from carrier (default: sideband resonance)")
    p.add_argument("--span", type=float, default=4000.0)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--probe-time", type=float, default=None)
    p.add_argument("--nbar", type=float, default=0.13)
    p.add_argument("--shots", type=_shots_arg, default=None,
                   help="shots per point, or 'inf' for noiseless (default: config)")
    p.add_argument("--model", choices=("effective", "full_dressed"), default="effective")
    p.add_argument("--probe-heating", action="store_true",
                   help="include heating during the probe window")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("flop", parents=[common],
                       help="simulate a resonant sideband flop and write CSV")
    p.add_argument("--sideband", choices=("red", "blue"), required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--nbar", type=float, default=0.13)
    p.add_argument("--shots", type=_shots_arg, default=None,
                   help="shots per point, or 'inf' for noiseless (default: noiseless)")
    p.add_argument("--model", choices=("effective", "full_dressed"), default="effective")
    p.add_argument("--no-heating", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("cool", parents=[common],
                       help="run the pulsed cooling schedule (rate map)")
    p.add_argument("--nstart", type=int, default=None)
    p.add_argument("--nbar0", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--dist-out", default=None,
                   help="also write the final Fock distribution")

    p = sub.add_parser("heatrate", parents=[common],
                       help="closed-loop heating-rate measurement")
    p.add_argument("--delays", required=True,
                   help="comma-separated delays in seconds, e.g. 0,5e-3,10e-3")
    p.add_argument("--probe-heating", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("fit", parents=[common],
                       help="fit recorded CSV data")
    p.add_argument("files", nargs="+",
                   help="spectra: exactly two scan files, red then blue; "
                        "flop: one red-sideband flop file; heatrate: one "
                        "delay/nbar file")
    p.add_argument("--mode", choices=("spectra", "flop", "heatrate"), required=True)
    p.add_argument("--forward", choices=("analytic", "integrate"), default="analytic",
                   help="forward model for spectra mode")

    p = sub.add_parser("repro", parents=[common],
                       help="write a reference reproduction bundle")
    p.add_argument("target", choices=("fig1", "fig2", "fig3"),
                   help="fig1: spectra+fit, fig2: heating rate, fig3: long flops")
    p.add_argument("--outdir", required=True)

    return parser


_DISPATCH = {
    "constants": cmd_constants,
    "scan": cmd_scan,
    "flop": cmd_flop,
    "cool": cmd_cool,
    "heatrate": cmd_heatrate,
    "fit": cmd_fit,
    "repro": cmd_repro,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, DataFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, TruncationError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
