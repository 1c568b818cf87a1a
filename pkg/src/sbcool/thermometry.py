"""Motional thermometry: analytic sideband transfer sums, sideband-ratio
inversion, least-squares temperature and heating-rate fits, and the derived
noise-density / Doppler-limit quantities.

Fit recipe (documented contract): one-dimensional least squares over
n_bar >= 0 by coarse-grid bracketing plus golden-section refinement to 1e-6
relative tolerance; std_error comes from the curvature of the residual sum at
the minimum, scaled by the residual variance (so exact synthetic data reports
~0 uncertainty).  Shot noise enters only through the data; the forward models
are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import FitError
from .ion import PhysicalConstants, CODATA
from .qcore import FockDistribution, thermal_distribution, thermal_fock_cutoff

__all__ = [
    "SidebandRatio",
    "FitResult",
    "sideband_probability",
    "sideband_scan_probability",
    "ratio_to_nbar",
    "fit_nbar_spectra",
    "fit_nbar_flop",
    "fit_heating_rate",
    "noise_density",
    "doppler_limit",
]

GOLDEN_REL_TOL = 1e-6


@dataclass(frozen=True)
class SidebandRatio:
    """Ratio r = P(red) / P(blue); thermal states give r = n_bar/(n_bar+1) < 1."""

    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value < 1.0:
            raise ValueError(f"sideband ratio must be in [0, 1), got {self.value}")


@dataclass(frozen=True)
class FitResult:
    """Point estimate with curvature-based uncertainty.

    value          best-fit parameter
    std_error      sqrt(2 s^2 / RSS''), s^2 the residual variance; 0 for exact data
    residual_norm  sqrt of the residual sum of squares at the minimum
    n_evaluations  forward-model evaluations consumed
    """

    value: float
    std_error: float
    residual_norm: float
    n_evaluations: int


def _auto_n_max(n_bar: float) -> int:
    return max(thermal_fock_cutoff(n_bar, 1e-6), int(math.ceil(20.0 * (n_bar + 1.0))))


def _populations(state: float | FockDistribution, n_max: int | None) -> np.ndarray:
    if isinstance(state, FockDistribution):
        return np.asarray(state.populations)
    n_bar = float(state)
    if n_max is None:
        n_max = _auto_n_max(n_bar)
    return np.asarray(thermal_distribution(n_bar, n_max).populations)


def sideband_probability(
    t: float | np.ndarray,
    sideband: Literal["red", "blue"],
    state: float | FockDistribution,
    eta_omega_hz: float,
    n_max: int | None = None,
) -> np.ndarray:
    """Resonant sideband transfer of a thermal (or explicit) Fock mixture.

    P(t) = sum_n p_n sin^2(pi f1 sqrt(n or n+1) t) with f1 = eta_omega_hz.
    Vectorised over t; returns an array matching t's shape.
    """
    if sideband not in ("red", "blue"):
        raise ValueError("sideband must be 'red' or 'blue'")
    p = _populations(state, n_max)
    n = np.arange(p.size)
    root = np.sqrt(n) if sideband == "red" else np.sqrt(n + 1)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    phase = np.pi * eta_omega_hz * np.outer(t_arr, root)
    out = np.sin(phase) ** 2 @ p
    return out if np.ndim(t) else float(out[0])


def sideband_scan_probability(
    detuning_hz: np.ndarray,
    sideband: Literal["red", "blue"],
    state: float | FockDistribution,
    eta_omega_hz: float,
    nu_z_hz: float,
    t_probe_s: float,
    n_max: int | None = None,
) -> np.ndarray:
    """Detuned generalisation of sideband_probability: the per-level detuned
    Rabi line shape summed over the population.

    detuning_hz is relative to the carrier; the addressed sideband resonance
    sits at -nu_z (red) or +nu_z (blue).  Equivalent to the master-equation
    scan of the effective model under the sideband rotating-wave approximation
    (no heating); tested against it.
    """
    p = _populations(state, n_max)
    n = np.arange(p.size)
    root = np.sqrt(n) if sideband == "red" else np.sqrt(n + 1)
    if sideband == "red":
        big_delta = np.asarray(detuning_hz, dtype=float) + nu_z_hz
    elif sideband == "blue":
        big_delta = np.asarray(detuning_hz, dtype=float) - nu_z_hz
    else:
        raise ValueError("sideband must be 'red' or 'blue'")
    # angular coupling Omega_n = 2 pi f1 root_n; generalised flop at detuning
    f_n = eta_omega_hz * root  # cyclic coupling per level
    f_n2 = f_n ** 2
    w2 = f_n2[None, :] + big_delta[:, None] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(w2 > 0, f_n2[None, :] / np.where(w2 > 0, w2, 1.0), 0.0)
    amp = np.sin(np.pi * np.sqrt(w2) * t_probe_s) ** 2
    return (weight * amp) @ p


def ratio_to_nbar(ratio: SidebandRatio | float) -> float:
    """Invert r = n_bar / (n_bar + 1); rejects r >= 1 (unphysical for thermal)."""
    r = ratio.value if isinstance(ratio, SidebandRatio) else float(ratio)
    if not 0.0 <= r < 1.0:
        raise ValueError(f"ratio must be in [0, 1), got {r}")
    return r / (1.0 - r)


# ---------------------------------------------------------------------------
# 1-D least squares machinery


def _golden_refine(f: Callable[[float], float], lo: float, hi: float,
                   rel_tol: float = GOLDEN_REL_TOL) -> tuple[float, int]:
    """Golden-section minimum of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    n_eval = 2
    scale = max(abs(lo), abs(hi), 1e-12)
    while (b - a) > rel_tol * scale:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        n_eval += 1
        if n_eval > 500:
            raise FitError(f"golden section failed to converge on [{lo}, {hi}]")
    x = (a + b) / 2.0
    return x, n_eval


def _bracket_and_refine(f: Callable[[float], float], grid: np.ndarray) -> tuple[float, float, int]:
    """Coarse scan then golden refinement around the best grid point."""
    vals = [f(x) for x in grid]
    n_eval = len(vals)
    i = int(np.argmin(vals))
    lo = grid[max(0, i - 1)]
    hi = grid[min(len(grid) - 1, i + 1)]
    if lo == hi:
        return float(grid[i]), float(vals[i]), n_eval
    x, extra = _golden_refine(f, float(lo), float(hi))
    return x, f(x), n_eval + extra + 1


def _curvature_std(f: Callable[[float], float], x: float, rss: float,
                   n_points: int) -> tuple[float, int]:
    """Gauss-Newton style uncertainty from the RSS curvature at the minimum.

    Second difference with (possibly) unequal steps when the lower point is
    clamped at the n_bar >= 0 boundary.
    """
    h = max(abs(x), 1e-3) * 1e-3
    lo = max(x - h, 0.0)
    hi = x + h
    h1 = x - lo
    h2 = hi - x
    f_lo, f_x, f_hi = f(lo), f(x), f(hi)
    if h1 == 0.0:
        d2 = 2.0 * (f_hi - f_x) / h2 ** 2  # one-sided, boundary minimum
    else:
        d2 = 2.0 * (h1 * f_hi + h2 * f_lo - (h1 + h2) * f_x) / (h1 * h2 * (h1 + h2))
    dof = max(n_points - 1, 1)
    s2 = rss / dof
    if d2 <= 0:
        return 0.0, 3
    return math.sqrt(max(2.0 * s2 / d2, 0.0)), 3


def _fit_scalar(f: Callable[[float], float], grid: np.ndarray,
                n_points: int) -> FitResult:
    x, rss, n_eval = _bracket_and_refine(f, grid)
    x = max(x, 0.0)
    std, extra = _curvature_std(f, x, rss, n_points)
    return FitResult(value=x, std_error=std,
                     residual_norm=math.sqrt(max(rss, 0.0)),
                     n_evaluations=n_eval + extra)


def _nbar_grid(hint: float) -> np.ndarray:
    """Coarse bracket grid: dense near zero, geometric growth past the hint."""
    top = max(4.0 * (hint + 0.05), 1.0)
    lin = np.linspace(0.0, min(top, 2.0), 21)
    if top <= 2.0:
        return lin
    geo = np.geomspace(2.0, top, 24)
    return np.unique(np.concatenate([lin, geo]))


# ---------------------------------------------------------------------------
# fitters


def fit_nbar_spectra(
    red,
    blue,
    nu_z_hz: float,
    omega_hz: float,
    omega_dr_hz: float,
    t_probe_s: float,
    eta_eff: float,
    model: Literal["effective", "full_dressed"] = "effective",
    forward: Literal["analytic", "integrate"] = "analytic",
) -> FitResult:
    """Single-parameter thermal fit to a red/blue scan pair.

    Minimises the summed squared residuals of both spectra over n_bar >= 0.
    forward="analytic" uses the closed-form detuned line shape (equivalent to
    the effective master-equation scan and fast enough for Monte-Carlo
    studies); forward="integrate" evaluates the actual master-equation scan.
    omega_dr_hz only enters the full_dressed forward.
    """
    red_x = np.asarray(red.x, dtype=float)
    blue_x = np.asarray(blue.x, dtype=float)
    red_p = np.asarray(red.p_f1, dtype=float)
    blue_p = np.asarray(blue.p_f1, dtype=float)
    n_points = red_p.size + blue_p.size
    eta_omega = eta_eff * omega_hz

    if forward == "analytic" and model == "effective":
        def rss(n_bar: float) -> float:
            n_max = _auto_n_max(n_bar)
            model_red = sideband_scan_probability(
                red_x, "red", n_bar, eta_omega, nu_z_hz, t_probe_s, n_max)
            model_blue = sideband_scan_probability(
                blue_x, "blue", n_bar, eta_omega, nu_z_hz, t_probe_s, n_max)
            return float(np.sum((model_red - red_p) ** 2)
                         + np.sum((model_blue - blue_p) ** 2))
    else:
        from .dynamics import SidebandProbe, simulate_scan
        from .ion import TrapParams

        trap = TrapParams(nu_z_hz=nu_z_hz)
        base = dict(trap=trap, carrier_rabi_hz=omega_hz,
                    dressing_rabi_hz=omega_dr_hz, model=model)
        # keep the driven eta*omega product identical to the analytic forward
        probe_red = SidebandProbe(sideband="red", sideband_rabi_hz=eta_omega, **base)
        probe_blue = SidebandProbe(sideband="blue", sideband_rabi_hz=eta_omega, **base)

        def rss(n_bar: float) -> float:
            model_red = simulate_scan(probe_red, red_x, t_probe_s, n_bar).p_f1
            model_blue = simulate_scan(probe_blue, blue_x, t_probe_s, n_bar).p_f1
            return float(np.sum((model_red - red_p) ** 2)
                         + np.sum((model_blue - blue_p) ** 2))

    # moment hint from the peak ratio when resolvable
    hint = 0.5
    try:
        r = float(red_p.max()) / float(blue_p.max())
        if 0.0 <= r < 0.99:
            hint = max(ratio_to_nbar(min(r, 0.98)), 0.05)
    except (ZeroDivisionError, ValueError):
        pass
    return _fit_scalar(rss, _nbar_grid(hint), n_points)


def fit_nbar_flop(flop, eta_omega_hz: float) -> FitResult:
    """Thermal fit of a resonant red-sideband flop time series.

    The forward model is the analytic transfer sum; insensitive near n_bar = 0
    on the red sideband of a pure ground state, so the fitter is normally fed
    hot-state data (e.g. before cooling).
    """
    t = np.asarray(flop.x, dtype=float)
    p = np.asarray(flop.p_f1, dtype=float)

    def rss(n_bar: float) -> float:
        model = sideband_probability(t, "red", n_bar, eta_omega_hz)
        return float(np.sum((model - p) ** 2))

    # crude scale hint: early-time transfer of a hot state ~ 1 - p0 = q
    hint = 1.0
    peak = float(p.max()) if p.size else 0.0
    if 0.0 < peak < 0.999:
        hint = max(ratio_to_nbar(min(peak, 0.99)), 0.1)
    return _fit_scalar(rss, _nbar_grid(hint), p.size)


def fit_heating_rate(
    delays_s: Sequence[float],
    nbars: Sequence[float],
    errors: Sequence[float] | None = None,
) -> FitResult:
    """Weighted linear regression of n_bar versus delay; slope is ndot (1/s).

    With per-point errors the weights are 1/err^2 and std_error comes from the
    weighted normal equations; without, uniform weights and the residual
    variance set the scale.  The slope is invariant under adding a constant to
    every n_bar.
    """
    t = np.asarray(delays_s, dtype=float)
    y = np.asarray(nbars, dtype=float)
    if t.shape != y.shape or t.ndim != 1 or t.size < 2:
        raise ValueError("need matching 1-D arrays with at least two points")
    if errors is not None:
        err = np.asarray(errors, dtype=float)
        if err.shape != t.shape or np.any(err <= 0):
            raise ValueError("errors must match delays and be > 0")
        w = 1.0 / err ** 2
    else:
        w = np.ones_like(t)

    sw = w.sum()
    swt = np.dot(w, t)
    swt2 = np.dot(w, t * t)
    swy = np.dot(w, y)
    swty = np.dot(w, t * y)
    det = sw * swt2 - swt ** 2
    if det <= 0:
        raise FitError("degenerate delay design: need at least two distinct delays")
    slope = (sw * swty - swt * swy) / det
    intercept = (swt2 * swy - swt * swty) / det
    resid = y - (intercept + slope * t)
    rss = float(np.dot(w, resid ** 2))

    var_slope = sw / det
    if errors is None:
        dof = max(t.size - 2, 1)
        var_slope *= rss / dof
    return FitResult(value=float(slope), std_error=math.sqrt(max(var_slope, 0.0)),
                     residual_norm=math.sqrt(max(rss, 0.0)), n_evaluations=1)


# ---------------------------------------------------------------------------
# derived environmental quantities


def noise_density(n_dot: float, nu_z_hz: float, mass_amu: float,
                  constants: PhysicalConstants = CODATA) -> float:
    """Electric-field noise density nu S_E(nu) = 4 ndot hbar m omega^2 / e^2
    implied by a heating rate, in V^2 m^-2 (omega the angular trap frequency)."""
    if n_dot < 0 or nu_z_hz <= 0 or mass_amu <= 0:
        raise ValueError("n_dot >= 0 and positive nu_z, mass required")
    omega = 2.0 * math.pi * nu_z_hz
    mass = mass_amu * constants.amu
    return 4.0 * n_dot * constants.hbar * mass * omega ** 2 / constants.e ** 2


def doppler_limit(linewidth_hz: float, nu_z_hz: float) -> float:
    """Doppler-cooling limit n_bar = Gamma / (2 omega_z) - 1/2 (clamped at 0),
    with Gamma the angular natural linewidth of the cooling transition."""
    if linewidth_hz <= 0 or nu_z_hz <= 0:
        raise ValueError("linewidth and trap frequency must be > 0")
    return max(linewidth_hz / (2.0 * nu_z_hz) - 0.5, 0.0)
