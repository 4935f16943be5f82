"""Scaling-law extraction from simulated series.

All fitters are deterministic: initial guesses come from fixed rules
(zero crossings, extrema, linear least squares) and nothing is randomized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.ndimage import uniform_filter1d
from scipy.optimize import least_squares
from scipy.signal import find_peaks

MODEL_PARAMS = {
    "exp_approach": ("Gamma", "log_amplitude"),
    "damped_growth": ("A", "beta", "Gamma", "nu", "phi"),
    "damped_decay": ("A", "alpha", "Gamma", "nu", "phi"),
    "power_law": ("slope", "intercept"),
}

TRANSIENT_CUTOFF = 1.0
NU_BOUND = 0.25


class FitError(RuntimeError):
    pass


@dataclass
class FitResult:
    model_id: str
    params: dict
    uncertainties: dict
    residual: float
    window: tuple
    flags: list = field(default_factory=list)

    def __post_init__(self):
        expected = MODEL_PARAMS[self.model_id]
        if tuple(self.params) != expected:
            raise ValueError(f"{self.model_id} expects parameters {expected}")

    def __getitem__(self, name):
        return self.params[name]


def zero_crossings(t, y) -> np.ndarray:
    """Linearly interpolated times where ``y`` changes sign."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = np.nonzero(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    y0, y1 = y[idx], y[idx + 1]
    return t[idx] - y0 * (t[idx + 1] - t[idx]) / (y1 - y0)


def zero_crossing_frequency(t, y, center=None) -> float:
    """Angular frequency pi / <spacing between successive crossings>.

    ``center`` defaults to a linear trend fitted to the series.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if center is None:
        center = np.polyval(np.polyfit(t, y, 1), t)
    tc = zero_crossings(t, y - center)
    if tc.size < 3:
        raise FitError(f"only {tc.size} zero crossings; cannot estimate a frequency")
    return float(np.pi / np.mean(np.diff(tc)))


def extrema_frequency(t, y) -> float:
    """Angular frequency from the spacing of the local extrema of ``y``.

    Extrema are zero crossings of dy/dt, so a slow monotone drift under the
    oscillation does not shift them the way it shifts crossings of y itself.
    """
    t = np.asarray(t, dtype=float)
    tc = zero_crossings(t, np.gradient(np.asarray(y, dtype=float), t))
    if tc.size < 3:
        raise FitError(f"only {tc.size} extrema; cannot estimate a frequency")
    return float(np.pi / np.mean(np.diff(tc)))


def _half_period_samples(t, dev):
    """Half the oscillation period in samples, or 1 if no period is visible."""
    dt = np.mean(np.diff(t))
    for centre in (np.zeros_like(dev), np.polyval(np.polyfit(t, dev, 1), t)):
        tc = zero_crossings(t, dev - centre)
        if tc.size >= 3:
            period = 2 * np.mean(np.diff(tc))
            return max(1, int(0.5 * period / dt))
    return 1


def oscillation_peaks(t, y, y_inf) -> np.ndarray:
    """Indices of local maxima of |y - y_inf| at least half a period apart."""
    t = np.asarray(t, dtype=float)
    dev = np.asarray(y, dtype=float) - y_inf
    dist = _half_period_samples(t, dev)
    pk, _ = find_peaks(np.abs(dev), distance=dist)
    return pk


def fit_exponential_approach(t, y, y_inf, window_start=None) -> FitResult:
    """Decay rate of |y - y_inf| from a log-linear fit through its peaks.

    The default window keeps t > 0.3 t_max.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    t0 = 0.3 * t[-1] if window_start is None else window_start
    sel = t > t0
    tw, yw = t[sel], y[sel]
    pk = oscillation_peaks(tw, yw, y_inf)
    dev = np.abs(yw[pk] - y_inf)
    pk = pk[dev > 0]
    if pk.size < 4:
        raise FitError(f"only {pk.size} peaks in window t > {t0:g}; need 4")
    reg = stats.linregress(tw[pk], np.log(np.abs(yw[pk] - y_inf)))
    resid = np.log(np.abs(yw[pk] - y_inf)) - (reg.intercept + reg.slope * tw[pk])
    return FitResult(
        "exp_approach",
        {"Gamma": -reg.slope, "log_amplitude": reg.intercept},
        {"Gamma": reg.stderr, "log_amplitude": reg.intercept_stderr},
        float(np.linalg.norm(resid)),
        (float(tw[0]), float(tw[-1])),
    )


def _damped_model(p, t, y_inf, sign):
    A, b, gam, nu, phi = p
    return y_inf + A * t ** (sign * b) * np.exp(-gam * t) * np.cos(nu * t + phi)


def _refine_frequency(t, dev, nu0, gam0):
    """Best frequency on a grid around ``nu0`` by linear least squares in (cos, sin)."""
    best = (np.inf, nu0, 0.0, 0.0)
    env = np.exp(-gam0 * t)
    for nu in nu0 * np.linspace(0.8, 1.2, 81):
        basis = np.column_stack([env * np.cos(nu * t), env * np.sin(nu * t)])
        coef, *_ = np.linalg.lstsq(basis, dev, rcond=None)
        r = np.sum((basis @ coef - dev) ** 2)
        if r < best[0]:
            best = (r, nu, coef[0], coef[1])
    _, nu, c, s = best
    # c cos + s sin = A cos(nu t + phi) with A cos phi = c, A sin phi = -s
    return nu, float(np.hypot(c, s)), float(np.arctan2(-s, c))


def one_period_baseline(t, y, nu) -> tuple[np.ndarray, np.ndarray]:
    """Moving average of ``y`` over one period 2 pi / nu.

    Returns ``(mask, baseline)`` where the mask drops the half period at each
    end that the window cannot cover.
    """
    t = np.asarray(t, dtype=float)
    dt = np.mean(np.diff(t))
    width = max(1, int(round(2 * np.pi / nu / dt)))
    base = uniform_filter1d(np.asarray(y, dtype=float), size=width, mode="nearest")
    half = 0.5 * width * dt
    mask = (t >= t[0] + half) & (t <= t[-1] - half)
    return mask, base


def fit_damped_oscillation(t, y, y_inf, mode="growth", t_min=TRANSIENT_CUTOFF,
                           detrend=False, max_nfev=2000) -> FitResult:
    """Least-squares fit of y_inf + A t^(+-b) e^(-Gamma t) cos(nu t + phi).

    ``mode='growth'`` uses t^(+beta), ``mode='decay'`` t^(-alpha).  The
    frequency starts from the extrema spacing and is kept within
    NU_BOUND of it, which stops a slow drift in the data from pulling
    nu to zero.  If the nonlinear solve fails, an envelope-only fit is
    returned and flagged.

    With ``detrend=True`` a one-period moving average is subtracted first
    (and y_inf added back), so only the oscillating part is fitted; this
    suits series that approach y_inf from one side while oscillating.
    """
    if mode not in ("growth", "decay"):
        raise ValueError(f"mode must be 'growth' or 'decay', got {mode!r}")
    sign = 1.0 if mode == "growth" else -1.0
    model_id = "damped_growth" if mode == "growth" else "damped_decay"
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = t >= t_min
    tw, yw = t[sel], y[sel]
    dev = yw - y_inf
    n_ext = zero_crossings(tw, np.gradient(yw, tw)).size
    if n_ext < 6:
        raise FitError(f"only {n_ext} extrema after t >= {t_min}; need 6")

    nu0 = extrema_frequency(tw, yw)
    flags = []
    if detrend:
        keep, base = one_period_baseline(tw, yw, nu0)
        tw, yw = tw[keep], (yw - base + y_inf)[keep]
        dev = yw - y_inf
        flags.append("detrended")
    try:
        gam0 = max(fit_exponential_approach(tw, yw, y_inf, window_start=tw[0]).params["Gamma"], 0.0)
    except FitError:
        gam0 = 0.0
    nu0, amp0, phi0 = _refine_frequency(tw, dev, nu0, gam0)
    p0 = np.array([amp0, 0.0, gam0, nu0, phi0])
    lo = np.array([-np.inf, -np.inf, -np.inf, nu0 * (1 - NU_BOUND), -np.inf])
    hi = np.array([np.inf, np.inf, np.inf, nu0 * (1 + NU_BOUND), np.inf])

    sol = least_squares(
        lambda p: _damped_model(p, tw, y_inf, sign) - yw,
        p0,
        bounds=(lo, hi),
        x_scale="jac",
        max_nfev=max_nfev,
    )
    names = MODEL_PARAMS[model_id]
    window = (float(tw[0]), float(tw[-1]))
    if not sol.success or not np.all(np.isfinite(sol.x)):
        env = fit_exponential_approach(tw, yw, y_inf, window_start=tw[0])
        params = dict(zip(names, [np.nan, np.nan, env["Gamma"], nu0, np.nan]))
        errs = dict(zip(names, [np.nan, np.nan, env.uncertainties["Gamma"], np.nan, np.nan]))
        return FitResult(model_id, params, errs, env.residual, window, flags + ["envelope_only"])

    p = sol.x.copy()
    if p[0] < 0:  # canonical form with positive amplitude
        p[0] = -p[0]
        p[4] += np.pi
    p[4] = (p[4] + np.pi) % (2 * np.pi) - np.pi
    dof = max(tw.size - p.size, 1)
    s2 = 2 * sol.cost / dof
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * s2
        err = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        err = np.full(p.size, np.nan)
    return FitResult(
        model_id,
        dict(zip(names, map(float, p))),
        dict(zip(names, map(float, err))),
        float(np.sqrt(2 * sol.cost)),
        window,
        flags,
    )


def fit_power_law(x, y) -> FitResult:
    """Slope and intercept of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise FitError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("power-law fit requires positive data")
    lx, ly = np.log(x), np.log(y)
    reg = stats.linregress(lx, ly)
    resid = ly - (reg.intercept + reg.slope * lx)
    return FitResult(
        "power_law",
        {"slope": reg.slope, "intercept": reg.intercept},
        {"slope": reg.stderr, "intercept": reg.intercept_stderr},
        float(np.linalg.norm(resid)),
        (float(x.min()), float(x.max())),
    )
