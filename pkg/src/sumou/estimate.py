"""MSD curves from ensembles, exponent fitting, and regime profiling.

The anomalous exponent nu is operationalized as the slope of a weighted
least-squares fit of log MSD against log t over a window.  Default
windows hang off the relaxation times: the anomalous regime lives between
tau_1 = 1/lambda_max and tau_N = 1/lambda_min, with decade-wide offsets
keeping the fit clear of the crossovers.
"""

from __future__ import annotations

import json
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .analytic import MSDCurve, msd_finite
from .model import SOUModel
from .simulate import PathEnsemble

MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class ExponentFit:
    """Power-law fit MSD ~ e^intercept * t^nu over a time window."""

    nu: float
    intercept: float
    window: tuple[float, float]
    stderr_nu: float
    r_squared: float
    regime_label: str = "intermediate"

    def to_json(self) -> str:
        return json.dumps(
            {
                "nu": self.nu,
                "intercept": self.intercept,
                "window": list(self.window),
                "stderr_nu": self.stderr_nu,
                "r_squared": self.r_squared,
                "regime_label": self.regime_label,
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class Windows:
    """Default fitting windows derived from the relaxation times."""

    short: tuple[float, float]
    intermediate: tuple[float, float] | None
    long: tuple[float, float]
    tau1: float
    tau_n: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProfileCheck:
    """Fitted exponents over the three default regimes."""

    short: ExponentFit
    intermediate: ExponentFit
    long: ExponentFit

    @property
    def exponents(self) -> tuple[float, float, float]:
        return (self.short.nu, self.intermediate.nu, self.long.nu)


def msd_from_ensemble(ensemble: PathEnsemble) -> MSDCurve:
    """Ensemble-average MSD: mean of squared displacement per grid time.

    Standard errors use the Gaussian fourth-moment identity
    Var(x^2) = 2 (E x^2)^2 (the law is Gaussian by construction); a
    single-path ensemble gets no stderr.
    """
    mean_sq = np.mean(ensemble.paths ** 2, axis=0)
    values = ensemble.d * mean_sq
    if ensemble.n_paths < 2:
        _warnings.warn("single-path ensemble: stderr omitted", stacklevel=2)
        stderr = None
    else:
        stderr = values * np.sqrt(2.0 / ensemble.n_paths)
    return MSDCurve(ensemble.times, values, "monte-carlo", stderr)


def fit_exponent(
    curve: MSDCurve, window: tuple[float, float], regime_label: str = "intermediate"
) -> ExponentFit:
    """Weighted log-log least squares over points strictly inside ``window``.

    Weights come from the curve's standard errors when present (delta
    method on the log), else are uniform.  Needs at least 8 points with
    positive values.
    """
    t_lo, t_hi = window
    if not (0.0 < t_lo < t_hi):
        raise ValueError("window must satisfy 0 < t_lo < t_hi")
    mask = (curve.times > t_lo) & (curve.times < t_hi)
    if int(np.sum(mask)) < MIN_FIT_POINTS:
        raise ValueError(
            f"need >= {MIN_FIT_POINTS} points strictly inside window, got {int(np.sum(mask))}"
        )
    t = curve.times[mask]
    v = curve.values[mask]
    if np.any(v <= 0.0):
        raise ValueError("all values in the fit window must be positive")
    x = np.log(t)
    y = np.log(v)
    if curve.stderr is not None and np.all(curve.stderr[mask] > 0.0):
        w = (v / curve.stderr[mask]) ** 2
        known_var = True
    else:
        w = np.ones_like(x)
        known_var = False
    wsum = np.sum(w)
    xbar = np.sum(w * x) / wsum
    ybar = np.sum(w * y) / wsum
    sxx = np.sum(w * (x - xbar) ** 2)
    sxy = np.sum(w * (x - xbar) * (y - ybar))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(w * resid ** 2))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if known_var:
        stderr_nu = float(np.sqrt(1.0 / sxx))
    else:
        dof = max(x.size - 2, 1)
        stderr_nu = float(np.sqrt(ss_res / dof / sxx))
    return ExponentFit(
        nu=float(slope),
        intercept=float(intercept),
        window=(float(t_lo), float(t_hi)),
        stderr_nu=stderr_nu,
        r_squared=float(r_squared),
        regime_label=regime_label,
    )


def default_windows(model: SOUModel) -> Windows:
    """Decade-offset windows around tau_1 = 1/lambda_max, tau_N = 1/lambda_min.

    The intermediate window is dropped (with a warning) when the spectrum
    has insufficient scale separation for an anomalous regime to show.
    """
    if model.lambdas.size == 0:
        raise ValueError("model has no nonzero modes")
    tau1 = 1.0 / model.lambda_max
    tau_n = 1.0 / model.lambda_min
    short = (1e-3 * tau1, 1e-1 * tau1)
    long = (10.0 * tau_n, 1e3 * tau_n)
    notes: tuple[str, ...] = ()
    if 10.0 * tau1 >= 0.1 * tau_n:
        intermediate = None
        notes = ("insufficient scale separation: no intermediate window",)
    else:
        intermediate = (10.0 * tau1, 0.1 * tau_n)
    return Windows(short, intermediate, long, tau1, tau_n, notes)


def _window_grid(window: tuple[float, float], n_points: int) -> np.ndarray:
    # Strictly interior geometric grid; endpoints excluded so fits never
    # touch the window boundary.
    return np.geomspace(window[0], window[1], n_points + 2)[1:-1]


def profile_check(model: SOUModel, points_per_window: int = 24) -> ProfileCheck:
    """Fit the exponent over the three default windows of a finite model.

    Requires scale separation tau_N / tau_1 >= 1e4.  For models with a
    Brownian mode the short and long fits should both come out diffusive
    (nu = 1); the intermediate fit carries the anomalous exponent.
    """
    win = default_windows(model)
    if win.tau_n / win.tau1 < 1e4:
        raise ValueError(
            f"scale separation tau_N/tau_1 = {win.tau_n / win.tau1:.1f} < 1e4; "
            "use a larger network"
        )
    assert win.intermediate is not None
    fits = {}
    for label, window in (
        ("short", win.short),
        ("intermediate", win.intermediate),
        ("long", win.long),
    ):
        grid = _window_grid(window, points_per_window)
        curve = msd_finite(model, grid)
        fits[label] = fit_exponent(curve, window, regime_label=label)
    return ProfileCheck(fits["short"], fits["intermediate"], fits["long"])


def log_growth_comparison(curve: MSDCurve, nu_grid=None) -> dict:
    """Compare a logarithmic model against pure power laws on a curve.

    Linear least squares of the values on ln t versus on t^nu for each nu
    in the grid; returns the r^2 of the log model, the best power-law r^2,
    and the best nu.  Logarithmic growth is diagnosed by model comparison
    because a finite-window slope cannot separate small nu from ln t.
    """
    if nu_grid is None:
        nu_grid = np.arange(0.05, 1.0001, 0.05)
    t = curve.times
    v = curve.values

    def linear_r2(feature):
        a = np.vstack([np.ones_like(feature), feature]).T
        coef, *_ = np.linalg.lstsq(a, v, rcond=None)
        resid = v - a @ coef
        ss_res = float(np.sum(resid ** 2))
        ss_tot = float(np.sum((v - np.mean(v)) ** 2))
        return 1.0 - ss_res / ss_tot

    r2_log = linear_r2(np.log(t))
    r2_power = [(linear_r2(t ** nu), float(nu)) for nu in nu_grid]
    best_r2, best_nu = max(r2_power)
    return {"r2_log": r2_log, "r2_power_best": best_r2, "nu_power_best": best_nu}
