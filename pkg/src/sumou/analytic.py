"""Exact and limiting second-order statistics of OU-sum models.

Finite-mode autocovariances are closed-form sums; limiting curves are
quadratures of the same integrand against a shape function and a weight
measure.  All mean-squared displacements start from zero initial
conditions, so MSD(t) is an integral of a nonnegative function and every
analytic curve is nondecreasing.

Convention: all quadratic statistics carry the factor e^(-2 phi(x) s)
matching the exact mode formula (variance of a zero-start OU mode with
rate lambda is (1 - e^(-2 lambda t)) / (2 lambda)); large-s asymptotics
therefore substitute 2 a0 where the leading shape power is a0 x^rho.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .errors import ResourceLimitError
from .graph import WeightedGraph
from .model import CoefficientMeasure, SOUModel
from .spectrum import MERGE_RTOL, ShapeFunction

MAX_TRACE_N = 512


@dataclass(frozen=True)
class MSDCurve:
    """Sampled mean-squared displacement with provenance."""

    times: np.ndarray
    values: np.ndarray
    provenance: str  # analytic-finite | analytic-limit | monte-carlo
    stderr: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values must align")
        if t.size and t[0] < 0.0:
            raise ValueError("times must be nonnegative")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(v < 0.0):
            raise ValueError("MSD values must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=float)
            if se.shape != t.shape:
                raise ValueError("stderr must align with times")
            object.__setattr__(self, "stderr", se)

    def scaled(self, factor: float) -> "MSDCurve":
        se = None if self.stderr is None else self.stderr * factor
        return MSDCurve(self.times, self.values * factor, self.provenance, se)

    def to_csv(self, comments: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        buf.write(f"# provenance={self.provenance}\n")
        if self.stderr is None:
            buf.write("t,msd\n")
            for t, v in zip(self.times, self.values):
                buf.write(f"{float(t)!r},{float(v)!r}\n")
        else:
            buf.write("t,msd,stderr\n")
            for t, v, s in zip(self.times, self.values, self.stderr):
                buf.write(f"{float(t)!r},{float(v)!r},{float(s)!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "MSDCurve":
        provenance = "analytic-finite"
        rows = []
        header = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("provenance="):
                    provenance = body.split("=", 1)[1]
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(tok) for tok in line.split(",")])
        if header is None or not rows:
            raise ValueError("CSV has no data rows")
        data = np.asarray(rows)
        stderr = data[:, 2] if data.shape[1] > 2 else None
        return MSDCurve(data[:, 0], data[:, 1], provenance, stderr)


@dataclass(frozen=True)
class DiracMeasure:
    """Point mass used as a limiting weight measure."""

    location: float
    mass: float = 1.0


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Large-t regime of the limiting MSD for a shape with leading power rho."""

    nu: float
    regime: str  # power | logarithmic | bounded
    prefactor: float | None
    description: str


@dataclass(frozen=True)
class TightnessCheck:
    lhs: float
    rhs: float
    passed: bool


def _saturation(u: np.ndarray) -> np.ndarray:
    """(1 - e^-u) / u, the relative saturation of a mode; -> 1 as u -> 0."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = u != 0.0
    out[nz] = -np.expm1(-u[nz]) / u[nz]
    return out


def _mode_msd(lam: np.ndarray, t) -> np.ndarray:
    """(1 - e^(-2 lambda t)) / (2 lambda) for strictly positive rates.

    expm1 keeps the unsaturated branch exact and the saturated branch an
    exact constant, so MSD curves are nondecreasing to the last ulp.
    """
    return -np.expm1(-2.0 * lam * t) / (2.0 * lam)


def acf_finite(model: SOUModel, t: float, s: float) -> float:
    """Exact autocovariance E[x(t) x(s)] of a finite OU-sum model.

    Symmetric in (t, s); mode terms use expm1 so that nearly unsaturated
    modes (lambda * min(t,s) tiny) lose no precision to cancellation.
    """
    if t < 0.0 or s < 0.0:
        raise ValueError("times must be nonnegative")
    m = min(t, s)
    gap = abs(t - s)
    lam = model.lambdas
    c2 = model.coefficients ** 2
    mode_sum = float(np.sum(c2 * np.exp(-lam * gap) * _mode_msd(lam, m)))
    return model.d * (model.c0 ** 2 * m + mode_sum)


def msd_finite(model: SOUModel, times) -> MSDCurve:
    """Exact MSD curve of a finite model on an ascending positive grid."""
    t = np.asarray(times, dtype=float)
    if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be positive and ascending")
    lam = model.lambdas[None, :]
    c2 = (model.coefficients ** 2)[None, :]
    tt = t[:, None]
    mode_sum = np.sum(c2 * _mode_msd(lam, tt), axis=1)
    values = model.d * (model.c0 ** 2 * t + mode_sum)
    return MSDCurve(t, values, "analytic-finite")


def increment_variance(model: SOUModel, t: float, s: float) -> float:
    """Exact Var(x(t) - x(s)), evaluated without catastrophic cancellation.

    Per mode: (c^2 / (2 lambda)) (1 - e^(-lambda gap))
              [2 - e^(-2 lambda min) (1 - e^(-lambda gap))].
    """
    if t < 0.0 or s < 0.0:
        raise ValueError("times must be nonnegative")
    m = min(t, s)
    gap = abs(t - s)
    lam = model.lambdas
    c2 = model.coefficients ** 2
    one_minus = -np.expm1(-lam * gap)
    mode = c2 / (2.0 * lam) * one_minus * (2.0 - np.exp(-2.0 * lam * m) * one_minus)
    return model.d * (model.c0 ** 2 * gap + float(np.sum(mode)))


def tightness_bound_check(model: SOUModel, t: float, s: float) -> TightnessCheck:
    """Fourth-moment increment bound: by Gaussianity the fourth moment is
    3 Var^2, and Var <= total mass * |t - s|, so the left side can never
    exceed 3 (d * mass)^2 (t - s)^2 beyond roundoff.
    """
    lhs = 3.0 * increment_variance(model, t, s) ** 2
    rhs = 3.0 * (model.d * model.total_mass) ** 2 * (t - s) ** 2
    return TightnessCheck(lhs, rhs, lhs <= rhs * (1.0 + 1e-12))


def _domain(shape: ShapeFunction) -> tuple[float, float]:
    """Integration domain and weight: symmetric shapes restrict to
    [0, 1/2] with doubled weight so the only boundary layer sits at 0."""
    return (0.5, 2.0) if shape.symmetric else (1.0, 1.0)


def _msd_integrand(shape: ShapeFunction, t: float):
    def f(x):
        u = 2.0 * shape(x) * t
        return t * _saturation(u)

    return f


def msd_limit(shape: ShapeFunction, times, measure="lebesgue") -> MSDCurve:
    """Limiting MSD sigma(t) = integral of (1 - e^(-2 phi(x) t)) / (2 phi(x))
    against the weight measure.

    ``measure`` is "lebesgue", a :class:`DiracMeasure`, or a tabulated
    :class:`~sumou.model.CoefficientMeasure`.  The integrand equals t where
    phi vanishes (removable singularity), so atom measures may sit at 0.
    """
    t_arr = np.asarray(times, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(np.diff(t_arr) <= 0.0):
        raise ValueError("times must be positive and ascending")
    values = np.empty_like(t_arr)
    if isinstance(measure, str):
        if measure != "lebesgue":
            raise ValueError(f"unknown measure {measure!r}")
        upper, weight = _domain(shape)
        for i, t in enumerate(t_arr):
            depth = _quad.layer_depth(shape, t, upper)
            values[i] = weight * _quad.integrate_adaptive(
                _msd_integrand(shape, t), upper, start_depth=depth
            )
    elif isinstance(measure, DiracMeasure):
        phi = float(shape(np.asarray([measure.location]))[0])
        for i, t in enumerate(t_arr):
            values[i] = measure.mass * t * float(_saturation(np.asarray([2.0 * phi * t]))[0])
    elif isinstance(measure, CoefficientMeasure):
        locs = np.asarray(measure.locations, dtype=float)
        masses = np.asarray(measure.masses, dtype=float)
        phi = shape(locs)
        for i, t in enumerate(t_arr):
            values[i] = float(np.sum(masses * t * _saturation(2.0 * phi * t)))
    else:
        raise ValueError(f"unsupported measure {measure!r}")
    return MSDCurve(t_arr, values, "analytic-limit")


def phi_laplace(shape: ShapeFunction, s: float) -> float:
    """Laplace integral Phi(s) = integral of e^(-2 phi(x) s) over [0, 1].

    Phi(0) = 1 exactly (total Lebesgue mass).  For phi ~ a0 x^rho the
    large-s behavior is (2 a0 s)^(-1/rho) Gamma(1/rho) / rho per boundary
    layer; symmetric shapes have layers at both band edges, handled by the
    folded domain.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 1.0
    upper, weight = _domain(shape)
    depth = _quad.layer_depth(shape, s, upper)

    def f(x):
        return np.exp(-2.0 * shape(x) * s)

    return weight * _quad.integrate_adaptive(f, upper, start_depth=depth)


def msd_limit_product(shape: ShapeFunction, dims: int, times) -> MSDCurve:
    """Limiting MSD for a D-fold product network with per-axis shape ``shape``.

    Uses the product identity Phi_D(s) = Phi_1(s)^D and integrates
    sigma(t) = integral_0^t Phi_1(s)^D ds by the same panel quadrature in s
    (the s-integrand is smooth and monotone, with no boundary layer).
    """
    if dims < 1:
        raise ValueError("dims must be >= 1")
    t_arr = np.asarray(times, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(np.diff(t_arr) <= 0.0):
        raise ValueError("times must be positive and ascending")
    values = np.empty_like(t_arr)
    for i, t in enumerate(t_arr):
        def f(s_nodes):
            return np.asarray([phi_laplace(shape, s) ** dims for s in s_nodes])

        start = max(4, int(math.ceil(math.log2(max(t, 1.0)))) + 4)
        values[i] = _quad.integrate_adaptive(f, t, start_depth=start)
    return MSDCurve(t_arr, values, "analytic-limit")


def msd_limit_product_tensor(shape: ShapeFunction, times, depth: int = 12) -> MSDCurve:
    """Two-axis product MSD by direct tensor quadrature over [0,1]^2.

    Independent route for cross-checking :func:`msd_limit_product`; fixed
    dyadic depth per axis.
    """
    t_arr = np.asarray(times, dtype=float)
    upper, weight = _domain(shape)
    x, w = _quad.dyadic_nodes(upper, depth)
    phi = shape(x)
    pair = phi[:, None] + phi[None, :]
    ww = w[:, None] * w[None, :]
    values = np.empty_like(t_arr)
    for i, t in enumerate(t_arr):
        values[i] = weight ** 2 * float(np.sum(ww * t * _saturation(2.0 * pair * t)))
    return MSDCurve(t_arr, values, "analytic-limit")


def asymptotic_prediction(rho: float, a0: float) -> AsymptoticPrediction:
    """Large-t regime of the limiting MSD when phi ~ a0 x^rho at 0 and the
    weight measure is Lebesgue.

    For rho > 1 the MSD grows like C t^(1 - 1/rho) with
    C = Gamma(1/rho) / (rho (2 a0)^(1/rho) (1 - 1/rho)) per boundary layer
    (shapes symmetric about 1/2 contribute two layers, doubling C).
    rho = 1 gives logarithmic growth with coefficient 1 / (2 a0); rho < 1
    gives a bounded MSD.
    """
    if rho <= 0.0 or a0 <= 0.0:
        raise ValueError("rho and a0 must be positive")
    if rho > 1.0:
        nu = 1.0 - 1.0 / rho
        pref = math.gamma(1.0 / rho) / (rho * (2.0 * a0) ** (1.0 / rho) * nu)
        return AsymptoticPrediction(
            nu, "power", pref, f"MSD ~ {pref:.6g} * t^{nu:.6g} per boundary layer"
        )
    if rho == 1.0:
        pref = 1.0 / (2.0 * a0)
        return AsymptoticPrediction(
            0.0, "logarithmic", pref, f"MSD ~ {pref:.6g} * ln t per boundary layer"
        )
    return AsymptoticPrediction(0.0, "bounded", None, "MSD bounded for all time")


def trace_msd(g: WeightedGraph, sigma: float, times, d: int = 1) -> MSDCurve:
    """Per-bead MSD of a network via the matrix-exponential trace identity:
    E[x . x] / n = (sigma^2 / n) sum_k integral_0^t e^(-2 lambda_k (t-r)) dr,
    evaluated in closed form mode by mode.

    Independent route for cross-checking the effective-model reduction.
    Zero modes (one per connected component) each contribute sigma^2 t / n.
    """
    n = g.n_vertices
    if n > MAX_TRACE_N:
        raise ResourceLimitError(f"trace MSD capped at n={MAX_TRACE_N}, got {n}")
    lam = np.linalg.eigvalsh(-g.laplacian())
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if scale > 0.0:
        lam = np.where(np.abs(lam) < MERGE_RTOL * scale, 0.0, lam)
    t = np.asarray(times, dtype=float)
    tt = t[:, None]
    nonzero = lam[lam > 0.0][None, :]
    n_zero = int(np.sum(lam == 0.0))
    mode_sum = np.sum(_mode_msd(nonzero, tt), axis=1)
    values = d * sigma ** 2 / n * (n_zero * t + mode_sum)
    return MSDCurve(t, values, "analytic-finite")
