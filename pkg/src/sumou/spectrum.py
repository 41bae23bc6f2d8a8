"""Diffusive spectra and spectral shape functions.

The diffusive spectrum of a bead-spring network is the set of eigenvalues
of -L (nonnegative for attractive springs); their inverses are the
relaxation times.  A family of spectra indexed by size n is summarized by
a continuous shape function phi on [0, 1] with phi(k/n) ~ lambda_k, and
the leading power rho of phi at 0 controls the anomalous exponent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericFailureError, ResourceLimitError
from .graph import WeightedGraph

MAX_DENSE_EIG = 4096

# Two distinct eigenvalues are merged when their gap is below this times
# the spectral radius; dense symmetric solvers are good to ~1e-12 relative
# at the size cap, which leaves margin.
MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Consolidated diffusive spectrum: distinct ascending eigenvalues of -L
    with multiplicities.  ``n_modes`` counts modes including the zero mode.
    """

    values: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.multiplicities):
            raise ValueError("values and multiplicities must align")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing after consolidation")

    @property
    def n_modes(self) -> int:
        return int(sum(self.multiplicities))

    @property
    def zero_multiplicity(self) -> int:
        return self.multiplicities[0] if self.values and self.values[0] == 0.0 else 0

    def nonzero_flat(self) -> np.ndarray:
        """Nonzero eigenvalues with multiplicities expanded, ascending."""
        out = []
        for v, m in zip(self.values, self.multiplicities):
            if v != 0.0:
                out.extend([v] * m)
        return np.asarray(out, dtype=float)

    @property
    def lambda_max(self) -> float:
        return self.values[-1]

    @property
    def lambda_min_nonzero(self) -> float:
        for v in self.values:
            if v != 0.0:
                return v
        raise ValueError("spectrum has no nonzero modes")

    def to_json(self) -> str:
        return json.dumps(
            {"values": list(self.values), "multiplicities": list(self.multiplicities)},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Spectrum":
        doc = json.loads(text)
        return Spectrum(
            values=tuple(float(v) for v in doc["values"]),
            multiplicities=tuple(int(m) for m in doc["multiplicities"]),
        )


def consolidate(raw: np.ndarray, zero_clamp: float = 0.0) -> Spectrum:
    """Sort and merge eigenvalues whose gap is below MERGE_RTOL relative to
    their own magnitude.

    ``zero_clamp`` (a fraction of the spectral radius) zeroes near-zero
    values first; eigensolver output needs this to recover the exact zero
    mode, while closed-form spectra carry exact zeros and may hold genuine
    eigenvalues far below the radius, so they pass 0.
    """
    lam = np.sort(np.asarray(raw, dtype=float))
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if scale == 0.0:
        return Spectrum((0.0,), (max(lam.size, 1),))
    if zero_clamp > 0.0:
        lam = np.where(np.abs(lam) < zero_clamp * scale, 0.0, lam)
    values = [lam[0]]
    mults = [1]
    for v in lam[1:]:
        if v - values[-1] <= MERGE_RTOL * max(abs(v), abs(values[-1])):
            mults[-1] += 1
        else:
            values.append(v)
            mults.append(1)
    return Spectrum(tuple(float(v) for v in values), tuple(mults))


def eig_spectrum(lap: np.ndarray) -> Spectrum:
    """Diffusive spectrum of a dense Laplacian via symmetric eigensolve."""
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    if lap.shape != (n, n):
        raise ValueError("Laplacian must be square")
    if n > MAX_DENSE_EIG:
        raise ResourceLimitError(f"dense eigensolve capped at n={MAX_DENSE_EIG}, got {n}")
    if not np.allclose(lap, lap.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(lap).max())):
        raise ValueError("Laplacian must be symmetric")
    try:
        lam = np.linalg.eigvalsh(-lap)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"eigensolver failed to converge: {exc}") from exc
    return consolidate(lam, zero_clamp=MERGE_RTOL)


def graph_spectrum(g: WeightedGraph) -> Spectrum:
    return eig_spectrum(g.laplacian())


def circulant_eigenvalues(n: int, kappas) -> np.ndarray:
    """Closed-form circulant eigenvalues in natural Fourier order:
    lambda_k = 4 sum_j kappa_j sin^2(pi k j / n), k = 0..n-1.
    """
    kappas = np.asarray(list(kappas), dtype=float)
    if kappas.size >= n / 2:
        raise ValueError("need K < n/2")
    k = np.arange(n)[:, None]
    j = np.arange(1, kappas.size + 1)[None, :]
    return 4.0 * np.sin(np.pi * k * j / n) ** 2 @ kappas


def circulant_spectrum(n: int, kappas) -> Spectrum:
    return consolidate(circulant_eigenvalues(n, kappas))


def power_law_eigenvalues(rho: float, tau1: float, n: int) -> np.ndarray:
    """Generalized Rouse spectrum (k/n)^rho / tau1, k = 0..n-1."""
    if rho <= 0 or tau1 <= 0:
        raise ValueError("rho and tau1 must be positive")
    if n < 2:
        raise ValueError("need n >= 2")
    return (np.arange(n) / n) ** rho / tau1


def power_law_spectrum(rho: float, tau1: float, n: int) -> Spectrum:
    return consolidate(power_law_eigenvalues(rho, tau1, n))


def complete_spectrum(n: int, kappa: float = 1.0) -> Spectrum:
    """Closed form for the complete graph: {0, n*kappa} with mults {1, n-1}."""
    if n < 2:
        raise ValueError("need n >= 2")
    return Spectrum((0.0, float(n * kappa)), (1, n - 1))


def hypercube_spectrum(n_dims: int, kappa: float = 1.0) -> Spectrum:
    """Closed form for the hypercube: {2 k kappa} with mults C(n_dims, k).

    Unlike graph construction this has no size cap; the spectrum has only
    n_dims + 1 distinct values.
    """
    if n_dims < 1:
        raise ValueError("n_dims must be >= 1")
    values = tuple(2.0 * k * kappa for k in range(n_dims + 1))
    mults = tuple(math.comb(n_dims, k) for k in range(n_dims + 1))
    return Spectrum(values, mults)


def kronecker_sum_eigenvalues(lams1: np.ndarray, lams2: np.ndarray) -> np.ndarray:
    """All pairwise sums {lambda_i + mu_j}: the product-graph spectrum."""
    lams1 = np.asarray(lams1, dtype=float)
    lams2 = np.asarray(lams2, dtype=float)
    return (lams1[:, None] + lams2[None, :]).ravel()


@dataclass(frozen=True)
class ShapeFunction:
    """Continuous spectral shape phi on [0, 1].

    ``rho`` and ``a0`` describe the leading behavior phi(x) ~ a0 x^rho near
    0 when known analytically.  ``symmetric`` marks shapes even about
    x = 1/2 (all circulant shapes); integrals against Lebesgue measure then
    restrict to [0, 1/2] with doubled weight, which confines the boundary
    layer to x = 0.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    rho: float | None = None
    a0: float | None = None
    symmetric: bool = False
    label: str = ""

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))


def power_shape(rho: float, a0: float = 1.0) -> ShapeFunction:
    """phi(x) = a0 x^rho."""
    if rho <= 0 or a0 <= 0:
        raise ValueError("rho and a0 must be positive")
    return ShapeFunction(
        evaluator=lambda x: a0 * np.power(x, rho),
        rho=rho,
        a0=a0,
        symmetric=False,
        label=f"power(rho={rho}, a0={a0})",
    )


def circulant_shape(kappas) -> ShapeFunction:
    """phi(x) = 4 sum_j kappa_j sin^2(pi x j), the circulant symbol.

    The leading power at 0 is found from the Taylor series
    phi(x) = sum_m c_{2m} x^{2m},
    c_{2m} = (-1)^(m+1) * 2 / (2m)! * sum_j (2 pi j)^(2m) kappa_j,
    evaluated until the first non-vanishing coefficient.
    """
    kappas = np.asarray(list(kappas), dtype=float)
    j = np.arange(1, kappas.size + 1)

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        return 4.0 * np.sin(np.pi * np.multiply.outer(x, j)) ** 2 @ kappas

    rho = None
    a0 = None
    for m in range(1, kappas.size + 2):
        coeff = sum(
            kap * (-1) ** (m + 1) * 2.0 * (2.0 * np.pi * jj) ** (2 * m) / math.factorial(2 * m)
            for jj, kap in zip(j, kappas)
        )
        scale = sum(
            abs(kap) * 2.0 * (2.0 * np.pi * jj) ** (2 * m) / math.factorial(2 * m)
            for jj, kap in zip(j, kappas)
        )
        if scale > 0 and abs(coeff) > 1e-9 * scale:
            if coeff < 0:
                raise ValueError("circulant shape has negative leading coefficient (unstable)")
            rho = 2.0 * m
            a0 = float(coeff)
            break
    return ShapeFunction(
        evaluator=evaluator,
        rho=rho,
        a0=a0,
        symmetric=True,
        label=f"circulant(kappas={list(kappas)})",
    )


def rouse_shape(kappa: float = 1.0) -> ShapeFunction:
    """phi(x) = 4 kappa sin^2(pi x), the nearest-neighbor cycle shape."""
    return circulant_shape([kappa])


def linear_shape(slope: float = 1.0) -> ShapeFunction:
    """phi(x) = slope * x (rho = 1)."""
    return power_shape(1.0, slope)


def shape_sup_distance(indexed_values: np.ndarray, shape: ShapeFunction) -> float:
    """max_k |lambda_k - phi(k/n)| over the naturally indexed family.

    ``indexed_values`` must be in pre-sort natural index order (for
    circulants, Fourier order), since the shape is sampled at k/n.
    """
    lam = np.asarray(indexed_values, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("indexed_values must be a nonempty 1-d array")
    n = lam.size
    x = np.arange(n) / n
    return float(np.max(np.abs(lam - shape(x))))


def estimate_rho(shape: ShapeFunction, x_window: tuple[float, float], n_points: int = 50):
    """Least-squares power-law fit of the shape near 0.

    Fits log phi against log x over ``n_points`` geometrically spaced
    points in ``x_window``; returns (slope, exp(intercept)) = (rho, a0).
    """
    x_lo, x_hi = x_window
    if not (0.0 < x_lo < x_hi <= 0.1):
        raise ValueError("window must satisfy 0 < x_lo < x_hi <= 0.1")
    x = np.geomspace(x_lo, x_hi, n_points)
    phi = shape(x)
    if np.any(phi <= 0.0):
        raise ValueError("shape must be positive on the fit window")
    slope, intercept = np.polyfit(np.log(x), np.log(phi), 1)
    return float(slope), float(np.exp(intercept))
