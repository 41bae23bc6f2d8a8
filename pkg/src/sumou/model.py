"""OU-sum process models.

A model is a zero-mean Gaussian law: a scaled Brownian mode plus
independent Ornstein-Uhlenbeck modes with rates ``lambdas`` and weights
``coefficients``, all started at zero.  Zero initial conditions are part
of the law; a stationary start is deliberately not offered (sums of
stationary modes do not converge as the mode count grows).

Scaling convention: the autocovariance is

    acf(t, s) = d * [ c0^2 (t ^ s)
                      + sum_k c_k^2 e^(-lambda_k |t-s|)
                        (1 - e^(-2 lambda_k (t ^ s))) / (2 lambda_k) ]

The noise scale sigma is folded into c0 and the coefficients by the
graph-based constructors (c = sigma / sqrt(n)); the ``sigma`` field
records it for provenance and serialization but is not a second
multiplier on the law.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, looks_vertex_transitive
from .spectrum import Spectrum, circulant_eigenvalues, consolidate, graph_spectrum

# Offered random coefficient distributions; both have finite fourth
# moments, which is what the robustness result requires.
RANDOM_COEFF_DISTS = ("uniform", "lognormal")


@dataclass(frozen=True)
class SOUModel:
    """Immutable OU-sum model.

    ``lambdas`` are the nonzero diffusive rates with multiplicities
    expanded, ascending; ``coefficients`` align with them.  ``c0`` weights
    the Brownian mode, ``d`` is the ambient dimension, and ``flags`` carry
    constructor warnings/markers.
    """

    lambdas: np.ndarray
    coefficients: np.ndarray
    c0: float
    sigma: float = 1.0
    d: int = 1
    flags: tuple[str, ...] = ()
    coeff_m2: float | None = None

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        coef = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if lam.size != coef.size:
            raise ValueError(
                f"{coef.size} coefficients for {lam.size} nonzero modes"
            )
        if lam.size and np.any(lam <= 0.0):
            raise ValueError("all indexed mode rates must be positive")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.d < 1:
            raise ValueError("ambient dimension d must be >= 1")
        if self.c0 < 0.0:
            raise ValueError("c0 must be nonnegative")
        mass = self.c0 ** 2 + float(np.sum(coef ** 2))
        if not np.isfinite(mass) or mass <= 0.0:
            raise ValueError("total coefficient mass must be finite and positive")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "c0", float(self.c0))

    @property
    def n_modes(self) -> int:
        """Mode count including the Brownian mode."""
        return self.lambdas.size + 1

    def mass_vector(self) -> np.ndarray:
        """Per-mode squared coefficients, Brownian mode first."""
        return np.concatenate(([self.c0 ** 2], self.coefficients ** 2))

    @property
    def total_mass(self) -> float:
        """c0^2 + sum c_k^2 (before the ambient-dimension factor)."""
        return float(np.sum(self.mass_vector()))

    @property
    def lambda_max(self) -> float:
        if self.lambdas.size == 0:
            raise ValueError("model has no nonzero modes")
        return float(self.lambdas[-1])

    @property
    def lambda_min(self) -> float:
        if self.lambdas.size == 0:
            raise ValueError("model has no nonzero modes")
        return float(self.lambdas[0])

    def with_dimension(self, d: int) -> "SOUModel":
        return SOUModel(
            self.lambdas.copy(), self.coefficients.copy(), self.c0,
            self.sigma, d, self.flags, self.coeff_m2,
        )

    def digest(self) -> str:
        """Stable hash of the law for provenance."""
        h = hashlib.sha256()
        h.update(self.lambdas.tobytes())
        h.update(self.coefficients.tobytes())
        h.update(np.float64([self.c0, self.sigma, self.d]).tobytes())
        return h.hexdigest()[:16]

    def to_json(self) -> str:
        spec = consolidate(np.concatenate(([0.0], self.lambdas)))
        doc = {
            "spectrum": {"values": list(spec.values), "multiplicities": list(spec.multiplicities)},
            "lambdas": self.lambdas.tolist(),
            "coefficients": self.coefficients.tolist(),
            "c0": self.c0,
            "sigma": self.sigma,
            "d": self.d,
            "flags": list(self.flags),
        }
        if self.coeff_m2 is not None:
            doc["coeff_m2"] = self.coeff_m2
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SOUModel":
        doc = json.loads(text)
        return SOUModel(
            lambdas=np.asarray(doc["lambdas"], dtype=float),
            coefficients=np.asarray(doc["coefficients"], dtype=float),
            c0=float(doc["c0"]),
            sigma=float(doc["sigma"]),
            d=int(doc["d"]),
            flags=tuple(doc.get("flags", ())),
            coeff_m2=doc.get("coeff_m2"),
        )


@dataclass(frozen=True)
class CoefficientMeasure:
    """Point measure on [0, 1]: mass c_k^2 at location k/n (c0^2 at 0)."""

    locations: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        if len(self.locations) != len(self.masses):
            raise ValueError("locations and masses must align")
        if any(m < 0 for m in self.masses):
            raise ValueError("masses must be nonnegative")

    @property
    def total_mass(self) -> float:
        return float(np.sum(np.asarray(self.masses)))

    def integrate(self, f) -> float:
        """Integral of a function against the measure."""
        locs = np.asarray(self.locations)
        return float(np.sum(np.asarray(f(locs), dtype=float) * np.asarray(self.masses)))

    def mass_in(self, lo: float, hi: float) -> float:
        return float(
            sum(m for x, m in zip(self.locations, self.masses) if lo <= x <= hi)
        )


def sou_model(
    spec: Spectrum,
    coefficients,
    c0: float,
    sigma: float = 1.0,
    d: int = 1,
    flags: tuple[str, ...] = (),
) -> SOUModel:
    """Assemble a model from a spectrum and explicit mode weights.

    ``coefficients`` align with the spectrum's nonzero eigenvalues after
    multiplicity expansion.  All modes start at zero.
    """
    lam = spec.nonzero_flat()
    return SOUModel(
        lambdas=lam,
        coefficients=np.asarray(coefficients, dtype=float),
        c0=c0,
        sigma=sigma,
        d=d,
        flags=flags,
    )


def pure_brownian_model(c0: float = 1.0, d: int = 1) -> SOUModel:
    """Degenerate sum: Brownian motion only."""
    return SOUModel(lambdas=np.empty(0), coefficients=np.empty(0), c0=c0, d=d)


def distinguished_model(g: WeightedGraph, sigma: float = 1.0, d: int = 1) -> SOUModel:
    """Effective model of a single bead in a spring network.

    Equivalent in law to uniform coefficients sigma/sqrt(n) on all n modes
    of the network (Brownian mode included), with the graph's diffusive
    spectrum.  Requires a connected graph; a graph that fails the
    vertex-transitivity screen is accepted but flagged, since its law is
    then the bead-averaged autocovariance rather than any single bead's.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    spec = graph_spectrum(g)
    if spec.values[0] < 0.0:
        raise ValueError(
            f"graph {g.label!r} is unstable: negative diffusive rate {spec.values[0]:.3e}"
        )
    if spec.zero_multiplicity != 1:
        raise ValueError(
            f"graph {g.label!r} is disconnected (zero eigenvalue multiplicity "
            f"{spec.zero_multiplicity})"
        )
    n = g.n_vertices
    flags = () if looks_vertex_transitive(g) else ("bead_averaged",)
    c = sigma / np.sqrt(n)
    return SOUModel(
        lambdas=spec.nonzero_flat(),
        coefficients=np.full(n - 1, c),
        c0=c,
        sigma=sigma,
        d=d,
        flags=flags,
    )


def random_coefficient_model(
    spec: Spectrum, seed: int, dist: str = "uniform", sigma: float = 1.0, d: int = 1
) -> SOUModel:
    """Model with i.i.d. random mode weights c_k = draw_k / sqrt(n).

    ``dist`` is "uniform" (uniform on [0.5, 1.5]) or "lognormal"
    (exp of a centered normal with standard deviation 0.25); both have
    finite fourth moments.  Draws are reproducible from the seed; the
    second moment of the draw distribution is recorded on the model.
    """
    if dist not in RANDOM_COEFF_DISTS:
        raise ValueError(f"dist must be one of {RANDOM_COEFF_DISTS}")
    lam = spec.nonzero_flat()
    n = lam.size + 1
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        draws = rng.uniform(0.5, 1.5, size=n)
        m2 = 13.0 / 12.0
    else:
        draws = rng.lognormal(mean=0.0, sigma=0.25, size=n)
        m2 = float(np.exp(0.125))
    c = sigma * draws / np.sqrt(n)
    return SOUModel(
        lambdas=lam,
        coefficients=c[1:],
        c0=float(c[0]),
        sigma=sigma,
        d=d,
        coeff_m2=m2,
    )


def random_string_model(n: int, kappa: float = 1.0, sigma: float = 1.0, d: int = 1) -> SOUModel:
    """Cycle model with spring constants scaled by n^2 and noise by sqrt(n).

    The rescaling pushes the anomalous window to short absolute times
    (largest relaxation time O(1/kappa), shortest O(1/(kappa n^2))); the
    model is flagged so downstream fitting knows to look near zero.
    Effective mode weights are sigma for every mode.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if kappa <= 0 or sigma <= 0:
        raise ValueError("kappa and sigma must be positive")
    lam = np.sort(circulant_eigenvalues(n, [kappa])[1:]) * n ** 2
    return SOUModel(
        lambdas=lam,
        coefficients=np.full(n - 1, float(sigma)),
        c0=float(sigma),
        sigma=sigma,
        d=d,
        flags=("short_time_anomalous",),
    )


def coefficient_measure(model: SOUModel) -> CoefficientMeasure:
    """Measure with mass c_k^2 at k/n for the k-th mode (c0^2 at 0)."""
    n = model.n_modes
    locations = tuple(k / n for k in range(n))
    masses = tuple(float(m) for m in model.mass_vector())
    return CoefficientMeasure(locations, masses)


def eigenvalue_level_measure(spec: Spectrum, sigma: float = 1.0) -> CoefficientMeasure:
    """Distinguished-model coefficient mass per distinct eigenvalue level.

    Locations are (index of distinct level) / (number of levels - 1), so a
    spectrum with levels 2 k kappa, k = 0..m, places mass C(m, k) sigma^2 / n
    at k/m.  This is the natural chart for concentration checks on spectra
    with heavy multiplicities (hypercubes), where the flat k/n chart of
    :func:`coefficient_measure` spreads every level uniformly.
    """
    n = spec.n_modes
    m = len(spec.values) - 1
    if m == 0:
        return CoefficientMeasure((0.0,), (sigma ** 2,))
    locations = tuple(i / m for i in range(m + 1))
    masses = tuple(sigma ** 2 * mult / n for mult in spec.multiplicities)
    return CoefficientMeasure(locations, masses)


def measure_convergence_diagnostic(measures, test_fns) -> np.ndarray:
    """Table of integrals of each test function against each measure.

    Row i, column j holds the integral of ``test_fns[j]`` against
    ``measures[i]``; the caller inspects Cauchy behavior down each column.
    """
    if len(measures) < 2:
        raise ValueError("need at least two measures to diagnose convergence")
    table = np.empty((len(measures), len(test_fns)))
    for i, mu in enumerate(measures):
        for j, f in enumerate(test_fns):
            table[i, j] = mu.integrate(f)
    return table
