"""Exact-in-law path sampling for OU-sum models, plus a direct
Euler-Maruyama integrator of the full bead-spring system as an
independent cross-check.

RNG contract: every path draws from its own counter-based stream keyed by
(seed, path index), so ensembles are bit-reproducible and independent of
chunking or scheduling order.  The exact sampler works in modal
coordinates and never assembles the network matrix; per mode and per grid
step it applies the exact Gaussian transition

    z -> e^(-lambda dt) z + N(0, (1 - e^(-2 lambda dt)) / (2 lambda)),

so the ensemble law on the grid is exact no matter how coarse the grid is.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .analytic import MSDCurve, _saturation
from .errors import ResourceLimitError
from .graph import WeightedGraph
from .model import SOUModel

MEMORY_BUDGET_BYTES = 2 << 30
_CHUNK_BUDGET_BYTES = 1 << 28


@dataclass(frozen=True)
class PathEnsemble:
    """Sampled paths of one coordinate component on a shared time grid."""

    times: np.ndarray
    paths: np.ndarray  # n_paths x n_times
    seed: int
    model_digest: str
    d: int = 1

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.paths, dtype=float)
        if p.ndim != 2 or p.shape[1] != t.size:
            raise ValueError("paths must be n_paths x n_times")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "paths", p)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def to_csv(self, comments: tuple[str, ...] = ()) -> str:
        """Long-format path dump: one ``path_id,t,x`` row per sample."""
        lines = [f"# {c}" for c in comments]
        lines.append(f"# seed={self.seed} model_digest={self.model_digest}")
        lines.append("path_id,t,x")
        for p in range(self.paths.shape[0]):
            for t, x in zip(self.times, self.paths[p]):
                lines.append(f"{p},{float(t)!r},{float(x)!r}")
        return "\n".join(lines) + "\n"


def _path_rng(seed: int, path_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.Philox(ss))


def _validate_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time grid must be a nonempty 1-d array")
    if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
        raise ValueError("time grid must be nonnegative and strictly increasing")
    return t


def sample_paths(
    model: SOUModel, times, n_paths: int, seed: int, chunk_size: int | None = None
) -> PathEnsemble:
    """Sample the distinguished coordinate of ``model`` exactly on ``times``.

    One ambient-dimension component is sampled (components are i.i.d.).
    Memory for the returned ensemble is capped; use :func:`ensemble_msd`
    for ensembles that only need summary statistics.
    """
    t = _validate_grid(times)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    out_bytes = n_paths * t.size * 8
    if out_bytes > MEMORY_BUDGET_BYTES:
        raise ResourceLimitError(
            f"ensemble needs {out_bytes / 2**30:.1f} GiB (> 2 GiB budget); "
            "use ensemble_msd, which accumulates MSD statistics in chunks"
        )
    paths = np.empty((n_paths, t.size))
    for lo, hi, block in _exact_chunks(model, t, n_paths, seed, chunk_size):
        paths[lo:hi] = block
    return PathEnsemble(t, paths, seed, model.digest(), model.d)


def _exact_chunks(model: SOUModel, t: np.ndarray, n_paths: int, seed: int, chunk_size):
    """Yield (lo, hi, paths_block) for the exact modal sampler."""
    lam = model.lambdas
    coef = model.coefficients
    k = lam.size
    n_steps = t.size
    if chunk_size is None:
        chunk_size = max(1, _CHUNK_BUDGET_BYTES // (8 * max(1, n_steps * (k + 1))))
    deltas = np.diff(np.concatenate(([0.0], t)))
    decays = np.exp(-lam[None, :] * deltas[:, None])
    sds = np.sqrt(deltas[:, None] * _saturation(2.0 * lam[None, :] * deltas[:, None]))
    b_sds = np.sqrt(deltas)
    for lo in range(0, n_paths, chunk_size):
        hi = min(lo + chunk_size, n_paths)
        m = hi - lo
        noise = np.empty((m, n_steps, k + 1))
        for p in range(lo, hi):
            noise[p - lo] = _path_rng(seed, p).standard_normal((n_steps, k + 1))
        z = np.zeros((m, k))
        b = np.zeros(m)
        block = np.empty((m, n_steps))
        for step in range(n_steps):
            b += b_sds[step] * noise[:, step, 0]
            z = z * decays[step] + sds[step] * noise[:, step, 1:]
            block[:, step] = model.c0 * b + z @ coef
        yield lo, hi, block


def ensemble_msd(
    model: SOUModel, times, n_paths: int, seed: int, chunk_size: int | None = None
) -> MSDCurve:
    """Monte Carlo MSD accumulated chunk-by-chunk (no path storage).

    Standard errors use the Gaussian fourth-moment identity
    Var(x^2) = 2 (E x^2)^2; the ambient-dimension factor multiplies both.
    """
    t = _validate_grid(times)
    sum_sq = np.zeros(t.size)
    for _, _, block in _exact_chunks(model, t, n_paths, seed, chunk_size):
        # accumulate strictly in path-index order so the reduction is
        # independent of chunk boundaries (bit-stable reruns)
        for row in block:
            sum_sq += row ** 2
    mean_sq = sum_sq / n_paths
    values = model.d * mean_sq
    stderr = values * np.sqrt(2.0 / n_paths)
    return MSDCurve(t, values, "monte-carlo", stderr)


def euler_full_network(
    g: WeightedGraph,
    sigma: float,
    dt: float,
    t_end: float,
    n_paths: int,
    seed: int,
    bead_index: int = 0,
    n_record: int = 25,
) -> PathEnsemble:
    """Euler-Maruyama on the full bead system dx = L x dt + sigma dW.

    Bias is O(dt); this integrator exists to validate the modal reduction,
    not for production sampling.  Records the chosen bead at ``n_record``
    evenly spaced step times (plus t = 0).  Requires dt <= 0.1 / lambda_max
    for a comfortable stability margin.
    """
    n = g.n_vertices
    if n > 256:
        raise ResourceLimitError(f"full-network integrator capped at n=256, got {n}")
    if sigma <= 0.0 or dt <= 0.0 or t_end <= dt:
        raise ValueError("need sigma > 0, dt > 0, t_end > dt")
    if not (0 <= bead_index < n):
        raise ValueError("bead_index out of range")
    lap = g.laplacian()
    lam_max = float(np.max(np.linalg.eigvalsh(-lap)))
    if lam_max > 0.0 and dt > 0.1 / lam_max:
        raise ValueError(
            f"dt={dt} too large for stability: need dt <= 0.1/lambda_max = {0.1 / lam_max:.3e}"
        )
    n_steps = int(round(t_end / dt))
    record_steps = np.unique(np.linspace(0, n_steps, n_record + 1).round().astype(int))
    t = record_steps * dt
    step_map = {int(s): i for i, s in enumerate(record_steps)}

    propagator = np.eye(n) + dt * lap
    noise_sd = sigma * np.sqrt(dt)
    chunk_size = max(1, _CHUNK_BUDGET_BYTES // (8 * n_steps * n))
    paths = np.empty((n_paths, t.size))
    for lo in range(0, n_paths, chunk_size):
        hi = min(lo + chunk_size, n_paths)
        m = hi - lo
        noise = np.empty((m, n_steps, n))
        for p in range(lo, hi):
            noise[p - lo] = _path_rng(seed, p).standard_normal((n_steps, n))
        x = np.zeros((m, n))
        if 0 in step_map:
            paths[lo:hi, step_map[0]] = x[:, bead_index]
        for step in range(1, n_steps + 1):
            x = x @ propagator.T + noise_sd * noise[:, step - 1, :]
            if step in step_map:
                paths[lo:hi, step_map[step]] = x[:, bead_index]
    digest = hashlib.sha256(
        f"euler:{g.to_json()}:{sigma}:{dt}:{t_end}:{bead_index}".encode()
    ).hexdigest()[:16]
    return PathEnsemble(t, paths, seed, digest, 1)


def center_of_mass_paths(
    g: WeightedGraph, sigma: float, times, n_paths: int, seed: int
) -> PathEnsemble:
    """Sample the center of mass of a network, via its modal representation.

    The zero mode projects onto the constant vector, so the center of mass
    is exactly Brownian with variance sigma^2 t / n; sampling it needs no
    other mode.
    """
    t = _validate_grid(times)
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    n = g.n_vertices
    scale = sigma / np.sqrt(n)
    deltas = np.diff(np.concatenate(([0.0], t)))
    sds = scale * np.sqrt(deltas)
    paths = np.empty((n_paths, t.size))
    for p in range(n_paths):
        steps = sds * _path_rng(seed, p).standard_normal(t.size)
        paths[p] = np.cumsum(steps)
    digest = hashlib.sha256(f"com:{g.to_json()}:{sigma}".encode()).hexdigest()[:16]
    return PathEnsemble(t, paths, seed, digest, 1)
