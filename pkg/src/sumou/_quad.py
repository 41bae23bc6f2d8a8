"""Composite Gauss-Legendre quadrature on dyadically refined panels.

The integrands here (exp(-2 phi(x) s) and its time integral) are smooth
away from a boundary layer at x = 0 whose width shrinks like a negative
power of s.  Panels with edges at upper * 2^-j resolve any such layer;
depth is grown until two successive estimates agree to a relative
tolerance.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericFailureError

GL_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)

RTOL = 1e-8
MAX_DEPTH = 60


def dyadic_nodes(upper: float, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for panels [u/2^(j+1), u/2^j], j < depth, plus the
    closing panel [0, u/2^depth]."""
    edges = upper * 2.0 ** -np.arange(depth + 1)
    lefts = np.concatenate((edges[1:], [0.0]))
    rights = edges
    half = 0.5 * (rights - lefts)
    mid = 0.5 * (rights + lefts)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    w = (half[:, None] * _WEIGHTS[None, :]).ravel()
    return x, w


def integrate_fixed(f, upper: float, depth: int) -> float:
    x, w = dyadic_nodes(upper, depth)
    return float(np.dot(w, f(x)))


def integrate_adaptive(
    f,
    upper: float,
    start_depth: int = 6,
    rtol: float = RTOL,
    max_depth: int = MAX_DEPTH,
    depth_step: int = 3,
) -> float:
    """Increase dyadic depth until successive estimates agree to ``rtol``.

    The first estimate is taken at least one step below the cap so the
    agreement test always runs.
    """
    depth = min(max(start_depth, 2), max_depth - depth_step)
    prev = integrate_fixed(f, upper, depth)
    while depth < max_depth:
        depth = min(depth + depth_step, max_depth)
        val = integrate_fixed(f, upper, depth)
        if abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
    raise NumericFailureError(
        f"dyadic quadrature did not converge by depth {max_depth} "
        f"(last estimate {prev:.6e}, upper={upper:.3e})"
    )


def layer_depth(phi, t: float, upper: float, threshold: float = 1e-3) -> int:
    """Smallest depth with phi(upper * 2^-depth) * t below ``threshold``.

    Used as the starting depth so the first estimate already resolves the
    boundary layer of exp(-2 phi(x) t) at x = 0.  Capped well below the
    depth limit; slowly vanishing shapes (rho < 1) may push the criterion
    past the cap, and then the agreement loop takes over.
    """
    cap = MAX_DEPTH - 15
    if t <= 0.0:
        return 2
    for depth in range(2, cap + 1):
        if float(phi(np.asarray([upper * 2.0 ** -depth]))[0]) * t < threshold:
            return depth
    return cap
