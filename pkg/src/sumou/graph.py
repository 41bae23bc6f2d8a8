"""Weighted spring-connection graphs and their Laplacian matrices.

A bead-spring network is an undirected graph whose edge weights are spring
constants (units 1/time).  The Laplacian L = A - D drives the linear drift
``dx = L x dt + sigma dW``; for attractive (nonnegative) springs L is
negative semidefinite and the constant vector spans its kernel on a
connected graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

# Dense construction caps: 2^14 vertices for hypercubes, 2^16 for products.
MAX_HYPERCUBE_DIMS = 14
MAX_PRODUCT_VERTICES = 1 << 16

# Grid size for Fourier inversion of repulsive weights; trapezoid on a
# uniform grid is exact for trigonometric polynomials of degree < this.
_FOURIER_GRID = 8192


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with real spring-constant edge weights.

    Edges are (i, j, kappa) triples with i < j after normalization; at most
    one edge per vertex pair.  Negative kappa is only produced by
    :func:`repulsive_circulant` (spectral stability is re-checked when a
    process model is built from the graph).
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    label: str = ""

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for i, j, kappa in self.edges:
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n_vertices}")
            if i == j:
                raise ValueError(f"self-loop at vertex {i} not allowed")
            if not math.isfinite(kappa):
                raise ValueError(f"edge ({i},{j}) has non-finite weight")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append((key[0], key[1], float(kappa)))
        object.__setattr__(self, "edges", tuple(normalized))

    def laplacian(self) -> np.ndarray:
        """Dense Laplacian L = A - D.  Exactly symmetric by construction."""
        n = self.n_vertices
        lap = np.zeros((n, n))
        for i, j, kappa in self.edges:
            lap[i, j] += kappa
            lap[j, i] += kappa
            lap[i, i] -= kappa
            lap[j, j] -= kappa
        return lap

    def degree_weights(self) -> np.ndarray:
        """Total incident spring constant per vertex."""
        deg = np.zeros(self.n_vertices)
        for i, j, kappa in self.edges:
            deg[i] += kappa
            deg[j] += kappa
        return deg

    def to_json(self) -> str:
        doc = {
            "label": self.label,
            "n_vertices": self.n_vertices,
            "edges": [[i, j, kappa] for i, j, kappa in self.edges],
        }
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "WeightedGraph":
        doc = json.loads(text)
        return WeightedGraph(
            n_vertices=int(doc["n_vertices"]),
            edges=tuple((int(i), int(j), float(k)) for i, j, k in doc["edges"]),
            label=str(doc.get("label", "")),
        )


def rouse_cycle(n: int, kappa: float = 1.0) -> WeightedGraph:
    """Nearest-neighbor cycle on n beads, every spring constant ``kappa``.

    The closing edge (n-1, 0) makes the beads exchangeable.
    """
    if n < 3:
        raise ValueError("cycle needs n >= 3 (n=2 would duplicate the edge)")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    edges = tuple((i, (i + 1) % n, kappa) for i in range(n))
    return WeightedGraph(n, edges, label=f"rouse_cycle(n={n}, kappa={kappa})")


def circulant_chain(n: int, kappas) -> WeightedGraph:
    """Cycle with uniform j-th-neighbor springs ``kappas[j-1]`` for j = 1..K.

    Requires K < n/2 so that wrap-around never duplicates an edge.  The
    Laplacian is circulant; with all weights nonnegative the diffusive
    spectrum is 4 sum_j kappa_j sin^2(pi k j / n).
    """
    kappas = [float(k) for k in kappas]
    K = len(kappas)
    if K >= n / 2:
        raise ValueError(f"need K < n/2 (got K={K}, n={n}); wrap-around duplicates edges")
    if not all(math.isfinite(k) for k in kappas):
        raise ValueError("kappas must be finite")
    edges = []
    for j, kappa in enumerate(kappas, start=1):
        if kappa == 0.0:
            continue
        for i in range(n):
            edges.append((i, (i + j) % n, kappa))
    return WeightedGraph(n, tuple(edges), label=f"circulant_chain(n={n}, kappas={kappas})")


def repulsive_weights(order: int, grid: int = _FOURIER_GRID) -> list[float]:
    """Circulant weights whose diffusive spectrum is sin^(2*order)(pi x).

    Obtained by Fourier inversion: the symbol 4 sum_j kappa_j sin^2(pi x j)
    matches sin^(2*order)(pi x) when kappa_j = -c_j, with c_j the j-th
    Fourier cosine coefficient of the target shape.  Trapezoid sums on a
    uniform grid are exact here (the target is a trigonometric polynomial).
    Weights beyond j = order vanish; weights alternate in sign, so springs
    beyond nearest neighbors are repulsive.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.arange(grid) / grid
    target = np.sin(np.pi * x) ** (2 * order)
    weights = []
    for j in range(1, 2 * order + 1):
        c_j = np.mean(target * np.cos(2.0 * np.pi * j * x))
        weights.append(-float(c_j))
    # Coefficients above the polynomial degree are pure roundoff.
    scale = max(abs(w) for w in weights)
    return [w if abs(w) > 1e-13 * scale else 0.0 for w in weights]


def repulsive_circulant(n: int, order: int) -> WeightedGraph:
    """Circulant network with repulsive couplings tuned so the spectral
    shape function is sin^(2*order)(pi x), i.e. spectral parameter 2*order.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if 2 * order >= n / 2:
        raise ValueError(f"order {order} too large for n={n} (need 4*order < n)")
    weights = repulsive_weights(order)
    g = circulant_chain(n, weights)
    return WeightedGraph(n, g.edges, label=f"repulsive_circulant(n={n}, order={order})")


def complete_graph(n: int, kappa: float = 1.0) -> WeightedGraph:
    """All n(n-1)/2 edges present with equal weight."""
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    edges = tuple((i, j, kappa) for i in range(n) for j in range(i + 1, n))
    return WeightedGraph(n, edges, label=f"complete_graph(n={n}, kappa={kappa})")


def hypercube(n_dims: int, kappa: float = 1.0) -> WeightedGraph:
    """Hypercube on 2^n_dims bitstring vertices; edges join Hamming-1 pairs.

    The diffusive spectrum is {2 k kappa} with multiplicity C(n_dims, k).
    """
    if n_dims < 1:
        raise ValueError("n_dims must be >= 1")
    if n_dims > MAX_HYPERCUBE_DIMS:
        raise ResourceLimitError(
            f"hypercube n_dims={n_dims} exceeds cap {MAX_HYPERCUBE_DIMS} "
            f"(2^{n_dims} vertices is beyond the dense budget)"
        )
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    n = 1 << n_dims
    edges = []
    for v in range(n):
        for bit in range(n_dims):
            w = v ^ (1 << bit)
            if w > v:
                edges.append((v, w, kappa))
    return WeightedGraph(n, tuple(edges), label=f"hypercube(n_dims={n_dims}, kappa={kappa})")


def cartesian_product(g1: WeightedGraph, g2: WeightedGraph) -> WeightedGraph:
    """Cartesian (box) product; the Laplacian is the Kronecker sum L1 (+) L2.

    Vertex (a, b) maps to index a * n2 + b.  Edges join (a,b)~(a',b) for
    every edge a~a' of g1, and (a,b)~(a,b') for every edge b~b' of g2.
    """
    n1, n2 = g1.n_vertices, g2.n_vertices
    if n1 * n2 > MAX_PRODUCT_VERTICES:
        raise ResourceLimitError(
            f"product has {n1 * n2} vertices, above cap {MAX_PRODUCT_VERTICES}"
        )
    edges = []
    for i, j, kappa in g1.edges:
        for b in range(n2):
            edges.append((i * n2 + b, j * n2 + b, kappa))
    for a in range(n1):
        for i, j, kappa in g2.edges:
            edges.append((a * n2 + i, a * n2 + j, kappa))
    label = f"product({g1.label or 'g1'}, {g2.label or 'g2'})"
    return WeightedGraph(n1 * n2, tuple(edges), label=label)


def single_edge(kappa: float = 1.0) -> WeightedGraph:
    """Two beads joined by one spring (K2)."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return WeightedGraph(2, ((0, 1, float(kappa)),), label=f"single_edge(kappa={kappa})")


def looks_vertex_transitive(g: WeightedGraph) -> bool:
    """Cheap necessary test for vertex transitivity (hence exchangeability):
    every vertex must carry the same multiset of incident weights.
    """
    incident: list[list[float]] = [[] for _ in range(g.n_vertices)]
    for i, j, kappa in g.edges:
        incident[i].append(kappa)
        incident[j].append(kappa)
    ref = sorted(incident[0])
    return all(sorted(w) == ref for w in incident[1:])
