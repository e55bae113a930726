"""Symmetric quadrature rules on triangles (barycentric) and Gauss rules on segments."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (q, 3) barycentric coordinates
    weights: np.ndarray  # (q,), sums to 1; multiply by |T|
    degree: int

    def __post_init__(self):
        if not np.allclose(self.points.sum(axis=1), 1.0, rtol=0, atol=1e-15):
            raise ValueError("barycentric coordinates must sum to 1")
        if abs(self.weights.sum() - 1.0) > 1e-14:
            raise ValueError("weights must sum to 1")

    def map_to(self, vertices) -> np.ndarray:
        """Physical quadrature points on a triangle (or batch of triangles)."""
        return np.einsum("qi,...ik->...qk", self.points, np.asarray(vertices, dtype=float))

    def integrate(self, f, vertices) -> float:
        v = np.asarray(vertices, dtype=float)
        x = self.map_to(v)
        area = 0.5 * abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
        return float(area * np.dot(self.weights, f(x[:, 0], x[:, 1])))


def _orbit(*coords) -> list[tuple[float, float, float]]:
    if len(coords) == 1:
        (a,) = coords
        return sorted(set(permutations((a, a, 1 - 2 * a))), reverse=True)
    a, b = coords
    return sorted(set(permutations((a, b, 1 - a - b))), reverse=True)


def _rule(orbits, degree: int) -> QuadratureRule:
    pts, wts = [], []
    for coords, w in orbits:
        orb = _orbit(*coords)
        pts.extend(orb)
        wts.extend([w] * len(orb))
    pts = np.array(pts)
    # recompute the last barycentric coordinate so each row sums to 1 exactly in floats
    pts[:, 2] = 1.0 - pts[:, 0] - pts[:, 1]
    return QuadratureRule(pts, np.array(wts), degree)


CENTROID = QuadratureRule(np.array([[1 / 3, 1 / 3, 1 - 2 / 3]]), np.array([1.0]), 1)

# edge midpoints: exact for quadratics
EDGE_MIDPOINT = QuadratureRule(
    np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
    np.array([1 / 3, 1 / 3, 1 / 3]),
    2,
)

# Dunavant's 6-point rule, coordinates refined to full double precision
DUNAVANT4 = _rule(
    [
        ((0.4459484909159648863183293,), 0.2233815896780114656950070),
        ((0.09157621350977074345957146,), 0.1099517436553218676383263),
    ],
    4,
)

# Dunavant's 12-point rule
DUNAVANT6 = _rule(
    [
        ((0.0630890144915022283403316,), 0.05084490637020681692093681),
        ((0.2492867451709104212916386,), 0.1167862757263793660252896),
        ((0.05314504984481694735324967, 0.3103524510337844054166077), 0.08285107561837357519355346),
    ],
    6,
)

_RULES = {1: CENTROID, 2: EDGE_MIDPOINT, 4: DUNAVANT4, 6: DUNAVANT6}


def triangle_rule(degree: int) -> QuadratureRule:
    """Cheapest shipped rule exact for polynomials of total degree ``degree``."""
    for d in sorted(_RULES):
        if d >= degree:
            return _RULES[d]
    raise ValueError(f"no triangle rule of degree {degree}; highest available is {max(_RULES)}")


def barycentric_monomial_integral(a: int, b: int, c: int, area: float = 1.0) -> float:
    """Closed form of the integral of l1^a l2^b l3^c over a triangle of the given area."""
    return 2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)


def gauss_segment(num_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in [0, 1] and weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(num_points)
    return 0.5 * (x + 1.0), 0.5 * w


def line_integral(f, p, q, num_points: int = 4) -> float:
    """Integral of f along the segment from p to q (exact up to degree 2*num_points - 1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    s, w = gauss_segment(num_points)
    x = p + s[:, None] * (q - p)
    return float(np.hypot(*(q - p)) * np.dot(w, f(x[:, 0], x[:, 1])))


def composite_gauss(f, a: float, b: float, num_points: int = 32, panels: int = 1) -> float:
    """Composite Gauss-Legendre integral of a scalar function on [a, b]."""
    s, w = gauss_segment(num_points)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += (hi - lo) * float(np.dot(w, f(lo + s * (hi - lo))))
    return total
