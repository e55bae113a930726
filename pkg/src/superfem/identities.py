"""Euler-Maclaurin decomposition on an interval and edge/area identities on triangles.

These are numerical checks of the analytic facts behind the order-4
superconvergence: the trapezoid rule with a single second-derivative
correction and a non-negative fourth-derivative remainder, the normal/gradient
relation n_i = -2|T| grad(phi_i) / l_jk, and the transfer of an edge integral
to a neighbouring edge plus an area integral of a tangential derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .geometry import check_triangle, edge_lengths, outward_normals, shape_gradients
from .quadrature import DUNAVANT6, QuadratureRule, composite_gauss, line_integral

ORACLE_POINTS = 32
ORACLE_TOL = 1e-13


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class SmoothFunction1D:
    value: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    d4: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def polynomial(cls, coeffs) -> SmoothFunction1D:
        """From power-series coefficients c0 + c1 x + c2 x**2 + ..."""
        c = np.asarray(coeffs, dtype=float)
        c2 = P.polyder(c, 2) if len(c) > 2 else np.zeros(1)
        c4 = P.polyder(c, 4) if len(c) > 4 else np.zeros(1)
        return cls(
            lambda x: P.polyval(x, c),
            lambda x: P.polyval(x, c2),
            lambda x: P.polyval(x, c4),
        )


def em_weight(x, iv: Interval):
    """G(x) = ((2/(b-a))**2 (x - mid)**2 - 1)**2 / 24; zero at the ends, 1/24 at the middle."""
    t = 2.0 * (np.asarray(x, dtype=float) - iv.midpoint) / iv.length
    g = (t * t - 1.0) ** 2 / 24.0
    return float(g) if np.ndim(g) == 0 else g


@dataclass(frozen=True)
class EMDecomposition:
    trapezoid: float
    correction: float
    remainder: float
    integral: float
    residual: float

    @property
    def total(self) -> float:
        return self.trapezoid + self.correction + self.remainder


def em_decompose(f: SmoothFunction1D, iv: Interval, num_points: int = ORACLE_POINTS) -> EMDecomposition:
    """Split the integral of f over iv into trapezoid + correction + remainder.

    ``integral`` comes from an independent Gauss-Legendre rule with
    ``num_points`` nodes; ``residual`` is how far the three parts miss it.
    """
    a, b, L = iv.a, iv.b, iv.length
    trapezoid = 0.5 * L * (float(f.value(np.array(a))) + float(f.value(np.array(b))))
    correction = float(-(L**2) / 12.0 * composite_gauss(f.d2, a, b, num_points))
    remainder = float((0.5 * L) ** 4 * composite_gauss(lambda x: em_weight(x, iv) * f.d4(x), a, b, num_points))
    integral = float(composite_gauss(f.value, a, b, num_points))
    residual = abs(integral - (trapezoid + correction + remainder))
    return EMDecomposition(trapezoid, correction, remainder, integral, residual)


class Poly2:
    """Bivariate polynomial sum c[i, j] x**i y**j with exact derivatives."""

    def __init__(self, coeffs):
        self.c = np.atleast_2d(np.asarray(coeffs, dtype=float))

    def __call__(self, x, y):
        return P.polyval2d(x, y, self.c)

    @property
    def degree(self) -> int:
        i, j = np.nonzero(self.c)
        return int((i + j).max()) if len(i) else 0

    def dx(self) -> Poly2:
        return Poly2(P.polyder(self.c, axis=0)) if self.c.shape[0] > 1 else Poly2([[0.0]])

    def dy(self) -> Poly2:
        return Poly2(P.polyder(self.c, axis=1)) if self.c.shape[1] > 1 else Poly2([[0.0]])

    def directional(self, direction) -> Poly2:
        d = np.asarray(direction, dtype=float)
        gx, gy = self.dx().c, self.dy().c
        shape = np.maximum(gx.shape, gy.shape)
        out = np.zeros(shape)
        out[: gx.shape[0], : gx.shape[1]] += d[0] * gx
        out[: gy.shape[0], : gy.shape[1]] += d[1] * gy
        return Poly2(out)

    @classmethod
    def random(cls, degree: int, rng: np.random.Generator) -> Poly2:
        c = np.zeros((degree + 1, degree + 1))
        for i in range(degree + 1):
            for j in range(degree + 1 - i):
                c[i, j] = rng.uniform(-1.0, 1.0)
        return cls(c)


def _tangent(v: np.ndarray, j: int, k: int) -> np.ndarray:
    e = v[k] - v[j]
    return e / np.hypot(*e)


# (target edge, derivative direction, source edge) as vertex index pairs, for
# identities 1, 2, 3: l12 <- (D23, l31), l23 <- (D31, l12), l31 <- (D12, l23)
TRANSFERS = {
    1: ((0, 1), (1, 2), (2, 0)),
    2: ((1, 2), (2, 0), (0, 1)),
    3: ((2, 0), (0, 1), (1, 2)),
}


@dataclass(frozen=True)
class TransferTerms:
    lhs: float
    area_term: float
    edge_term: float

    @property
    def residual(self) -> float:
        scale = max(1.0, abs(self.lhs), abs(self.area_term), abs(self.edge_term))
        return abs(self.lhs - self.area_term - self.edge_term) / scale


def edge_transfer_terms(
    t, w: Poly2, identity: int, q: QuadratureRule = DUNAVANT6, line_points: int = 4
) -> TransferTerms:
    """Both sides of one edge-transfer identity for a polynomial w of degree <= 6.

    With (target, direction, source) = (l12, t23, l31) for identity 1:
    int_l12 w = -(l23 l12 / 2|T|) int_T D23 w + (l12 / l31) int_l31 w.
    """
    v, area = check_triangle(t)
    if w.degree > 6:
        raise ValueError("edge transfer check needs w of total degree <= 6")
    (ta, tb), (da, db), (sa, sb) = TRANSFERS[identity]
    length = lambda i, j: float(np.hypot(*(v[j] - v[i])))
    l_target, l_dir, l_source = length(ta, tb), length(da, db), length(sa, sb)

    lhs = line_integral(w, v[ta], v[tb], line_points)
    dw = w.directional(_tangent(v, da, db))
    area_integral = q.integrate(dw, v)
    source = line_integral(w, v[sa], v[sb], line_points)
    return TransferTerms(
        lhs,
        -(l_dir * l_target) / (2.0 * area) * area_integral,
        l_target / l_source * source,
    )


def verify_edge_transfer(t, w: Poly2, identity: int) -> float:
    """Scaled residual |LHS - RHS| / max(1, |terms|) of identity 1, 2 or 3."""
    return edge_transfer_terms(t, w, identity).residual


def cyclic_transfer_residual(t, w: Poly2) -> float:
    """Chain identities 1, 3, 2 from l12 back to l12; the area terms must cancel."""
    v, _ = check_triangle(t)
    l23, l31, l12 = edge_lengths(v)
    t1 = edge_transfer_terms(v, w, 1)
    t3 = edge_transfer_terms(v, w, 3)
    t2 = edge_transfer_terms(v, w, 2)
    chained = t1.area_term + l12 / l31 * (t3.area_term + l31 / l23 * (t2.area_term + l23 / l12 * t1.lhs))
    scale = max(1.0, abs(t1.lhs), abs(t1.area_term), abs(t2.area_term), abs(t3.area_term))
    return abs(chained - t1.lhs) / scale


def verify_normal_identity(t) -> float:
    """max_i || n_i - (-2|T| grad(phi_i) / l_opposite) ||, with n_i built geometrically."""
    v, area = check_triangle(t)
    normals = outward_normals(v)
    grads = shape_gradients(v)
    lengths = np.array(edge_lengths(v))
    from_gradients = -2.0 * area * grads / lengths[:, None]
    return float(np.max(np.hypot(*(normals - from_gradients).T)))


def random_triangles(rng: np.random.Generator, count: int, min_shape: float = 0.05) -> list[np.ndarray]:
    """Counterclockwise triangles in [-2, 2]^2 with area >= min_shape * (longest edge)**2."""
    out = []
    while len(out) < count:
        v = rng.uniform(-2.0, 2.0, size=(3, 2))
        area = 0.5 * ((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
        if area < 0:
            v = v[[0, 2, 1]]
            area = -area
        if area >= min_shape * max(edge_lengths(v)) ** 2:
            out.append(v)
    return out
