"""Manufactured solutions, discrete error norms and convergence studies."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fem import solve_problem
from .geometry import Parallelogram, StructuredMesh
from .quadrature import DUNAVANT6, EDGE_MIDPOINT, QuadratureRule
from .tensor import DEFAULT_CERT_TOL, SPDTensor2, certify_mesh

log = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution with analytic gradient and Hessian (u_xx, u_xy, u_yy)."""

    name: str
    value: Field
    gradient: Callable[[np.ndarray, np.ndarray], tuple]
    hessian: Callable[[np.ndarray, np.ndarray], tuple]
    polynomial_degree: int | None = None


def _const(c, x):
    return np.full_like(np.asarray(x, dtype=float), c)


SIN_SIN = ManufacturedSolution(
    "sin_sin",
    lambda x, y: np.sin(x) * np.sin(y),
    lambda x, y: (np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)),
    lambda x, y: (-np.sin(x) * np.sin(y), np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y)),
)

COS_COS = ManufacturedSolution(
    "cos_cos",
    lambda x, y: np.cos(x) * np.cos(y),
    lambda x, y: (-np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)),
    lambda x, y: (-np.cos(x) * np.cos(y), np.sin(x) * np.sin(y), -np.cos(x) * np.cos(y)),
)

LINEAR = ManufacturedSolution(
    "linear",
    lambda x, y: 0.3 + 1.7 * x - 0.6 * y,
    lambda x, y: (_const(1.7, x), _const(-0.6, x)),
    lambda x, y: (_const(0.0, x), _const(0.0, x), _const(0.0, x)),
    polynomial_degree=1,
)

CUBIC = ManufacturedSolution(
    "cubic",
    lambda x, y: x**3 - 2.0 * x**2 * y + 0.5 * y**3 + x * y,
    lambda x, y: (3.0 * x**2 - 4.0 * x * y + y, -2.0 * x**2 + 1.5 * y**2 + x),
    lambda x, y: (6.0 * x - 4.0 * y, -4.0 * x + 1.0, 3.0 * y),
    polynomial_degree=3,
)

SOLUTIONS = {s.name: s for s in (SIN_SIN, COS_COS, LINEAR, CUBIC)}


def get_solution(name: str) -> ManufacturedSolution:
    try:
        return SOLUTIONS[name]
    except KeyError:
        raise KeyError(f"unknown solution {name!r}; choose from {sorted(SOLUTIONS)}") from None


def source_term(A: SPDTensor2, u: ManufacturedSolution) -> Field:
    """f = -div(A grad u) for constant A."""

    def f(x, y):
        uxx, uxy, uyy = u.hessian(x, y)
        return -(A.a11 * uxx + 2.0 * A.a12 * uxy + A.a22 * uyy)

    return f


def interpolate(m: StructuredMesh, u: ManufacturedSolution | Field) -> np.ndarray:
    fn = u.value if isinstance(u, ManufacturedSolution) else u
    return np.asarray(fn(m.nodes[:, 0], m.nodes[:, 1]), dtype=float) * np.ones(m.num_nodes)


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    h1_semi: float
    linf: float
    h: float
    energy: float = float("nan")


def diff_norms(m: StructuredMesh, a, b, A: SPDTensor2 | None = None) -> ErrorReport:
    """Norms of the P1 field a - b.

    The L2 norm uses the edge-midpoint rule (exact for the quadratic d**2), the
    gradient is constant per element, and a P1 field attains its max at nodes.
    With ``A`` the A-weighted energy seminorm is also filled in.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (m.num_nodes,) or b.shape != (m.num_nodes,):
        raise ValueError(
            f"nodal vectors must have length {m.num_nodes}, got {a.shape} and {b.shape}"
        )
    d = a - b
    de = d[m.triangles]  # (nt, 3)
    areas = m.element_areas
    vals = de @ EDGE_MIDPOINT.points.T
    l2 = math.sqrt(float(np.sum(areas * (vals**2 @ EDGE_MIDPOINT.weights))))
    grad = np.einsum("ti,tik->tk", de, m.element_gradients)
    h1 = math.sqrt(float(np.sum(areas * np.einsum("tk,tk->t", grad, grad))))
    energy = float("nan")
    if A is not None:
        energy = math.sqrt(float(np.sum(areas * np.einsum("tk,kl,tl->t", grad, A.matrix, grad))))
    return ErrorReport(l2, h1, float(np.max(np.abs(d))), m.h, energy)


def interpolation_error_h1(m: StructuredMesh, u: ManufacturedSolution, q: QuadratureRule = DUNAVANT6) -> float:
    """||grad(u - u_I)||_0 by the rule ``q``."""
    uI = interpolate(m, u)
    grad_I = np.einsum("ti,tik->tk", uI[m.triangles], m.element_gradients)
    x = q.map_to(m.element_vertices)
    gx, gy = u.gradient(x[..., 0], x[..., 1])
    ex = gx - grad_I[:, 0:1]
    ey = gy - grad_I[:, 1:2]
    return math.sqrt(float(np.sum(m.element_areas * ((ex**2 + ey**2) @ q.weights))))


def observed_order(coarse: float, fine: float, ratio: float = 2.0) -> float | None:
    """log(coarse / fine) / log(ratio); None when either error is not positive."""
    if not (coarse > 0 and fine > 0):
        return None
    return math.log(coarse / fine) / math.log(ratio)


@dataclass
class ConvergenceRow:
    n: int
    errors: ErrorReport
    orders: tuple[float | None, float | None, float | None] | None = None


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)

    def column(self, norm: str) -> np.ndarray:
        return np.array([getattr(r.errors, norm) for r in self.rows])

    def orders(self, norm: str) -> list[float | None]:
        idx = ("l2", "h1_semi", "linf").index(norm)
        return [r.orders[idx] if r.orders else None for r in self.rows]


def observed_orders(t: ConvergenceTable) -> ConvergenceTable:
    """Fill per-transition orders in place (and return the table)."""
    ns = [r.n for r in t.rows]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"mesh levels must be strictly increasing, got {ns}")
    if t.rows:
        t.rows[0].orders = None
    for prev, row in zip(t.rows, t.rows[1:]):
        ratio = row.n / prev.n
        row.orders = tuple(
            observed_order(getattr(prev.errors, k), getattr(row.errors, k), ratio)
            for k in ("l2", "h1_semi", "linf")
        )
    return t


def solve_level(
    domain: Parallelogram,
    A: SPDTensor2,
    u: ManufacturedSolution,
    n: int,
    q: QuadratureRule = DUNAVANT6,
    rtol: float = 1e-13,
):
    """One refinement level; returns (mesh, u_h, u_I)."""
    m = domain.mesh(n)
    sol = solve_problem(m, A, source_term(A, u), u.value, q, rtol)
    return m, sol.nodal_values, interpolate(m, u)


def run_study(
    domain: Parallelogram,
    A: SPDTensor2,
    u: ManufacturedSolution,
    n_list,
    q: QuadratureRule = DUNAVANT6,
    certification: str = "strict",
    cert_tol: float = DEFAULT_CERT_TOL,
    rtol: float = 1e-13,
) -> ConvergenceTable:
    """Solve on each n in ``n_list`` and tabulate ||u_h - u_I|| with observed orders.

    ``certification`` is one of "strict" (raise if the mesh is not uniformly
    A-equilateral), "warn" or "off".
    """
    if certification not in ("strict", "warn", "off"):
        raise ValueError(f"certification must be strict, warn or off, got {certification!r}")
    n_list = [int(n) for n in n_list]
    if certification != "off":
        # all levels are scaled copies of one cell, so the coarsest mesh decides
        cert = certify_mesh(A, domain.mesh(min(n_list)), cert_tol)
        if not cert.certified:
            msg = f"mesh is not uniformly A-equilateral (relative spread {cert.worst_spread:.3e} > {cert_tol:g})"
            if certification == "strict":
                raise CertificationError(msg)
            log.warning(msg)

    table = ConvergenceTable()
    for n in n_list:
        m, uh, uI = solve_level(domain, A, u, n, q, rtol)
        table.rows.append(ConvergenceRow(n, diff_norms(m, uh, uI, A)))
        log.info("n=%d done", n)
    return observed_orders(table)
