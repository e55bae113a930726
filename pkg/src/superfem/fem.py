"""P1 Ritz-Galerkin assembly, Dirichlet elimination and the SPD solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import StructuredMesh, boundary_nodes, check_triangle, shape_gradients
from .quadrature import DUNAVANT6, QuadratureRule
from .tensor import SPDTensor2


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class SparseSPDSystem:
    """K x = b, with K stored as CSR.

    After Dirichlet elimination ``free`` lists the global node of each unknown
    and ``fixed`` holds the full nodal vector with boundary values filled in.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray | None = None
    fixed: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Scatter interior unknowns back into a full nodal vector."""
        if self.free is None:
            return np.asarray(x, dtype=float).copy()
        full = self.fixed.copy()
        full[self.free] = x
        return full


@dataclass
class FEMSolution:
    mesh: StructuredMesh
    nodal_values: np.ndarray
    iterations: int = 0
    residual: float = 0.0


def element_stiffness(A: SPDTensor2, t) -> np.ndarray:
    """K_ij = |T| (A grad phi_j) . grad phi_i, closed form (A and gradients are constant)."""
    _, area = check_triangle(t)
    g = shape_gradients(t)
    K = area * (g @ A.matrix @ g.T)
    return np.triu(K) + np.triu(K, 1).T


def element_load(f, t, q: QuadratureRule = DUNAVANT6) -> np.ndarray:
    """b_i = integral of f * phi_i over t, by the rule ``q``."""
    v, area = check_triangle(t)
    x = q.map_to(v)
    fx = np.asarray(f(x[:, 0], x[:, 1]), dtype=float) * np.ones(len(q.weights))
    return area * (q.points.T @ (q.weights * fx))


def stiffness_matrix(m: StructuredMesh, A: SPDTensor2) -> sp.csr_matrix:
    g = m.element_gradients
    Ke = m.element_areas[:, None, None] * np.einsum("tik,kl,tjl->tij", g, A.matrix, g)
    # copy the upper triangle down so each element matrix is exactly symmetric
    iu = np.triu_indices(3, 1)
    Ke[:, iu[1], iu[0]] = Ke[:, iu[0], iu[1]]
    tri = m.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(m.num_nodes, m.num_nodes)).tocsr()
    K.sum_duplicates()
    K.sort_indices()
    return K


def load_vector(m: StructuredMesh, f, q: QuadratureRule = DUNAVANT6) -> np.ndarray:
    x = q.map_to(m.element_vertices)  # (nt, nq, 2)
    fx = np.asarray(f(x[..., 0], x[..., 1]), dtype=float) * np.ones(x.shape[:2])
    be = m.element_areas[:, None] * ((fx * q.weights) @ q.points)  # (nt, 3)
    b = np.zeros(m.num_nodes)
    np.add.at(b, m.triangles.ravel(), be.ravel())
    return b


def assemble(m: StructuredMesh, A: SPDTensor2, f, q: QuadratureRule = DUNAVANT6) -> SparseSPDSystem:
    return SparseSPDSystem(stiffness_matrix(m, A), load_vector(m, f, q))


def apply_dirichlet(sys: SparseSPDSystem, boundary, g, m: StructuredMesh) -> SparseSPDSystem:
    """Fix boundary unknowns to g at the nodes and eliminate them symmetrically."""
    boundary = np.asarray(boundary, dtype=int)
    mask = np.ones(m.num_nodes, dtype=bool)
    mask[boundary] = False
    free = np.flatnonzero(mask)

    fixed = np.zeros(m.num_nodes)
    xb = m.nodes[boundary]
    fixed[boundary] = np.asarray(g(xb[:, 0], xb[:, 1]), dtype=float) * np.ones(len(boundary))

    K = sys.matrix
    K_ff = K[free][:, free].tocsr()
    rhs = sys.rhs[free] - K[free][:, boundary] @ fixed[boundary]
    return SparseSPDSystem(K_ff, rhs, free, fixed)


def conjugate_gradient(K, b, rtol: float = 1e-13, maxiter: int | None = None) -> tuple[np.ndarray, int, float]:
    """Jacobi-preconditioned CG. Returns (x, iterations, relative residual).

    Convergence is judged on the recursively updated residual; the returned
    residual is recomputed from scratch.
    """
    b = np.asarray(b, dtype=float)
    dim = b.shape[0]
    if maxiter is None:
        maxiter = 20 * max(dim, 1)
    x = np.zeros(dim)
    bnorm = np.linalg.norm(b)
    if dim == 0 or bnorm == 0.0:
        return x, 0, 0.0

    diag = K.diagonal()
    if np.any(diag <= 0):
        raise SolverError("matrix is not positive definite (non-positive diagonal)")
    inv_diag = 1.0 / diag

    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Kp = K @ p
        curvature = p @ Kp
        if curvature <= 0:
            raise SolverError(
                "matrix is not positive definite (negative curvature in CG)",
                np.linalg.norm(r) / bnorm, it,
            )
        step = rz / curvature
        x += step * p
        r -= step * Kp
        if np.linalg.norm(r) <= rtol * bnorm:
            return x, it, float(np.linalg.norm(b - K @ x) / bnorm)
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not converge in {maxiter} iterations",
        float(np.linalg.norm(b - K @ x) / bnorm), maxiter,
    )


def dense_solve(K, b) -> np.ndarray:
    """Dense Cholesky solve; the reference for small systems."""
    from scipy.linalg import cho_factor, cho_solve

    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    if Kd.shape[0] == 0:
        return np.zeros(0)
    return cho_solve(cho_factor(Kd, lower=True), np.asarray(b, dtype=float))


def solve(sys: SparseSPDSystem, rtol: float = 1e-13, maxiter: int | None = None) -> np.ndarray:
    """Solve the (reduced) system and return the full nodal vector."""
    x, _, _ = conjugate_gradient(sys.matrix, sys.rhs, rtol, maxiter)
    return sys.expand(x)


def solve_problem(
    m: StructuredMesh,
    A: SPDTensor2,
    f,
    g,
    q: QuadratureRule = DUNAVANT6,
    rtol: float = 1e-13,
) -> FEMSolution:
    """Assemble, impose u = g at boundary nodes, and solve."""
    system = apply_dirichlet(assemble(m, A, f, q), boundary_nodes(m), g, m)
    x, iterations, residual = conjugate_gradient(system.matrix, system.rhs, rtol)
    return FEMSolution(m, system.expand(x), iterations, residual)
