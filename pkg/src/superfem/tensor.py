"""A-equilateral calculus: certificates, the factorization A = S Ahat_alpha S^T, symmetries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import StructuredMesh, as_triangle, check_triangle, shape_gradients

DEFAULT_CERT_TOL = 1e-9

# canonical tensor for which the reference triangle (0,0),(1,0),(1,1) is equilateral
AHAT_1 = np.array([[1.0, 0.5], [0.5, 1.0]])
# lower Cholesky factor of AHAT_1
AHAT_1_CHOL = np.array([[1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


class NotSPDError(ValueError):
    pass


@dataclass(frozen=True)
class SPDTensor2:
    a11: float
    a12: float
    a22: float

    def __post_init__(self):
        vals = (self.a11, self.a12, self.a22)
        if not all(np.isfinite(vals)):
            raise NotSPDError("tensor has non-finite entries")
        if not (self.a11 > 0 and self.a11 * self.a22 - self.a12**2 > 0):
            raise NotSPDError(
                f"tensor [{self.a11}, {self.a12}; {self.a12}, {self.a22}] is not symmetric positive definite"
            )

    @classmethod
    def from_matrix(cls, m) -> SPDTensor2:
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.isclose(m[0, 1], m[1, 0], rtol=1e-12, atol=0.0):
            raise NotSPDError("tensor is not symmetric")
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12**2

    def cholesky(self) -> np.ndarray:
        l11 = np.sqrt(self.a11)
        l21 = self.a12 / l11
        return np.array([[l11, 0.0], [l21, np.sqrt(self.a22 - l21**2)]])


@dataclass(frozen=True)
class EquilateralCertificate:
    energies: tuple[float, float, float]
    integrated_energies: tuple[float, float, float]
    alpha: float
    max_relative_spread: float
    certified: bool


def _spread(values) -> float:
    values = np.asarray(values)
    mean = values.mean()
    return float((values.max() - values.min()) / abs(mean))


def edge_energies(A: SPDTensor2, t, tol: float = DEFAULT_CERT_TOL) -> EquilateralCertificate:
    """Pointwise energies A grad(phi_i) . grad(phi_i) of the three shape functions."""
    v, area = check_triangle(t)
    g = shape_gradients(v)
    energies = np.einsum("ij,jk,ik->i", g, A.matrix, g)
    spread = _spread(energies)
    return EquilateralCertificate(
        energies=tuple(float(e) for e in energies),
        integrated_energies=tuple(float(area * e) for e in energies),
        alpha=float(energies.mean()),
        max_relative_spread=spread,
        certified=spread <= tol,
    )


@dataclass(frozen=True)
class MeshCertificate:
    certified: bool
    alpha: float
    worst_spread: float
    worst_triangle: int


def certify_mesh(A: SPDTensor2, m: StructuredMesh, tol: float = DEFAULT_CERT_TOL) -> MeshCertificate:
    """Check that all triangles share one common alpha within relative ``tol``.

    The spread is taken over all 3 * num_triangles energies at once, so both the
    per-element condition and the common value are covered by one tolerance.
    """
    g = m.element_gradients
    energies = np.einsum("tij,jk,tik->ti", g, A.matrix, g)
    alpha = float(energies.mean())
    per_tri = (energies.max(axis=1) - energies.min(axis=1)) / abs(alpha)
    worst_spread = _spread(energies.ravel())
    return MeshCertificate(
        certified=worst_spread <= tol,
        alpha=alpha,
        worst_spread=worst_spread,
        worst_triangle=int(np.argmax(per_tri)),
    )


def factor_matrix(t) -> np.ndarray:
    """S with columns V2 - V1 and V3 - V2."""
    v = as_triangle(t)
    return np.column_stack([v[1] - v[0], v[2] - v[1]])


def tensor_from_triangle(t, alpha: float) -> SPDTensor2:
    """The tensor for which ``t`` is A-equilateral with value ``alpha``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    v, _ = check_triangle(t)
    S = factor_matrix(v)
    M = alpha * S @ AHAT_1 @ S.T
    return SPDTensor2(float(M[0, 0]), float(0.5 * (M[0, 1] + M[1, 0])), float(M[1, 1]))


def triangle_from_tensor(A: SPDTensor2, alpha: float) -> np.ndarray:
    """Factor matrix S with S (alpha * AHAT_1) S^T = A, in the lower-Cholesky gauge.

    S = L R^{-1} / sqrt(alpha), with L and R the lower Cholesky factors of A and
    AHAT_1. The factorization is only unique up to L -> L Q with Q orthogonal;
    this fixes Q = I.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not isinstance(A, SPDTensor2):
        A = SPDTensor2.from_matrix(A)
    L = A.cholesky()
    S = L @ np.linalg.inv(AHAT_1_CHOL) / np.sqrt(alpha)
    check = alpha * S @ AHAT_1 @ S.T
    if not np.allclose(check, A.matrix, rtol=1e-12, atol=1e-12 * np.abs(A.matrix).max()):
        raise ArithmeticError("factorization postcondition failed")
    return S


def triangle_from_factor(S, origin=(0.0, 0.0)) -> np.ndarray:
    """Vertices (origin, origin + S e1, origin + S e1 + S e2)."""
    S = np.asarray(S, dtype=float)
    o = np.asarray(origin, dtype=float)
    return np.array([o, o + S[:, 0], o + S[:, 0] + S[:, 1]])


def compatible_transforms() -> list[np.ndarray]:
    """Integer matrices T with T AHAT_1 T^T = AHAT_1.

    Right-multiplying an equilateral triangle's factor matrix by one of these
    gives another triangle sharing V1 that is equilateral with the same alpha.
    """
    return [
        np.array([[1, 0], [0, 1]]),
        np.array([[-1, 0], [0, -1]]),
        np.array([[0, 1], [1, 0]]),
        np.array([[0, -1], [-1, 0]]),
    ]


def translate_triangle(t, shift) -> np.ndarray:
    v = as_triangle(t)
    return v + np.asarray(shift, dtype=float)
