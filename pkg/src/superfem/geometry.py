"""Planar triangle calculus and uniform structured triangulations of parallelograms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# signed area <= DEGENERACY_TOL * (longest edge)**2 counts as degenerate
DEGENERACY_TOL = 1e-14


class DegenerateElementError(ValueError):
    pass


class InvertedLatticeError(ValueError):
    pass


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point has non-finite components")
    return a


def as_triangle(t) -> np.ndarray:
    """Return the vertices of ``t`` as a (3, 2) float array."""
    a = np.asarray(t, dtype=float)
    if a.shape != (3, 2):
        raise ValueError(f"a triangle needs 3 vertices of 2 coordinates, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("triangle has non-finite vertex coordinates")
    return a


def signed_area(p1, p2, p3) -> float:
    """Half the determinant of (p2 - p1, p3 - p1); positive iff counterclockwise."""
    p1, p2, p3 = _as_point(p1), _as_point(p2), _as_point(p3)
    u = p2 - p1
    v = p3 - p1
    return 0.5 * float(u[0] * v[1] - u[1] * v[0])


def edge_lengths(t) -> tuple[float, float, float]:
    """Lengths of the edges opposite V1, V2, V3, i.e. (l23, l31, l12)."""
    v = as_triangle(t)
    return (
        float(np.hypot(*(v[2] - v[1]))),
        float(np.hypot(*(v[0] - v[2]))),
        float(np.hypot(*(v[1] - v[0]))),
    )


def check_triangle(t) -> tuple[np.ndarray, float]:
    """Validate orientation and non-degeneracy; return (vertices, area)."""
    v = as_triangle(t)
    area = signed_area(*v)
    longest = max(edge_lengths(v))
    if abs(area) <= DEGENERACY_TOL * longest**2:
        raise DegenerateElementError("degenerate element")
    if area < 0:
        raise DegenerateElementError("degenerate element: vertices are ordered clockwise")
    return v, area


def shape_gradients(t) -> np.ndarray:
    """Gradients of the three P1 shape functions, as rows of a (3, 2) array.

    Each gradient is the opposite edge vector rotated by -90 degrees and divided
    by twice the area, so that phi_i drops from 1 at V_i to 0 on that edge.
    """
    v, area = check_triangle(t)
    grads = np.empty((3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        e = v[k] - v[j]
        grads[i] = (-e[1], e[0])
    return grads / (2.0 * area)


def outward_normals(t) -> np.ndarray:
    """Unit outward normals of the edges opposite V1, V2, V3 (rows)."""
    v, _ = check_triangle(t)
    normals = np.empty((3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        e = v[k] - v[j]
        # counterclockwise boundary: interior lies to the left, outward to the right
        normals[i] = np.array([e[1], -e[0]]) / np.hypot(*e)
    return normals


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform triangulation of the parallelogram spanned by ``n`` lattice steps.

    Node (i, j) sits at ``origin + i * cell_edge_u + j * cell_edge_v`` and has
    index ``j * (n + 1) + i``. Cell (i, j) contributes the lower triangle
    (P(i,j), P(i+1,j), P(i+1,j+1)) followed by the upper triangle
    (P(i,j), P(i+1,j+1), P(i,j+1)).
    """

    origin: tuple[float, float]
    cell_edge_u: tuple[float, float]
    cell_edge_v: tuple[float, float]
    n: int
    nodes: np.ndarray
    triangles: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def cell_det(self) -> float:
        u, v = self.cell_edge_u, self.cell_edge_v
        return u[0] * v[1] - u[1] * v[0]

    @property
    def triangle_area(self) -> float:
        return 0.5 * self.cell_det

    @property
    def area(self) -> float:
        return self.n**2 * abs(self.cell_det)

    def node_index(self, i: int, j: int) -> int:
        return j * (self.n + 1) + i

    def lattice_index(self, k: int) -> tuple[int, int]:
        j, i = divmod(k, self.n + 1)
        return i, j

    @cached_property
    def element_vertices(self) -> np.ndarray:
        """(num_triangles, 3, 2) array of vertex coordinates."""
        return self.nodes[self.triangles]

    @cached_property
    def element_gradients(self) -> np.ndarray:
        """(num_triangles, 3, 2) shape-function gradients, computed per element."""
        v = self.element_vertices
        e = np.roll(v, -2, axis=1) - np.roll(v, -1, axis=1)
        area = 0.5 * (
            (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
            - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0])
        )
        grads = np.stack([-e[..., 1], e[..., 0]], axis=-1)
        return grads / (2.0 * area)[:, None, None]

    @cached_property
    def element_areas(self) -> np.ndarray:
        v = self.element_vertices
        return 0.5 * (
            (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
            - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0])
        )

    def with_nodes(self, nodes: np.ndarray) -> StructuredMesh:
        """Same connectivity with moved nodes (used to build broken meshes in tests)."""
        return StructuredMesh(
            self.origin, self.cell_edge_u, self.cell_edge_v, self.n,
            np.asarray(nodes, dtype=float), self.triangles,
        )


def build_mesh(origin, cell_edge_u, cell_edge_v, n: int) -> StructuredMesh:
    o = _as_point(origin)
    u = _as_point(cell_edge_u)
    v = _as_point(cell_edge_v)
    if int(n) != n or n < 1:
        raise ValueError(f"subdivision count must be a positive integer, got {n!r}")
    n = int(n)
    det = u[0] * v[1] - u[1] * v[0]
    if not det > 0:
        raise InvertedLatticeError("inverted lattice: det[cell_edge_u, cell_edge_v] must be positive")

    jj, ii = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    nodes = o + ii[:, None] * u + jj[:, None] * v

    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ci = ci.ravel()
    cj = cj.ravel()
    p00 = cj * (n + 1) + ci
    p10 = p00 + 1
    p11 = p00 + n + 2
    p01 = p00 + n + 1
    lower = np.stack([p00, p10, p11], axis=1)
    upper = np.stack([p00, p11, p01], axis=1)
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    return StructuredMesh(
        (float(o[0]), float(o[1])),
        (float(u[0]), float(u[1])),
        (float(v[0]), float(v[1])),
        n,
        nodes,
        triangles,
    )


@dataclass(frozen=True)
class Parallelogram:
    """The domain origin + s * edge_u + t * edge_v, 0 <= s, t <= 1."""

    origin: tuple[float, float]
    edge_u: tuple[float, float]
    edge_v: tuple[float, float]

    @classmethod
    def from_vertices(cls, vertices, rtol: float = 1e-9) -> Parallelogram:
        """Build from four counterclockwise corners; the fourth must equal v1 + v3 - v2."""
        v = np.asarray(vertices, dtype=float)
        if v.shape != (4, 2) or not np.all(np.isfinite(v)):
            raise ValueError("a parallelogram needs four finite 2D vertices")
        gap = v[0] + v[2] - v[1] - v[3]
        scale = max(np.abs(v).max(), 1.0)
        if np.hypot(*gap) > rtol * scale:
            raise ValueError(f"vertices do not close a parallelogram (v1 + v3 - v2 - v4 = {gap.tolist()})")
        u, w = v[1] - v[0], v[3] - v[0]
        if not u[0] * w[1] - u[1] * w[0] > 0:
            raise InvertedLatticeError("inverted lattice: vertices must be counterclockwise and non-degenerate")
        return cls(tuple(v[0]), tuple(v[1] - v[0]), tuple(v[3] - v[0]))

    @property
    def vertices(self) -> np.ndarray:
        o, u, v = (np.asarray(a, dtype=float) for a in (self.origin, self.edge_u, self.edge_v))
        return np.array([o, o + u, o + u + v, o + v])

    @property
    def area(self) -> float:
        u, v = self.edge_u, self.edge_v
        return abs(u[0] * v[1] - u[1] * v[0])

    def mesh(self, n: int) -> StructuredMesh:
        u = np.asarray(self.edge_u, dtype=float)
        v = np.asarray(self.edge_v, dtype=float)
        return build_mesh(self.origin, u / n, v / n, n)


UNIT_SQUARE = Parallelogram((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))


def boundary_nodes(m: StructuredMesh) -> np.ndarray:
    """Sorted indices of nodes with i or j in {0, n}."""
    idx = np.arange(m.num_nodes)
    i = idx % (m.n + 1)
    j = idx // (m.n + 1)
    on_boundary = (i == 0) | (i == m.n) | (j == 0) | (j == m.n)
    return idx[on_boundary]


def interior_nodes(m: StructuredMesh) -> np.ndarray:
    mask = np.ones(m.num_nodes, dtype=bool)
    mask[boundary_nodes(m)] = False
    return np.flatnonzero(mask)


def _edge_map(triangles: np.ndarray) -> dict[tuple[int, int], list[int]]:
    """Map each undirected edge to the vertices opposite it in adjacent triangles."""
    edges: dict[tuple[int, int], list[int]] = {}
    for tri in triangles:
        for k in range(3):
            a, b = int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
            edges.setdefault((min(a, b), max(a, b)), []).append(int(tri[k]))
    return edges


def is_uniform(m: StructuredMesh, tol: float = 1e-9) -> bool:
    """Check that every pair of edge-adjacent triangles forms a parallelogram.

    For each interior edge the two opposite vertices must be reflections of each
    other through the edge midpoint, to within ``tol * h`` where h is the longest
    mesh edge.
    """
    x = m.nodes
    edges = _edge_map(m.triangles)
    h = max(
        np.hypot(*(x[a] - x[b])) for (a, b) in edges
    )
    for (a, b), opposite in edges.items():
        if len(opposite) == 1:
            continue
        if len(opposite) != 2:
            return False
        p, q = opposite
        mismatch = x[p] + x[q] - (x[a] + x[b])
        if np.hypot(*mismatch) > tol * h:
            return False
    return True
