"""Uniform triangulations of the unit square and their boundary index maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform triangulation of [0, 1]^2 with ``n`` squares per side.

    Nodes are numbered row-major (``index = j * (n + 1) + i``). Square
    ``(i, j)`` owns triangles ``2 * (j * n + i)`` (below the diagonal) and
    ``2 * (j * n + i) + 1`` (above it); both are counterclockwise and share
    the lower-left to upper-right diagonal.
    """

    n: int
    node_coords: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_nodes(self) -> int:
        return self.node_coords.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def signed_areas(self) -> np.ndarray:
        p = self.node_coords[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas())

    def centroids(self) -> np.ndarray:
        return self.node_coords[self.triangles].mean(axis=1)

    def gradients(self) -> np.ndarray:
        """Constant gradients of the three P1 hat functions, shape (T, 3, 2)."""
        p = self.node_coords[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        grads = np.empty((self.n_triangles, 3, 2))
        grads[:, 1, 0] = d2[:, 1] / det
        grads[:, 1, 1] = -d2[:, 0] / det
        grads[:, 2, 0] = -d1[:, 1] / det
        grads[:, 2, 1] = d1[:, 0] / det
        grads[:, 0] = -grads[:, 1] - grads[:, 2]
        return grads

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return the containing triangle and barycentric coordinates of points.

        Points outside [0, 1]^2 are clamped onto the boundary.
        """
        pts = np.clip(np.asarray(points, dtype=float).reshape(-1, 2), 0.0, 1.0)
        n = self.n
        scaled = pts * n
        ij = np.minimum(np.floor(scaled).astype(np.int64), n - 1)
        s = scaled[:, 0] - ij[:, 0]
        t = scaled[:, 1] - ij[:, 1]
        lower = s >= t
        tri = 2 * (ij[:, 1] * n + ij[:, 0]) + (~lower)
        bary = np.empty((pts.shape[0], 3))
        # lower triangle (p00, p10, p11); upper triangle (p00, p11, p01)
        bary[lower, 0] = 1.0 - s[lower]
        bary[lower, 1] = s[lower] - t[lower]
        bary[lower, 2] = t[lower]
        up = ~lower
        bary[up, 0] = 1.0 - t[up]
        bary[up, 1] = s[up]
        bary[up, 2] = t[up] - s[up]
        return tri, bary

    def interpolate(self, values: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate the P1 field with nodal ``values`` at ``points``."""
        tri, bary = self.locate(points)
        return np.einsum("pk,pk->p", bary, np.asarray(values)[self.triangles[tri]])

    def node_index(self, i, j):
        return np.asarray(j) * (self.n + 1) + np.asarray(i)


@dataclass(frozen=True)
class PeriodicMap:
    """Identification of opposite faces of the unit cell.

    ``representative[k]`` is the node on the left/bottom face carrying node
    ``k``'s value; ``dof`` numbers the ``free_count`` equivalence classes
    contiguously.
    """

    representative: np.ndarray = field(repr=False)
    dof: np.ndarray = field(repr=False)
    free_count: int

    def expand(self, values: np.ndarray) -> np.ndarray:
        """Lift a per-class vector to a per-node field."""
        return np.asarray(values)[self.dof]


@dataclass(frozen=True)
class BoundaryMask:
    is_boundary: np.ndarray = field(repr=False)

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    @property
    def count(self) -> int:
        return int(self.is_boundary.sum())


def build_unit_square_mesh(n: int) -> StructuredMesh:
    """Triangulate the unit square with ``n`` squares per side.

    Parameters
    ----------
    n : int
        Number of squares per side, at least 1.

    Returns
    -------
    StructuredMesh
        ``(n + 1)**2`` nodes and ``2 n**2`` counterclockwise triangles.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigurationError(f"mesh needs a positive integer n, got {n!r}")
    n = int(n)
    ticks = np.arange(n + 1) / n
    xx, yy = np.meshgrid(ticks, ticks)
    coords = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i = i.ravel()
    j = j.ravel()
    p00 = j * (n + 1) + i
    p10 = p00 + 1
    p01 = p00 + n + 1
    p11 = p01 + 1
    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([p00, p10, p11])
    tris[1::2] = np.column_stack([p00, p11, p01])
    coords.setflags(write=False)
    tris.setflags(write=False)
    return StructuredMesh(n=n, node_coords=coords, triangles=tris)


def build_periodic_map(mesh: StructuredMesh) -> PeriodicMap:
    n = mesh.n
    j, i = np.divmod(np.arange(mesh.n_nodes), n + 1)
    ri = i % n
    rj = j % n
    rep = rj * (n + 1) + ri
    dof = rj * n + ri
    return PeriodicMap(representative=rep, dof=dof, free_count=n * n)


def boundary_mask(mesh: StructuredMesh) -> BoundaryMask:
    n = mesh.n
    j, i = np.divmod(np.arange(mesh.n_nodes), n + 1)
    flags = (i == 0) | (i == n) | (j == 0) | (j == n)
    return BoundaryMask(is_boundary=flags)


def write_vtk(mesh: StructuredMesh, path, point_data: dict | None = None,
              cell_data: dict | None = None) -> None:
    """Dump the mesh (and optional scalar fields) as legacy ASCII VTK."""
    lines = ["# vtk DataFile Version 3.0", "structured unit-square mesh", "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {mesh.n_nodes} double"]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.node_coords]
    nt = mesh.n_triangles
    lines.append(f"CELLS {nt} {4 * nt}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"CELL_TYPES {nt}")
    lines += ["5"] * nt
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, vals in point_data.items():
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{v:.17g}" for v in np.asarray(vals, dtype=float)]
    if cell_data:
        lines.append(f"CELL_DATA {nt}")
        for name, vals in cell_data.items():
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{v:.17g}" for v in np.asarray(vals, dtype=float)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
