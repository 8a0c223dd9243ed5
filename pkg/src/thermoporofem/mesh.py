"""Structured triangulations of the unit square with oriented facets.

The n x n mesh splits every grid square by the anti-diagonal (the segment
from its top-left to its bottom-right corner), so the n = 1 mesh is the
single square cut from (0,1) to (1,0).  Facet normals are fixed globally:
interior normals point from the lower-indexed adjacent cell to the
higher-indexed one, boundary normals point outward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FacetPredicate = Callable[[np.ndarray], np.ndarray]
# predicate on facet midpoints, shape (n,2) -> bool array (n,)


@dataclass
class BoundaryConfig:
    """Three boundary partitions: displacement/traction, no-flow/pressure,
    temperature/heat-flux.  Each predicate acts on facet midpoints."""

    gamma_d: FacetPredicate
    gamma_t: FacetPredicate
    gamma_p: FacetPredicate
    gamma_f: FacetPredicate
    gamma_r: FacetPredicate
    gamma_h: FacetPredicate
    allow_empty_dirichlet: bool = False


def _all(mid):
    return np.ones(len(mid), dtype=bool)


def _none(mid):
    return np.zeros(len(mid), dtype=bool)


def all_dirichlet_config() -> BoundaryConfig:
    """Essential conditions for u, T everywhere; pressure datum everywhere."""
    return BoundaryConfig(
        gamma_d=_all, gamma_t=_none,
        gamma_p=_none, gamma_f=_all,
        gamma_r=_all, gamma_h=_none,
    )


def on_left(mid, tol=1e-12):
    return mid[:, 0] < tol


def on_right(mid, tol=1e-12):
    return mid[:, 0] > 1.0 - tol


def on_bottom(mid, tol=1e-12):
    return mid[:, 1] < tol


def on_top(mid, tol=1e-12):
    return mid[:, 1] > 1.0 - tol


@dataclass
class Mesh:
    """Conforming triangle mesh of the unit square."""

    vertices: np.ndarray        # (nv, 2)
    cells: np.ndarray           # (nc, 3) vertex indices, counterclockwise
    facets: np.ndarray          # (nf, 2) vertex index pairs
    facet_cells: np.ndarray     # (nf, 2) adjacent cells, -1 if boundary
    cell_facets: np.ndarray     # (nc, 3) facet index opposite local vertex l
    facet_normals: np.ndarray   # (nf, 2) fixed unit normal n_e
    facet_signs: np.ndarray     # (nc, 3) +1 if n_e is outward for the cell
    h: float
    # boundary tags, filled by tag_boundary(); '' for interior facets
    tags_u: np.ndarray = field(default=None)  # 'd' | 't'
    tags_w: np.ndarray = field(default=None)  # 'p' | 'f'
    tags_T: np.ndarray = field(default=None)  # 'r' | 'h'

    # -- derived geometry --------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_facets(self) -> int:
        return len(self.facets)

    @property
    def boundary_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_cells[:, 1] < 0)

    @property
    def interior_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_cells[:, 1] >= 0)

    @property
    def is_tagged(self) -> bool:
        return self.tags_u is not None

    def cell_coords(self) -> np.ndarray:
        """Vertex coordinates per cell, shape (nc, 3, 2)."""
        return self.vertices[self.cells]

    def cell_areas(self) -> np.ndarray:
        xy = self.cell_coords()
        d1 = xy[:, 1] - xy[:, 0]
        d2 = xy[:, 2] - xy[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def cell_diameters(self) -> np.ndarray:
        xy = self.cell_coords()
        e = np.stack([xy[:, 1] - xy[:, 2], xy[:, 2] - xy[:, 0], xy[:, 0] - xy[:, 1]], axis=1)
        return np.linalg.norm(e, axis=2).max(axis=1)

    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the three barycentric coordinates per cell, (nc, 3, 2).

        grad(lambda_l) is the inward normal of the facet opposite vertex l,
        scaled by 1/height.
        """
        xy = self.cell_coords()
        areas = self.cell_areas()
        g = np.empty((self.num_cells, 3, 2))
        for l in range(3):
            a = xy[:, (l + 1) % 3]
            b = xy[:, (l + 2) % 3]
            t = b - a
            g[:, l, 0] = -t[:, 1]
            g[:, l, 1] = t[:, 0]
        g /= (2.0 * areas)[:, None, None]
        return g

    def facet_lengths(self) -> np.ndarray:
        d = self.vertices[self.facets[:, 1]] - self.vertices[self.facets[:, 0]]
        return np.linalg.norm(d, axis=1)

    def facet_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.facets[:, 0]] + self.vertices[self.facets[:, 1]])

    def cell_centroids(self) -> np.ndarray:
        return self.cell_coords().mean(axis=1)

    def boundary_vertices(self, tag_array: np.ndarray, tag: str) -> np.ndarray:
        """Vertices incident to a boundary facet carrying the given tag."""
        sel = self.facets[tag_array == tag]
        return np.unique(sel)

    def dump(self, path: str) -> None:
        """Plain-text node/element dump for debugging and external viewers."""
        with open(path, "w") as fh:
            fh.write(f"{self.num_vertices} {self.num_cells}\n")
            for x, y in self.vertices:
                fh.write(f"{x:.16g} {y:.16g}\n")
            for c in self.cells:
                fh.write(f"{c[0]} {c[1]} {c[2]}\n")


def uniform_unit_square(n: int) -> Mesh:
    """Uniform n x n anti-diagonal triangulation of the unit square."""
    if n < 1:
        raise ValueError("mesh resolution must be at least 1")
    coords = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    cells = []
    for j in range(n):
        for i in range(n):
            # lower-left and upper-right triangle of square (i, j)
            cells.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            cells.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    cells = np.asarray(cells, dtype=np.int64)

    facet_index: dict[tuple[int, int], int] = {}
    facets = []
    facet_cells = []
    cell_facets = np.empty((len(cells), 3), dtype=np.int64)
    for c, tri in enumerate(cells):
        for l in range(3):
            a, b = tri[(l + 1) % 3], tri[(l + 2) % 3]
            key = (min(a, b), max(a, b))
            f = facet_index.get(key)
            if f is None:
                f = len(facets)
                facet_index[key] = f
                facets.append(key)
                facet_cells.append([c, -1])
            else:
                facet_cells[f][1] = c
            cell_facets[c, l] = f
    facets = np.asarray(facets, dtype=np.int64)
    facet_cells = np.asarray(facet_cells, dtype=np.int64)

    mesh = Mesh(
        vertices=vertices, cells=cells, facets=facets,
        facet_cells=facet_cells, cell_facets=cell_facets,
        facet_normals=None, facet_signs=None, h=1.0 / n,
    )
    _orient_facets(mesh)
    return mesh


def _orient_facets(mesh: Mesh) -> None:
    """Fix n_e per facet: outward for the owner cell (lower index / boundary)."""
    verts = mesh.vertices
    normals = np.empty((mesh.num_facets, 2))
    for f, (a, b) in enumerate(mesh.facets):
        owner = mesh.facet_cells[f, 0]
        t = verts[b] - verts[a]
        nvec = np.array([t[1], -t[0]])
        nvec /= np.linalg.norm(nvec)
        mid = 0.5 * (verts[a] + verts[b])
        opp = mesh.cells[owner][~np.isin(mesh.cells[owner], (a, b))][0]
        if nvec @ (mid - verts[opp]) < 0.0:
            nvec = -nvec
        normals[f] = nvec
    mesh.facet_normals = normals

    signs = np.empty((mesh.num_cells, 3), dtype=np.int8)
    for c in range(mesh.num_cells):
        for l in range(3):
            f = mesh.cell_facets[c, l]
            signs[c, l] = 1 if mesh.facet_cells[f, 0] == c else -1
    mesh.facet_signs = signs


def tag_boundary(mesh: Mesh, cfg: BoundaryConfig) -> Mesh:
    """Attach one tag from each of the three partitions to every boundary facet."""
    nf = mesh.num_facets
    mid = mesh.facet_midpoints()
    boundary = np.zeros(nf, dtype=bool)
    boundary[mesh.boundary_facets] = True

    def classify(pred_a, pred_b, tag_a, tag_b, label):
        in_a = np.asarray(pred_a(mid)) & boundary
        in_b = np.asarray(pred_b(mid)) & boundary
        if np.any(in_a & in_b):
            raise ValueError(f"{label}: some boundary facets claimed by both parts")
        if not np.all(in_a | in_b | ~boundary):
            raise ValueError(f"{label}: some boundary facets claimed by neither part")
        tags = np.full(nf, "", dtype="U1")
        tags[in_a] = tag_a
        tags[in_b] = tag_b
        return tags

    tags_u = classify(cfg.gamma_d, cfg.gamma_t, "d", "t", "displacement partition")
    tags_w = classify(cfg.gamma_p, cfg.gamma_f, "p", "f", "flow partition")
    tags_T = classify(cfg.gamma_r, cfg.gamma_h, "r", "h", "temperature partition")

    if not cfg.allow_empty_dirichlet:
        if not np.any(tags_u == "d"):
            raise ValueError("displacement Dirichlet part is empty")
        if not np.any(tags_T == "r"):
            raise ValueError("temperature Dirichlet part is empty")

    mesh.tags_u = tags_u
    mesh.tags_w = tags_w
    mesh.tags_T = tags_T
    return mesh
