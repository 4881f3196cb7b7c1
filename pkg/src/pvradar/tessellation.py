"""Poisson point patterns on an annulus and their Delaunay/Voronoi structure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, QhullError


@dataclass(frozen=True)
class Annulus:
    inner_m: float
    outer_m: float

    def __post_init__(self):
        if not (0 <= self.inner_m < self.outer_m) or not math.isfinite(self.outer_m):
            raise ValueError(
                f"degenerate region: need 0 <= inner < outer < inf, got "
                f"({self.inner_m}, {self.outer_m})")

    @property
    def area(self) -> float:
        return math.pi * (self.outer_m**2 - self.inner_m**2)

    def edge_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearer of the two boundary circles."""
        r = np.hypot(points[:, 0], points[:, 1])
        d = self.outer_m - r
        if self.inner_m > 0:
            d = np.minimum(d, r - self.inner_m)
        return d


@dataclass
class PointPattern:
    points: np.ndarray  # (n, 2) meters
    region: Annulus
    intensity: float  # per m^2
    seed: int | None = None

    def __len__(self):
        return len(self.points)

    @property
    def mean_count(self) -> float:
        return self.intensity * self.region.area

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    @property
    def azimuths(self) -> np.ndarray:
        return np.arctan2(self.points[:, 1], self.points[:, 0])


def sample_ppp(intensity: float, region: Annulus, seed=None) -> PointPattern:
    """Homogeneous PPP on ``region``; ``seed`` may be an int, SeedSequence or Generator."""
    if not intensity > 0:
        raise ValueError(f"intensity must be > 0, got {intensity!r}")
    rng = np.random.default_rng(seed)
    n = rng.poisson(intensity * region.area)
    # inverse-CDF radius for uniform density on the annulus
    r = np.sqrt(region.inner_m**2 + rng.random(n) * (region.outer_m**2 - region.inner_m**2))
    theta = rng.uniform(-math.pi, math.pi, n)
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return PointPattern(pts, region, float(intensity), seed if isinstance(seed, int) else None)


def default_guard(intensity: float) -> float:
    return 3.0 / math.sqrt(math.pi * intensity)


@dataclass
class Tessellation:
    pattern: PointPattern
    triangles: np.ndarray  # (t, 3) indices into pattern.points
    circumcenters: np.ndarray  # (t, 2); Voronoi vertices
    triangle_radii: np.ndarray  # (t,)
    circumradii: np.ndarray  # (n,); nan where flagged
    flagged: np.ndarray  # (n,) bool
    guard_m: float
    _incident: list = field(default=None, repr=False)

    def incident_triangles(self, i: int) -> np.ndarray:
        if self._incident is None:
            order = np.argsort(self.triangles.ravel(), kind="stable")
            owner = self.triangles.ravel()[order]
            bounds = np.searchsorted(owner, np.arange(len(self.pattern) + 1))
            tri_ids = order // 3
            self._incident = [tri_ids[bounds[k]:bounds[k + 1]] for k in range(len(self.pattern))]
        return self._incident[i]

    def cell_vertices(self, i: int) -> np.ndarray:
        """Voronoi vertices of cell ``i`` in counter-clockwise order, duplicates merged."""
        _check_index(self, i)
        verts = self.circumcenters[self.incident_triangles(i)]
        c = self.pattern.points[i]
        ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
        verts = verts[np.argsort(ang)]
        scale = max(1.0, float(np.abs(verts).max())) if len(verts) else 1.0
        keep = np.ones(len(verts), dtype=bool)
        keep[1:] = np.linalg.norm(np.diff(verts, axis=0), axis=1) > 1e-9 * scale
        return verts[keep]

    def voronoi_edges(self) -> np.ndarray:
        """Finite Voronoi edges as (m, 4) rows ``x1 y1 x2 y2``."""
        edges = {}
        for t, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                edges.setdefault((min(a, b), max(a, b)), []).append(t)
        rows = [np.r_[self.circumcenters[ts[0]], self.circumcenters[ts[1]]]
                for ts in edges.values() if len(ts) == 2]
        return np.array(rows).reshape(-1, 4)


def _check_index(t: Tessellation, i):
    if int(i) != i or not 0 <= i < len(t.pattern):
        raise IndexError(f"nucleus index {i!r} out of range for {len(t.pattern)} points")


def _circumcircles(pts: np.ndarray, tri: np.ndarray):
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    # translate to a for conditioning
    bx, by = (b - a).T
    cx, cy = (c - a).T
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return a + np.column_stack([ux, uy]), np.hypot(ux, uy)


def build_tessellation(pattern: PointPattern, guard_m: float | None = None) -> Tessellation:
    """Delaunay triangulation with per-cell circumradii.

    A cell's circumradius is the largest distance from its nucleus to one of
    its Voronoi vertices, i.e. the largest circumradius among the Delaunay
    triangles incident to the nucleus.  Cells on the convex hull (unbounded)
    and cells whose nucleus lies within ``guard_m`` of the region boundary
    are flagged and carry ``nan``.
    """
    pts = np.asarray(pattern.points, dtype=float)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] <= 1e-12 * max(sv[0], 1e-300):
        raise ValueError("all points are collinear")

    try:
        dt = Delaunay(pts)
    except QhullError:
        # cocircular/degenerate input: reproducible tiny jitter, then retry once
        diameter = float(np.ptp(pts, axis=0).max())
        jitter = np.random.default_rng(0).uniform(-1, 1, pts.shape) * 1e-9 * diameter
        dt = Delaunay(pts + jitter)
    tri = dt.simplices.astype(np.intp)
    centers, tri_r = _circumcircles(pts, tri)

    n = len(pts)
    cell_r = np.zeros(n)
    np.maximum.at(cell_r, tri[:, 0], tri_r)
    np.maximum.at(cell_r, tri[:, 1], tri_r)
    np.maximum.at(cell_r, tri[:, 2], tri_r)

    flagged = np.zeros(n, dtype=bool)
    flagged[np.unique(dt.convex_hull)] = True
    if guard_m is None:
        guard_m = default_guard(pattern.intensity)
    flagged |= pattern.region.edge_distance(pts) < guard_m
    cell_r[flagged] = np.nan
    return Tessellation(pattern, tri, centers, tri_r, cell_r, flagged, float(guard_m))


def cell_circumradius(t: Tessellation, nucleus_index: int) -> float | None:
    """Circumradius of one cell in meters, or ``None`` when the cell is flagged."""
    _check_index(t, nucleus_index)
    if t.flagged[nucleus_index]:
        return None
    return float(t.circumradii[nucleus_index])


def export_tessellation(t: Tessellation, path) -> None:
    """Write finite Voronoi edges, one ``x1 y1 x2 y2`` record per line (meters).

    Lines starting with ``#`` are comments.
    """
    edges = t.voronoi_edges()
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# voronoi edges: {len(edges)} records, columns x1 y1 x2 y2 (m)\n")
        for row in edges:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_edge_listing(path) -> np.ndarray:
    return np.loadtxt(path, comments="#", ndmin=2).reshape(-1, 4)
