"""Polyline simplification and least-squares primitive fits.

Points are continuous pixel coordinates: pixel (col, row) has its centre at
(col + 0.5, row + 0.5) once normalized, so the fitters take an image size to
turn pixel geometry into ``KetPlacement`` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kets import TWO_PI, KetPlacement, VisualKet, image_diagonal, wrap_angle
from .raster import Polyline

# arcs with a fitted radius beyond this many diagonals are straight lines
MAX_RADIUS_DIAGONALS = 10.0
# nearly closed arcs have no usable chord; callers split them instead
MAX_ARC_SWEEP = TWO_PI - 0.1


class DegenerateArcError(ValueError):
    def __init__(self, reason: str = "degenerate arc"):
        super().__init__(reason)


@dataclass(frozen=True)
class DiscretizationLevel:
    """Analysis resolution; tolerances shrink as ``level`` grows."""

    level: int
    width: int
    height: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"discretization level must be >= 1, got {self.level}")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")

    @property
    def diag(self) -> float:
        return image_diagonal(self.width, self.height)

    @property
    def rdp_tol(self) -> float:
        return self.diag / (32 * self.level)

    @property
    def fit_tol(self) -> float:
        return self.diag / (64 * self.level)

    @property
    def dot_extent(self) -> float:
        return self.diag / 100


@dataclass(frozen=True)
class FitResult:
    placement: KetPlacement
    ket: VisualKet
    residual: float


def _as_points(points) -> np.ndarray:
    if isinstance(points, Polyline):
        return points.as_array()
    return np.asarray(points, dtype=float).reshape(-1, 2)


def _unit(v, lo=0.0, hi=1.0):
    return min(hi, max(lo, float(v)))


def _placement(x, y, scale, rotation, thickness, width, height, diag) -> KetPlacement:
    return KetPlacement(
        x=_unit((x + 0.5) / width),
        y=_unit((y + 0.5) / height),
        scale=_unit(scale / diag, lo=1e-9),
        rotation=wrap_angle(rotation),
        thickness=_unit(thickness / diag, lo=1e-9),
    )


def point_segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    L2 = float(d @ d)
    if L2 == 0.0:
        return np.hypot(*(pts - a).T)
    t = np.clip(((pts - a) @ d) / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.hypot(*(pts - proj).T)


def rdp_indices(pts: np.ndarray, tol: float) -> list[int]:
    """Indices kept by Ramer-Douglas-Peucker on an open chain."""
    n = len(pts)
    if n <= 2:
        return list(range(n))
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        dist = point_segment_distance(pts[i + 1 : j], pts[i], pts[j])
        k = int(np.argmax(dist))
        if dist[k] > tol:
            k += i + 1
            keep[k] = True
            stack.append((i, k))
            stack.append((k, j))
    return np.flatnonzero(keep).tolist()


def farthest_index(pts: np.ndarray, origin: int = 0) -> int:
    return int(np.argmax(np.hypot(*(pts - pts[origin]).T)))


def simplify(p: Polyline, tol: float) -> Polyline:
    """Ramer-Douglas-Peucker simplification.

    Closed polylines are cut at their first point and the point farthest from
    it; both halves are simplified and rejoined.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    pts = p.as_array()
    if not p.closed or len(pts) < 3:
        idx = rdp_indices(pts, tol)
        return Polyline(tuple(map(tuple, pts[idx])), p.closed)
    k = farthest_index(pts)
    first = rdp_indices(pts[: k + 1], tol)
    ring = np.vstack([pts[k:], pts[:1]])
    second = [k + i for i in rdp_indices(ring, tol)][1:-1]
    idx = first + second
    return Polyline(tuple(map(tuple, pts[idx])), True)


def principal_axis(pts: np.ndarray):
    """Centroid and unit direction of largest spread (covariance eigenvector)."""
    centroid = pts.mean(axis=0)
    cov = np.cov((pts - centroid).T, bias=True)
    vals, vecs = np.linalg.eigh(cov)
    return centroid, vecs[:, int(np.argmax(vals))]


def fit_segment(points, size: tuple[int, int], thickness: float = 1.0) -> FitResult:
    """Total-least-squares line through the points.

    The placement is the midpoint of the points' projected extent on the
    fitted line; rotation follows the traversal direction (first point to
    last).  Coincident points come back as a Dot fit.  ``thickness`` is the
    stroke width in pixels.
    """
    width, height = size
    diag = image_diagonal(width, height)
    pts = _as_points(points)
    if len(pts) < 1:
        raise ValueError("fit_segment needs at least one point")
    spread = pts.max(axis=0) - pts.min(axis=0) if len(pts) else np.zeros(2)
    if len(pts) < 2 or not spread.any():
        c = pts.mean(axis=0)
        return FitResult(
            _placement(c[0], c[1], 1.0, 0.0, thickness, width, height, diag),
            VisualKet.dot(),
            0.0,
        )
    centroid, u = principal_axis(pts)
    if float((pts[-1] - pts[0]) @ u) < 0:
        u = -u
    rel = pts - centroid
    along = rel @ u
    perp = rel @ np.array([-u[1], u[0]])
    lo, hi = along.min(), along.max()
    mid = centroid + u * (lo + hi) / 2.0
    rotation = math.atan2(u[1], u[0])
    residual = float(np.sqrt(np.mean(perp ** 2)))
    return FitResult(
        _placement(mid[0], mid[1], hi - lo, rotation, thickness, width, height, diag),
        VisualKet.segment(),
        residual,
    )


def kasa_circle(pts: np.ndarray):
    """Algebraic (Kasa) circle fit; returns (cx, cy, r) or None when the
    points are collinear."""
    centroid = pts.mean(axis=0)
    q = pts - centroid
    A = np.column_stack([q, np.ones(len(q))])
    b = -(q ** 2).sum(axis=1)
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < 3:
        return None
    D, E, F = sol
    r2 = (D * D + E * E) / 4.0 - F
    if not np.isfinite(r2) or r2 <= 0:
        return None
    return centroid[0] - D / 2.0, centroid[1] - E / 2.0, math.sqrt(r2)


def fit_arc(points, size: tuple[int, int], thickness: float = 1.0) -> FitResult:
    """Circular arc through the points (Kasa fit).

    The placement stores the chord between the arc's angular ends: midpoint,
    length and direction, with the direction chosen so the arc bulges to the
    left of the chord in screen coordinates (see ``kets.arc_geometry``).
    Raises DegenerateArcError for collinear input, radius above ten image
    diagonals, or nearly closed arcs.
    """
    width, height = size
    diag = image_diagonal(width, height)
    pts = _as_points(points)
    if len(pts) < 3:
        raise ValueError("fit_arc needs at least three points")
    circle = kasa_circle(pts)
    if circle is None:
        raise DegenerateArcError()
    cx, cy, r = circle
    if r > MAX_RADIUS_DIAGONALS * diag:
        raise DegenerateArcError()
    ang = np.unwrap(np.arctan2(pts[:, 1] - cy, pts[:, 0] - cx))
    a0, a1 = float(ang.min()), float(ang.max())
    sweep = a1 - a0
    if sweep <= 0.0:
        raise DegenerateArcError()
    if sweep >= MAX_ARC_SWEEP:
        raise DegenerateArcError("arc is nearly closed")
    residual = float(np.sqrt(np.mean((np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) - r) ** 2)))

    p0 = np.array([cx + r * math.cos(a0), cy + r * math.sin(a0)])
    p1 = np.array([cx + r * math.cos(a1), cy + r * math.sin(a1)])
    mid_ang = (a0 + a1) / 2.0
    apex = np.array([cx + r * math.cos(mid_ang), cy + r * math.sin(mid_ang)])
    chord_mid = (p0 + p1) / 2.0
    u = p1 - p0
    chord = float(np.hypot(*u))
    rotation = math.atan2(u[1], u[0])
    bulge = np.array([math.sin(rotation), -math.cos(rotation)])
    if float((apex - chord_mid) @ bulge) < 0:
        rotation += math.pi
    placement = _placement(
        chord_mid[0], chord_mid[1], chord, rotation, thickness, width, height, diag
    )
    return FitResult(placement, VisualKet.arc(sweep), residual)


def circle_of(fit: FitResult, size: tuple[int, int]):
    """(cx, cy, r) in point coordinates of an arc FitResult."""
    from ..kets import arc_geometry

    width, height = size
    geo = arc_geometry(fit.placement, fit.ket.sweep, width, height)
    return geo.cx - 0.5, geo.cy - 0.5, geo.radius
