"""Visual kets, their placements, and decompositions of images into them.

A decomposition is an ordered list of ``Term`` values (placement + ket).  The
first ``envelope_count`` terms describe the overall outline of the picture,
the remaining ones the interior patterns.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
# an arc whose sweep is below this looks like a straight segment
FLAT_ARC_SWEEP = 0.2
ARC_SWEEP_TOL = 1e-9
FEATURE_GRID = 8
# half-width floor so one-pixel strokes stay 8-connected when rendered
MIN_HALF_WIDTH = 0.71


class VisualKetKind(enum.Enum):
    DOT = "dot"
    SEGMENT = "segment"
    ARC = "arc"


KIND_ORDER = (VisualKetKind.DOT, VisualKetKind.SEGMENT, VisualKetKind.ARC)


@dataclass(frozen=True)
class VisualKet:
    kind: VisualKetKind
    sweep: float = 0.0

    def __post_init__(self):
        if self.kind is VisualKetKind.ARC:
            if not 0.0 < self.sweep <= TWO_PI:
                raise ValueError(f"arc sweep must be in (0, 2pi], got {self.sweep}")
        elif self.sweep != 0.0:
            raise ValueError(f"{self.kind.value} kets carry no sweep")

    @classmethod
    def dot(cls) -> VisualKet:
        return cls(VisualKetKind.DOT)

    @classmethod
    def segment(cls) -> VisualKet:
        return cls(VisualKetKind.SEGMENT)

    @classmethod
    def arc(cls, sweep: float) -> VisualKet:
        return cls(VisualKetKind.ARC, float(sweep))


@dataclass(frozen=True)
class KetPlacement:
    """Where a ket sits: normalized position (origin top-left, y down),
    size as a fraction of the image diagonal, orientation and stroke width."""

    x: float
    y: float
    scale: float
    rotation: float = 0.0
    thickness: float = 0.01

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"position ({self.x}, {self.y}) outside the unit square")
        if not 0.0 < self.scale <= 1.0:
            raise ValueError(f"scale must be in (0, 1], got {self.scale}")
        if not 0.0 <= self.rotation < TWO_PI:
            raise ValueError(f"rotation must be in [0, 2pi), got {self.rotation}")
        if not 0.0 < self.thickness <= 1.0:
            raise ValueError(f"thickness must be in (0, 1], got {self.thickness}")


class Term(NamedTuple):
    placement: KetPlacement
    ket: VisualKet


@dataclass(frozen=True)
class VisualDecomposition:
    terms: tuple[Term, ...] = ()
    envelope_count: int = 0
    width_hint: int | None = None
    height_hint: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(Term(*t) for t in self.terms))
        if not 0 <= self.envelope_count <= len(self.terms):
            raise ValueError(
                f"envelope_count {self.envelope_count} outside [0, {len(self.terms)}]"
            )

    def __len__(self):
        return len(self.terms)

    @property
    def envelope(self) -> tuple[Term, ...]:
        return self.terms[: self.envelope_count]

    @property
    def patterns(self) -> tuple[Term, ...]:
        return self.terms[self.envelope_count :]

    def is_empty(self) -> bool:
        return not self.terms


def concat(d1: VisualDecomposition, d2: VisualDecomposition) -> VisualDecomposition:
    """Term-list concatenation d1 ++ d2.

    The envelope prefix of d1 is kept; d2's envelope only extends it when d1
    has no pattern terms (otherwise the prefix structure would break).
    """
    j = d1.envelope_count
    if j == len(d1.terms):
        j += d2.envelope_count
    return VisualDecomposition(
        d1.terms + d2.terms, j, d1.width_hint, d1.height_hint
    )


def ket_inner_product(a: VisualKet, b: VisualKet) -> float:
    if a.kind is b.kind:
        if a.kind is not VisualKetKind.ARC:
            return 1.0
        return 1.0 if abs(a.sweep - b.sweep) <= ARC_SWEEP_TOL else 0.0
    kinds = {a.kind, b.kind}
    if kinds == {VisualKetKind.ARC, VisualKetKind.SEGMENT}:
        sweep = a.sweep if a.kind is VisualKetKind.ARC else b.sweep
        return max(0.0, 1.0 - sweep / FLAT_ARC_SWEEP)
    return 0.0


def wrap_angle(a: float) -> float:
    """Angle in [0, 2pi); plain ``%`` can round tiny negatives up to 2pi."""
    r = float(a) % TWO_PI
    return 0.0 if r >= TWO_PI else r


def _cell(v: float, grid: int) -> int:
    return min(int(v * grid), grid - 1)


def feature_vector(d: VisualDecomposition, grid: int = FEATURE_GRID) -> np.ndarray:
    """Scale-weighted histogram over (kind, grid row, grid column), flattened."""
    hist = np.zeros((len(KIND_ORDER), grid, grid))
    for placement, ket in d.terms:
        k = KIND_ORDER.index(ket.kind)
        hist[k, _cell(placement.y, grid), _cell(placement.x, grid)] += placement.scale
    return hist.ravel()


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two non-negative vectors, clipped to [0, 1].

    Both zero counts as identical (1.0), exactly one zero as unrelated (0.0).
    """
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 and nv == 0.0:
        return 1.0
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if np.array_equal(u, v):
        return 1.0
    return min(1.0, max(0.0, float(np.dot(u, v)) / (nu * nv)))


def distance(d1: VisualDecomposition, d2: VisualDecomposition) -> float:
    """Similarity-style distance: 1 for identical decompositions, 0 for unrelated."""
    return cosine_similarity(feature_vector(d1), feature_vector(d2))


def time_reverse(d: VisualDecomposition) -> VisualDecomposition:
    """Draw every stroke backwards and play the terms last-to-first.

    Envelope and pattern blocks are reversed separately so each term keeps its
    envelope/pattern membership.
    """
    def flip(term: Term) -> Term:
        p = term.placement
        r = p.rotation + math.pi if p.rotation < math.pi else p.rotation - math.pi
        return Term(replace(p, rotation=wrap_angle(r)), term.ket)

    env = [flip(t) for t in reversed(d.envelope)]
    pat = [flip(t) for t in reversed(d.patterns)]
    return replace(d, terms=tuple(env + pat))


# -- geometry shared by render, svg export and the fitters ---------------


def image_diagonal(width: int, height: int) -> float:
    return math.hypot(width, height)


def segment_endpoints(p: KetPlacement, width: int, height: int):
    """Endpoints (pixel units) of a segment placement, in drawing order."""
    half = p.scale * image_diagonal(width, height) / 2.0
    cx, cy = p.x * width, p.y * height
    ux, uy = math.cos(p.rotation), math.sin(p.rotation)
    return (cx - half * ux, cy - half * uy), (cx + half * ux, cy + half * uy)


class ArcGeometry(NamedTuple):
    cx: float
    cy: float
    radius: float
    start: tuple[float, float]
    end: tuple[float, float]
    apex: tuple[float, float]


def arc_geometry(p: KetPlacement, sweep: float, width: int, height: int) -> ArcGeometry | None:
    """Circle geometry of an arc placement, in pixel units.

    The placement stores the chord: its midpoint, its length (``scale``) and
    its direction (``rotation``).  The arc bulges towards
    ``(sin(rotation), -cos(rotation))``.  Returns None when the chord is too
    short to define a circle.
    """
    half_sin = math.sin(sweep / 2.0)
    if half_sin < 1e-9:
        return None
    chord = p.scale * image_diagonal(width, height)
    radius = chord / (2.0 * half_sin)
    mx, my = p.x * width, p.y * height
    ux, uy = math.cos(p.rotation), math.sin(p.rotation)
    bx, by = uy, -ux
    h = radius * math.cos(sweep / 2.0)
    cx, cy = mx - h * bx, my - h * by
    start = (mx - chord / 2.0 * ux, my - chord / 2.0 * uy)
    end = (mx + chord / 2.0 * ux, my + chord / 2.0 * uy)
    apex = (cx + radius * bx, cy + radius * by)
    return ArcGeometry(cx, cy, radius, start, end, apex)


def _window(x0, y0, x1, y1, pad, width, height):
    c0 = max(0, int(math.floor(min(x0, x1) - pad)))
    c1 = min(width, int(math.ceil(max(x0, x1) + pad)) + 1)
    r0 = max(0, int(math.floor(min(y0, y1) - pad)))
    r1 = min(height, int(math.ceil(max(y0, y1) + pad)) + 1)
    if c0 >= c1 or r0 >= r1:
        return None
    ys, xs = np.mgrid[r0:r1, c0:c1]
    return (slice(r0, r1), slice(c0, c1)), xs + 0.5, ys + 0.5


def _draw_dot(mask, p: KetPlacement, width, height):
    r = max(p.scale * image_diagonal(width, height) / 2.0, MIN_HALF_WIDTH)
    cx, cy = p.x * width, p.y * height
    win = _window(cx, cy, cx, cy, r + 1, width, height)
    if win is None:
        return
    sl, xs, ys = win
    mask[sl] |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _draw_segment(mask, p: KetPlacement, width, height):
    hw = max(p.thickness * image_diagonal(width, height) / 2.0, MIN_HALF_WIDTH)
    (x0, y0), (x1, y1) = segment_endpoints(p, width, height)
    win = _window(x0, y0, x1, y1, hw + 1, width, height)
    if win is None:
        return
    sl, xs, ys = win
    dx, dy = x1 - x0, y1 - y0
    L2 = dx * dx + dy * dy
    t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / L2, 0.0, 1.0) if L2 > 0 else 0.0
    px, py = x0 + t * dx - xs, y0 + t * dy - ys
    mask[sl] |= px * px + py * py <= hw * hw


def _draw_arc(mask, p: KetPlacement, sweep: float, width, height):
    geo = arc_geometry(p, sweep, width, height)
    if geo is None:
        _draw_dot(mask, p, width, height)
        return
    hw = max(p.thickness * image_diagonal(width, height) / 2.0, MIN_HALF_WIDTH)
    r = geo.radius
    win = _window(geo.cx - r, geo.cy - r, geo.cx + r, geo.cy + r, hw + 1, width, height)
    if win is None:
        return
    sl, xs, ys = win
    dist = np.hypot(xs - geo.cx, ys - geo.cy)
    ring = np.abs(dist - r) <= hw
    mid = math.atan2(geo.apex[1] - geo.cy, geo.apex[0] - geo.cx)
    ang = np.arctan2(ys - geo.cy, xs - geo.cx)
    off = np.abs((ang - mid + math.pi) % TWO_PI - math.pi)
    mask[sl] |= ring & (off <= sweep / 2.0 + 1e-12)


def render(d: VisualDecomposition, width: int, height: int) -> np.ndarray:
    """Rasterize a decomposition; True marks foreground (ink) pixels."""
    if width < 1 or height < 1:
        raise ValueError("raster dimensions must be positive")
    mask = np.zeros((height, width), dtype=bool)
    for p, ket in d.terms:
        if ket.kind is VisualKetKind.DOT:
            _draw_dot(mask, p, width, height)
        elif ket.kind is VisualKetKind.SEGMENT:
            _draw_segment(mask, p, width, height)
        else:
            _draw_arc(mask, p, ket.sweep, width, height)
    return mask


def kind_counts(d: VisualDecomposition | Sequence[Term]) -> dict[VisualKetKind, int]:
    terms = d.terms if isinstance(d, VisualDecomposition) else d
    counts = {k: 0 for k in KIND_ORDER}
    for _, ket in terms:
        counts[ket.kind] += 1
    return counts
