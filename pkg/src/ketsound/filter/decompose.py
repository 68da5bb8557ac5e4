"""Operator F: raster -> weighted superposition of visual kets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..kets import FLAT_ARC_SWEEP, Term, VisualDecomposition, VisualKet, VisualKetKind, render
from .fitting import (
    DegenerateArcError,
    DiscretizationLevel,
    FitResult,
    _placement,
    farthest_index,
    fit_arc,
    fit_segment,
    point_segment_distance,
    rdp_indices,
)
from .raster import (
    ImageRaster,
    NoObjectsError,
    Polyline,
    binarize,
    component_boundaries,
    crop_component,
    label_components,
    polygon_area,
)
from .skeleton import skeleton_paths

MAX_LEVEL = 16
# a filled blob no wider than this fraction of the diagonal reads as a point
BLOB_EXTENT = 0.1
BLOB_FILL = 0.5
# staircase error of a rasterized straight stroke stays under a pixel
PIXEL_NOISE = 1.0


def _level(level, width, height) -> DiscretizationLevel:
    if isinstance(level, DiscretizationLevel):
        return level
    return DiscretizationLevel(int(level), width, height)


def _dot_fit(pts: np.ndarray, extent: float, thickness: float, lev: DiscretizationLevel) -> FitResult:
    c = pts.mean(axis=0)
    size = max(extent, 1.0)
    radius = size / 2.0
    outside = np.maximum(np.hypot(*(pts - c).T) - radius, 0.0)
    placement = _placement(c[0], c[1], size, 0.0, max(thickness, size), lev.width, lev.height, lev.diag)
    return FitResult(placement, VisualKet.dot(), float(np.sqrt(np.mean(outside ** 2))))


def _closed_chains(pts: np.ndarray):
    """Cut a closed loop into two open chains: at the point farthest from the
    loop's centroid (a corner, when there is one) and at the point farthest
    from that."""
    start = int(np.argmax(np.hypot(*(pts - pts.mean(axis=0)).T)))
    pts = np.roll(pts, -start, axis=0)
    k = farthest_index(pts)
    return [pts[: k + 1], np.vstack([pts[k:], pts[:1]])]


def segment_primitives(p: Polyline, level: DiscretizationLevel, thickness: float = 1.0) -> list[FitResult]:
    """Split a traced polyline into dots, segments and arcs.

    Each piece tries Dot (small extent), then Segment, then Arc, accepting the
    first whose residual is under the level's fit tolerance.  Otherwise the
    piece is split at its most deviating RDP vertex and both halves recurse.
    ``thickness`` is the stroke width in pixels.
    """
    pts = p.as_array()
    size = (level.width, level.height)
    if len(pts) == 1:
        return [_dot_fit(pts, 1.0, thickness, level)]
    extent = float(np.hypot(*(pts.max(axis=0) - pts.min(axis=0))))
    if extent + thickness < level.dot_extent:
        return [_dot_fit(pts, extent + thickness, thickness, level)]
    chains = _closed_chains(pts) if p.closed and len(pts) >= 3 else [pts]
    out: list[FitResult] = []
    for chain in chains:
        breaks = rdp_indices(chain, level.rdp_tol)
        _split(chain, 0, len(chain) - 1, breaks, level, size, thickness, out)
    return out


def _clearly_curved(seg: FitResult, arc: FitResult) -> bool:
    """Simpler kind wins near-ties: an arc replaces an acceptable segment only
    when it bends visibly and fits much better than pixel noise allows."""
    return (
        arc.ket.sweep >= FLAT_ARC_SWEEP
        and seg.residual > max(PIXEL_NOISE, 2.0 * arc.residual)
    )


def _split(chain, i, j, breaks, level, size, thickness, out):
    # explicit stack keeps deep recursions on long noisy chains safe
    stack = [(i, j)]
    pieces = []
    while stack:
        i, j = stack.pop()
        sub = chain[i : j + 1]
        extent = float(np.hypot(*(sub.max(axis=0) - sub.min(axis=0))))
        if extent + thickness < level.dot_extent:
            pieces.append((i, _dot_fit(sub, extent + thickness, thickness, level)))
            continue
        seg = fit_segment(sub, size, thickness)
        if j - i <= 1:
            pieces.append((i, seg))
            continue
        try:
            arc = fit_arc(sub, size, thickness)
        except DegenerateArcError:
            arc = None
        arc_ok = arc is not None and arc.residual < level.fit_tol
        if seg.residual < level.fit_tol and not (arc_ok and _clearly_curved(seg, arc)):
            pieces.append((i, seg))
            continue
        if arc_ok:
            pieces.append((i, arc))
            continue
        inner = [b for b in breaks if i < b < j]
        if inner:
            dev = point_segment_distance(chain[inner], chain[i], chain[j])
            k = inner[int(np.argmax(dev))]
        else:
            dev = point_segment_distance(chain[i + 1 : j], chain[i], chain[j])
            k = i + 1 + int(np.argmax(dev))
        stack.append((k, j))
        stack.append((i, k))
    pieces.sort(key=lambda t: t[0])
    # slivers no longer than the stroke is wide vanish under their neighbours' ink
    kept = [f for _, f in pieces if f.placement.scale * level.diag >= thickness or f.ket.kind is VisualKetKind.DOT]
    out.extend(kept or [f for _, f in pieces])


@dataclass
class _Component:
    area: float
    main: list
    holes: list


def _path_length(pts, closed) -> float:
    a = np.asarray(pts, dtype=float)
    if len(a) < 2:
        return 0.0
    if closed:
        a = np.vstack([a, a[:1]])
    return float(np.hypot(*np.diff(a, axis=0).T).sum())


def _stroke_width(area: float, paths) -> float:
    """Stroke width from ink area over centreline length.

    A free tip adds about half a width of ink beyond the skeleton, so the
    area is modelled as ``width * length + tips * width**2 / 2``.
    """
    length = 0.0
    tips = 0
    for pts, closed in paths:
        a = np.asarray(pts, dtype=float)
        if len(a) > 1:
            length += float(np.hypot(*np.diff(a, axis=0).T).sum())
        if closed and len(a) > 2:
            length += float(np.hypot(*(a[0] - a[-1])))
        elif not closed:
            tips += 2
    if length <= 0.0:
        return max(1.0, math.sqrt(area))
    if tips == 0:
        return max(1.0, area / length)
    return max(1.0, (-length + math.sqrt(length * length + 2.0 * tips * area)) / tips)


def _analyse_component(labels, lab, sl, dist, lev: DiscretizationLevel) -> _Component:
    comp, (ox, oy) = crop_component(labels, lab, sl)
    rows, cols = np.nonzero(comp)
    extent = float(max(rows.max() - rows.min(), cols.max() - cols.min()) + 1)
    blob = extent <= BLOB_EXTENT * lev.diag and len(rows) >= BLOB_FILL * extent * extent
    if extent < lev.dot_extent or blob:
        pts = np.column_stack([cols + ox, rows + oy]).astype(float)
        return _Component(float(len(rows)), [_dot_fit(pts, extent, extent, lev)], [])

    local_dt = dist[sl][labels[sl] == lab]
    dmax = float(local_dt.max())
    outer, holes = component_boundaries(labels, lab, sl)
    area = max(polygon_area(outer), float(len(rows)))

    if dmax <= max(2.5, 0.15 * extent):
        # stroke-like: fit the centreline rather than both sides of the outline
        paths = skeleton_paths(comp, spur_length=2.0 * dmax + 2.0)
        width = _stroke_width(float(len(rows)), paths)
        # junction debris shorter than the stroke is already covered by ink
        long_paths = [(p, c) for p, c in paths if _path_length(p, c) >= width]
        paths = long_paths or paths[:1]
        fits = []
        for pts, closed in paths:
            shifted = tuple((x + ox, y + oy) for x, y in pts)
            fits.extend(segment_primitives(Polyline(shifted, closed and len(shifted) >= 3), lev, width))
        return _Component(area, fits, [])

    main = segment_primitives(Polyline(tuple(outer), len(outer) >= 3), lev)
    hole_fits = []
    for h in holes:
        hole_fits.extend(segment_primitives(Polyline(tuple(h), len(h) >= 3), lev))
    return _Component(area, main, hole_fits)


def _order(fits):
    return sorted(fits, key=lambda f: (f.placement.x, f.placement.y))


def decompose(img: ImageRaster, level=2) -> VisualDecomposition:
    """Filter an image into envelope terms (the largest outer contour) and
    pattern terms (everything else), each group ordered left to right."""
    lev = _level(level, img.width, img.height)
    mask = binarize(img)
    labels, n = label_components(mask)
    if n == 0:
        raise NoObjectsError()
    dist = ndimage.distance_transform_edt(mask)
    comps = [
        _analyse_component(labels, lab, sl, dist, lev)
        for lab, sl in enumerate(ndimage.find_objects(labels), start=1)
    ]
    env_idx = max(range(len(comps)), key=lambda i: (comps[i].area, -i))
    envelope = _order(comps[env_idx].main)
    patterns = list(comps[env_idx].holes)
    for i, c in enumerate(comps):
        if i != env_idx:
            patterns.extend(c.main)
            patterns.extend(c.holes)
    patterns = _order(patterns)
    terms = tuple(Term(f.placement, f.ket) for f in envelope + patterns)
    if not terms:
        raise NoObjectsError()
    return VisualDecomposition(terms, len(envelope), img.width, img.height)


def reconstruction_error(mask: np.ndarray, d: VisualDecomposition) -> float:
    """1 - IoU between a foreground mask and the rendered decomposition."""
    h, w = mask.shape
    drawn = render(d, w, h)
    union = np.logical_or(mask, drawn).sum()
    if union == 0:
        return 0.0
    return 1.0 - float(np.logical_and(mask, drawn).sum()) / float(union)


@dataclass(frozen=True)
class GestaltCurve:
    n_star: int
    curve: tuple[tuple[int, float], ...]
    reached: bool
    levels: tuple[tuple[int, int, float], ...] = ()


def minimal_ket_count(img: ImageRaster, recog_threshold: float = 0.5, max_level: int = MAX_LEVEL) -> GestaltCurve:
    """Smallest number of kets whose rendering stays recognizable.

    Levels 1..max_level are decomposed; each gives (term count, 1 - IoU).  The
    curve keeps one point per term count and takes running minima so the
    error never increases with N.
    """
    if not 0.0 < recog_threshold < 1.0:
        raise ValueError("recognizability threshold must lie in (0, 1)")
    mask = binarize(img)
    per_level = []
    for level in range(1, max_level + 1):
        d = decompose(img, level)
        per_level.append((level, len(d.terms), reconstruction_error(mask, d)))
    best: dict[int, float] = {}
    for _, n, err in per_level:
        best[n] = min(err, best.get(n, math.inf))
    curve = []
    running = math.inf
    for n in sorted(best):
        running = min(running, best[n])
        curve.append((n, running))
    for n, err in curve:
        if err <= recog_threshold:
            return GestaltCurve(n, tuple(curve), True, tuple(per_level))
    return GestaltCurve(per_level[-1][1], tuple(curve), False, tuple(per_level))
