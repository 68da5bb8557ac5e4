"""Raster ingestion, binarization and boundary tracing."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

DECODE_ERROR = "the uploaded image cannot be processed. Please, upload a different image"
NO_OBJECTS_ERROR = "no objects have been recognized. Please, upload a different image"

# Moore neighbourhood in clockwise order (screen coordinates, y down),
# starting from west.  Entries are (drow, dcol).
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))

EIGHT = np.ones((3, 3), dtype=bool)
FOUR = ndimage.generate_binary_structure(2, 1)


class ImageDecodeError(ValueError):
    def __init__(self, detail: str = ""):
        super().__init__(DECODE_ERROR + (f" ({detail})" if detail else ""))


class NoObjectsError(ValueError):
    def __init__(self):
        super().__init__(NO_OBJECTS_ERROR)


@dataclass(frozen=True, eq=False)
class ImageRaster:
    """Grayscale image, intensities 0-255, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D raster, got shape {px.shape}")
        px = px.astype(np.uint8, copy=True)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, ImageRaster) and np.array_equal(self.pixels, other.pixels)

    __hash__ = None

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> ImageRaster:
        """Black ink on white paper."""
        return cls(np.where(np.asarray(mask, dtype=bool), 0, 255))


@dataclass(frozen=True)
class Polyline:
    points: tuple[tuple[float, float], ...]
    closed: bool = False

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if not pts:
            raise ValueError("polyline needs at least one point")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"consecutive duplicate point {a}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)


def load_image(path) -> ImageRaster:
    """Decode PNG/PGM (or anything Pillow reads) to grayscale.

    Colour is reduced with ITU-R BT.601 luma weights; transparent pixels are
    composited onto white paper first.
    """
    try:
        with Image.open(Path(path)) as im:
            im.load()
            if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
                rgba = im.convert("RGBA")
                paper = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                im = Image.alpha_composite(paper, rgba)
            if im.mode in ("I", "I;16", "I;16B", "F"):
                arr = np.asarray(im, dtype=float)
                hi = arr.max() if arr.size else 0
                arr = arr * (255.0 / hi) if hi > 255 else arr
                return ImageRaster(np.clip(np.rint(arr), 0, 255))
            gray = im.convert("L")
            return ImageRaster(np.asarray(gray))
    except (OSError, UnidentifiedImageError, ValueError, SyntaxError) as exc:
        raise ImageDecodeError(str(exc)) from exc


def otsu_threshold(img: ImageRaster) -> int | None:
    """Otsu threshold t; pixels <= t form the dark class.

    Returns None for single-intensity images.  When several thresholds tie
    for maximal between-class variance the middle of the plateau is used.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(float)
    total = hist.sum()
    levels = np.arange(256, dtype=float)
    w0 = np.cumsum(hist)
    w1 = total - w0
    s0 = np.cumsum(hist * levels)
    mu_total = s0[-1]
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = s0 / w0
        m1 = (mu_total - s0) / w1
        between = np.where(valid, w0 * w1 * (m0 - m1) ** 2, -1.0)
    best = between.max()
    ties = np.flatnonzero(between >= best * (1 - 1e-12))
    return int((ties[0] + ties[-1]) // 2)


def binarize(img: ImageRaster) -> np.ndarray:
    """Foreground mask (True = ink) using Otsu's threshold, dark side as ink."""
    t = otsu_threshold(img)
    if t is None:
        return np.zeros(img.pixels.shape, dtype=bool)
    return img.pixels <= t


def label_components(mask: np.ndarray):
    """8-connected foreground components."""
    return ndimage.label(mask, structure=EIGHT)


def moore_trace(mask: np.ndarray, start: tuple[int, int], backtrack: tuple[int, int]):
    """Moore-neighbour boundary trace.

    ``start`` is a foreground pixel and ``backtrack`` the background pixel we
    entered it from.  Tracing stops when the first move out of ``start`` is
    about to be repeated.  Returns the boundary as a list of (row, col).
    """
    h, w = mask.shape

    def fg(r, c):
        return 0 <= r < h and 0 <= c < w and mask[r, c]

    def step(cur, back):
        d0 = _MOORE.index((back[0] - cur[0], back[1] - cur[1]))
        for i in range(1, 9):
            dr, dc = _MOORE[(d0 + i) % 8]
            cand = (cur[0] + dr, cur[1] + dc)
            if fg(*cand):
                pr, pc = _MOORE[(d0 + i - 1) % 8]
                return cand, (cur[0] + pr, cur[1] + pc)
        return None, None

    second, back = step(start, backtrack)
    if second is None:
        return [start]  # isolated pixel
    boundary = [start]
    cur = second
    # every boundary pixel is entered from at most four sides
    for _ in range(4 * int(mask.sum()) + 4):
        nxt, nback = step(cur, back)
        if cur == start and nxt == second:
            return boundary
        boundary.append(cur)
        cur, back = nxt, nback
    raise RuntimeError("boundary trace did not terminate")


def _dedupe(points):
    out = []
    for p in points:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[-1] == out[0]:
        out.pop()
    return out


def trace_outer(comp: np.ndarray):
    """Outer boundary of one component mask as [(x, y), ...] pixel indices."""
    rows, cols = np.nonzero(comp)
    r = rows.min()
    c = cols[rows == r].min()
    pixels = moore_trace(comp, (int(r), int(c)), (int(r), int(c) - 1))
    return _dedupe([(pc, pr) for pr, pc in pixels])


def trace_holes(comp: np.ndarray):
    """Boundaries of the holes of one component, as [(x, y), ...] lists."""
    background, n = ndimage.label(~comp, structure=FOUR)
    if n == 0:
        return []
    border = set(np.unique(np.concatenate([
        background[0, :], background[-1, :], background[:, 0], background[:, -1],
    ])))
    out = []
    objects = ndimage.find_objects(background)
    for lab in range(1, n + 1):
        if lab in border:
            continue
        sl = objects[lab - 1]
        hole = background[sl] == lab
        rows, cols = np.nonzero(hole)
        r = rows.min() + sl[0].start
        c = cols[rows == rows.min()].min() + sl[1].start
        # the pixel above the hole's top-left pixel is foreground; trace it
        # with the hole on the backtrack side
        pixels = moore_trace(comp, (int(r) - 1, int(c)), (int(r), int(c)))
        out.append(_dedupe([(pc, pr) for pr, pc in pixels]))
    return out


def polygon_area(points) -> float:
    if len(points) < 3:
        return 0.0
    a = np.asarray(points, dtype=float)
    x, y = a[:, 0], a[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def crop_component(labels: np.ndarray, lab: int, sl) -> tuple[np.ndarray, tuple[int, int]]:
    """Mask of one labelled component padded by one background pixel, plus
    the (x, y) offset of the crop."""
    r0, r1 = sl[0].start, sl[0].stop
    c0, c1 = sl[1].start, sl[1].stop
    comp = np.zeros((r1 - r0 + 2, c1 - c0 + 2), dtype=bool)
    comp[1:-1, 1:-1] = labels[sl] == lab
    return comp, (c0 - 1, r0 - 1)


def _shift(points, offset):
    ox, oy = offset
    return [(x + ox, y + oy) for x, y in points]


def component_boundaries(labels: np.ndarray, lab: int, sl):
    """(outer, [holes]) boundaries of one component in image pixel indices."""
    comp, off = crop_component(labels, lab, sl)
    return _shift(trace_outer(comp), off), [_shift(h, off) for h in trace_holes(comp)]


def extract_contours(mask: np.ndarray) -> list[Polyline]:
    """Closed boundary polylines for every component (outer and hole
    boundaries), largest enclosed area first."""
    labels, _ = label_components(mask)
    found = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        outer, holes = component_boundaries(labels, lab, sl)
        for pts in [outer, *holes]:
            found.append((polygon_area(pts), len(found), pts))
    found.sort(key=lambda t: (-t[0], t[1]))
    return [Polyline(tuple(pts), closed=True) for _, _, pts in found]
