"""Synthetic rasters and random decompositions shared by the tests."""
from __future__ import annotations

import math

import numpy as np
from PIL import Image, ImageDraw

from ketsound.filter import ImageRaster
from ketsound.kets import KetPlacement, Term, VisualDecomposition, VisualKet

STROKE = 3


def canvas(size=256):
    im = Image.new("L", (size, size), 255)
    return im, ImageDraw.Draw(im)


def raster(im) -> ImageRaster:
    return ImageRaster(np.asarray(im.convert("L")))


def dotted_row(size=256, n=6):
    im, d = canvas(size)
    y = size // 2
    r = max(2, size // 64)
    for i in range(n):
        x = int((i + 1) * size / (n + 1))
        d.ellipse((x - r, y - r, x + r, y + r), fill=0)
    return im


def curved_line(size=256):
    im, d = canvas(size)
    m = size // 6
    d.arc((m, m, size - m, size - m), 200, 340, fill=0, width=STROKE)
    return im


def zigzag(size=256, teeth=4):
    im, d = canvas(size)
    xs = np.linspace(size * 0.1, size * 0.9, teeth + 1)
    pts = [(float(x), size * (0.35 if i % 2 else 0.65)) for i, x in enumerate(xs)]
    d.line(pts, fill=0, width=STROKE)
    return im


def circle_outline(size=256, margin=None):
    im, d = canvas(size)
    m = size // 5 if margin is None else margin
    d.ellipse((m, m, size - m, size - m), outline=0, width=STROKE)
    return im


def random_image(seed: int, size=160) -> Image.Image:
    """A few random strokes, outlines and blobs on a white canvas."""
    rng = np.random.default_rng(seed)
    im, d = canvas(size)
    for _ in range(int(rng.integers(1, 5))):
        kind = int(rng.integers(0, 5))
        x0, y0 = rng.uniform(0.1, 0.6, 2) * size
        w, h = rng.uniform(0.15, 0.35, 2) * size
        box = (x0, y0, x0 + w, y0 + h)
        if kind == 0:
            d.ellipse(box, outline=0, width=STROKE)
        elif kind == 1:
            d.line([(x0, y0), (x0 + w, y0 + h)], fill=0, width=STROKE)
        elif kind == 2:
            r = rng.uniform(2, 5)
            d.ellipse((x0 - r, y0 - r, x0 + r, y0 + r), fill=0)
        elif kind == 3:
            d.arc(box, float(rng.uniform(0, 180)), float(rng.uniform(200, 330)), fill=0, width=STROKE)
        else:
            d.rectangle(box, fill=0)
    return im


def corpus(n=50, size=160, seed0=1000):
    return [raster(random_image(seed0 + i, size)) for i in range(n)]


def random_term(rng: np.random.Generator) -> Term:
    k = int(rng.integers(0, 3))
    if k == 0:
        ket = VisualKet.dot()
    elif k == 1:
        ket = VisualKet.segment()
    else:
        ket = VisualKet.arc(float(rng.uniform(0.05, 2 * math.pi - 0.1)))
    p = KetPlacement(
        x=float(rng.uniform(0, 1)),
        y=float(rng.uniform(0, 1)),
        scale=float(rng.uniform(0.005, 0.6)),
        rotation=float(rng.uniform(0, 2 * math.pi)),
        thickness=float(rng.uniform(0.001, 0.05)),
    )
    return Term(p, ket)


def random_decomposition(rng: np.random.Generator, max_terms=8) -> VisualDecomposition:
    n = int(rng.integers(0, max_terms + 1))
    terms = tuple(random_term(rng) for _ in range(n))
    return VisualDecomposition(terms, int(rng.integers(0, n + 1)), 256, 256)
