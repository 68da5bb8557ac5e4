"""SVG 1.1 view of a visual decomposition."""
from __future__ import annotations

import math

from ..kets import (
    VisualDecomposition,
    VisualKetKind,
    arc_geometry,
    image_diagonal,
    segment_endpoints,
)

ENVELOPE_COLOR = "#1f3a93"
PATTERN_COLOR = "#c0392b"


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _element(p, ket, width, height, color, dashed) -> str:
    style = f'stroke="{color}" fill="none"' + (' stroke-dasharray="4 2"' if dashed else "")
    diag = image_diagonal(width, height)
    sw = _num(max(p.thickness * diag, 1.0))
    geo = arc_geometry(p, ket.sweep, width, height) if ket.kind is VisualKetKind.ARC else None
    if ket.kind is VisualKetKind.DOT or (ket.kind is VisualKetKind.ARC and geo is None):
        r = p.scale * diag / 2.0
        fill = style.replace('fill="none"', f'fill="{color}"')
        return (
            f'<circle class="ket dot" cx="{_num(p.x * width)}" cy="{_num(p.y * height)}" '
            f'r="{_num(r)}" stroke-width="{sw}" {fill}/>'
        )
    if ket.kind is VisualKetKind.SEGMENT:
        (x0, y0), (x1, y1) = segment_endpoints(p, width, height)
        return (
            f'<line class="ket segment" x1="{_num(x0)}" y1="{_num(y0)}" '
            f'x2="{_num(x1)}" y2="{_num(y1)}" stroke-width="{sw}" {style}/>'
        )
    (x0, y0), (x1, y1) = geo.start, geo.end
    large = 1 if ket.sweep > math.pi else 0
    # sweep-flag 1 runs towards increasing angle, i.e. clockwise on screen
    a0 = math.atan2(y0 - geo.cy, x0 - geo.cx)
    a_apex = math.atan2(geo.apex[1] - geo.cy, geo.apex[0] - geo.cx)
    clockwise = (a_apex - a0) % (2 * math.pi) < ket.sweep
    r = _num(geo.radius)
    d = (
        f"M {_num(x0)} {_num(y0)} A {r} {r} 0 {large} {1 if clockwise else 0} "
        f"{_num(x1)} {_num(y1)}"
    )
    return f'<path class="ket arc" d="{d}" stroke-width="{sw}" {style}/>'


def to_svg(d: VisualDecomposition, width: int, height: int) -> str:
    """One circle/line/path per term; envelope solid blue, patterns dashed red."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    for name, terms, color, dashed in (
        ("envelope", d.envelope, ENVELOPE_COLOR, False),
        ("patterns", d.patterns, PATTERN_COLOR, True),
    ):
        lines.append(f'<g id="{name}">')
        lines.extend("  " + _element(p, k, width, height, color, dashed) for p, k in terms)
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
