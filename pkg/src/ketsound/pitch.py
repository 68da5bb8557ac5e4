"""Pitch folding, scale snapping and instrument ranges."""
from __future__ import annotations

import enum


class ScaleSnap(enum.Enum):
    CHROMATIC = "chromatic"
    MAJOR = "major"
    MINOR = "minor"


_PITCH_CLASSES = {
    ScaleSnap.CHROMATIC: frozenset(range(12)),
    ScaleSnap.MAJOR: frozenset({0, 2, 4, 5, 7, 9, 11}),
    ScaleSnap.MINOR: frozenset({0, 2, 3, 5, 7, 8, 10}),
}

# Comfortable ranges for a few General MIDI programs.  These are editorial
# choices (written ranges trimmed to the idiomatic register), not a standard.
INSTRUMENTS = {
    "piano": (0, 21, 108),
    "guitar": (24, 40, 83),
    "violin": (40, 55, 100),
    "viola": (41, 48, 88),
    "cello": (42, 36, 76),
    "trumpet": (56, 54, 86),
    "clarinet": (71, 50, 94),
    "flute": (73, 60, 96),
}


def transpose_to_range(pitch: int, lo: int, hi: int) -> int:
    """Fold ``pitch`` by octaves into [lo, hi].

    When the range is narrower than an octave the fold can overshoot both
    ends; the nearer bound is used then.
    """
    if lo >= hi:
        raise ValueError(f"empty pitch range [{lo}, {hi}]")
    p = int(pitch)
    if lo <= p <= hi:
        return p
    if p > hi:
        p -= 12 * -(-(p - hi) // 12)
    else:
        p += 12 * -(-(lo - p) // 12)
        if p > hi:
            p -= 12
    if p >= lo:
        return p
    # p sits below lo and p + 12 above hi
    return lo if lo - p <= p + 12 - hi else hi


def snap_to_scale(pitch: int, snap: ScaleSnap, lo: int = 0, hi: int = 127) -> int:
    """Nearest scale tone (C tonic) inside [lo, hi]; ties go down.

    Returns ``pitch`` unchanged when the range holds no scale tone.
    """
    classes = _PITCH_CLASSES[snap]
    if pitch % 12 in classes:
        return pitch
    for dist in range(1, 7):
        for cand in (pitch - dist, pitch + dist):
            if lo <= cand <= hi and cand % 12 in classes:
                return cand
    return pitch
