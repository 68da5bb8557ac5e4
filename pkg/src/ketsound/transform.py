"""Operator T: visual terms -> timed note events.

The map is diagonal (each ket kind has exactly one musical figure) and acts
term by term, so transforming a concatenation gives the union of the parts.
Placement drives the musical coefficients: x -> onset, 1 - y -> pitch,
scale -> time span, thickness -> velocity, angle -> interval size.

Beat values live on a 1/1024-beat grid; with dyadic values, retrograde and
block shifts are exact in floating point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .kets import (
    KetPlacement,
    Term,
    VisualDecomposition,
    VisualKet,
    VisualKetKind,
    cosine_similarity,
)
from .pitch import ScaleSnap, snap_to_scale, transpose_to_range

GRID = 1024
CLUSTER_TOLERANCE = 0.1  # radians from vertical
VIOLENT_SCALE = 0.25
FORTE_THICKNESS = 0.03
ONSET_BINS = 8
PITCH_BANDS = 4


class Articulation(enum.Enum):
    LEGATO = "legato"
    STACCATO = "staccato"
    STACCATISSIMO = "staccatissimo"


ARTICULATION = {
    VisualKetKind.DOT: Articulation.STACCATO,
    VisualKetKind.SEGMENT: Articulation.STACCATISSIMO,
    VisualKetKind.ARC: Articulation.LEGATO,
}
ARTICULATION_ORDER = tuple(Articulation)

# fraction of the inter-onset gap that sounds
GATE = {
    Articulation.LEGATO: 1.0,
    Articulation.STACCATO: 0.5,
    Articulation.STACCATISSIMO: 0.25,
}
VIOLENT_GATE = 0.15


@dataclass(frozen=True)
class SoundEvent:
    onset: float
    duration: float
    pitch: int
    velocity: int
    articulation: Articulation
    source_term: int

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError(f"negative onset {self.onset}")
        if self.duration <= 0:
            raise ValueError(f"non-positive duration {self.duration}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside 0-127")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside 1-127")
        if self.source_term < 0:
            raise ValueError(f"negative source term {self.source_term}")

    @property
    def end(self) -> float:
        return self.onset + self.duration


@dataclass(frozen=True)
class SoundDecomposition:
    events: tuple[SoundEvent, ...] = ()
    envelope_count: int = 0
    total_beats: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.total_beats <= 0:
            raise ValueError("total_beats must be positive")
        if self.envelope_count < 0:
            raise ValueError("envelope_count must be non-negative")
        for e in self.events:
            if e.end > self.total_beats + 1e-9:
                raise ValueError(f"event {e} ends after total_beats {self.total_beats}")

    def __len__(self):
        return len(self.events)

    def is_envelope(self, e: SoundEvent) -> bool:
        return e.source_term < self.envelope_count


@dataclass(frozen=True)
class MappingConfig:
    total_beats: float = 16.0
    pitch_lo: int = 48
    pitch_hi: int = 84
    enable_progression: bool = True
    enable_interval: bool = True
    enable_dynamics: bool = True
    enable_pauses: bool = True
    notes_per_unit_scale: int = 8
    scale_snap: ScaleSnap = ScaleSnap.CHROMATIC
    interval_max: int = 12

    def __post_init__(self):
        if not 0 <= self.pitch_lo < self.pitch_hi <= 127:
            raise ValueError(f"invalid pitch range {self.pitch_lo}:{self.pitch_hi}")
        if self.notes_per_unit_scale < 1:
            raise ValueError("notes_per_unit_scale must be >= 1")
        if self.interval_max < 1:
            raise ValueError("interval_max must be >= 1")
        if not self.total_beats > 0:
            raise ValueError("total_beats must be positive")
        if self.grid_beats < max(3, 4 * self.notes_per_unit_scale):
            raise ValueError(
                f"total_beats {self.total_beats} too short for "
                f"{4 * self.notes_per_unit_scale} notes on a 1/{GRID} beat grid"
            )
        if isinstance(self.scale_snap, str):
            object.__setattr__(self, "scale_snap", ScaleSnap(self.scale_snap))

    @property
    def grid_beats(self) -> int:
        return int(math.floor(self.total_beats * GRID + 0.5))


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def angle_from_horizontal(rotation: float) -> float:
    a = rotation % math.pi
    return min(a, math.pi - a)


def is_near_vertical(rotation: float) -> bool:
    return (
        abs(rotation - math.pi / 2) < CLUSTER_TOLERANCE
        or abs(rotation - 3 * math.pi / 2) < CLUSTER_TOLERANCE
    )


def base_pitch(y: float, cfg: MappingConfig) -> int:
    """Higher in the picture is higher in pitch."""
    return _round(cfg.pitch_lo + (1.0 - y) * (cfg.pitch_hi - cfg.pitch_lo))


def interval_step(rotation: float, cfg: MappingConfig) -> int:
    if not cfg.enable_interval:
        return 1
    return max(1, _round(cfg.interval_max * angle_from_horizontal(rotation) / (math.pi / 2)))


def thickness_velocity(thickness: float) -> int:
    """Thicker strokes play louder.

    Stroke widths are tiny fractions of the diagonal (3 px on a 512 px image
    is 0.004), so the map saturates at ``FORTE_THICKNESS`` and uses a square
    root to keep thin lines audible.
    """
    level = min(1.0, math.sqrt(thickness / FORTE_THICKNESS))
    return min(127, max(1, 1 + _round(126 * level)))


def note_count(ket: VisualKet, scale: float, cfg: MappingConfig) -> int:
    if ket.kind is VisualKetKind.DOT:
        return 1
    n = _round(cfg.notes_per_unit_scale * scale * 4)
    return max(3 if ket.kind is VisualKetKind.ARC else 2, n)


def _pitch_offsets(ket: VisualKet, n: int, step: int, ascending: bool) -> list[int]:
    """Semitone offsets above the lowest note, in local-time order."""
    if ket.kind is VisualKetKind.DOT:
        return [0]
    if ket.kind is VisualKetKind.ARC:
        return [min(k, n - 1 - k) * step for k in range(n)]
    run = [k * step for k in range(n)]
    return run if ascending else run[::-1]


def expand_term(
    placement: KetPlacement, ket: VisualKet, cfg: MappingConfig, source_term: int = 0
) -> list[SoundEvent]:
    """The musical figure of one visual term."""
    articulation = ARTICULATION[ket.kind]
    tu = cfg.grid_beats
    n = note_count(ket, placement.scale, cfg)
    span = min(tu, max(n, _round(placement.scale * tu)))
    start = min(max(_round(placement.x * tu - span / 2.0), 0), tu - span)

    gate = GATE[articulation]
    if ket.kind is VisualKetKind.SEGMENT and placement.scale > VIOLENT_SCALE:
        gate = VIOLENT_GATE
    if not cfg.enable_pauses:
        gate = 1.0

    # rotation in [pi, 2pi) points up the screen; time reversal flips this exactly
    ascending = placement.rotation >= math.pi or not cfg.enable_progression
    cluster = ket.kind is VisualKetKind.SEGMENT and is_near_vertical(placement.rotation)
    if cluster:
        onsets = [start] * n
        durations = [max(1, int(span * gate))] * n
    else:
        # uneven slots are mirrored with the run so a reversed stroke replays
        # the same (pitch, duration) pairs backwards
        if ascending:
            bounds = [(k * span) // n for k in range(n + 1)]
        else:
            bounds = [span - ((n - k) * span) // n for k in range(n + 1)]
        onsets = [start + b for b in bounds[:-1]]
        durations = [max(1, int((b - a) * gate)) for a, b in zip(bounds, bounds[1:])]

    # a cluster stacks neighbouring notes; runs widen their steps with the angle
    step = 1 if cluster else interval_step(placement.rotation, cfg)
    offsets = _pitch_offsets(ket, n, step, ascending)
    centre = base_pitch(placement.y, cfg)
    lowest = centre - max(offsets) // 2

    velocity = thickness_velocity(placement.thickness) if cfg.enable_dynamics else 64

    events = []
    for onset, dur, off in zip(onsets, durations, offsets):
        pitch = transpose_to_range(lowest + off, cfg.pitch_lo, cfg.pitch_hi)
        pitch = snap_to_scale(pitch, cfg.scale_snap, cfg.pitch_lo, cfg.pitch_hi)
        events.append(
            SoundEvent(onset / GRID, dur / GRID, pitch, velocity, articulation, source_term)
        )
    return events


def transform(d: VisualDecomposition, cfg: MappingConfig) -> SoundDecomposition:
    events = []
    for i, (placement, ket) in enumerate(d.terms):
        events.extend(expand_term(placement, ket, cfg, i))
    return SoundDecomposition(tuple(events), d.envelope_count, cfg.grid_beats / GRID)


def _sequence_index(snapshots: Sequence[VisualDecomposition]):
    """Index maps from (snapshot, term) into the merged decomposition that
    lists every snapshot's envelope terms first, then every pattern term."""
    env_total = sum(s.envelope_count for s in snapshots)
    env_off = pat_off = 0
    maps = []
    for s in snapshots:
        j = s.envelope_count
        maps.append(
            [env_off + i if i < j else env_total + pat_off + i - j for i in range(len(s.terms))]
        )
        env_off += j
        pat_off += len(s.terms) - j
    return env_total, maps


def sequence_decomposition(snapshots: Sequence[VisualDecomposition]) -> VisualDecomposition:
    """All snapshots as one decomposition (envelopes first, then patterns)."""
    env_total, maps = _sequence_index(snapshots)
    n = sum(len(s.terms) for s in snapshots)
    terms: list[Term | None] = [None] * n
    for s, m in zip(snapshots, maps):
        for i, t in zip(m, s.terms):
            terms[i] = t
    hints = snapshots[0] if snapshots else VisualDecomposition()
    return VisualDecomposition(tuple(terms), env_total, hints.width_hint, hints.height_hint)


def transform_sequence(
    snapshots: Sequence[VisualDecomposition], cfg: MappingConfig
) -> SoundDecomposition:
    """Sonify snapshots of a changing image, one time block each.

    Source indices refer to ``sequence_decomposition(snapshots)``.
    """
    total_u = cfg.grid_beats
    if not snapshots:
        return SoundDecomposition((), 0, total_u / GRID)
    k = len(snapshots)
    block_u = total_u // k
    block_cfg = replace(cfg, total_beats=block_u / GRID)
    env_total, maps = _sequence_index(snapshots)
    events = []
    for t, (snap, m) in enumerate(zip(snapshots, maps)):
        shift = t * block_u / GRID
        for e in transform(snap, block_cfg).events:
            events.append(replace(e, onset=e.onset + shift, source_term=m[e.source_term]))
    return SoundDecomposition(tuple(events), env_total, total_u / GRID)


def retrograde(s: SoundDecomposition) -> SoundDecomposition:
    """Play the events from the last to the first."""
    events = tuple(
        replace(e, onset=s.total_beats - e.onset - e.duration) for e in s.events
    )
    return replace(s, events=events)


def sound_feature_vector(
    s: SoundDecomposition, pitch_lo: int, pitch_hi: int
) -> np.ndarray:
    """Duration-weighted histogram over articulation x onset octile x pitch band.

    Pitch bands split [pitch_lo, pitch_hi] into four equal parts.
    """
    hist = np.zeros((len(ARTICULATION_ORDER), ONSET_BINS, PITCH_BANDS))
    width = pitch_hi - pitch_lo + 1
    for e in s.events:
        a = ARTICULATION_ORDER.index(e.articulation)
        t = min(ONSET_BINS - 1, int(ONSET_BINS * e.onset / s.total_beats))
        b = min(PITCH_BANDS - 1, max(0, (PITCH_BANDS * (e.pitch - pitch_lo)) // width))
        hist[a, t, b] += e.duration
    return hist.ravel()


def sound_distance(s1: SoundDecomposition, s2: SoundDecomposition) -> float:
    """Cosine similarity of the two event histograms (1 = identical).

    Pitch bands are laid over the pitch extent of both decompositions together.
    """
    pitches = [e.pitch for e in s1.events] + [e.pitch for e in s2.events]
    lo, hi = (min(pitches), max(pitches)) if pitches else (0, 127)
    return cosine_similarity(
        sound_feature_vector(s1, lo, hi), sound_feature_vector(s2, lo, hi)
    )
