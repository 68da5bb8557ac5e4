import math
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from ketsound.kets import KetPlacement, Term, VisualDecomposition, VisualKet, concat, time_reverse
from ketsound.pitch import ScaleSnap, snap_to_scale, transpose_to_range
from ketsound.transform import (
    GRID,
    Articulation,
    MappingConfig,
    SoundDecomposition,
    SoundEvent,
    expand_term,
    note_count,
    retrograde,
    sound_distance,
    transform,
    transform_sequence,
)

from test_kets import decompositions, placements

CFG = MappingConfig()


def P(x=0.5, y=0.5, scale=0.1, rotation=0.0, thickness=0.01):
    return KetPlacement(x, y, scale, rotation, thickness)


def content(events):
    return Counter((e.onset, e.duration, e.pitch, e.velocity, e.articulation) for e in events)


# -- expand_term ----------------------------------------------------------------


def test_dot_is_one_staccato_note():
    (e,) = expand_term(P(), VisualKet.dot(), CFG)
    assert e.articulation is Articulation.STACCATO


def test_dot_midpoint_pitch():
    cfg = MappingConfig(pitch_lo=48, pitch_hi=72)
    (e,) = expand_term(P(y=0.5), VisualKet.dot(), cfg)
    assert e.pitch == 60
    (top,) = expand_term(P(y=0.0), VisualKet.dot(), cfg)
    (bottom,) = expand_term(P(y=1.0), VisualKet.dot(), cfg)
    assert (top.pitch, bottom.pitch) == (72, 48)


def test_arc_rises_then_falls():
    events = expand_term(P(scale=0.4, rotation=0.3), VisualKet.arc(2.0), CFG)
    pitches = [e.pitch for e in events]
    top = pitches.index(max(pitches))
    assert 0 < top < len(pitches) - 1
    assert pitches[: top + 1] == sorted(pitches[: top + 1])
    assert pitches[top:] == sorted(pitches[top:], reverse=True)
    assert {e.articulation for e in events} == {Articulation.LEGATO}


@pytest.mark.parametrize("rotation", [math.pi / 2, 3 * math.pi / 2, math.pi / 2 + 0.09])
def test_vertical_segment_is_cluster(rotation):
    events = expand_term(P(scale=0.3, rotation=rotation), VisualKet.segment(), CFG)
    assert len(events) > 1 and len({e.onset for e in events}) == 1
    pitches = sorted(e.pitch for e in events)
    assert pitches == list(range(pitches[0], pitches[0] + len(events)))


def test_slanted_segment_is_run():
    events = expand_term(P(scale=0.3, rotation=math.pi / 2 + 0.2), VisualKet.segment(), CFG)
    onsets = [e.onset for e in events]
    assert onsets == sorted(onsets) and len(set(onsets)) == len(onsets)


def test_note_counts():
    assert note_count(VisualKet.dot(), 0.9, CFG) == 1
    assert note_count(VisualKet.segment(), 0.01, CFG) == 2
    assert note_count(VisualKet.segment(), 0.25, CFG) == 8
    assert note_count(VisualKet.arc(1.0), 0.01, CFG) == 3


def test_span_follows_scale():
    for scale in (0.1, 0.25, 0.5):
        events = expand_term(P(scale=scale, rotation=0.2), VisualKet.arc(1.0), CFG)
        first, last = events[0], events[-1]
        assert last.onset + last.duration - first.onset == pytest.approx(scale * CFG.total_beats, abs=1 / GRID)


def test_onset_follows_x():
    left = expand_term(P(x=0.1), VisualKet.dot(), CFG)[0].onset
    right = expand_term(P(x=0.9), VisualKet.dot(), CFG)[0].onset
    assert left < right
    assert right == pytest.approx(0.9 * CFG.total_beats - 0.1 * CFG.total_beats / 2, abs=1 / GRID)


def test_gates():
    seg = expand_term(P(scale=0.1, rotation=0.2), VisualKet.segment(), CFG)
    arc = expand_term(P(scale=0.1, rotation=0.2), VisualKet.arc(1.0), CFG)
    slot = 0.1 * CFG.total_beats / len(seg)
    assert max(e.duration for e in seg) <= 0.25 * slot + 1 / GRID
    violent = expand_term(P(scale=0.5, rotation=0.2), VisualKet.segment(), CFG)
    slot = 0.5 * CFG.total_beats / len(violent)
    assert max(e.duration for e in violent) <= 0.15 * slot + 1 / GRID
    assert all(a.onset + a.duration == b.onset for a, b in zip(arc, arc[1:]))
    (dot,) = expand_term(P(scale=0.1), VisualKet.dot(), CFG)
    assert dot.duration == pytest.approx(0.5 * 0.1 * CFG.total_beats, abs=1 / GRID)


def test_no_pauses_keeps_full_gate():
    cfg = MappingConfig(enable_pauses=False)
    seg = expand_term(P(scale=0.2, rotation=0.2), VisualKet.segment(), cfg)
    assert all(a.onset + a.duration == b.onset for a, b in zip(seg, seg[1:]))


def test_horizontal_gap_becomes_rest():
    d = VisualDecomposition((Term(P(x=0.1, scale=0.05), VisualKet.dot()), Term(P(x=0.8, scale=0.05), VisualKet.dot())))
    a, b = transform(d, CFG).events
    assert b.onset - (a.onset + a.duration) > 0.5 * CFG.total_beats


def test_dynamics():
    thin = expand_term(P(thickness=0.002), VisualKet.dot(), CFG)[0].velocity
    thick = expand_term(P(thickness=0.02), VisualKet.dot(), CFG)[0].velocity
    assert 1 <= thin < thick <= 127
    flat = MappingConfig(enable_dynamics=False)
    assert expand_term(P(thickness=0.02), VisualKet.dot(), flat)[0].velocity == 64


def test_interval_grows_with_angle():
    def spread(rot, cfg=CFG):
        ps = [e.pitch for e in expand_term(P(scale=0.12, rotation=rot), VisualKet.segment(), cfg)]
        return max(ps) - min(ps)

    assert spread(0.05) < spread(0.6) < spread(1.2)
    no_int = MappingConfig(enable_interval=False)
    ps = [e.pitch for e in expand_term(P(scale=0.12, rotation=1.2), VisualKet.segment(), no_int)]
    assert all(abs(a - b) == 1 for a, b in zip(ps, ps[1:]))


def test_progression_direction():
    up = [e.pitch for e in expand_term(P(scale=0.12, rotation=5.5), VisualKet.segment(), CFG)]
    down = [e.pitch for e in expand_term(P(scale=0.12, rotation=0.8), VisualKet.segment(), CFG)]
    assert up == sorted(up) and up[0] < up[-1]
    assert down == sorted(down, reverse=True) and down[0] > down[-1]
    flat = MappingConfig(enable_progression=False)
    ps = [e.pitch for e in expand_term(P(scale=0.12, rotation=0.8), VisualKet.segment(), flat)]
    assert ps == sorted(ps)


@given(placements, st.sampled_from([VisualKet.dot(), VisualKet.segment(), VisualKet.arc(1.0)]),
       st.sampled_from([(48, 84), (60, 66), (0, 127), (30, 31)]), st.sampled_from(list(ScaleSnap)))
def test_events_valid_and_contained(p, ket, rng, snap):
    cfg = MappingConfig(pitch_lo=rng[0], pitch_hi=rng[1], scale_snap=snap)
    events = expand_term(p, ket, cfg)
    assert events
    for e in events:
        assert rng[0] <= e.pitch <= rng[1]
        assert 0 <= e.onset and e.onset + e.duration <= cfg.total_beats
        assert e.duration > 0 and 1 <= e.velocity <= 127


def test_config_validation():
    with pytest.raises(ValueError):
        MappingConfig(pitch_lo=70, pitch_hi=60)
    with pytest.raises(ValueError):
        MappingConfig(total_beats=0)
    with pytest.raises(ValueError):
        MappingConfig(notes_per_unit_scale=0)
    with pytest.raises(ValueError):
        SoundEvent(0.0, 0.0, 60, 64, Articulation.LEGATO, 0)
    with pytest.raises(ValueError):
        SoundDecomposition((SoundEvent(3.0, 2.0, 60, 64, Articulation.LEGATO, 0),), 0, 4.0)


# -- transform ----------------------------------------------------------------


def test_transform_empty_is_silence():
    s = transform(VisualDecomposition(), CFG)
    assert s.events == () and s.total_beats == CFG.total_beats


@given(decompositions(), decompositions())
def test_semilinearity(d1, d2):
    whole = transform(concat(d1, d2), CFG)
    a, b = transform(d1, CFG), transform(d2, CFG)
    shifted = [e.__class__(e.onset, e.duration, e.pitch, e.velocity, e.articulation, e.source_term + len(d1.terms))
               for e in b.events]
    assert Counter(whole.events) == Counter(a.events + tuple(shifted))


@given(decompositions())
def test_envelope_split_carried(d):
    s = transform(d, CFG)
    assert s.envelope_count == d.envelope_count
    assert all(0 <= e.source_term < len(d.terms) for e in s.events)


@given(decompositions())
def test_retrograde_commutation_property(d):
    key = lambda s: Counter((e.pitch, e.duration, e.velocity, e.articulation) for e in s.events)
    assert key(transform(time_reverse(d), CFG)) == key(retrograde(transform(d, CFG)))


# -- time ---------------------------------------------------------------


def test_retrograde_examples():
    s = SoundDecomposition((SoundEvent(0.0, 1.0, 60, 64, Articulation.LEGATO, 0),), 1, 4.0)
    assert retrograde(s).events[0].onset == 3.0
    assert retrograde(SoundDecomposition()).events == ()


@given(decompositions())
def test_retrograde_involution(d):
    s = transform(d, CFG)
    assert retrograde(retrograde(s)) == s


@given(decompositions())
def test_sequence_single_block(d):
    one = transform_sequence([d], CFG)
    assert content(one.events) == content(transform(d, CFG).events)
    assert transform_sequence([], CFG).events == ()


@settings(max_examples=30, deadline=None)
@given(st.lists(decompositions(max_terms=3), min_size=2, max_size=5))
def test_sequence_rotation_commutes_with_block_shift(snaps):
    k = len(snaps)
    s = transform_sequence(snaps, CFG)
    rotated = transform_sequence(snaps[1:] + snaps[:1], CFG)
    block = (CFG.grid_beats // k) / GRID
    span = block * k

    def shifted(e):
        return (e.onset - block) % span, e.duration, e.pitch, e.velocity, e.articulation

    assert Counter(map(shifted, s.events)) == content(rotated.events)


def test_sequence_envelope_indices():
    d = VisualDecomposition((Term(P(), VisualKet.dot()), Term(P(x=0.2), VisualKet.dot())), 1)
    s = transform_sequence([d, d], CFG)
    assert s.envelope_count == 2
    env = [e for e in s.events if s.is_envelope(e)]
    assert len(env) == 2
    block = s.total_beats / 2
    assert sorted(int(e.onset // block) for e in env) == [0, 1]
    assert all(e.source_term in (0, 1) for e in env)


# -- sound distance ---------------------------------------------------------------


@given(decompositions(), decompositions())
def test_sound_distance_properties(d1, d2):
    a, b = transform(d1, CFG), transform(d2, CFG)
    assert sound_distance(a, b) == sound_distance(b, a)
    assert 0.0 <= sound_distance(a, b) <= 1.0
    if a.events:
        assert sound_distance(a, a) == pytest.approx(1.0, abs=1e-12)
        assert sound_distance(a, SoundDecomposition()) == 0.0


def test_sound_distance_disjoint_articulations():
    dots = transform(VisualDecomposition((Term(P(), VisualKet.dot()),)), CFG)
    arcs = transform(VisualDecomposition((Term(P(scale=0.3), VisualKet.arc(2.0)),)), CFG)
    assert sound_distance(dots, arcs) == 0.0
    assert sound_distance(SoundDecomposition(), SoundDecomposition()) == 1.0


# -- pitch helpers ---------------------------------------------------------------


def test_transpose_examples():
    assert transpose_to_range(60, 48, 72) == 60
    assert transpose_to_range(73, 48, 72) == 61
    assert transpose_to_range(90, 60, 66) == 66
    assert transpose_to_range(10, 48, 72) == 58
    with pytest.raises(ValueError):
        transpose_to_range(60, 60, 60)


@given(st.integers(0, 127), st.integers(0, 126), st.integers(1, 127))
def test_transpose_contained_idempotent(p, lo, width):
    hi = min(127, lo + width)
    q = transpose_to_range(p, lo, hi)
    assert lo <= q <= hi
    assert transpose_to_range(q, lo, hi) == q
    if hi - lo >= 11:
        assert (q - p) % 12 == 0


def test_snap_examples():
    assert snap_to_scale(61, ScaleSnap.MAJOR) == 60  # tie between 60 and 62 goes down
    assert snap_to_scale(63, ScaleSnap.MINOR) == 63
    assert snap_to_scale(66, ScaleSnap.MAJOR) == 65
    assert snap_to_scale(61, ScaleSnap.CHROMATIC) == 61
    assert snap_to_scale(61, ScaleSnap.MAJOR, lo=61, hi=63) == 62


@given(st.integers(0, 127), st.sampled_from(list(ScaleSnap)))
def test_snap_lands_on_scale(p, snap):
    q = snap_to_scale(p, snap)
    assert abs(q - p) <= 1
    assert snap_to_scale(q, snap) == q
