"""Standard MIDI File writer (format 1) and a small reader for self-checks.

Output is byte-deterministic: no running status, no timestamps, note-offs are
always 0x80 with velocity 0.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from ..transform import SoundDecomposition

ENVELOPE_CHANNEL = 0
PATTERN_CHANNEL = 1


@dataclass(frozen=True)
class MidiDocument:
    ppq: int = 480
    instrument_program: int = 0
    tempo: int = 500000  # microseconds per quarter note

    def __post_init__(self):
        if not 0 < self.ppq < 0x8000:
            raise ValueError(f"ppq must be in 1..32767, got {self.ppq}")
        if not 0 <= self.instrument_program <= 127:
            raise ValueError(f"program must be in 0..127, got {self.instrument_program}")
        if not 0 < self.tempo < 1 << 24:
            raise ValueError(f"tempo {self.tempo} does not fit in three bytes")


def var_len(value: int) -> bytes:
    """MIDI variable-length quantity: 7 bits per byte, high bit = more."""
    if value < 0:
        raise ValueError("variable-length quantities are non-negative")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _chunk(kind: bytes, body: bytes) -> bytes:
    return kind + struct.pack(">I", len(body)) + body


def _ticks(beats: float, ppq: int) -> int:
    return int(math.floor(beats * ppq + 0.5))


END_OF_TRACK = b"\xff\x2f\x00"


def _track(events) -> bytes:
    """events: iterable of (tick, message bytes), already ordered."""
    body = bytearray()
    last = 0
    for tick, msg in events:
        body += var_len(tick - last)
        body += msg
        last = tick
    body += var_len(0) + END_OF_TRACK
    return _chunk(b"MTrk", bytes(body))


def to_midi(s: SoundDecomposition, doc: MidiDocument | None = None) -> bytes:
    """SMF format 1: a tempo track and one note track.

    Envelope events play on channel 0, pattern events on channel 1, both with
    the document's program.  At equal ticks note-offs precede note-ons, then
    lower pitches come first.
    """
    doc = doc or MidiDocument()
    header = _chunk(b"MThd", struct.pack(">HHH", 1, 2, doc.ppq))
    tempo = _track([(0, b"\xff\x51\x03" + doc.tempo.to_bytes(3, "big"))])

    timed = []
    for seq, e in enumerate(s.events):
        ch = ENVELOPE_CHANNEL if s.is_envelope(e) else PATTERN_CHANNEL
        on = _ticks(e.onset, doc.ppq)
        off = max(on + 1, _ticks(e.onset + e.duration, doc.ppq))
        timed.append((on, 1, e.pitch, seq, bytes((0x90 | ch, e.pitch, e.velocity))))
        timed.append((off, 0, e.pitch, seq, bytes((0x80 | ch, e.pitch, 0))))
    timed.sort(key=lambda t: t[:4])
    programs = [
        (0, bytes((0xC0 | ch, doc.instrument_program)))
        for ch in (ENVELOPE_CHANNEL, PATTERN_CHANNEL)
    ]
    notes = _track(programs + [(t[0], t[4]) for t in timed])
    return header + tempo + notes


# -- reading ---------------------------------------------------------------


class MidiParseError(ValueError):
    pass


@dataclass
class ParsedMidi:
    format: int
    division: int
    tracks: list  # per track: list of (abs_tick, status, data bytes)


def _read_var_len(data: bytes, pos: int):
    value = 0
    for _ in range(4):
        if pos >= len(data):
            raise MidiParseError("truncated variable-length quantity")
        b = data[pos]
        pos += 1
        value = (value << 7) | (b & 0x7F)
        if not b & 0x80:
            return value, pos
    raise MidiParseError("variable-length quantity longer than four bytes")


_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


def parse_midi(data: bytes) -> ParsedMidi:
    """Decode an SMF byte string (running status accepted)."""
    if data[:4] != b"MThd":
        raise MidiParseError("missing MThd header")
    (hlen,) = struct.unpack(">I", data[4:8])
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    pos = 8 + hlen
    tracks = []
    for _ in range(ntracks):
        if data[pos : pos + 4] != b"MTrk":
            raise MidiParseError(f"expected MTrk at byte {pos}")
        (tlen,) = struct.unpack(">I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + tlen]
        if len(body) != tlen:
            raise MidiParseError("truncated track chunk")
        pos += 8 + tlen
        tracks.append(_parse_track(body))
    return ParsedMidi(fmt, division, tracks)


def _parse_track(body: bytes):
    events = []
    pos = tick = 0
    status = None
    while pos < len(body):
        delta, pos = _read_var_len(body, pos)
        tick += delta
        b = body[pos]
        if b & 0x80:
            status = b
            pos += 1
        elif status is None or status >= 0xF0:
            raise MidiParseError("data byte without running status")
        if status == 0xFF:
            kind = body[pos]
            length, pos = _read_var_len(body, pos + 1)
            events.append((tick, 0xFF, bytes([kind]) + body[pos : pos + length]))
            pos += length
            if kind == 0x2F:
                if pos != len(body):
                    raise MidiParseError("bytes after End of Track")
                return events
            status = None
        elif status in (0xF0, 0xF7):
            length, pos = _read_var_len(body, pos)
            events.append((tick, status, body[pos : pos + length]))
            pos += length
            status = None
        else:
            n = _DATA_LEN[status & 0xF0]
            events.append((tick, status, body[pos : pos + n]))
            pos += n
    raise MidiParseError("track has no End of Track event")


def paired_notes(parsed: ParsedMidi):
    """(channel, pitch, velocity, on_tick, off_tick) per note, FIFO pairing.

    Raises MidiParseError on a note-off without note-on or a dangling note-on.
    """
    notes = []
    for track in parsed.tracks:
        open_notes: dict[tuple[int, int], list] = {}
        for tick, status, data in track:
            kind = status & 0xF0
            if status >= 0xF0 or kind not in (0x80, 0x90):
                continue
            key = (status & 0x0F, data[0])
            if kind == 0x90 and data[1] > 0:
                open_notes.setdefault(key, []).append((tick, data[1]))
            else:
                pending = open_notes.get(key)
                if not pending:
                    raise MidiParseError(f"note-off without note-on for {key} at tick {tick}")
                on_tick, vel = pending.pop(0)
                notes.append((key[0], key[1], vel, on_tick, tick))
        dangling = [k for k, v in open_notes.items() if v]
        if dangling:
            raise MidiParseError(f"note-on never released: {dangling}")
    return notes
