"""Canonical JSON documents for visual and sound decompositions."""
from __future__ import annotations

import json

from ..kets import KetPlacement, Term, VisualDecomposition, VisualKet, VisualKetKind
from ..transform import Articulation, SoundDecomposition, SoundEvent

VERSION = 1

_DECOMPOSITION_FIELDS = ("version", "width_hint", "height_hint", "envelope_count", "terms")
_TERM_FIELDS = ("kind", "sweep", "x", "y", "scale", "rotation", "thickness")
_SOUND_FIELDS = ("version", "total_beats", "envelope_count", "events")
_EVENT_FIELDS = ("onset", "duration", "pitch", "velocity", "articulation", "source_term")


class DocumentError(ValueError):
    """Malformed document; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def dumps_decomposition(d: VisualDecomposition) -> str:
    terms = []
    for p, ket in d.terms:
        t = {"kind": ket.kind.value}
        if ket.kind is VisualKetKind.ARC:
            t["sweep"] = ket.sweep
        t.update(x=p.x, y=p.y, scale=p.scale, rotation=p.rotation, thickness=p.thickness)
        terms.append(t)
    doc = {
        "version": VERSION,
        "width_hint": d.width_hint,
        "height_hint": d.height_hint,
        "envelope_count": d.envelope_count,
        "terms": terms,
    }
    return json.dumps(doc, indent=1) + "\n"


def dumps_sound(s: SoundDecomposition) -> str:
    doc = {
        "version": VERSION,
        "total_beats": s.total_beats,
        "envelope_count": s.envelope_count,
        "events": [
            {
                "onset": e.onset,
                "duration": e.duration,
                "pitch": e.pitch,
                "velocity": e.velocity,
                "articulation": e.articulation.value,
                "source_term": e.source_term,
            }
            for e in s.events
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def _parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("document", f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise DocumentError("document", "top level must be an object")
    return doc


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise DocumentError(where, "must be an object")
    for k in obj:
        if k not in allowed:
            raise DocumentError(f"{where}.{k}" if where != "document" else k, "unknown field")
    for k in required:
        if k not in obj:
            raise DocumentError(f"{where}.{k}" if where != "document" else k, "missing field")


def _number(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DocumentError(f"{where}.{key}" if where else key, "must be a number")
    return float(v)


def _integer(obj, key, where, nullable=False):
    v = obj[key]
    if v is None and nullable:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise DocumentError(f"{where}.{key}" if where else key, "must be an integer")
    return v


def _version(doc):
    v = _integer(doc, "version", "")
    if v != VERSION:
        raise DocumentError("version", f"unsupported version {v}")


def loads_decomposition(text: str) -> VisualDecomposition:
    doc = _parse(text)
    _check_keys(doc, _DECOMPOSITION_FIELDS, _DECOMPOSITION_FIELDS, "document")
    _version(doc)
    if not isinstance(doc["terms"], list):
        raise DocumentError("terms", "must be a list")
    terms = []
    for i, raw in enumerate(doc["terms"]):
        where = f"terms[{i}]"
        _check_keys(raw, _TERM_FIELDS, ("kind", "x", "y", "scale", "rotation", "thickness"), where)
        try:
            kind = VisualKetKind(raw["kind"])
        except (ValueError, TypeError):
            raise DocumentError(f"{where}.kind", f"unknown kind {raw['kind']!r}") from None
        if kind is VisualKetKind.ARC:
            if "sweep" not in raw:
                raise DocumentError(f"{where}.sweep", "missing field")
            sweep = _number(raw, "sweep", where)
        else:
            sweep = _number(raw, "sweep", where) if "sweep" in raw else 0.0
        try:
            ket = VisualKet(kind, sweep)
        except ValueError as exc:
            raise DocumentError(f"{where}.sweep", str(exc)) from None
        values = {k: _number(raw, k, where) for k in ("x", "y", "scale", "rotation", "thickness")}
        try:
            placement = KetPlacement(**values)
        except ValueError as exc:
            raise DocumentError(where, str(exc)) from None
        terms.append(Term(placement, ket))
    j = _integer(doc, "envelope_count", "")
    if not 0 <= j <= len(terms):
        raise DocumentError("envelope_count", f"{j} outside [0, {len(terms)}]")
    return VisualDecomposition(
        tuple(terms),
        j,
        _integer(doc, "width_hint", "", nullable=True),
        _integer(doc, "height_hint", "", nullable=True),
    )


def loads_sound(text: str) -> SoundDecomposition:
    doc = _parse(text)
    _check_keys(doc, _SOUND_FIELDS, _SOUND_FIELDS, "document")
    _version(doc)
    total = _number(doc, "total_beats", "")
    if total <= 0:
        raise DocumentError("total_beats", "must be positive")
    j = _integer(doc, "envelope_count", "")
    if j < 0:
        raise DocumentError("envelope_count", "must be non-negative")
    if not isinstance(doc["events"], list):
        raise DocumentError("events", "must be a list")
    events = []
    for i, raw in enumerate(doc["events"]):
        where = f"events[{i}]"
        _check_keys(raw, _EVENT_FIELDS, _EVENT_FIELDS, where)
        try:
            art = Articulation(raw["articulation"])
        except (ValueError, TypeError):
            raise DocumentError(f"{where}.articulation", f"unknown articulation {raw['articulation']!r}") from None
        try:
            events.append(
                SoundEvent(
                    _number(raw, "onset", where),
                    _number(raw, "duration", where),
                    _integer(raw, "pitch", where),
                    _integer(raw, "velocity", where),
                    art,
                    _integer(raw, "source_term", where),
                )
            )
        except DocumentError:
            raise
        except ValueError as exc:
            raise DocumentError(where, str(exc)) from None
    try:
        return SoundDecomposition(tuple(events), j, total)
    except ValueError as exc:
        raise DocumentError("events", str(exc)) from None
