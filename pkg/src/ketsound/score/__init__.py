"""Artifacts: MIDI files, SVG views and canonical documents."""
from ..pitch import INSTRUMENTS, transpose_to_range
from .midi import MidiDocument, MidiParseError, paired_notes, parse_midi, to_midi, var_len
from .serialize import (
    DocumentError,
    dumps_decomposition,
    dumps_sound,
    loads_decomposition,
    loads_sound,
)
from .svg import to_svg

__all__ = [
    "INSTRUMENTS",
    "DocumentError",
    "MidiDocument",
    "MidiParseError",
    "dumps_decomposition",
    "dumps_sound",
    "loads_decomposition",
    "loads_sound",
    "paired_notes",
    "parse_midi",
    "to_midi",
    "to_svg",
    "transpose_to_range",
    "var_len",
]
