"""Command-line front end.

Exit status: 0 ok, 1 bad flags/config, 2 undecodable image, 3 nothing
recognized in the image.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .filter import (
    ImageDecodeError,
    NoObjectsError,
    decompose,
    load_image,
    minimal_ket_count,
)
from .kets import distance
from .pitch import INSTRUMENTS, ScaleSnap
from .score import (
    DocumentError,
    MidiDocument,
    dumps_decomposition,
    loads_decomposition,
    to_midi,
    to_svg,
)
from .transform import MappingConfig, sequence_decomposition, transform, transform_sequence

EXIT_USAGE = 1
EXIT_DECODE = 2
EXIT_NO_OBJECTS = 3

DEFAULTS = {
    "beats": 16.0,
    "range": "48:84",
    "level": 2,
    "program": 0,
    "instrument": None,
    "progression": True,
    "interval": True,
    "dynamics": True,
    "pauses": True,
    "scale": "chromatic",
    "notes_per_scale": 8,
    "interval_max": 12,
    "midi": True,
    "svg": False,
    "dec": False,
    "threshold": 0.5,
    "jobs": 1,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pitch_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError:
        raise UsageError(f"pitch range must look like LO:HI, got {text!r}") from None
    if not 0 <= lo < hi <= 127:
        raise UsageError(f"pitch range {lo}:{hi} must satisfy 0 <= LO < HI <= 127")
    return lo, hi


@dataclass
class CliConfig:
    inputs: list[Path]
    output: Path | None
    mapping: MappingConfig
    level: int
    program: int
    emit_midi: bool = True
    emit_svg: bool = False
    emit_dec: bool = False
    threshold: float = 0.5
    jobs: int = 1
    extras: dict = field(default_factory=dict)


def _settings(args, allowed) -> dict:
    """Merge defaults < config file < explicit flags."""
    merged = {k: DEFAULTS[k] for k in allowed}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update({k: v for k, v in raw.items() if k in allowed})
    for k in allowed:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _build_config(args, allowed) -> CliConfig:
    s = _settings(args, allowed)
    program = s.get("program", 0)
    lo, hi = _pitch_range(s["range"]) if "range" in s else (48, 84)
    if s.get("instrument"):
        name = str(s["instrument"]).lower()
        if name not in INSTRUMENTS:
            raise UsageError(f"unknown instrument {name!r}; choose from {', '.join(INSTRUMENTS)}")
        program, ilo, ihi = INSTRUMENTS[name]
        if getattr(args, "range", None) is None:
            lo, hi = ilo, ihi
    try:
        mapping = MappingConfig(
            total_beats=float(s.get("beats", 16.0)),
            pitch_lo=lo,
            pitch_hi=hi,
            enable_progression=bool(s.get("progression", True)),
            enable_interval=bool(s.get("interval", True)),
            enable_dynamics=bool(s.get("dynamics", True)),
            enable_pauses=bool(s.get("pauses", True)),
            notes_per_unit_scale=int(s.get("notes_per_scale", 8)),
            scale_snap=ScaleSnap(str(s.get("scale", "chromatic")).lower()),
            interval_max=int(s.get("interval_max", 12)),
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    level = int(s.get("level", 2))
    if level < 1:
        raise UsageError("--level must be >= 1")
    if not 0 <= int(program) <= 127:
        raise UsageError("--program must be in 0..127")
    cfg = CliConfig(
        inputs=[Path(p) for p in args.inputs],
        output=Path(args.output) if getattr(args, "output", None) else None,
        mapping=mapping,
        level=level,
        program=int(program),
        emit_midi=bool(s.get("midi", True)),
        emit_svg=bool(s.get("svg", False)),
        emit_dec=bool(s.get("dec", False)),
        threshold=float(s.get("threshold", 0.5)),
        jobs=int(s.get("jobs", 1)),
    )
    if not 0.0 < cfg.threshold < 1.0:
        raise UsageError("--threshold must lie in (0, 1)")
    return cfg


def _stem(path: Path) -> Path:
    for suffix in (".mid", ".midi", ".json", ".svg"):
        if path.name.endswith(suffix):
            return path.with_name(path.name[: -len(suffix)])
    return path


def _write_outputs(base: Path, d, sound, cfg: CliConfig, midi_path: Path | None = None):
    base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.emit_midi and sound is not None:
        path = midi_path or base.with_name(base.name + ".mid")
        path.write_bytes(to_midi(sound, MidiDocument(instrument_program=cfg.program)))
        written.append(path)
    if cfg.emit_svg:
        path = base.with_name(base.name + ".svg")
        path.write_text(to_svg(d, d.width_hint or 1, d.height_hint or 1), encoding="utf-8")
        written.append(path)
    if cfg.emit_dec:
        path = base.with_name(base.name + ".dec.json")
        path.write_text(dumps_decomposition(d), encoding="utf-8")
        written.append(path)
    return written


def _sonify_one(image: Path, base: Path, cfg: CliConfig, midi_path: Path | None):
    d = decompose(load_image(image), cfg.level)
    sound = transform(d, cfg.mapping)
    return _write_outputs(base, d, sound, cfg, midi_path)


def _cmd_sonify(args) -> int:
    cfg = _build_config(args, [k for k in DEFAULTS if k != "threshold"])
    if not (cfg.emit_midi or cfg.emit_svg or cfg.emit_dec):
        raise UsageError("nothing to emit: enable at least one of MIDI, --svg, --dec")
    if len(cfg.inputs) == 1:
        out = cfg.output or cfg.inputs[0].with_suffix(".mid")
        midi_path = out if out.suffix.lower() in (".mid", ".midi") else None
        jobs = [(cfg.inputs[0], _stem(out), midi_path)]
    else:
        outdir = cfg.output or Path(".")
        if outdir.exists() and not outdir.is_dir():
            raise UsageError("batch mode needs -o to name a directory")
        jobs = [(img, outdir / img.stem, None) for img in cfg.inputs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_sonify_one, img, base, cfg, mp) for img, base, mp in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_sonify_one(img, base, cfg, mp) for img, base, mp in jobs]
    for paths in results:
        for p in paths:
            print(p)
    return 0


def _cmd_decompose(args) -> int:
    cfg = _build_config(args, ["level"])
    d = decompose(load_image(cfg.inputs[0]), cfg.level)
    out = cfg.output or cfg.inputs[0].with_suffix(".dec.json")
    base = _stem(out)
    if base.name.endswith(".dec"):
        base = base.with_name(base.name[:-4])
    cfg.emit_midi, cfg.emit_svg, cfg.emit_dec = False, True, True
    for p in _write_outputs(base, d, None, cfg):
        print(p)
    return 0


def _cmd_distance(args) -> int:
    docs = []
    for p in args.inputs:
        try:
            docs.append(loads_decomposition(Path(p).read_text(encoding="utf-8")))
        except OSError as exc:
            raise UsageError(f"cannot read {p}: {exc}") from None
        except DocumentError as exc:
            raise UsageError(f"{p}: {exc}") from None
    print(f"{distance(docs[0], docs[1]):.6f}")
    return 0


def _cmd_analyze(args) -> int:
    cfg = _build_config(args, ["threshold"])
    result = minimal_ket_count(load_image(cfg.inputs[0]), cfg.threshold)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_terms", "error"])
    for n, err in result.curve:
        writer.writerow([n, f"{err:.6f}"])
    if cfg.output:
        cfg.output.parent.mkdir(parents=True, exist_ok=True)
        cfg.output.write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    note = "" if result.reached else " (threshold not reached)"
    print(f"N* = {result.n_star}{note}", file=sys.stderr if not cfg.output else sys.stdout)
    return 0


def _cmd_sequence(args) -> int:
    cfg = _build_config(args, [k for k in DEFAULTS if k not in ("threshold", "jobs")])
    if not (cfg.emit_midi or cfg.emit_svg or cfg.emit_dec):
        raise UsageError("nothing to emit: enable at least one of MIDI, --svg, --dec")
    snapshots = [decompose(load_image(p), cfg.level) for p in cfg.inputs]
    sound = transform_sequence(snapshots, cfg.mapping)
    merged = sequence_decomposition(snapshots)
    out = cfg.output or Path("sequence.mid")
    midi_path = out if out.suffix.lower() in (".mid", ".midi") else None
    for p in _write_outputs(_stem(out), merged, sound, cfg, midi_path):
        print(p)
    return 0


def _add_mapping_flags(p):
    p.add_argument("--beats", type=float, help="total time in beats (default 16)")
    p.add_argument("--range", help="pitch range LO:HI in MIDI notes (default 48:84)")
    p.add_argument("--level", type=int, help="discretization level, >= 1 (default 2)")
    p.add_argument("--program", type=int, help="General MIDI program 0-127 (default 0)")
    p.add_argument(
        "--instrument", choices=sorted(INSTRUMENTS),
        help="set program and, unless --range is given, a comfortable range",
    )
    for name in ("progression", "interval", "dynamics", "pauses"):
        p.add_argument(f"--no-{name}", dest=name, action="store_false", default=None,
                       help=f"disable the {name} feature")
    p.add_argument("--scale", choices=[s.value for s in ScaleSnap])
    p.add_argument("--notes-per-scale", dest="notes_per_scale", type=int)
    p.add_argument("--interval-max", dest="interval_max", type=int)
    p.add_argument("--no-midi", dest="midi", action="store_false", default=None)
    p.add_argument("--svg", action="store_true", default=None, help="also write an SVG view")
    p.add_argument("--dec", action="store_true", default=None,
                   help="also write the decomposition document")
    p.add_argument("--config", help="JSON file with the same keys as the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ketsound", description="Sonify images through visual ket decompositions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sonify", help="image(s) -> MIDI (+ SVG, decomposition)")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", help="output .mid (one image) or directory (batch)")
    p.add_argument("--jobs", type=int, help="parallel workers in batch mode")
    _add_mapping_flags(p)
    p.set_defaults(func=_cmd_sonify)

    p = sub.add_parser("decompose", help="image -> decomposition document + SVG")
    p.add_argument("inputs", nargs=1)
    p.add_argument("-o", "--output")
    p.add_argument("--level", type=int)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("distance", help="similarity of two decomposition documents")
    p.add_argument("inputs", nargs=2)
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("analyze", help="minimal ket count and error curve (CSV)")
    p.add_argument("inputs", nargs=1)
    p.add_argument("-o", "--output")
    p.add_argument("--threshold", type=float, help="recognizability threshold on 1-IoU (default 0.5)")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sequence", help="ordered snapshots -> one MIDI file")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output")
    _add_mapping_flags(p)
    p.set_defaults(func=_cmd_sequence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ketsound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except NoObjectsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_OBJECTS


if __name__ == "__main__":
    sys.exit(main())
