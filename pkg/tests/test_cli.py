import json
import subprocess
import sys

import pytest
from PIL import Image, ImageDraw

from ketsound.cli import main
from ketsound.score import loads_decomposition, paired_notes, parse_midi

import synth


@pytest.fixture
def images(tmp_path):
    circle = tmp_path / "circle.png"
    synth.circle_outline(128).save(circle)
    blank = tmp_path / "blank.png"
    Image.new("L", (64, 64), 255).save(blank)
    garbage = tmp_path / "garbage.png"
    garbage.write_bytes(b"not an image at all")
    tri = tmp_path / "tri.png"
    im, d = synth.canvas(128)
    d.polygon([(20, 100), (108, 100), (64, 24)], outline=0, width=3)
    d.ellipse((56, 56, 72, 72), fill=0)
    im.save(tri)
    return dict(circle=circle, blank=blank, garbage=garbage, tri=tri)


def test_sonify_circle(images, tmp_path, capsys):
    out = tmp_path / "out.mid"
    assert main(["sonify", str(images["circle"]), "-o", str(out), "--range", "48:72", "--dec", "--svg"]) == 0
    notes = paired_notes(parse_midi(out.read_bytes()))
    assert notes and all(48 <= n[1] <= 72 for n in notes)
    dec = loads_decomposition((tmp_path / "out.dec.json").read_text())
    assert [t.ket.kind.value for t in dec.terms] == ["arc", "arc"]
    assert (tmp_path / "out.svg").read_text().startswith("<")
    assert str(out) in capsys.readouterr().out


def test_exit_codes(images, capsys):
    assert main(["sonify", str(images["blank"]), "--no-midi", "--dec"]) == 3
    assert "no objects" in capsys.readouterr().err.lower()
    assert main(["sonify", str(images["garbage"])]) == 2
    assert capsys.readouterr().err.startswith("error:")
    assert main(["sonify", str(images["circle"]), "--range", "80:40"]) == 1
    assert main(["sonify", str(images["circle"]), "--level", "0"]) == 1
    assert main(["sonify", str(images["circle"]), "--no-midi"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["sonify", str(images["circle"]), "--bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_entry_point_exit_status(images):
    r = subprocess.run([sys.executable, "-m", "ketsound", "sonify", str(images["blank"])],
                       capture_output=True, text=True)
    assert r.returncode == 3 and r.stderr.strip()


def test_decompose_and_distance(images, tmp_path, capsys):
    a = tmp_path / "a.dec.json"
    assert main(["decompose", str(images["circle"]), "-o", str(a)]) == 0
    assert a.exists() and (tmp_path / "a.svg").exists()
    b = tmp_path / "b.dec.json"
    assert main(["decompose", str(images["tri"]), "-o", str(b)]) == 0
    capsys.readouterr()
    assert main(["distance", str(a), str(a)]) == 0
    assert capsys.readouterr().out.strip() == "1.000000"
    assert main(["distance", str(a), str(b)]) == 0
    v = float(capsys.readouterr().out)
    assert 0.0 <= v < 1.0
    bad = tmp_path / "bad.json"
    bad.write_text('{"terms": []}')
    assert main(["distance", str(a), str(bad)]) == 1
    assert "version" in capsys.readouterr().err


def test_analyze_csv(images, tmp_path, capsys):
    assert main(["analyze", str(images["tri"])]) == 0
    captured = capsys.readouterr()
    lines = captured.out.strip().splitlines()
    assert lines[0] == "n_terms,error"
    rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
    counts = [int(n) for n, _ in rows]
    assert counts == sorted(set(counts)) and counts[0] >= 1
    assert all(0.0 <= e <= 1.0 for _, e in rows)
    assert "N* =" in captured.err
    out = tmp_path / "curve.csv"
    assert main(["analyze", str(images["tri"]), "-o", str(out)]) == 0
    assert out.read_text().splitlines() == lines
    assert main(["analyze", str(images["tri"]), "--threshold", "1.5"]) == 1


def test_batch_parallel_matches_serial(images, tmp_path):
    inputs = [str(images["circle"]), str(images["tri"])]
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    assert main(["sonify", *inputs, "-o", str(serial)]) == 0
    assert main(["sonify", *inputs, "-o", str(parallel), "--jobs", "2"]) == 0
    for name in ("circle.mid", "tri.mid"):
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


def test_deterministic_output(images, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.mid"
        assert main(["sonify", str(images["tri"]), "-o", str(out), "--level", "3"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_precedence(images, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"range": "60:64", "beats": 8}))
    out = tmp_path / "c.mid"
    assert main(["sonify", str(images["tri"]), "-o", str(out), "--config", str(cfg)]) == 0
    assert all(60 <= n[1] <= 64 for n in paired_notes(parse_midi(out.read_bytes())))
    assert main(["sonify", str(images["tri"]), "-o", str(out), "--config", str(cfg), "--range", "30:40"]) == 0
    assert all(30 <= n[1] <= 40 for n in paired_notes(parse_midi(out.read_bytes())))
    cfg.write_text(json.dumps({"tempo": 3}))
    assert main(["sonify", str(images["tri"]), "-o", str(out), "--config", str(cfg)]) == 1


def test_instrument_sets_program(images, tmp_path):
    out = tmp_path / "i.mid"
    assert main(["sonify", str(images["circle"]), "-o", str(out), "--instrument", "violin"]) == 0
    programs = {d for _, st, d in parse_midi(out.read_bytes()).tracks[1] if st & 0xF0 == 0xC0}
    assert programs == {bytes([40])}


def test_sequence(images, tmp_path):
    out = tmp_path / "seq.mid"
    assert main(["sequence", str(images["circle"]), str(images["tri"]), "-o", str(out), "--dec"]) == 0
    notes = paired_notes(parse_midi(out.read_bytes()))
    single = tmp_path / "single.mid"
    main(["sonify", str(images["circle"]), "-o", str(single)])
    assert len(notes) > len(paired_notes(parse_midi(single.read_bytes())))
    assert (tmp_path / "seq.dec.json").exists()
