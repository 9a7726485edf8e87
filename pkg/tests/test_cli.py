import json
import subprocess
import sys

import numpy as np
import pytest

from blpr.cli import main
from blpr.dataset import render_plate
from blpr.imgcore import load_image, save_image

PAIRS_TSV = (
    "# generated\tdesired\n"
    "9Dhaka984Matro773Jha7\t9dhaka94matro773jha7\n"
    "2dhaka2matro404ka4\t2dhaka2matro404ka4\n"
    "553Dhaka47898Jha\t5dhaka47818jha\n"
    "5Dhaka231526\t5dhaka2315ka6\n"
)


@pytest.fixture
def plate_png(tmp_path):
    path = tmp_path / "plate.png"
    save_image(render_plate(["dhaka", "ga"], "123456", None).image, path)
    return path


def test_usage_errors_exit_2(capsys):
    assert main(["recognize", "--no-such-flag", "x.png"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main([]) == 2
    assert main(["segment", "--connectivity", "6", "a.png", "out"]) == 2


def test_module_entry_point_exit_code():
    res = subprocess.run([sys.executable, "-m", "blpr", "bogus-command"], capture_output=True, text=True)
    assert res.returncode == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    assert main(["preprocess", str(bad)]) == 1
    assert capsys.readouterr().err.startswith("error:")
    blank = tmp_path / "blank.png"
    save_image(np.full((40, 80, 3), 77, np.uint8), blank)
    model = tmp_path / "m.bin"
    model.write_bytes(b"XXXX")
    assert main(["recognize", "--model", str(model), str(blank)]) == 1


def test_recognize_requires_model(plate_png, capsys):
    assert main(["recognize", str(plate_png)]) == 2
    assert "model" in capsys.readouterr().err


def test_recognize_file_output(plate_png, small_cnn_path, capsys):
    assert main(["recognize", "--model", str(small_cnn_path), str(plate_png)]) == 0
    text, js = capsys.readouterr().out.splitlines()
    assert text == "dhakaga123456"
    assert json.loads(js)["reading"] == text


def test_recognize_directory(tmp_path, small_cnn_path, capsys):
    for name, digits in [("b.png", "111222"), ("a.png", "333444")]:
        save_image(render_plate(["jha"], digits, None).image, tmp_path / name)
    cfg = tmp_path / "plate.cfg"
    cfg.write_text(f"model={small_cnn_path}\n", encoding="utf-8")
    assert main(["recognize", "--config", str(cfg), "--workers", "2", str(tmp_path)]) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert [(r[0], r[1]) for r in rows] == [("a.png", "jha333444"), ("b.png", "jha111222")]


def test_evaluate_pairs(tmp_path, capsys):
    tsv = tmp_path / "pairs.tsv"
    tsv.write_text(PAIRS_TSV, encoding="utf-8")
    out_json = tmp_path / "report.json"
    assert main(["evaluate", str(tsv), "--json-out", str(out_json)]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    report = json.loads(first)
    assert len(report["pairs"]) == 4 and report["pairs"][1]["ratio"] == 1.0
    assert report["mean"] == pytest.approx((40 / 41 + 1 + 13 / 15 + 22 / 25) / 4)
    assert json.loads(out_json.read_text()) == report
    assert main(["evaluate", str(tsv), "--normalize", "none"]) == 0
    raw = json.loads(capsys.readouterr().out.splitlines()[0])
    assert raw["mean"] < report["mean"]


def test_segment_writes_glyphs(plate_png, tmp_path, capsys):
    out = tmp_path / "glyphs"
    assert main(["segment", str(plate_png), str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["glyph_0_0.png", "glyph_0_1.png"] + [f"glyph_1_{i}.png" for i in range(6)]
    assert load_image(out / "glyph_1_0.png").shape == (32, 32, 3)


def test_preprocess_dump_stages(plate_png, tmp_path, capsys):
    dump = tmp_path / "stages"
    assert main(["preprocess", str(plate_png), "--dump-stages", str(dump), "-o", str(tmp_path / "d.png")]) == 0
    out = capsys.readouterr().out
    assert "characters=8" in out
    assert len(list(dump.glob("*.png"))) == 8
    mask = load_image(tmp_path / "d.png")
    assert mask.shape[0] == 128 and set(np.unique(mask).tolist()) == {0, 255}


def test_enhance_command(plate_png, tmp_path):
    out = tmp_path / "big.png"
    assert main(["enhance", str(plate_png), str(out), "--enhance-scale", "2"]) == 0
    a, b = load_image(plate_png), load_image(out)
    assert b.shape[:2] == (2 * a.shape[0], 2 * a.shape[1])


def test_synth_plates(tmp_path, capsys):
    assert main(["synth", "plates", str(tmp_path), "--count", "3", "--seed", "5"]) == 0
    truth = (tmp_path / "truth.tsv").read_text().splitlines()
    assert [t.split("\t")[0] for t in truth] == ["plate_000.png", "plate_001.png", "plate_002.png"]
    first = load_image(tmp_path / "plate_000.png")
    assert main(["synth", "plates", str(tmp_path), "--count", "1", "--seed", "5"]) == 0
    assert np.array_equal(load_image(tmp_path / "plate_000.png"), first)


def test_train_and_classify(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synth", "glyphs", str(data), "--synth-counts", "2", "1", "1", "--seed", "2"]) == 0
    model = tmp_path / "m.bin"
    assert main(["train", "--data", str(data), "--model", str(model), "--epochs", "1",
                 "--history", str(tmp_path / "h.csv")]) == 0
    assert model.is_file() and (tmp_path / "h.csv").is_file()
    glyph = next((data / "test" / "ka").iterdir())
    capsys.readouterr()
    assert main(["classify", "--model", str(model), str(glyph)]) == 0
    cols = capsys.readouterr().out.strip().split("\t")
    assert cols[0] == str(glyph) and len(cols) == 4
