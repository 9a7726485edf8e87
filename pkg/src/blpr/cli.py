"""Command-line interface: ``blpr <subcommand> ...``.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dataset import SPLITS, load_dataset, random_plate_tokens, render_plate, synth_glyphs, write_dataset
from .enhance import enhance
from .errors import BlprError
from .evalkit import evaluate_plates, read_pairs_tsv
from .imgcore import is_image_file, load_image, resize, save_image
from .nnet import ARCHITECTURES, TrainConfig, build_network, load_model, predict_proba, save_model, train
from .pipeline import (
    PipelineConfig,
    prepare_plate,
    recognize_files,
    recognize_plate,
    run_experiment,
    segment_plate,
)
from .platefind import BoxFilterConfig
from .segment import GLYPH_SIZE
from .vocab import VOCAB, transliterate

EXTERNAL_HOOK_HELP = """\
external enhancer protocol:
  --enhance-mode external --external-command 'tool --src {in} --dst {out}'
  {in} is replaced with a PNG the tool must read, {out} with the PNG path it
  must write. Exit status 0 means success; the run fails if the tool exits
  non-zero, writes nothing, or exceeds --enhance-timeout seconds.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", type=Path, help="key=value pipeline config file")
    g.add_argument("--enhance-mode", choices=("builtin", "external", "none"))
    g.add_argument("--enhance-scale", type=int)
    g.add_argument("--external-command")
    g.add_argument("--enhance-timeout", type=float)
    g.add_argument("--working-height", type=int)
    g.add_argument("--connectivity", type=int, choices=(4, 8))
    g.add_argument("--no-matra-merge", action="store_true", help="keep word fragments separate")
    g.add_argument("--box-filter", metavar="K=V,...",
                   help="e.g. min_h_frac=0.2,max_w_frac=0.9,min_area_px=12")
    g.add_argument("--se", metavar="WxH", help="dilation rectangle, e.g. 3x3")
    g.add_argument("--dilate-iterations", type=int)


def _pipeline_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    over = {}
    for name, key in (("enhance_mode", "enhance_mode"), ("enhance_scale", "enhance_scale"),
                      ("external_command", "external_command"), ("enhance_timeout", "enhance_timeout"),
                      ("working_height", "working_height"), ("connectivity", "connectivity"),
                      ("dilate_iterations", "dilate_iterations")):
        v = getattr(args, name, None)
        if v is not None:
            over[key] = str(v)
    if getattr(args, "no_matra_merge", False):
        over["matra_merge"] = "false"
    if getattr(args, "se", None):
        w, _, h = args.se.lower().partition("x")
        over["se_width"], over["se_height"] = w, h or w
    if getattr(args, "box_filter", None):
        cfg = replace(cfg, box_filter=BoxFilterConfig.parse(args.box_filter, cfg.box_filter))
    return cfg.with_overrides(over) if over else cfg


# ---------------------------------------------------------------------------
# Subcommands


def cmd_enhance(args) -> int:
    cfg = _pipeline_config(args)
    save_image(enhance(load_image(args.input), cfg.enhance), args.output)
    return 0


def cmd_preprocess(args) -> int:
    cfg = _pipeline_config(args)
    img = load_image(args.input)
    images = prepare_plate(img, cfg)
    st = segment_plate(images["working"], cfg, images)
    if args.dump_stages:
        for p in st.dump(args.dump_stages):
            print(p)
    if args.output:
        save_image(st.images["dilated"], args.output)
    print(f"threshold={st.threshold} inverted={str(st.inverted).lower()} "
          f"components={len(st.boxes)} characters={len(st.char_boxes)}")
    return 0


def cmd_segment(args) -> int:
    cfg = _pipeline_config(args)
    img = load_image(args.input)
    if args.from_working:
        st = segment_plate(img, cfg)
    else:
        images = prepare_plate(img, cfg)
        st = segment_plate(images["working"], cfg, images)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for g in st.glyphs:
        path = out / f"glyph_{g.line_index}_{g.position_in_line}.png"
        save_image(g.image, path)
        print(path, *g.source_box.as_list())
    return 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(learning_rate=args.lr, batch_size=args.batch_size, epochs=args.epochs,
                       optimizer=args.optimizer, seed=args.seed)


def _progress(epoch, hist, net):
    print(f"epoch {epoch}: train loss {hist.train_loss[-1]:.4f} acc {hist.train_acc[-1]:.4f}  "
          f"valid loss {hist.valid_loss[-1]:.4f} acc {hist.valid_acc[-1]:.4f}", flush=True)


def _load_data(args):
    if args.data:
        return load_dataset(args.data)
    return synth_glyphs(args.seed, *args.synth_counts)


def cmd_train(args) -> int:
    ds = _load_data(args)
    cfg = _train_config(args)
    net = build_network(args.arch, seed=cfg.seed)
    net, hist = train(net, ds.arrays("train"), ds.arrays("valid"), cfg, progress=_progress)
    save_model(net, args.model)
    if args.history:
        hist.write_csv(args.history)
    print(f"saved {args.model}")
    return 0


def cmd_classify(args) -> int:
    net = load_model(args.model)
    paths = []
    for p in map(Path, args.images):
        paths += sorted(f for f in p.iterdir() if is_image_file(f)) if p.is_dir() else [p]
    if not paths:
        print("no images to classify", file=sys.stderr)
        return 1
    imgs = []
    for p in paths:
        img = load_image(p)
        if img.shape[:2] != (GLYPH_SIZE, GLYPH_SIZE):
            img = resize(img, GLYPH_SIZE, GLYPH_SIZE)
        imgs.append(img)
    probs = predict_proba(net, np.stack(imgs))
    for p, row in zip(paths, probs):
        k = int(np.argmax(row))
        print(f"{p}\t{VOCAB[k]}\t{transliterate(k)}\t{row[k]:.6f}")
    return 0


def cmd_recognize(args) -> int:
    cfg = _pipeline_config(args)
    model = args.model or cfg.model_path
    if model is None:
        print("recognize: a model is required (--model or model= in --config)", file=sys.stderr)
        return 2
    net = load_model(model)
    start = "working" if args.from_working else "input"
    target = Path(args.input)
    if target.is_dir():
        files = [f for f in target.iterdir() if is_image_file(f)]
        status = 0
        for path, res in recognize_files(files, net, cfg, workers=args.workers, start=start):
            if isinstance(res, Exception):
                print(f"{path}: {res}", file=sys.stderr)
                status = 1
            else:
                print(f"{path.name}\t{res.text}\t{res.to_json()}")
        return status
    reading = recognize_plate(load_image(target), net, cfg, start=start)
    print(reading.text)
    print(reading.to_json())
    return 0


def cmd_evaluate(args) -> int:
    report = evaluate_plates(read_pairs_tsv(args.pairs), normalize=args.normalize)
    if args.json_out:
        Path(args.json_out).write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_json())
    print(report.table())
    return 0


def cmd_experiment(args) -> int:
    data = _load_data(args)
    report = run_experiment(data, args.arch, _train_config(args), progress=_progress)
    report.write(args.out_dir)
    print(report.summary())
    return 0


def cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed)
    out = Path(args.out_dir)
    if args.kind == "glyphs":
        write_dataset(synth_glyphs(args.seed, *args.synth_counts), out)
        print(f"wrote {', '.join(SPLITS)} under {out}")
        return 0
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(args.count):
        line1, line2 = random_plate_tokens(rng)
        plate = render_plate(line1, line2, rng)
        name = f"plate_{i:03d}.png"
        save_image(plate.image, out / name)
        lines.append(f"{name}\t{plate.text}")
    (out / "truth.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.count} plates and truth.tsv under {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="blpr", description="Two-line license plate recognition toolkit.",
                  epilog=EXTERNAL_HOOK_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("-v", "--verbose", action="store_true")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=EXTERNAL_HOOK_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=fn)
        return p

    def train_opts(p):
        p.add_argument("--data", type=Path, help="dataset root; synthetic glyphs if omitted")
        p.add_argument("--synth-counts", type=int, nargs=3, default=(100, 35, 22),
                       metavar=("TRAIN", "VALID", "TEST"))
        p.add_argument("--arch", choices=sorted(ARCHITECTURES), default="blpr-cnn")
        p.add_argument("--epochs", type=int, default=40)
        p.add_argument("--lr", type=float, default=1e-4)
        p.add_argument("--batch-size", type=int, default=1)
        p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
        p.add_argument("--seed", type=int, default=42)

    p = add("enhance", cmd_enhance, "upscale and sharpen an image")
    p.add_argument("input")
    p.add_argument("output")
    _pipeline_args(p)

    p = add("preprocess", cmd_preprocess, "binarize and dilate a plate")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="write the dilated mask here")
    p.add_argument("--dump-stages", metavar="DIR", help="write every intermediate image")
    _pipeline_args(p)

    p = add("segment", cmd_segment, "crop 32x32 glyphs as glyph_<line>_<pos>.png")
    p.add_argument("input")
    p.add_argument("out_dir")
    p.add_argument("--from-working", action="store_true",
                   help="input is an already enhanced, working-size plate")
    _pipeline_args(p)

    p = add("train", cmd_train, "train a glyph classifier")
    p.add_argument("--model", required=True, type=Path, help="output model file")
    p.add_argument("--history", type=Path, help="per-epoch CSV")
    train_opts(p)

    p = add("classify", cmd_classify, "classify 32x32 glyph images")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("images", nargs="+")

    p = add("recognize", cmd_recognize, "read plate images (file or directory)")
    p.add_argument("--model", type=Path)
    p.add_argument("input")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--from-working", action="store_true",
                   help="input is an already enhanced, working-size plate")
    _pipeline_args(p)

    p = add("evaluate", cmd_evaluate, "score generated/desired TSV pairs")
    p.add_argument("pairs", type=Path)
    p.add_argument("--normalize", choices=("casefold", "none"), default="casefold")
    p.add_argument("--json-out", type=Path)

    p = add("experiment", cmd_experiment, "train, test and write a metrics report")
    p.add_argument("out_dir", type=Path)
    train_opts(p)

    p = add("synth", cmd_synth, "render synthetic glyph datasets or plates")
    p.add_argument("kind", choices=("glyphs", "plates"))
    p.add_argument("out_dir", type=Path)
    p.add_argument("--count", type=int, default=30, help="number of plates")
    p.add_argument("--synth-counts", type=int, nargs=3, default=(100, 35, 22),
                   metavar=("TRAIN", "VALID", "TEST"))
    p.add_argument("--seed", type=int, default=42)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BlprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        # bad config values, unreadable paths
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
