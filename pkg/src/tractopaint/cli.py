"""Command line interface: ``tractopaint {stylize,batch,compare}``."""
import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import StylizationConfig, load_config
from .exceptions import TractoPaintError
from .imagecore import read_image, write_png
from .pipeline import coherence_image, format_tracts, smoothness_metric, stylize
from .renderer import export_svg, heatmap

logger = logging.getLogger("tractopaint")

FIELD_ALIASES = {"st": "structure_tensor", "grad": "gradient"}
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class CLIError(Exception):
    pass


def _load_cfg(args):
    cfg = load_config(args.config) if args.config else StylizationConfig()
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if getattr(args, "field", None):
        changes["field_kind"] = FIELD_ALIASES[args.field]
    return cfg.replace(**changes) if changes else cfg


def _read(path):
    try:
        return read_image(path)
    except OSError as exc:
        raise CLIError(f"cannot read {str(path)!r}: {exc.strerror or exc}") from None
    except TractoPaintError as exc:
        raise CLIError(f"cannot decode {str(path)!r}: {exc}") from None


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot write {str(path)!r}: {exc.strerror or exc}") from None


def _write_png(path, img):
    try:
        write_png(path, img)
    except OSError as exc:
        raise CLIError(f"cannot write {str(path)!r}: {exc.strerror or exc}") from None


def cmd_stylize(args):
    cfg = _load_cfg(args)
    img = _read(args.input)
    canvas, records = stylize(img, cfg)
    _write_png(args.output, canvas.pixels)
    if args.svg:
        _write_text(args.svg, export_svg([r.stroke for r in records], img.shape[1], img.shape[0], cfg.background))
    if args.dump_tracts:
        _write_text(args.dump_tracts, format_tracts(records))
    if args.dump_coherence:
        _write_png(args.dump_coherence, heatmap(coherence_image(img, cfg)))
    logger.info("%s: %d strokes -> %s", args.input, len(records), args.output)
    return 0


def _batch_one(job):
    src, dst, cfg = job
    img = read_image(src)
    canvas, _ = stylize(img, cfg)
    dst.parent.mkdir(parents=True, exist_ok=True)
    write_png(dst, canvas.pixels)
    return str(dst)


def cmd_batch(args):
    cfg = _load_cfg(args)
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    if not in_dir.is_dir():
        raise CLIError(f"input directory {str(in_dir)!r} does not exist")
    sources = sorted(p for p in in_dir.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file())
    # keep sub-directory layout, e.g. dataset level folders
    jobs = [(src, out_dir / src.relative_to(in_dir).with_suffix(".png"), cfg) for src in sources]
    failures = 0
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = [(job, pool.submit(_batch_one, job)) for job in jobs]
            for job, fut in results:
                try:
                    print(fut.result())
                except (OSError, TractoPaintError) as exc:
                    failures += 1
                    print(f"error: {job[0]}: {exc}", file=sys.stderr)
    else:
        for job in jobs:
            try:
                print(_batch_one(job))
            except (OSError, TractoPaintError) as exc:
                failures += 1
                print(f"error: {job[0]}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def compare_fields(img, cfg):
    """Smoothness metric of the painting for each field kind, same seed and parameters."""
    rows = []
    for kind in ("structure_tensor", "gradient"):
        _, records = stylize(img, cfg.replace(field_kind=kind))
        rows.append((kind, smoothness_metric(records), len(records)))
    return rows


def cmd_compare(args):
    cfg = _load_cfg(args)
    img = _read(args.input)
    rows = compare_fields(img, cfg)
    print(f"{'field':<18}{'smoothness':>12}{'strokes':>10}")
    for kind, value, count in rows:
        print(f"{kind:<18}{value:>12.6f}{count:>10d}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tractopaint", description="Painterly rendering by stroke tractography.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file (defaults to the built-in four layers)")
        p.add_argument("--seed", type=int, help="RNG seed, overrides rng_seed from the config")
        p.add_argument("-v", "--verbose", action="store_true", help="log per-layer statistics")

    p = sub.add_parser("stylize", help="paint one image")
    p.add_argument("input")
    p.add_argument("output")
    common(p)
    p.add_argument("--field", choices=sorted(FIELD_ALIASES), help="orientation field: st (structure tensor) or grad")
    p.add_argument("--svg", help="also write the strokes as SVG")
    p.add_argument("--dump-tracts", help="write tract polylines, one per line")
    p.add_argument("--dump-coherence", help="write the full-resolution coherence map as a PNG")
    p.set_defaults(func=cmd_stylize)

    p = sub.add_parser("batch", help="paint every PNG/JPEG under a directory")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    common(p)
    p.add_argument("--field", choices=sorted(FIELD_ALIASES))
    p.add_argument("--jobs", type=int, default=1, help="images processed in parallel")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("compare", help="print stroke smoothness for structure-tensor vs gradient fields")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def run_cli(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {getattr(exc, 'filename', None) or ''}: {exc.strerror or exc}", file=sys.stderr)
    except TractoPaintError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


def main():
    sys.exit(run_cli())
