"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (parse, range, capacity,
framing), 3 I/O error.  Diagnostics go to stderr; data goes to stdout or
``--out``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Sequence

from . import harness
from .codec import (
    LENGTH_PREFIX_BITS,
    MAX_PAYLOAD_BYTES,
    STRATEGIES,
    EmbedConfig,
    StegoError,
    capacity,
    embed_bytes,
    extract_bytes,
)
from .matcher import MatchParams, match_templates
from .template import TemplateError, dump, load, serialize_binary, serialize_text

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < (1 << 64):
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return v


def _bits(text: str) -> int:
    v = int(text)
    if not 1 <= v <= 8:
        raise argparse.ArgumentTypeError("bits per element must be in [1, 8]")
    return v


def _bit_list(text: str) -> List[int]:
    return [_bits(part) for part in text.split(",") if part]


def _write_template(t, out: str | None, fmt: str | None) -> None:
    if out is None:
        if fmt == "binary":
            sys.stdout.buffer.write(serialize_binary(t))
        else:
            sys.stdout.write(serialize_text(t))
        return
    dump(t, out, fmt)


def _report(pairs) -> None:
    for key, value in pairs:
        print(f"{key}={value}", file=sys.stderr)


def cmd_embed(args) -> int:
    t = load(args.template)
    if args.payload_hex is not None:
        try:
            data = bytes.fromhex(args.payload_hex)
        except ValueError as exc:
            raise UsageError(f"invalid hex payload: {exc}") from None
    else:
        with open(args.payload_file, "rb") as fh:
            data = fh.read()
    cfg = EmbedConfig(
        b=args.bits, strategy=args.strategy,
        order_preserving=args.order_preserving, padding_key=args.key,
    )
    protected, rep = embed_bytes(t, data, cfg)
    _write_template(protected, args.out, args.format)
    _report([
        ("payload_bytes", len(data)),
        ("capacity_bits", capacity(t, cfg.b)),
        ("elements_used", rep.elements_used),
        ("total_distortion", rep.total_distortion),
        ("max_distortion", rep.max_distortion),
        ("order_adjustments", rep.order_adjustments),
    ])
    return EXIT_OK


def cmd_extract(args) -> int:
    t = load(args.template, args.format)
    data = extract_bytes(t, args.bits, args.key)
    if args.out is None:
        sys.stdout.buffer.write(data)
    else:
        with open(args.out, "wb") as fh:
            fh.write(data)
    _report([("payload_bytes", len(data))])
    return EXIT_OK


def cmd_capacity(args) -> int:
    t = load(args.template, args.format)
    bits = capacity(t, args.bits)
    usable = min(max(bits - LENGTH_PREFIX_BITS, 0) // 8, MAX_PAYLOAD_BYTES)
    print(bits)
    print(f"usable_bytes={usable}")
    return EXIT_OK


def cmd_match(args) -> int:
    a = load(args.a, args.format)
    b = load(args.b, args.format)
    res = match_templates(a, b, MatchParams(dist_tol=args.dist_tol, angle_tol=args.angle_tol))
    dx, dy, dtheta = res.alignment
    print(f"score={res.score!r}")
    print(f"matched_pairs={res.matched_pairs}")
    print(f"alignment={dx:.3f},{dy:.3f},{dtheta}")
    return EXIT_OK


def _gen_params(args) -> harness.GenParams:
    return harness.GenParams(
        width=args.width, height=args.height, n_min=args.n_min, n_max=args.n_max,
        min_spacing=args.min_spacing, seed=args.seed,
    )


def cmd_gen(args) -> int:
    gen = _gen_params(args)
    if args.db is None:
        _write_template(harness.gen_template(gen), args.out, args.format)
        return EXIT_OK
    pert = harness.PerturbParams(width=args.width, height=args.height, seed=args.seed)
    fingers = harness.synth_database(args.fingers, gen, pert, args.impressions)
    os.makedirs(args.db, exist_ok=True)
    for f, imps in enumerate(fingers, start=1):
        for k, t in enumerate(imps, start=1):
            dump(t, os.path.join(args.db, f"{f}_{k}.mnt"), "text")
    _report([("fingers", len(fingers)), ("impressions", args.impressions)])
    return EXIT_OK


def cmd_eval(args) -> int:
    strategies = args.strategy or ["optimized"]
    cfgs = [
        EmbedConfig(b=b, strategy=s, order_preserving=args.order_preserving, padding_key=args.key)
        for s in strategies
        for b in args.bits
    ]
    match = MatchParams(dist_tol=args.dist_tol, angle_tol=args.angle_tol)
    if args.db_dir is not None:
        fingers = harness.load_database_dir(args.db_dir)
        report = harness.run_eval_database(fingers, cfgs, match)
    else:
        gen = _gen_params(args)
        pert = harness.PerturbParams(width=args.width, height=args.height, seed=args.seed)
        report = harness.run_eval(args.db_size, gen, pert, cfgs, match)
    text = harness.report_csv(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    for row in report.rows:
        print(
            f"b={row.b} strategy={row.strategy} mean_genuine={row.mean_genuine:.4f} "
            f"mean_impostor={row.mean_impostor:.4f} mean_distortion={row.mean_distortion:.3f} "
            f"range_failures={row.range_failures}",
            file=sys.stderr,
        )
    return EXIT_OK


def _add_format(p) -> None:
    p.add_argument("--format", choices=("text", "binary"), default=None,
                   help="template format (default: from extension, .mntb is binary)")


def _add_gen_flags(p) -> None:
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--n-min", type=int, default=30)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--min-spacing", type=float, default=8.0)


def _add_match_flags(p) -> None:
    p.add_argument("--dist-tol", type=float, default=10.0)
    p.add_argument("--angle-tol", type=float, default=20.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minutiae-stego", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="hide a payload in a template")
    p.add_argument("template")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--payload-file")
    src.add_argument("--payload-hex")
    p.add_argument("--bits", type=_bits, default=2)
    p.add_argument("--strategy", choices=STRATEGIES, default="optimized")
    p.add_argument("--order-preserving", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--key", type=_u64, default=0, help="padding key")
    p.add_argument("--out")
    _add_format(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a payload from a protected template")
    p.add_argument("template")
    p.add_argument("--bits", type=_bits, default=2)
    p.add_argument("--key", type=_u64, default=0, help="padding key used at embedding")
    p.add_argument("--out")
    _add_format(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("capacity", help="print 3*b*N and the usable payload bytes")
    p.add_argument("template")
    p.add_argument("--bits", type=_bits, default=2)
    _add_format(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("match", help="score two templates")
    p.add_argument("a")
    p.add_argument("b")
    _add_match_flags(p)
    _add_format(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("gen", help="generate a synthetic template or database")
    _add_gen_flags(p)
    p.add_argument("--out")
    p.add_argument("--db", help="write <finger>_<impression>.mnt files into this directory")
    p.add_argument("--fingers", type=int, default=10)
    p.add_argument("--impressions", type=int, default=harness.IMPRESSIONS_PER_FINGER)
    _add_format(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="genuine/impostor evaluation before and after embedding")
    _add_gen_flags(p)
    _add_match_flags(p)
    p.add_argument("--db-size", type=int, default=50)
    p.add_argument("--db-dir", help="use <finger>_<impression>.mnt templates instead of synthetic ones")
    p.add_argument("--bits", type=_bit_list, default=[1, 2, 3, 4], help="comma-separated, e.g. 1,2,3")
    p.add_argument("--strategy", choices=STRATEGIES, action="append",
                   help="repeat to compare strategies (default: optimized)")
    p.add_argument("--order-preserving", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--key", type=_u64, default=0, help="payload randomness key")
    p.add_argument("--out", help="CSV report path (default: stdout)")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TemplateError, StegoError, harness.GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
