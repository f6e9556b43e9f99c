"""Command line: convert-cube and convert-labels subcommands."""

import argparse
import json
import sys

from .convert import ConvertError, convert_cube, convert_labels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matconvert",
        description="Convert .mat hyperspectral data to HSC/HSL files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert-cube", help="3-D reflectance array -> HSC")
    p.add_argument("mat_path")
    p.add_argument("--var", required=True, help="variable name inside the .mat file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cube)

    p = sub.add_parser("convert-labels", help="2-D class matrix -> HSL")
    p.add_argument("mat_path")
    p.add_argument("--var", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--check-against", default=None,
                   help="HSC file whose spatial grid the labels must match")
    p.set_defaults(func=_cmd_labels)
    return parser


def _cmd_cube(args) -> int:
    summary = convert_cube(args.mat_path, args.var, args.out)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_labels(args) -> int:
    summary = convert_labels(
        args.mat_path, args.var, args.out, check_against=args.check_against
    )
    print(json.dumps(summary, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return args.func(args)
    except (ConvertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
