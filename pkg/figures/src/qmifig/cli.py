"""Console entry points: render-qmi, render-violin, render-resource."""

import argparse
import json
import sys

from .io import GRID_HEADER, QMI_HEADER, RUNS_HEADER, SchemaError
from .render import render_qmi, render_resource, render_violin

_FAILURES = (SchemaError, OSError, json.JSONDecodeError, ValueError)


def _run(parser, argv, handler):
    args = parser.parse_args(argv)
    try:
        handler(args)
    except _FAILURES as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


def main_qmi(argv=None):
    parser = argparse.ArgumentParser(
        prog="render-qmi",
        description="Render a mutual-information CSV as a heatmap on a "
                    "fixed 0-1 color scale.",
        epilog=f"input columns: {','.join(QMI_HEADER)}")
    parser.add_argument("qmi_csv", help="mutual-information CSV")
    parser.add_argument("out", help="output image path")
    parser.add_argument("--sequence", default=None,
                        help="sequence JSON whose pairs are framed on "
                             "the map")
    parser.add_argument("--title", default="", help="panel title")
    return _run(parser, argv,
                lambda args: render_qmi(args.qmi_csv, args.out,
                                        sequence_path=args.sequence,
                                        title=args.title))


def _parse_ints(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def main_violin(argv=None):
    parser = argparse.ArgumentParser(
        prog="render-violin",
        description="Render %E_c distributions from an archive's runs "
                    "tree, one panel per depth and one violin per circuit "
                    "family.",
        epilog=f"run table columns: {','.join(RUNS_HEADER)}")
    parser.add_argument("archive", help="archive directory from a sweep")
    parser.add_argument("out", help="output image path")
    parser.add_argument("--depths", default="",
                        help="comma-separated depths (default: all found)")
    parser.add_argument("--labels", default="",
                        help="comma-separated family labels "
                             "(default: all found)")
    return _run(
        parser, argv,
        lambda args: render_violin(
            args.archive, args.out,
            depths=_parse_ints(args.depths) or None,
            labels=[tok for tok in args.labels.split(",")
                    if tok.strip()] or None))


def main_resource(argv=None):
    parser = argparse.ArgumentParser(
        prog="render-resource",
        description="Render a resource-grid CSV as a budget heatmap with "
                    "per-cell winners.",
        epilog=f"input columns: {','.join(GRID_HEADER)}")
    parser.add_argument("grid_csv", help="resource grid CSV")
    parser.add_argument("out", help="output image path")
    return _run(parser, argv,
                lambda args: render_resource(args.grid_csv, args.out))
