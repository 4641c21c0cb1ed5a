"""Command-line entry point: render <figure-id> --in DIR --out DIR."""

import argparse
import sys

from .plots import FIGURE_IDS, render
from .schemas import SchemaError

EXIT_OK = 0
EXIT_ERROR = 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from simulation CSV output.")
    parser.add_argument("figure_id", metavar="figure-id",
                        help="one of: " + ", ".join(sorted(FIGURE_IDS)))
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding the input CSV files")
    parser.add_argument("--out", dest="out_dir", required=True,
                        help="directory for the rendered image")
    args = parser.parse_args(argv)
    try:
        path = render(args.figure_id, args.in_dir, args.out_dir)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
