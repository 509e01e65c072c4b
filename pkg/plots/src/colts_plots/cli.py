"""CLI: ``colts-plot --spec <path>`` renders one figure from experiment CSVs.

Exit codes: 0 success, 2 spec or input-schema error (the message names the
offending column or file), 3 unexpected runtime failure.
"""

import argparse
import sys

from .figspec import SpecError, parse_spec
from .render import render
from .schemas import SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="colts-plot",
                                     description="render experiment CSVs to figures")
    parser.add_argument("--spec", required=True, help="figure spec file")
    args = parser.parse_args(argv)
    try:
        spec = parse_spec(args.spec)
        out = render(spec)
    except (SpecError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
