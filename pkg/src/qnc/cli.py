"""``qnc <subcommand> --config <path> [--out <path>] [--seed <u64>]``.

Exit codes: 0 when every check of the experiment passes, 1 when one fails,
2 for usage or configuration errors.  ``QNC_OUT`` overrides the output path.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .algebra import DimensionCapError
from .experiments import (
    SUBCOMMANDS,
    ConfigError,
    default_config,
    load_config,
    run,
    write_table,
    _fmt,
)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnc", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON experiment config (defaults apply when omitted)")
    p.add_argument("--out", help="output table path (stdout when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        table = run(args.subcommand, cfg)
    except (ConfigError, DimensionCapError, OSError) as exc:
        print(f"qnc: error: {exc}", file=sys.stderr)
        return 2
    out = os.environ.get("QNC_OUT") or args.out or cfg.output.get("path")
    if out:
        write_table(table, out, cfg.output.get("format", "csv"))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(x) for x in row])
    status = "PASS" if table.passed else "FAIL"
    print(f"qnc {args.subcommand}: {status}", file=sys.stderr)
    return 0 if table.passed else 1


if __name__ == "__main__":
    sys.exit(main())
