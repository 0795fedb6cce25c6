#!/usr/bin/env python3
"""Rerun one of the built-in published-table presets and write its CSV.

Examples:
    python scripts/reproduce_table.py I --out table1.csv
    python scripts/reproduce_table.py IV --s 1000 --m 50 --seed 7   # desk scale
"""

import argparse
import sys

from raresplit.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("table", choices=["I", "II", "III", "IV", "V", "VI"])
    parser.add_argument("--out", default=None)
    parser.add_argument("--s", type=int, default=None)
    parser.add_argument("--m", type=int, default=None)
    parser.add_argument("--baseline-m", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--timing", action="store_true")
    args = parser.parse_args()

    argv = ["reproduce", "--table", args.table, "--seed", str(args.seed),
            "--threads", str(args.threads)]
    if args.out:
        argv += ["--out", args.out]
    if args.s is not None:
        argv += ["--s", str(args.s)]
    if args.m is not None:
        argv += ["--m", str(args.m)]
    if args.baseline_m is not None:
        argv += ["--baseline-m", str(args.baseline_m)]
    if args.timing:
        argv.append("--timing")
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
