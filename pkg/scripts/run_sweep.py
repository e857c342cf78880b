#!/usr/bin/env python3
"""Periodicity sweep over random interior initial conditions.

Empirical companion to the almost-all-initial-conditions claim: on the
XOR-XOR Matching Pennies game, nearly every random interior start should
close up on itself within tolerance.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from teamrep.cli import main as cli  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out/sweep")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    cmd = [
        "sweep",
        "--config",
        str(REPO / "configs" / "sweep_fig1a.json"),
        "--out",
        args.outdir,
    ]
    if args.seed is not None:
        cmd += ["--seed", str(args.seed)]
    sys.exit(cli(cmd))


if __name__ == "__main__":
    main()
