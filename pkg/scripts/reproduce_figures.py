#!/usr/bin/env python3
"""Reproduce the bundled periodic-orbit and time-average experiments.

Runs simulate + phase plot for the two closed-orbit instances, the full
analysis pipeline for every bundled config, and a running-average plot for
the rescaled-kernel instance.  Outputs land under --outdir (default ./out).
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from teamrep.cli import main as cli  # noqa: E402

CONFIGS = REPO / "configs"


def run(args: list[str]) -> None:
    print("+ teamrep " + " ".join(args))
    code = cli(args)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out")
    args = parser.parse_args()
    out = Path(args.outdir)

    for label in ("fig1a", "fig1b"):
        run(["simulate", "--config", str(CONFIGS / f"{label}.json"), "--out", str(out / label)])
        run(
            [
                "plot",
                str(out / label / "trajectory.csv"),
                "--out",
                str(out / label),
                "--phase",
                "x_1,y_1",
                "--title",
                f"{label}: closed orbit",
            ]
        )
        run(["analyze", "--config", str(CONFIGS / f"{label}.json"), "--out", str(out / label)])

    # time-average convergence on the rescaled kernel: simulate a long run,
    # then plot the running averages approaching (0.5, 0.5) and value 0.5
    run(
        [
            "simulate",
            "--config",
            str(CONFIGS / "fig2a.json"),
            "--out",
            str(out / "fig2a"),
            "--max-time",
            "4030",
        ]
    )
    run(
        [
            "plot",
            str(out / "fig2a" / "trajectory.csv"),
            "--out",
            str(out / "fig2a"),
            "--fields",
            "f,g,uA",
            "--running-average",
            "--title",
            "fig2a: running averages",
        ]
    )
    for label in ("fig2a", "fig2b", "single_gene_mp"):
        run(["analyze", "--config", str(CONFIGS / f"{label}.json"), "--out", str(out / label)])
    print("all experiments reproduced; outputs in", out)


if __name__ == "__main__":
    main()
