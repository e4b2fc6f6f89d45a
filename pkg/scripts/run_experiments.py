#!/usr/bin/env python3
"""Run every bundled CLI experiment config and collect outputs under results/."""

import argparse
import sys
from pathlib import Path

from nekho.cli import main

HERE = Path(__file__).resolve().parent
RUNS = [
    ("dio", "dio_golden.json", []),
    ("constants", "constants_periodic.json", ["--theorem", "1"]),
    ("cover", "cover_n2.json", []),
    ("certify", "certify_golden.json", []),
    ("simulate", "simulate_pendulum.json", []),
    ("sweep", "sweep_golden.json", []),
]


def run(out_root: Path, only=None) -> int:
    worst = 0
    for cmd, cfg, extra in RUNS:
        if only and cmd not in only:
            continue
        dest = out_root / Path(cfg).stem
        code = main([cmd, "--config", str(HERE / "configs" / cfg), "--out", str(dest), *extra])
        print(f"{cmd:10s} {cfg:28s} exit {code} -> {dest}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output root")
    ap.add_argument("--only", nargs="*", help="subset of subcommands")
    a = ap.parse_args()
    sys.exit(run(Path(a.out), a.only))
