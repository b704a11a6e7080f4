#!/usr/bin/env python3
"""Reproduce the suboptimality-versus-time comparison on synthetic data.

Runs every method x step-rule combination on the default 300x600 instances
for three conditioning levels and writes benchmark.csv plus one SVG plot per
delta.  With the default 50k-iteration horizon this takes a while at full
size; pass --n/--p to scale down for a quick look.

Usage:
    python3 scripts/run_figure1.py --out-dir results [--n 600 --p 300]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from extraprox.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["bench"] + sys.argv[1:]))
