#!/usr/bin/env python3
"""Long bounded-regime run: checks the w-bound, clamp count and growth of ||u||_inf.

    python scripts/run_bounded.py [config] [--section.key=value ...]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from haptosim.cli import split_overrides
from haptosim.config import load_config
from haptosim.harness import run_simulation

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default=str(HERE / "bounded.cfg"))
    args, extra = ap.parse_known_args()
    cfg = load_config(args.config, split_overrides(extra))
    rep = run_simulation(cfg)
    u0 = rep.records[0].linf_u
    max_u = max(r.linf_u for r in rep.records)
    print(f"status            {rep.status} (exit {rep.exit_code})")
    print(f"steps             {rep.steps}")
    print(f"clamped cells     {rep.clamped_total}")
    print(f"max ||u||_inf     {max_u:.6f}   (10(1+||u0||_inf) = {10 * (1 + u0):.3f})")
    print(f"w range (final)   [{np.min(rep.final_state.w):.3e}, {np.max(rep.final_state.w):.6f}]   rho = {rep.rho:g}")
    print(f"outputs           {rep.output_dir}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
