#!/usr/bin/env python3
"""Manufactured-solution refinement studies for both stencils and both formulations."""

import argparse
import time

from haptosim.mms import MMSConfig, run_mms
from haptosim.spatial_ops import StencilConfig

STUDIES = {
    "central-h2": dict(dt_law="proportional_to_h2", stencil=StencilConfig("central")),
    "upwind-h": dict(dt_law="proportional_to_h", stencil=StencilConfig("upwind")),
    "central-h": dict(dt_law="proportional_to_h", stencil=StencilConfig("central")),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--study", choices=sorted(STUDIES), action="append",
                    help="repeatable; default runs all of them")
    ap.add_argument("--transformed", action="store_true", help="evolve a = u e^{-xi w} instead of u")
    ap.add_argument("--levels", default="32,64,128", help="comma separated square grid sizes")
    args = ap.parse_args()
    levels = tuple((int(n), int(n)) for n in args.levels.split(","))
    failed = False
    for name in args.study or sorted(STUDIES):
        t0 = time.perf_counter()
        table = run_mms(MMSConfig(grid_levels=levels, transformed=args.transformed, **STUDIES[name]))
        print(f"== {name}{' (transformed)' if args.transformed else ''}: {time.perf_counter() - t0:.1f} s")
        print(table.format())
        failed |= not table.passed
    return int(failed)


if __name__ == "__main__":
    raise SystemExit(main())
