#!/usr/bin/env python3
"""Tabulate the H(y) minimum and the feasible exponent p0 over a range of chi."""

import argparse

import numpy as np

from haptosim.lemma_toolkit import LemmaConstants, feasible_p0, h_min


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--xi", type=float, default=1.0)
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=2.0)
    args = ap.parse_args()
    print(f"{'chi':>6} {'y*':>12} {'min H':>12} {'stated form':>12} {'p0':>10} {'g(p0)':>10}")
    for chi in np.linspace(0.25, 3.0, 12):
        c = LemmaConstants(delta=args.delta, chi=float(chi), xi=args.xi, eta=args.eta, mu=args.mu, rho=args.rho)
        r = h_min(c)
        fp = feasible_p0(c)
        p0 = f"{fp.p0:10.6f} {fp.g_p0:10.3e}" if fp else f"{'none':>10} {'':>10}"
        print(f"{chi:6.3f} {r.y_star:12.6f} {r.h_min:12.6f} {r.paper_formula_value:12.6f} {p0}")


if __name__ == "__main__":
    main()
