"""Command line entry point.

    haptosim run <config> [--section.key=value ...]
    haptosim sweep <config> --axis mu --values 0.1,1,10
    haptosim mms <config>
    haptosim lemma <config>

Exit codes: 0 ok, 1 configuration or I/O error (and failed MMS slope check),
2 blow-up suspected, 3 time step underflow.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import HaptosimError
from .harness import EXIT_ERROR, lemma_report, run_simulation, run_sweep
from .mms import run_mms


def split_overrides(extra):
    """Turn leftover ``--section.key=value`` arguments into an override dict."""
    overrides = {}
    for arg in extra:
        if not arg.startswith("--") or "=" not in arg:
            raise HaptosimError(f"unrecognised argument {arg!r}; overrides look like --section.key=value")
        key, value = arg[2:].split("=", 1)
        overrides[key.strip()] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haptosim", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "simulate one configuration"),
                            ("mms", "manufactured-solution convergence study"),
                            ("lemma", "evaluate rho, min H(y) and a feasible p0")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config")
    p = sub.add_parser("sweep", help="independent runs over one parameter")
    p.add_argument("config")
    p.add_argument("--axis", required=True, choices=("mu", "chi", "xi", "eta"))
    p.add_argument("--values", required=True,
                   help="comma separated values, e.g. 0.1,1,10 (empty string for none)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, split_overrides(extra))
        if args.command == "run":
            rep = run_simulation(cfg)
            print((rep.output_dir / "report.txt").read_text(), end="")
            return rep.exit_code
        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            rows = run_sweep(cfg, args.axis, values)
            print("value,status,final_linf_u,max_blowup_indicator")
            for row in rows:
                print(f"{row.value!r},{row.status},{row.final_linf_u!r},{row.max_blowup_indicator!r}")
            return 0
        if args.command == "mms":
            table = run_mms(cfg.mms)
            print(table.format())
            return 0 if table.passed else EXIT_ERROR
        if args.command == "lemma":
            for key, value in lemma_report(cfg).items():
                print(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
            return 0
    except (HaptosimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
