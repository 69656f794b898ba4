"""Synthesize, verify and simulate a scenario; writes all CLI artifacts.

    python scripts/run_scenario.py heat1d_dual --out out/heat
"""
import argparse
import sys

from regulator.cli import main


def run(config, out, skip=()):
    codes = {}
    for cmd in ("synthesize", "verify", "spectrum", "hankel", "simulate"):
        if cmd in skip:
            continue
        argv = [cmd, "--config", config, "--out", out]
        if cmd not in ("synthesize", "verify"):
            argv += ["--controller", f"{out}/controller"]
        codes[cmd] = main(argv)
        if codes[cmd] == 2:
            break
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", help="scenario file or bundled scenario name")
    ap.add_argument("--out", required=True)
    ap.add_argument("--skip", nargs="*", default=(), help="commands to leave out")
    args = ap.parse_args()
    codes = run(args.config, args.out, args.skip)
    print(codes, file=sys.stderr)
    sys.exit(max(codes.values(), default=0))
