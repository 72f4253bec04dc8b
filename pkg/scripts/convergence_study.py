#!/usr/bin/env python3
"""Run the convergence experiment for both smoothness settings.

Thin wrapper over `ranlat study`; writes one CSV per alpha into the
given output directory (default: ./study-out).
"""

import argparse
import pathlib
import sys

from ranlat.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="study-out")
    ap.add_argument("--k-range", default="15..26")
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--gamma-spec", default="poly:3")
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for alpha in (1, 2):
        path = out / f"study_alpha{alpha}.csv"
        rc = cli_main([
            "study", "--alpha", str(alpha), "--d", str(args.d),
            "--gamma-spec", args.gamma_spec, "--k-range", args.k_range,
            "--out", str(path),
        ])
        if rc != 0:
            return rc
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
