#!/usr/bin/env python3
"""Sweep every bracket identity over random cases and print worst residuals.

Usage: python scripts/identity_sweep.py [--N 1 2] [--cases 1000] [--seed 0]
"""

import argparse

from euler3d import AnisotropyMatrix, FrameSet, TruncationSpec, build_lattice
from euler3d.verify import run_identity_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--cases", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    all_ok = True
    for N in args.N:
        modes = build_lattice(TruncationSpec(N), AnisotropyMatrix())
        frames = FrameSet(modes)
        report = run_identity_suite(modes, frames, seed=args.seed, cases=args.cases)
        print(f"\n== N = {N} ({len(modes)} modes, {args.cases} cases, seed {args.seed}) ==")
        for name, entry in report["checks"].items():
            mark = "ok  " if entry["passed"] else "FAIL"
            print(f"  {mark} {name:32s} {entry['max_residual']:.3e}  ({entry['cases']} cases)")
        all_ok &= report["passed"]
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
