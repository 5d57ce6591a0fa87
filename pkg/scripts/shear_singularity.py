#!/usr/bin/env python3
"""Demonstrate that shear equilibria are singular points of the bracket.

At a shear state the energy gradient lies in the kernel of the assembled
tensor, is essentially orthogonal to the span of the known Casimir
gradients, and the kernel is strictly larger than at a generic state of the
same amplitude: the energy-Casimir recipe has nothing to work with there.

Usage: python scripts/shear_singularity.py [--N 1] [--p 1 0 0] [--G 0 0 1]
"""

import argparse
import json

from euler3d import (
    AnisotropyMatrix,
    FrameSet,
    ShearFlowSpec,
    TruncationSpec,
    assemble_global,
    build_lattice,
    corank_comparison,
    equilibrium_residual,
    gradient_span_test,
    shear_state,
)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=1)
    ap.add_argument("--p", type=int, nargs=3, default=[1, 0, 0])
    ap.add_argument("--G", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    args = ap.parse_args()

    modes = build_lattice(TruncationSpec(args.N), AnisotropyMatrix())
    frames = FrameSet(modes)
    spec = ShearFlowSpec(tuple(args.p), tuple(args.G), {1: 1.0})
    eq = shear_state(spec, modes)

    print("equilibrium residuals:")
    for which in ("direct", "simple", "projected", "reduced"):
        print(f"  {which:10s} {equilibrium_residual(eq, which, frames):.3e}")

    tensor = assemble_global(eq, modes, "projected", frames)
    span = gradient_span_test(eq, tensor)
    print(f"grad E in kernel: {span['grad_energy_in_kernel']}")
    print(f"fraction of grad E outside the Casimir span: {span['span_residual_fraction']:.3f}")
    print(f"grad E vs grad h angles: {span['gradient_angles_deg']}")

    comparison = corank_comparison(spec, modes, "projected", seeds=tuple(args.seeds), frames=frames)
    print(json.dumps(comparison, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
