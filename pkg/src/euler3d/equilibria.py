"""Shear-flow equilibria and the singularity of the bracket at them.

A shear flow has vorticity supported on one wavevector line n*p with a fixed
real amplitude direction G perpendicular to p.  Every such state is a fixed
point of the truncated dynamics for all structure choices.  At these states
the energy gradient joins the kernel of the assembled tensor without being a
combination of the known Casimir gradients, and the kernel is strictly
larger than at a generic state: the bracket is singular there, which is
what blocks the usual energy-Casimir stability argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationTooSmallError
from .frames import FrameSet
from .lattice import ModeSet
from . import dynamics, observables
from . import structures as st
from . import verify
from .state import VorticityState, random_divfree_state, to_reduced


@dataclass(frozen=True)
class ShearFlowSpec:
    """Vorticity profile G * C(p . x) with Fourier coefficients c_n.

    p: integer direction with coprime components; G: real amplitude vector
    with G . p = 0 exactly; coefficients: {n: c_n} with c_{-n} = conj(c_n)
    (one-sided input is mirrored automatically).
    """

    p: tuple[int, int, int]
    G: tuple[float, float, float]
    coefficients: dict[int, complex] = field(default_factory=lambda: {1: 1.0})

    def __post_init__(self) -> None:
        p = tuple(int(c) for c in self.p)
        if p == (0, 0, 0):
            raise ValueError("shear direction p must be nonzero")
        if math.gcd(math.gcd(abs(p[0]), abs(p[1])), abs(p[2])) != 1:
            raise ValueError(f"shear direction components must be coprime, got {p}")
        G = np.asarray(self.G, dtype=float)
        if float(G @ np.asarray(p, dtype=float)) != 0.0:
            raise ValueError("amplitude direction must satisfy G . p = 0 exactly")
        coeffs: dict[int, complex] = {}
        for n, c in self.coefficients.items():
            n = int(n)
            if n == 0:
                raise ValueError("the n = 0 profile coefficient is excluded")
            c = complex(c)
            for key, val in ((n, c), (-n, c.conjugate())):
                if key in coeffs and coeffs[key] != val:
                    raise ValueError(f"profile coefficients violate c_-n = conj(c_n) at n={key}")
                coeffs[key] = val
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "G", tuple(float(g) for g in G))
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def harmonics(self) -> list[int]:
        return sorted(self.coefficients)


def shear_state(spec: ShearFlowSpec, modes: ModeSet) -> VorticityState:
    """State with omega at n*p equal to G c_n, zero elsewhere."""
    G = np.asarray(spec.G, dtype=float)
    state = VorticityState.zeros(modes)
    values = state.values.copy()
    for n, c in spec.coefficients.items():
        a = tuple(n * comp for comp in spec.p)
        if a not in modes:
            raise TruncationTooSmallError(
                f"shear harmonic {n} needs mode {a} outside the N={modes.N} box"
            )
        pos = modes.position_of(a)
        if modes.is_canonical[pos]:
            values[modes.half_slot[pos]] = G * c
    return VorticityState(modes, values)


def equilibrium_residual(state: VorticityState, which: str, frames: FrameSet | None = None) -> float:
    """Max-norm of the chosen vector field, relative to the peak amplitude."""
    amp = max(state.amp_max, 1e-300)
    if which == "reduced":
        if frames is None:
            frames = FrameSet(state.modes)
        reduced = to_reduced(state, frames)
        f = dynamics.vector_field_reduced(reduced, state.modes, frames)
    else:
        f = dynamics.vector_field_full(state, state.modes, which)
    return float(np.max(np.abs(f))) / amp


def casimir_span_basis(state: VorticityState) -> np.ndarray:
    """Columns: flat gradient covectors of the known Casimirs.

    One divergence direction per mode (the covector supported at that mode
    with value its wavevector) plus the helicity gradient at the state.
    """
    modes = state.modes
    M = len(modes)
    cols = []
    for pos in range(M):
        col = np.zeros((M, 3), dtype=complex)
        col[pos] = modes.wavevectors[pos]
        cols.append(col.reshape(-1))
    cols.append(observables.grad_helicity(state).reshape(-1))
    return np.stack(cols, axis=1)


def gradient_span_test(
    state: VorticityState,
    tensor: st.GlobalTensor,
    tol: float = 1e-12,
    equilibrium_tol: float = 1e-10,
) -> dict:
    """Kernel membership of grad E and its distance from the Casimir span.

    Only meaningful at equilibria; raises ValueError otherwise.  The span
    residual is the least-squares remainder of projecting grad E onto
    span{grad h, divergence directions}, as a fraction of ||grad E||.
    """
    res = equilibrium_residual(state, tensor.which if tensor.which != "reduced" else "projected")
    if res > equilibrium_tol:
        raise ValueError(f"gradient_span_test wants an equilibrium; residual {res:.3e}")
    gE = observables.grad_energy(state).reshape(-1)
    gH = observables.grad_helicity(state)
    basis = casimir_span_basis(state)
    coeffs, *_ = np.linalg.lstsq(basis, gE, rcond=None)
    remainder = gE - basis @ coeffs
    span_fraction = float(np.linalg.norm(remainder) / max(np.linalg.norm(gE), 1e-300))

    angles = {}
    gE_modes = observables.grad_energy(state)
    for pos in range(len(state.modes)):
        nE = np.linalg.norm(gE_modes[pos])
        nh = np.linalg.norm(gH[pos])
        if nE > 1e-12 and nh > 1e-12:
            inner = abs(np.vdot(gE_modes[pos], gH[pos]))
            ang = math.degrees(math.acos(min(1.0, inner / (nE * nh))))
            angles[str(tuple(int(c) for c in state.modes.indices[pos]))] = ang
    return {
        "equilibrium_residual": res,
        "grad_energy_in_kernel": verify.kernel_contains(tensor, gE, tol),
        "span_residual_fraction": span_fraction,
        "gradient_angles_deg": angles,
    }


def corank_comparison(
    spec: ShearFlowSpec,
    modes: ModeSet,
    which: str = "projected",
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4),
    tol: float = 2.0**-46,
    frames: FrameSet | None = None,
) -> dict:
    """Kernel dimension at the shear state vs a generic baseline.

    The baseline is a seeded random divergence-free state of matched peak
    amplitude; its kernel dimension is reported per seed (it is generically
    seed-independent).
    """
    eq = shear_state(spec, modes)
    eq_rank = verify.poisson_rank(eq, modes, which, tol, frames)
    amp = eq.amp_max
    baseline = []
    for seed in seeds:
        raw = random_divfree_state(modes, seed=seed, amplitude=1.0)
        scaled = VorticityState(modes, raw.values * (amp / max(raw.amp_max, 1e-300)))
        r = verify.poisson_rank(scaled, modes, which, tol, frames)
        baseline.append({"seed": int(seed), "rank": r.rank, "corank": r.corank})
    coranks = sorted({b["corank"] for b in baseline})
    degenerate = eq_rank.rank == 0 and all(b["rank"] == 0 for b in baseline)
    # known Casimir gradients: one divergence direction per mode plus helicity
    # in full coordinates; restriction absorbs the divergence directions, so
    # only helicity remains there.  Kernel dimensions beyond the known count
    # are reported, not explained away.
    known = 1 if which == "reduced" else len(modes) + 1
    return {
        "which": which,
        "dim": 3 * len(modes) if which != "reduced" else 2 * len(modes),
        "shear": {"rank": eq_rank.rank, "corank": eq_rank.corank},
        "baseline": baseline,
        "baseline_coranks": coranks,
        "kernel_excess": eq_rank.corank - max(b["corank"] for b in baseline),
        "known_casimirs": known,
        "baseline_unexplained": max(coranks) - known if not degenerate else 0,
        "degenerate": degenerate,
        "rank_tol": tol,
        "seeds": [int(s) for s in seeds],
    }
