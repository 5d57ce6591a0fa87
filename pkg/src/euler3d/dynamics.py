"""Hamiltonian vector fields in full and reduced coordinates, and explicit
time integration with conservation diagnostics.

The field at mode j is the triad sum over k of block(j, k, omega_{j+k})
applied to omega_{-k}/|k|^2, with the coefficient zeroed whenever j+k leaves
the lattice.  Evaluation is reorganized into dense gathers and matrix
products over the pair table; this is algebraically the block sum and is
tested against it.  Only an explicit fixed-step integrator is provided:
no structure-preserving discretization is known for these brackets, so
conservation is monitored rather than enforced.
"""

from __future__ import annotations

import numpy as np

from .errors import BlowUpError
from .frames import FrameSet
from .lattice import ModeSet
from .state import DiagnosticsRecord, ReducedState, VorticityState
from .structures import STRUCTURES, reduced_tables
from . import observables


class FieldOperator:
    """Precomputed index tables for fast triad sums over one ModeSet."""

    def __init__(self, modes: ModeSet):
        self.modes = modes
        self.K = modes.wavevectors
        self.inv_norm2 = 1.0 / modes.norms**2
        self.conv = modes.pair_table()
        self.conv_clip = np.clip(self.conv, 0, None)
        self.conv_miss = self.conv < 0
        # position of (m - j) for row j, column m: m - j = m + (-j)
        self.kdiff = self.conv[modes.neg_index]
        self.kdiff_clip = np.clip(self.kdiff, 0, None)
        self.kdiff_miss = self.kdiff < 0
        krow = np.arange(len(modes))
        self._krow = np.broadcast_to(krow[None, :], self.conv.shape)

    def full_field(self, W: np.ndarray, which: str) -> np.ndarray:
        """(M, 3) time derivative for full-lattice coefficients W.

        which: 'direct' (advection blocks), 'simple', or 'projected'.
        """
        if which not in ("direct", "simple", "projected"):
            raise ValueError(f"unknown full-coordinate structure {which!r}")
        K = self.K
        g = W[self.modes.neg_index] * self.inv_norm2[:, None]
        c2 = np.cross(K, g)

        Wsum = W
        if which == "projected":
            div = np.einsum("md,md->m", K, W) * self.inv_norm2
            Wsum = W - K * div[:, None]

        # s1[j, k] = (k x j) . g_k, gathered to the sum index m = j + k
        s1 = K @ np.cross(g, K).T
        s1m = np.take_along_axis(s1, self.kdiff_clip, axis=1)
        s1m[self.kdiff_miss] = 0.0
        field = s1m @ Wsum

        P = Wsum @ K.T  # P[m, x] = omega_m . K_x
        if which == "direct":
            s2 = P[self.conv_clip, self._krow]  # k . omega_{j+k}
            s2[self.conv_miss] = 0.0
            field -= s2 @ c2
        else:
            s2 = np.take_along_axis(P.T, self.conv_clip, axis=1)  # j . omega_{j+k}
            s2[self.conv_miss] = 0.0
            field += s2 @ c2
        return field

    def reduced_field(self, wt: np.ndarray, frames: FrameSet) -> np.ndarray:
        """(M, 2) time derivative for full-lattice reduced coefficients wt."""
        tabs = reduced_tables(frames)
        u = wt[self.modes.neg_index] * np.array([-1.0, 1.0]) * self.inv_norm2[:, None]
        wq = wt[self.conv_clip]
        wq[self.conv_miss] = 0.0
        out = np.zeros((len(self.modes), 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                coef = tabs.Ty[:, :, a, b] * wq[:, :, 0] + tabs.Tz[:, :, a, b] * wq[:, :, 1]
                out[:, a] += coef @ u[:, b]
        return out


def _operator(modes: ModeSet) -> FieldOperator:
    op = getattr(modes, "_field_operator", None)
    if op is None:
        op = FieldOperator(modes)
        modes._field_operator = op
    return op


def vector_field_full(state: VorticityState, modes: ModeSet, which: str = "projected") -> np.ndarray:
    """(M, 3) triad-sum field over all lattice modes; obeys the reality pairing."""
    if modes is not state.modes:
        raise ValueError("state and modes disagree")
    return _operator(modes).full_field(state.full_values(), which)


def vector_field_reduced(reduced: ReducedState, modes: ModeSet, frames: FrameSet) -> np.ndarray:
    """(M, 2) field of the reduced structure; obeys the twisted reality pairing."""
    if modes is not reduced.modes:
        raise ValueError("state and modes disagree")
    return _operator(modes).reduced_field(reduced.full_values(), frames)


def half_field_evaluator(modes: ModeSet, which: str = "projected", frames: FrameSet | None = None):
    """Derivative of the stored half-lattice values, as a callable on states.

    For 'reduced' the callable maps ReducedState -> (H, 2); the full-coordinate
    structures map VorticityState -> (H, 3).
    """
    if which not in STRUCTURES:
        raise ValueError(f"unknown structure {which!r} (want one of {STRUCTURES})")
    op = _operator(modes)
    half = modes.half_positions
    if which == "reduced":
        if frames is None:
            frames = FrameSet(modes)

        def evaluator(reduced: ReducedState) -> np.ndarray:
            return op.reduced_field(reduced.full_values(), frames)[half]

    else:

        def evaluator(state: VorticityState) -> np.ndarray:
            return op.full_field(state.full_values(), which)[half]

    return evaluator


def _lift(state, values: np.ndarray):
    return type(state)(state.modes, values)


def rk4_step(state, dt: float, evaluator):
    """One classical fourth-order step; reality is structural, so it is kept.

    ``evaluator`` maps a state to the derivative of its stored values.
    Raises BlowUpError when a stage produces non-finite values.
    """
    if dt == 0.0:
        raise ValueError("dt must be nonzero")
    y0 = state.values
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up is detected, not a bug
        k1 = evaluator(state)
        k2 = evaluator(_lift(state, y0 + 0.5 * dt * k1))
        k3 = evaluator(_lift(state, y0 + 0.5 * dt * k2))
        k4 = evaluator(_lift(state, y0 + dt * k3))
        y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y1.view(float))):
        raise BlowUpError(0, "non-finite values in integration stage")
    return _lift(state, y1)


def _diagnostics(state: VorticityState, t: float) -> DiagnosticsRecord:
    return DiagnosticsRecord(
        t=t,
        energy=observables.energy(state),
        helicity=observables.helicity(state),
        div_max=state.divergence_residual(),
        amp_max=state.amp_max,
    )


def integrate(
    state: VorticityState,
    dt: float,
    steps: int,
    which: str = "projected",
    frames: FrameSet | None = None,
    observe_every: int = 1,
    t0: float = 0.0,
    on_step=None,
    div_rtol: float | None = None,
):
    """Repeated rk4 steps with diagnostics every ``observe_every`` steps.

    ``which='reduced'`` evolves the state in reduced coordinates (the input
    must be divergence-free within ``div_rtol``) and maps back through the
    frames for diagnostics and output.  Returns
    (final_state, [DiagnosticsRecord...]); the record list includes the
    initial state.  On blow-up, raises BlowUpError carrying the failing step
    index, the last good full-coordinate state and time, and the records so
    far.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if which == "reduced":
        from .state import DIVERGENCE_RTOL, from_reduced, to_reduced

        if frames is None:
            frames = FrameSet(state.modes)
        fr = frames
        current = to_reduced(state, fr, rtol=div_rtol if div_rtol is not None else DIVERGENCE_RTOL)
        as_full = lambda s: from_reduced(s, fr)
    else:
        current = state
        as_full = lambda s: s
    evaluator = half_field_evaluator(state.modes, which, frames)
    records = [_diagnostics(as_full(current), t0)]
    for i in range(steps):
        prev = current
        try:
            current = rk4_step(current, dt, evaluator)
            t = t0 + (i + 1) * dt
            if (i + 1) % observe_every == 0 or i == steps - 1:
                # quadratic diagnostics can overflow before the state does;
                # treat that as the same blow-up condition
                records.append(_diagnostics(as_full(current), t))
        except (BlowUpError, ValueError):
            err = BlowUpError(i, f"blow-up at step {i} (t={t0 + i * dt!r})")
            err.last_state = as_full(prev)
            err.t = t0 + i * dt
            err.records = records
            raise err from None
        if on_step is not None:
            on_step(i + 1, t, as_full(current))
    return as_full(current), records


def integrate_reduced(
    reduced: ReducedState,
    dt: float,
    steps: int,
    frames: FrameSet,
    sample_every: int = 0,
):
    """Time integration in reduced coordinates.

    Returns (final_state, samples) where samples is a list of (t, state)
    taken every ``sample_every`` steps (empty when 0).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    evaluator = half_field_evaluator(reduced.modes, "reduced", frames)
    samples = []
    current = reduced
    for i in range(steps):
        current = rk4_step(current, dt, evaluator)
        if sample_every and (i + 1) % sample_every == 0:
            samples.append(((i + 1) * dt, current))
    return current, samples


def write_diagnostics_csv(records, path) -> None:
    lines = [observables.diagnostics_csv_header()]
    lines.extend(observables.diagnostics_csv_row(r) for r in records)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
