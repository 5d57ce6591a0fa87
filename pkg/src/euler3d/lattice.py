"""Truncated, anisotropy-scaled integer wavenumber lattice.

Modes are nonzero integer triples ``a`` with ``|a_i| <= N``; the physical
wavevector of a mode is the componentwise scaling by the domain's unit
wavenumbers.  The zero mode is always excluded (the mean velocity and mean
vorticity vanish in the working frame of reference).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidModeError, OutOfLatticeError

IntTriple = tuple[int, int, int]


@dataclass(frozen=True)
class AnisotropyMatrix:
    """Diagonal matrix of unit wavenumbers (1/length) of the periodic box."""

    nu_x: float = 1.0
    nu_y: float = 1.0
    nu_z: float = 1.0

    def __post_init__(self) -> None:
        if not (self.nu_x > 0 and self.nu_y > 0 and self.nu_z > 0):
            raise ValueError(f"unit wavenumbers must be positive, got {self}")

    def diagonal(self) -> np.ndarray:
        return np.array([self.nu_x, self.nu_y, self.nu_z], dtype=float)

    @classmethod
    def isotropic(cls) -> "AnisotropyMatrix":
        return cls(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class TruncationSpec:
    """Symmetric box truncation: integer mode indices with |a_i| <= N."""

    N: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"box half-width must be >= 1, got {self.N}")


def wavevector(a: Sequence[int], aniso: AnisotropyMatrix) -> np.ndarray:
    """Physical wavevector of integer mode ``a``: componentwise scaling."""
    arr = np.asarray(a, dtype=float)
    if not arr.any():
        raise InvalidModeError("the zero mode has no wavevector")
    return aniso.diagonal() * arr


def in_lattice(a: Sequence[int], trunc: TruncationSpec) -> bool:
    """True iff ``a`` is nonzero and inside the truncation box."""
    ax, ay, az = int(a[0]), int(a[1]), int(a[2])
    if ax == 0 and ay == 0 and az == 0:
        return False
    return max(abs(ax), abs(ay), abs(az)) <= trunc.N


def _is_canonical(a: IntTriple) -> bool:
    # canonical representative of a +-pair: first nonzero component positive
    for c in a:
        if c != 0:
            return c > 0
    return False


class ModeSet:
    """Ordered set of lattice modes with conjugate-pair bookkeeping.

    Immutable after construction.  Mode order is lexicographic on the integer
    index, which fixes serialization and the assembly order of global tensors.
    The canonical half-lattice holds exactly one representative of each
    {a, -a} pair (the one whose first nonzero component is positive).
    """

    def __init__(self, indices: np.ndarray, aniso: AnisotropyMatrix, N: int):
        indices = np.asarray(indices, dtype=np.int64)
        order = np.lexsort((indices[:, 2], indices[:, 1], indices[:, 0]))
        self.indices = indices[order]
        self.indices.setflags(write=False)
        self.aniso = aniso
        self.N = int(N)
        self.wavevectors = self.indices * aniso.diagonal()[None, :]
        self.wavevectors.setflags(write=False)
        self.norms = np.linalg.norm(self.wavevectors, axis=1)
        self.norms.setflags(write=False)

        self._position = {tuple(a): i for i, a in enumerate(map(tuple, self.indices.tolist()))}
        self.neg_index = np.array(
            [self._position[(-a[0], -a[1], -a[2])] for a in self.indices.tolist()],
            dtype=np.int64,
        )
        self.is_canonical = np.array(
            [_is_canonical(tuple(a)) for a in self.indices.tolist()], dtype=bool
        )
        self.half_positions = np.flatnonzero(self.is_canonical)
        # slot in the half-lattice for each full position (via the +-pair)
        half_slot = np.empty(len(self.indices), dtype=np.int64)
        half_slot[self.half_positions] = np.arange(len(self.half_positions))
        half_slot[self.neg_index[self.half_positions]] = np.arange(len(self.half_positions))
        self.half_slot = half_slot
        self.half_slot.setflags(write=False)
        self._pair_table: np.ndarray | None = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_indices(
        cls, indices: Iterable[Sequence[int]], aniso: AnisotropyMatrix, N: int | None = None
    ) -> "ModeSet":
        arr = np.asarray(list(indices), dtype=np.int64).reshape(-1, 3)
        if len(arr) == 0:
            raise ValueError("a ModeSet needs at least one mode")
        seen = set(map(tuple, arr.tolist()))
        if len(seen) != len(arr):
            raise ValueError("duplicate modes in ModeSet construction")
        if (0, 0, 0) in seen:
            raise InvalidModeError("the zero mode cannot be a lattice member")
        for a in seen:
            if (-a[0], -a[1], -a[2]) not in seen:
                raise ValueError(f"mode set not closed under negation: {a}")
        if N is None:
            N = int(np.max(np.abs(arr)))
        return cls(arr, aniso, N)

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def half_size(self) -> int:
        return len(self.half_positions)

    def __contains__(self, a) -> bool:
        return tuple(int(c) for c in a) in self._position

    def position_of(self, a) -> int:
        key = tuple(int(c) for c in a)
        try:
            return self._position[key]
        except KeyError:
            raise OutOfLatticeError(f"mode {key} is not in the lattice") from None

    def wavevector_of(self, a) -> np.ndarray:
        return self.wavevectors[self.position_of(a)]

    def pair_table(self) -> np.ndarray:
        """(M, M) table: position of mode a_i + a_j, or -1 if not a member.

        Cached; this is the triad-convolution index used by every structure
        assembly and field evaluation.
        """
        if self._pair_table is None:
            sums = self.indices[:, None, :] + self.indices[None, :, :]
            table = np.full(sums.shape[:2], -1, dtype=np.int64)
            flat = sums.reshape(-1, 3)
            for pos, a in enumerate(map(tuple, self.indices.tolist())):
                hit = np.all(flat == np.asarray(a), axis=1)
                table.reshape(-1)[hit] = pos
            table.setflags(write=False)
            self._pair_table = table
        return self._pair_table

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "N": self.N,
            "aniso": [self.aniso.nu_x, self.aniso.nu_y, self.aniso.nu_z],
            "modes": self.indices.tolist(),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ModeSet":
        payload = json.loads(text)
        aniso = AnisotropyMatrix(*payload["aniso"])
        return cls.from_indices(payload["modes"], aniso, N=payload["N"])


def build_lattice(trunc: TruncationSpec, aniso: AnisotropyMatrix | None = None) -> ModeSet:
    """All nonzero integer triples in the symmetric box, lexicographic order."""
    if aniso is None:
        aniso = AnisotropyMatrix.isotropic()
    N = trunc.N
    rng = range(-N, N + 1)
    indices = [(ax, ay, az) for ax in rng for ay in rng for az in rng if (ax, ay, az) != (0, 0, 0)]
    return ModeSet(np.array(indices, dtype=np.int64), aniso, N)
