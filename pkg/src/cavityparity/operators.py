"""Operator containers shared by the full and effective models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Hard cap on dense operator dimension; anything larger would be a mistake
# at desk scale (dim^2 complex entries).
DIM_CAP = 4096

CHANNEL_ATOMIC_0 = "atomic-0"
CHANNEL_ATOMIC_1 = "atomic-1"
CHANNEL_CAVITY = "cavity"


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix with a descriptive label."""

    mat: np.ndarray
    label: str

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class ResetOperator:
    """Jump operator for one emission channel.

    channel is the observable photon type (atomic-0, atomic-1, cavity);
    ||R psi||^2 is the emission probability density out of state psi.
    """

    mat: np.ndarray
    channel: str
    label: str

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def rate(self, psi: np.ndarray) -> float:
        v = self.mat @ psi
        return float(np.real(np.vdot(v, v)))


@dataclass(frozen=True)
class Model:
    """A conditional Hamiltonian together with its jump channels."""

    h: OperatorMatrix
    resets: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.h.dim)
        for r in self.resets:
            if r.mat.shape != self.h.mat.shape:
                raise ValueError("reset operator dimension mismatch")

    def total_jump_rate(self, psi: np.ndarray) -> float:
        return sum(r.rate(psi) for r in self.resets)
