"""Full-model basis bookkeeping and operator construction.

Basis: |spectators; j k; n> with atomic levels j, k in {0, 1, 2} for the two
in-cavity atoms and cavity photon number n in [0, n_max].  Spectator qubits
are exact bystanders tensored on the left.  Flat index convention:

    flat = ((spectator bits as integer) * 9 + 3 j + k) * (n_max + 1) + n

with spectator bit 0 as the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .operators import (CHANNEL_ATOMIC_0, CHANNEL_ATOMIC_1, CHANNEL_CAVITY,
                        DIM_CAP, Model, OperatorMatrix, ResetOperator)
from .params import SystemParams


@dataclass(frozen=True)
class BasisIndex:
    """One basis state of the full model."""

    spectators: tuple
    j: int
    k: int
    n: int

    def __post_init__(self):
        if any(s not in (0, 1) for s in self.spectators):
            raise ValueError("spectator values must be 0 or 1")
        if self.j not in (0, 1, 2) or self.k not in (0, 1, 2):
            raise ValueError("atomic levels must be in {0, 1, 2}")
        if self.n < 0:
            raise ValueError("photon number must be >= 0")

    def flat(self, n_max: int) -> int:
        if self.n > n_max:
            raise ValueError("photon number exceeds n_max")
        bits = 0
        for s in self.spectators:
            bits = (bits << 1) | s
        return ((bits * 9) + 3 * self.j + self.k) * (n_max + 1) + self.n

    @classmethod
    def from_flat(cls, flat: int, n_max: int, spectators: int = 0) -> "BasisIndex":
        n = flat % (n_max + 1)
        rest = flat // (n_max + 1)
        jk = rest % 9
        bits = rest // 9
        spec = tuple((bits >> (spectators - 1 - i)) & 1 for i in range(spectators))
        return cls(spectators=spec, j=jk // 3, k=jk % 3, n=n)


def full_dim(n_max: int, spectators: int = 0) -> int:
    return (2 ** spectators) * 9 * (n_max + 1)


def _check_capacity(n_max: int, spectators: int):
    dim = full_dim(n_max, spectators)
    if dim > DIM_CAP:
        raise CapacityError(
            f"full-model dimension {dim} exceeds cap {DIM_CAP} "
            f"(n_max={n_max}, spectators={spectators})")
    return dim


def _atomic_op(op1: np.ndarray, op2: np.ndarray, n_max: int,
               spectators: int) -> np.ndarray:
    """Tensor single-atom operators with identity on spectators and cavity."""
    eye_spec = np.eye(2 ** spectators)
    eye_cav = np.eye(n_max + 1)
    return np.kron(eye_spec, np.kron(np.kron(op1, op2), eye_cav))


def _cavity_op(op: np.ndarray, spectators: int) -> np.ndarray:
    eye_spec = np.eye(2 ** spectators)
    eye_at = np.eye(9)
    return np.kron(eye_spec, np.kron(eye_at, op))


def annihilation(n_max: int) -> np.ndarray:
    b = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        b[n - 1, n] = np.sqrt(n)
    return b


def build_conditional_hamiltonian(params: SystemParams,
                                  spectators: int = 0) -> OperatorMatrix:
    """Non-Hermitian no-jump generator of the full model (hbar = 1).

    Laser terms (Omega/2)(|1><2| + h.c.) per atom, cavity terms
    g_i (|1><2| b^dag + h.c.), diagonal (Delta - i Gamma/2)|2><2| per atom,
    and -i (kappa/2) b^dag b; identity on spectators.
    """
    _check_capacity(params.n_max, spectators)
    n_max = params.n_max
    eye3 = np.eye(3, dtype=complex)
    s12 = np.zeros((3, 3), dtype=complex)
    s12[1, 2] = 1.0  # |1><2|
    p22 = np.zeros((3, 3), dtype=complex)
    p22[2, 2] = 1.0
    b = annihilation(n_max)
    num = b.conj().T @ b

    h = np.zeros((full_dim(n_max, spectators),) * 2, dtype=complex)
    for atom, g in ((0, params.g1), (1, params.g2)):
        def place(op_atom):
            ops = [eye3, eye3]
            ops[atom] = op_atom
            return _atomic_op(ops[0], ops[1], n_max, spectators)

        laser = 0.5 * params.omega * (s12 + s12.conj().T)
        h += place(laser)
        diag = (params.delta - 0.5j * params.gamma) * p22
        h += place(diag)
        # g (|1><2| b^dag + |2><1| b), coupling acts jointly on atom and cavity
        eye_spec = np.eye(2 ** spectators)
        ops_lower = [eye3, eye3]
        ops_lower[atom] = s12
        lower = np.kron(ops_lower[0], ops_lower[1])
        raise_ = lower.conj().T
        h += g * np.kron(eye_spec, (np.kron(lower, b.conj().T)
                                    + np.kron(raise_, b)))
    h += -0.5j * params.kappa * _cavity_op(num, spectators)
    return OperatorMatrix(h, "hamiltonian")


def build_reset_operators(params: SystemParams,
                          spectators: int = 0) -> tuple:
    """Jump operators of the full model.

    Atomic emission is resolved per atom (the emitted photon reveals which
    atom decayed), giving one operator sqrt(Gamma_j) |j><2| per atom and
    transition; the cavity channel is the collective sqrt(kappa) b.  The
    summed channel rates then balance the damping terms of the conditional
    Hamiltonian exactly (norm-flux identity).
    """
    _check_capacity(params.n_max, spectators)
    n_max = params.n_max
    eye3 = np.eye(3, dtype=complex)
    resets = []
    for j, gamma_j, channel in ((0, params.gamma0, CHANNEL_ATOMIC_0),
                                (1, params.gamma1, CHANNEL_ATOMIC_1)):
        dyad = np.zeros((3, 3), dtype=complex)
        dyad[j, 2] = 1.0  # |j><2|
        for atom in (0, 1):
            ops = [eye3, eye3]
            ops[atom] = np.sqrt(gamma_j) * dyad
            mat = _atomic_op(ops[0], ops[1], n_max, spectators)
            resets.append(ResetOperator(mat, channel,
                                        f"reset-{channel}-atom{atom + 1}"))
    b = annihilation(n_max)
    mat = np.sqrt(params.kappa) * _cavity_op(b, spectators)
    resets.append(ResetOperator(mat, CHANNEL_CAVITY, "reset-cavity"))
    return tuple(resets)


def build_full_model(params: SystemParams, spectators: int = 0) -> Model:
    return Model(h=build_conditional_hamiltonian(params, spectators),
                 resets=build_reset_operators(params, spectators))


def ground_state_vector(params: SystemParams, atomic_amps,
                        spectator_amps=None, spectators: int = 0) -> np.ndarray:
    """State with given two-qubit ground amplitudes, vacuum cavity field.

    atomic_amps: length-4 amplitudes over |00>, |01>, |10>, |11>.
    spectator_amps: optional amplitudes over the 2^spectators register
    (defaults to all weight on |0...0>).
    """
    n_max = params.n_max
    dim = full_dim(n_max, spectators)
    psi = np.zeros(dim, dtype=complex)
    if spectator_amps is None:
        spectator_amps = np.zeros(2 ** spectators)
        spectator_amps[0] = 1.0
    for bits, samp in enumerate(np.asarray(spectator_amps)):
        if samp == 0:
            continue
        spec = tuple((bits >> (spectators - 1 - i)) & 1
                     for i in range(spectators))
        for idx, (j, k) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            amp = atomic_amps[idx]
            if amp == 0:
                continue
            psi[BasisIndex(spec, j, k, 0).flat(n_max)] = samp * amp
    return psi


def ground_sector_amplitudes(psi: np.ndarray, params: SystemParams,
                             spectators: int = 0) -> np.ndarray:
    """Project onto atomic ground states with vacuum cavity field.

    Returns amplitudes over (spectators x 4) ordered as the effective model:
    flat = bits * 4 + 2*a1 + a2.
    """
    n_max = params.n_max
    out = np.zeros(4 * 2 ** spectators, dtype=complex)
    for bits in range(2 ** spectators):
        spec = tuple((bits >> (spectators - 1 - i)) & 1
                     for i in range(spectators))
        for idx, (j, k) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            out[bits * 4 + idx] = psi[BasisIndex(spec, j, k, 0).flat(n_max)]
    return out


def population_in_level2(psi: np.ndarray, params: SystemParams,
                         spectators: int = 0) -> float:
    """Total population with at least one atom in the excited level."""
    n_max = params.n_max
    total = 0.0
    for flat, amp in enumerate(psi):
        if amp == 0:
            continue
        idx = BasisIndex.from_flat(flat, n_max, spectators)
        if idx.j == 2 or idx.k == 2:
            total += abs(amp) ** 2
    return total


def population_at_nmax(psi: np.ndarray, params: SystemParams,
                       spectators: int = 0) -> float:
    """Population in the highest retained Fock level (truncation check)."""
    n_max = params.n_max
    total = 0.0
    for flat, amp in enumerate(psi):
        if amp == 0:
            continue
        if flat % (n_max + 1) == n_max:
            total += abs(amp) ** 2
    return total
