"""Adiabatically eliminated ground-state model.

The register is the two in-cavity atoms, optionally tensored with spectator
qubits on the left.  Flat index: bits * 4 + 2*a1 + a2 where a1, a2 are the
qubit values of atoms 1 and 2 and bits is the spectator bit-string read as
an integer (first spectator most significant).
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError
from .operators import (CHANNEL_ATOMIC_0, CHANNEL_ATOMIC_1, CHANNEL_CAVITY,
                        DIM_CAP, Model, OperatorMatrix, ResetOperator)
from .params import EffectiveRates

# Two-qubit ground basis order: |00>, |01>, |10>, |11>
IDX_00, IDX_01, IDX_10, IDX_11 = 0, 1, 2, 3

SUBSPACE_D = "D"
SUBSPACE_L = "L"
SUBSPACE_H = "H"


def effective_dim(spectators: int = 0) -> int:
    return 4 * 2 ** spectators


def _check_capacity(spectators: int) -> int:
    dim = effective_dim(spectators)
    if dim > DIM_CAP:
        raise CapacityError(
            f"effective-model dimension {dim} exceeds cap {DIM_CAP}")
    return dim


def _lift(op4: np.ndarray, spectators: int) -> np.ndarray:
    if spectators == 0:
        return op4
    return np.kron(np.eye(2 ** spectators), op4)


def build_effective_hamiltonian(rates: EffectiveRates,
                                spectators: int = 0) -> OperatorMatrix:
    """Diagonal non-Hermitian generator on the atomic ground states.

    |00> is decoupled; |01> and |10> pick up the effective level shift and
    the damping of their own atom's cavity channel; |11> decays with the
    collectively enhanced cavity rate.  For equal couplings this reduces to
    the symmetric form with atomic decay 2*Gamma_eff and cavity decay
    4*kappa_eff out of |11>.
    """
    _check_capacity(spectators)
    k1, k2 = rates.kappa_eff_1, rates.kappa_eff_2
    d, g = rates.delta_eff, rates.gamma_eff
    diag = np.zeros(4, dtype=complex)
    diag[IDX_01] = -(d + 0.5j * g + 0.5j * k2)
    diag[IDX_10] = -(d + 0.5j * g + 0.5j * k1)
    diag[IDX_11] = -(2 * d + 1j * g
                     + 0.5j * (np.sqrt(k1) + np.sqrt(k2)) ** 2)
    return OperatorMatrix(_lift(np.diag(diag), spectators), "hamiltonian")


def build_effective_resets(rates: EffectiveRates,
                           spectators: int = 0) -> tuple:
    """Jump operators of the effective model.

    Atomic channels are resolved per atom: the spontaneously emitted photon
    leaves the cavity mode sideways and identifies its emitter, so an
    atomic-1 emission collapses the |01>/|10> coherence.  The cavity channel
    is collective: both atoms feed the same resonator mode and the emitted
    amplitudes add, giving the enhanced rate (sqrt(k1)+sqrt(k2))^2 out of
    |11>.  Channel rates balance the Hamiltonian damping exactly.
    """
    _check_capacity(spectators)
    g0 = np.sqrt(rates.gamma_eff_0)
    g1 = np.sqrt(rates.gamma_eff_1)
    k1 = np.sqrt(rates.kappa_eff_1)
    k2 = np.sqrt(rates.kappa_eff_2)

    resets = []
    # atom 1 decays 2->0: |1x> -> |0x>
    m = np.zeros((4, 4), dtype=complex)
    m[IDX_00, IDX_10] = g0
    m[IDX_01, IDX_11] = g0
    resets.append(ResetOperator(_lift(m, spectators), CHANNEL_ATOMIC_0,
                                "reset-atomic-0-atom1"))
    # atom 2 decays 2->0: |x1> -> |x0>
    m = np.zeros((4, 4), dtype=complex)
    m[IDX_00, IDX_01] = g0
    m[IDX_10, IDX_11] = g0
    resets.append(ResetOperator(_lift(m, spectators), CHANNEL_ATOMIC_0,
                                "reset-atomic-0-atom2"))
    # atom 1 decays 2->1: acts when atom 1 is in |1>
    m = np.zeros((4, 4), dtype=complex)
    m[IDX_10, IDX_10] = g1
    m[IDX_11, IDX_11] = g1
    resets.append(ResetOperator(_lift(m, spectators), CHANNEL_ATOMIC_1,
                                "reset-atomic-1-atom1"))
    # atom 2 decays 2->1
    m = np.zeros((4, 4), dtype=complex)
    m[IDX_01, IDX_01] = g1
    m[IDX_11, IDX_11] = g1
    resets.append(ResetOperator(_lift(m, spectators), CHANNEL_ATOMIC_1,
                                "reset-atomic-1-atom2"))
    # collective cavity channel; amplitudes add coherently, so unequal
    # couplings enter through sqrt(kappa_eff,i) per atom
    m = np.zeros((4, 4), dtype=complex)
    m[IDX_10, IDX_10] = k1
    m[IDX_01, IDX_01] = k2
    m[IDX_11, IDX_11] = k1 + k2
    resets.append(ResetOperator(_lift(m, spectators), CHANNEL_CAVITY,
                                "reset-cavity"))
    return tuple(resets)


def build_effective_model(rates: EffectiveRates, spectators: int = 0) -> Model:
    return Model(h=build_effective_hamiltonian(rates, spectators),
                 resets=build_effective_resets(rates, spectators))


def subspace_projectors(spectators: int = 0):
    """Projectors onto the D, L, H sectors of the in-cavity atom pair."""
    pd = np.zeros((4, 4))
    pd[IDX_00, IDX_00] = 1.0
    pl = np.zeros((4, 4))
    pl[IDX_01, IDX_01] = 1.0
    pl[IDX_10, IDX_10] = 1.0
    ph = np.zeros((4, 4))
    ph[IDX_11, IDX_11] = 1.0
    return {SUBSPACE_D: _lift(pd, spectators),
            SUBSPACE_L: _lift(pl, spectators),
            SUBSPACE_H: _lift(ph, spectators)}


def subspace_populations(psi: np.ndarray, spectators: int = 0):
    """Populations <P_D>, <P_L>, <P_H> of a (normalised) state."""
    v = psi.reshape(2 ** spectators, 4)
    p = np.sum(np.abs(v) ** 2, axis=0)
    return {SUBSPACE_D: float(p[IDX_00]),
            SUBSPACE_L: float(p[IDX_01] + p[IDX_10]),
            SUBSPACE_H: float(p[IDX_11])}


def classify_subspace(psi: np.ndarray, spectators: int = 0,
                      threshold: float = 1.0 - 1e-9):
    """Label a state lying (numerically) in a single D/L/H sector, else None."""
    pops = subspace_populations(psi, spectators)
    for label, p in pops.items():
        if p >= threshold:
            return label
    return None
