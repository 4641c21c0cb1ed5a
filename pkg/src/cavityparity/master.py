"""Density-matrix evolution as an ensemble-average oracle.

rho_dot = -i (H_cond rho - rho H_cond^dag) + sum_x R_x rho R_x^dag
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError
from .operators import Model, OperatorMatrix, ResetOperator


def _validate_density(rho: np.ndarray):
    if np.linalg.norm(rho - rho.conj().T) > 1e-9 * max(np.linalg.norm(rho), 1.0):
        raise ValueError("density matrix must be Hermitian")
    tr = np.real(np.trace(rho))
    if abs(tr - 1.0) > 1e-9:
        raise ValueError("density matrix must have unit trace")


def _liouvillian(model: Model):
    h = model.h.mat
    hd = h.conj().T
    rs = [(r.mat, r.mat.conj().T) for r in model.resets]

    def rhs(rho):
        out = -1j * (h @ rho - rho @ hd)
        for r, rd in rs:
            out += r @ rho @ rd
        return out

    return rhs


def max_rate(model: Model) -> float:
    """Largest damping/jump rate in the model, for step-size bounds."""
    rates = [2 * np.max(-np.imag(np.linalg.eigvals(model.h.mat)))]
    for r in model.resets:
        rates.append(np.max(np.abs(r.mat)) ** 2)
    rates.append(np.max(np.abs(np.real(np.diag(model.h.mat)))))
    return max(float(x) for x in rates)


def evolve_master(rho: np.ndarray, model: Model, t: float,
                  dt: float = None) -> np.ndarray:
    """Fixed-step 4th-order integration of the master equation."""
    _validate_density(rho)
    limit = max_rate(model)
    if dt is None:
        dt = 0.1 / limit if limit > 0 else t
    elif limit > 0 and dt > 0.1 / limit:
        raise ValueError("dt exceeds 0.1 / (max rate in model)")
    if t == 0:
        return rho.copy()
    rhs = _liouvillian(model)
    n_steps = max(int(np.ceil(t / dt)), 1)
    dt = t / n_steps
    cur = rho.astype(complex)
    for _ in range(n_steps):
        k1 = rhs(cur)
        k2 = rhs(cur + 0.5 * dt * k1)
        k3 = rhs(cur + 0.5 * dt * k2)
        k4 = rhs(cur + dt * k3)
        cur = cur + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.real(np.trace(cur)) - np.real(np.trace(rho)))
    if drift > 1e-6:
        raise NumericalError(f"master-equation trace drift {drift:.2e}; "
                             "reduce the step size")
    return cur


def evolve_master_series(rho: np.ndarray, model: Model, times,
                         dt: float = None):
    """Density matrices at an increasing sequence of times."""
    times = np.asarray(times, dtype=float)
    out = []
    cur = rho
    prev = 0.0
    for t in times:
        cur = evolve_master(cur, model, t - prev, dt=dt)
        prev = t
        out.append(cur)
    return out


def mean_intensity(rho: np.ndarray, reset_cavity) -> float:
    """Ensemble-average cavity emission rate tr(R_C^dag R_C rho)."""
    mat = reset_cavity.mat if isinstance(
        reset_cavity, (ResetOperator, OperatorMatrix)) else reset_cavity
    return float(np.real(np.trace(mat.conj().T @ mat @ rho)))
