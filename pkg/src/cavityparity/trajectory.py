"""Quantum-jump unraveling of the conditional dynamics.

No-jump segments are propagated spectrally: the effective Hamiltonian is
diagonal (exact exponentials), the full Hamiltonian is diagonalised once
per model (dimension stays small at desk scale).  Jump times are located by
bisection on the monotonically decreasing conditional norm, which keeps
them independent of any integrator step size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .operators import CHANNEL_CAVITY, Model, OperatorMatrix

NORM_TOL = 1e-10  # relative tolerance of the jump-time bisection


@dataclass(frozen=True)
class DetectorModel:
    """Cavity photon detector with efficiency eta.

    Each cavity emission is independently marked detected with probability
    eta (thinning), which is statistically equivalent to splitting kappa
    into a detected eta*kappa and an undetected (1-eta)*kappa channel.
    """

    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


@dataclass(frozen=True)
class JumpEvent:
    time: float
    channel: str
    detected: bool


@dataclass
class TrajectoryRecord:
    """Events and final state of one stochastic run."""

    events: list
    final_state: np.ndarray
    seed: int
    wall_steps: int = 0
    samples: np.ndarray = None  # populations at requested sample times

    def detected_cavity_times(self):
        return [e.time for e in self.events
                if e.channel == CHANNEL_CAVITY and e.detected]

    def count_detected(self) -> int:
        return sum(1 for e in self.events
                   if e.channel == CHANNEL_CAVITY and e.detected)


def trajectory_rng(base_seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based per-trajectory stream; deterministic under merging."""
    return np.random.Generator(np.random.Philox(key=base_seed ^ index))


class Propagator:
    """exp(-i H t) applied through the spectral factors of H."""

    def __init__(self, h: OperatorMatrix):
        mat = h.mat
        off = mat - np.diag(np.diag(mat))
        self.dim = mat.shape[0]
        if not np.any(off):
            self.diagonal = True
            self.lam = np.diag(mat).copy()
            self.v = self.vinv = None
        else:
            self.diagonal = False
            lam, v = scipy.linalg.eig(mat)
            vinv = scipy.linalg.inv(v)
            resid = np.linalg.norm(v @ np.diag(lam) @ vinv - mat)
            scale = max(np.linalg.norm(mat), 1.0)
            if not np.isfinite(resid) or resid > 1e-8 * scale:
                raise NumericalError(
                    "eigendecomposition of the conditional Hamiltonian "
                    "did not reconstruct the matrix")
            self.lam, self.v, self.vinv = lam, v, vinv
        # decay rates 2*Im(lambda) must be <= 0 up to round-off
        if np.any(np.imag(self.lam) > 1e-10):
            raise NumericalError("conditional Hamiltonian amplifies norm")

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        return psi if self.diagonal else self.vinv @ psi

    def from_coefficients(self, coeff: np.ndarray, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.lam * t)
        if self.diagonal:
            return phases * coeff
        return self.v @ (phases * coeff)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self.from_coefficients(self.coefficients(psi), t)


def evolve_no_jump(state: np.ndarray, h: OperatorMatrix, t: float,
                   propagator: Propagator = None) -> np.ndarray:
    """Unnormalised no-jump evolution exp(-i H t) |state>.

    Falls back to a fixed-step 4th-order integrator if the spectral
    decomposition fails.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return state.copy()
    if propagator is None:
        try:
            propagator = Propagator(h)
        except NumericalError:
            warnings.warn("spectral propagation failed; falling back to "
                          "fixed-step RK4", stacklevel=2)
            return _rk4_no_jump(state, h.mat, t)
    return propagator.apply(state, t)


def _rk4_no_jump(psi: np.ndarray, h: np.ndarray, t: float,
                 steps_per_unit: float = None) -> np.ndarray:
    rate = max(np.max(np.abs(h)), 1e-300)
    dt = 0.05 / rate
    n_steps = int(np.ceil(t / dt))
    if n_steps > 10 ** 9:
        raise NumericalError("step-size underflow in RK4 fallback")
    dt = t / n_steps
    a = -1j * h
    cur = psi.astype(complex)
    for _ in range(n_steps):
        k1 = a @ cur
        k2 = a @ (cur + 0.5 * dt * k1)
        k3 = a @ (cur + 0.5 * dt * k2)
        k4 = a @ (cur + dt * k3)
        cur = cur + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return cur


def _find_jump_time(prop: Propagator, coeff: np.ndarray, t_max: float,
                    target: float):
    """Earliest t in (0, t_max] with ||psi(t)||^2 = target, or None.

    The conditional norm is non-increasing, so plain bisection applies.
    """
    def norm2(t):
        v = prop.from_coefficients(coeff, t)
        return float(np.real(np.vdot(v, v)))

    if norm2(t_max) > target:
        return None
    lo, hi = 0.0, t_max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = norm2(mid)
        if abs(val - target) <= NORM_TOL * target:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(t_max, 1.0):
            break
    return 0.5 * (lo + hi)


def _select_channel(model: Model, psi: np.ndarray, rng):
    rates = np.array([r.rate(psi) for r in model.resets])
    total = rates.sum()
    if total <= 0:
        return None
    u = rng.random() * total
    acc = 0.0
    for reset, w in zip(model.resets, rates):
        acc += w
        if u <= acc:
            return reset
    return model.resets[-1]


def run_trajectory(model: Model, initial: np.ndarray, t_end: float,
                   detector: DetectorModel, rng,
                   sample_times=None, propagator: Propagator = None,
                   stop_on_detection: bool = False,
                   seed: int = 0) -> TrajectoryRecord:
    """Standard quantum-jump unraveling from a normalised initial state.

    Draw r in (0,1); advance until the conditional norm reaches r; pick the
    emission channel proportionally to ||R_x psi||^2; apply the reset,
    renormalise and thin the cavity channel by the detector efficiency.
    With stop_on_detection the run ends at the first detected cavity click.
    """
    norm = np.linalg.norm(initial)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("initial state must be normalised")
    if propagator is None:
        propagator = Propagator(model.h)

    psi = initial.astype(complex) / norm
    t = 0.0
    events = []
    steps = 0
    samples = None
    sample_idx = 0
    if sample_times is not None:
        sample_times = np.asarray(sample_times, dtype=float)
        samples = np.zeros((len(sample_times), model.dim), dtype=complex)

    def record_samples_up_to(coeff, t_seg_start, t_limit):
        nonlocal sample_idx
        while (sample_idx < len(sample_times)
               and sample_times[sample_idx] <= t_limit + 1e-15):
            tau = sample_times[sample_idx] - t_seg_start
            v = propagator.from_coefficients(coeff, max(tau, 0.0))
            nv = np.linalg.norm(v)
            samples[sample_idx] = v / nv if nv > 0 else v
            sample_idx += 1

    while t < t_end:
        r = rng.random()
        while r <= 0.0:
            r = rng.random()
        coeff = propagator.coefficients(psi)
        tau = _find_jump_time(propagator, coeff, t_end - t, r)
        steps += 1
        if tau is None:
            if sample_times is not None:
                record_samples_up_to(coeff, t, t_end)
            psi = propagator.from_coefficients(coeff, t_end - t)
            t = t_end
            break
        if sample_times is not None:
            record_samples_up_to(coeff, t, t + tau)
        psi_pre = propagator.from_coefficients(coeff, tau)
        reset = _select_channel(model, psi_pre, rng)
        t = t + tau
        if reset is None:
            # zero total jump rate at the norm target (numerical): advance
            psi = psi_pre
            continue
        psi = reset.mat @ psi_pre
        psi = psi / np.linalg.norm(psi)
        detected = False
        if reset.channel == CHANNEL_CAVITY:
            detected = bool(rng.random() < detector.eta)
        events.append(JumpEvent(time=t, channel=reset.channel,
                                detected=detected))
        if stop_on_detection and detected:
            break

    if sample_times is not None and sample_idx < len(sample_times):
        # trajectory ended early (stop_on_detection); freeze remaining samples
        coeff = propagator.coefficients(psi)
        while sample_idx < len(sample_times):
            samples[sample_idx] = psi
            sample_idx += 1

    nv = np.linalg.norm(psi)
    if nv > 0:
        psi = psi / nv
    return TrajectoryRecord(events=events, final_state=psi, seed=seed,
                            wall_steps=steps, samples=samples)


def run_until_detection(model: Model, initial: np.ndarray, t_max: float,
                        detector: DetectorModel, rng,
                        propagator: Propagator = None):
    """Drive until the first detected cavity click or t_max.

    Returns (clicked, click_time, final_state, events).
    """
    rec = run_trajectory(model, initial, t_max, detector, rng,
                         propagator=propagator, stop_on_detection=True)
    times = rec.detected_cavity_times()
    clicked = len(times) > 0
    return clicked, (times[0] if clicked else None), rec.final_state, rec.events


def run_ensemble(model: Model, initial: np.ndarray, t_end: float,
                 detector: DetectorModel, base_seed: int, n_runs: int,
                 sample_times=None):
    """Independent seeded trajectories; order-independent, reproducible."""
    propagator = Propagator(model.h)
    records = []
    for i in range(n_runs):
        rng = trajectory_rng(base_seed, i)
        records.append(run_trajectory(model, initial, t_end, detector, rng,
                                      sample_times=sample_times,
                                      propagator=propagator,
                                      seed=base_seed ^ i))
    return records
