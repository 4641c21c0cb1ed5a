"""Parity-measurement protocols and fidelity evaluation.

Two protocols drive the in-cavity atom pair and read the cavity
fluorescence: the simple variant counts detected clicks over a fixed
window and classifies the D/L/H outcome by maximum likelihood; the
double-herald variant drives until a first click, swaps the qubit states,
and drives again, declaring success only on a second click.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .effective import (IDX_00, IDX_01, IDX_10, IDX_11, SUBSPACE_D,
                        SUBSPACE_H, SUBSPACE_L, subspace_populations)
from .operators import Model
from .trajectory import (DetectorModel, Propagator, run_trajectory,
                         run_until_detection, trajectory_rng)

LABEL_SUCCESS = "success"
LABEL_FAILURE = "failure"


@dataclass(frozen=True)
class ProtocolConfig:
    """variant: 'simple' (count clicks over t_window) or 'double-herald'."""

    variant: str = "double-herald"
    t_window: float = None  # simple variant: counting window
    t_max: float = None  # double-herald: per-round driving cap
    kappa_eff: float = None  # expected L-subspace cavity rate, for classification
    eta: float = 1.0

    def __post_init__(self):
        if self.variant not in ("simple", "double-herald"):
            raise ValueError(f"unknown protocol variant {self.variant!r}")
        if self.variant == "simple":
            if self.t_window is None or self.t_window <= 0:
                raise ValueError("simple variant needs t_window > 0")
            if self.kappa_eff is None or self.kappa_eff <= 0:
                raise ValueError("simple variant needs kappa_eff > 0")
        else:
            if self.t_max is None or self.t_max <= 0:
                raise ValueError("double-herald variant needs t_max > 0")


@dataclass
class ProtocolOutcome:
    label: str  # D | L | H | success | failure
    final_state: np.ndarray
    fidelity: float = None
    t1: float = None
    t2: float = None
    clicks: int = None


def parity_targets(kind: str) -> np.ndarray:
    """Reference entangled states in the standard qubit-register order."""
    if kind == "bell":
        v = np.zeros(4, dtype=complex)
        v[IDX_01] = v[IDX_10] = 1 / math.sqrt(2)
        return v
    if kind == "ghz4":
        v = np.zeros(16, dtype=complex)
        v[0b0101] = v[0b1010] = 1 / math.sqrt(2)
        return v
    raise ValueError(f"unknown target kind {kind!r}")


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """Pure-state overlap fidelity |<target|state>|^2."""
    for name, v in (("state", state), ("target", target)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError(f"{name} must be normalised")
    return float(abs(np.vdot(target, state)) ** 2)


def pi_pulse_effective(state: np.ndarray, spectators: int = 0) -> np.ndarray:
    """Ideal swap of |0> and |1> on both in-cavity atoms."""
    v = state.reshape(2 ** spectators, 4).copy()
    v[:, [IDX_00, IDX_01, IDX_10, IDX_11]] = v[:, [IDX_11, IDX_10,
                                                   IDX_01, IDX_00]]
    return v.reshape(-1)


def pi_pulse_full(state: np.ndarray, params, spectators: int = 0,
                  excited_tol: float = 1e-3) -> np.ndarray:
    """Swap |0> and |1> of both in-cavity atoms in the full-model basis.

    The pulse addresses the qubit levels only; amplitude in the excited
    level |2> is left untouched and triggers a warning when non-negligible.
    """
    from .fullmodel import population_in_level2
    exc = population_in_level2(state, params, spectators)
    if exc > excited_tol:
        warnings.warn(
            f"pi pulse applied with excited population {exc:.2e}; the pulse "
            "acts on the ground sector only", stacklevel=2)
    n_cav = params.n_max + 1
    swap = [1, 0, 2]  # level map 0<->1, 2 fixed
    v = state.reshape(2 ** spectators, 3, 3, n_cav)
    out = np.zeros_like(v)
    for j in range(3):
        for k in range(3):
            out[:, swap[j], swap[k], :] = v[:, j, k, :]
    return out.reshape(-1)


def pi_pulse(state: np.ndarray, model_kind: str = "effective", params=None,
             spectators: int = 0) -> np.ndarray:
    if model_kind == "effective":
        return pi_pulse_effective(state, spectators)
    return pi_pulse_full(state, params, spectators)


def classify_clicks(n: int, mean_l: float) -> str:
    """Maximum-likelihood D/L/H label from a detected-click count.

    Poisson hypotheses with means {0+, mean_l, 4*mean_l}; zero counts are
    always D, ties break toward the lower subspace.
    """
    if n == 0:
        return SUBSPACE_D
    # log-likelihood ratio L vs H: boundary at 3*mean_l/ln(4)
    boundary = 3.0 * mean_l / math.log(4.0)
    return SUBSPACE_L if n <= boundary else SUBSPACE_H


@dataclass(frozen=True)
class ProtocolContext:
    """Everything a protocol run needs besides the per-run RNG."""

    model: Model
    cfg: ProtocolConfig
    detector: DetectorModel
    spectators: int = 0
    model_kind: str = "effective"  # effective | full
    params: object = None  # SystemParams, full model only
    target: np.ndarray = None
    propagator: Propagator = field(default=None, compare=False)

    def with_propagator(self) -> "ProtocolContext":
        if self.propagator is not None:
            return self
        return ProtocolContext(model=self.model, cfg=self.cfg,
                               detector=self.detector,
                               spectators=self.spectators,
                               model_kind=self.model_kind,
                               params=self.params, target=self.target,
                               propagator=Propagator(self.model.h))


def _state_fidelity(ctx: ProtocolContext, psi: np.ndarray) -> float:
    """Fidelity of a protocol end state against the context target.

    Effective-model states are compared by direct overlap.  Full-model
    states are reduced over the cavity mode first (excited atomic levels
    contribute nothing); the reduction uses the register order
    (spectators, atom1, atom2).
    """
    if ctx.target is None:
        return None
    if ctx.model_kind == "effective":
        return fidelity(psi, ctx.target)
    from .fullmodel import ground_sector_amplitudes
    n_cav = ctx.params.n_max + 1
    v = psi.reshape(2 ** ctx.spectators, 3, 3, n_cav)
    # qubit-register components (levels 0/1 only), one vector per Fock level
    f = 0.0
    for n in range(n_cav):
        comp = v[:, :2, :2, n].reshape(-1)
        f += abs(np.vdot(ctx.target, comp)) ** 2
    return float(f)


def run_simple_protocol(ctx: ProtocolContext, initial: np.ndarray,
                        rng) -> ProtocolOutcome:
    """Count detected clicks over t_window and classify the parity outcome."""
    cfg = ctx.cfg
    if cfg.variant != "simple":
        raise ValueError("config variant must be 'simple'")
    ctx = ctx.with_propagator()
    rec = run_trajectory(ctx.model, initial, cfg.t_window, ctx.detector, rng,
                         propagator=ctx.propagator)
    n = rec.count_detected()
    mean_l = ctx.detector.eta * cfg.kappa_eff * cfg.t_window
    label = classify_clicks(n, mean_l)
    fid = None
    if label == SUBSPACE_L:
        fid = _state_fidelity(ctx, rec.final_state)
    return ProtocolOutcome(label=label, final_state=rec.final_state,
                           fidelity=fid, clicks=n)


def _apply_pulse(ctx: ProtocolContext, psi: np.ndarray) -> np.ndarray:
    if ctx.model_kind == "effective":
        return pi_pulse_effective(psi, ctx.spectators)
    return pi_pulse_full(psi, ctx.params, ctx.spectators)


def run_double_herald(ctx: ProtocolContext, initial: np.ndarray,
                      rng) -> ProtocolOutcome:
    """Drive to a first click, swap the qubits, drive to a second click."""
    cfg = ctx.cfg
    if cfg.variant != "double-herald":
        raise ValueError("config variant must be 'double-herald'")
    ctx = ctx.with_propagator()
    clicked1, t1, psi, _ = run_until_detection(
        ctx.model, initial, cfg.t_max, ctx.detector, rng,
        propagator=ctx.propagator)
    if not clicked1:
        return ProtocolOutcome(label=LABEL_FAILURE, final_state=psi, t1=None)
    psi = _apply_pulse(ctx, psi)
    clicked2, t2, psi, _ = run_until_detection(
        ctx.model, psi, cfg.t_max, ctx.detector, rng,
        propagator=ctx.propagator)
    if not clicked2:
        return ProtocolOutcome(label=LABEL_FAILURE, final_state=psi, t1=t1)
    # undo the mid-protocol bit flip so the heralded state is reported in
    # the original frame (the parity target is invariant only for the
    # in-cavity pair alone, not with spectators)
    psi = _apply_pulse(ctx, psi)
    fid = _state_fidelity(ctx, psi)
    return ProtocolOutcome(label=LABEL_SUCCESS, final_state=psi,
                           fidelity=fid, t1=t1, t2=t2)


@dataclass
class EnsembleStats:
    n_runs: int
    n_success: int
    success_rate: float
    success_rate_err: float
    mean_fidelity: float
    mean_fidelity_err: float
    outcomes: list = field(repr=False, default=None)


def run_protocol_ensemble(ctx: ProtocolContext, initial: np.ndarray,
                          base_seed: int, n_runs: int,
                          keep_outcomes: bool = False) -> EnsembleStats:
    """Seeded independent protocol runs with success/fidelity statistics.

    For the simple variant an L classification counts as success.
    """
    ctx = ctx.with_propagator()
    runner = (run_simple_protocol if ctx.cfg.variant == "simple"
              else run_double_herald)
    fids = []
    n_success = 0
    outcomes = [] if keep_outcomes else None
    for i in range(n_runs):
        rng = trajectory_rng(base_seed, i)
        out = runner(ctx, initial, rng)
        good = (out.label == LABEL_SUCCESS if ctx.cfg.variant != "simple"
                else out.label == SUBSPACE_L)
        if good:
            n_success += 1
            if out.fidelity is not None:
                fids.append(out.fidelity)
        if keep_outcomes:
            outcomes.append(out)
    p = n_success / n_runs
    p_err = math.sqrt(max(p * (1 - p), 1e-300) / n_runs)
    if fids:
        mean_f = float(np.mean(fids))
        f_err = float(np.std(fids) / math.sqrt(len(fids)))
    else:
        mean_f = float("nan")
        f_err = float("nan")
    return EnsembleStats(n_runs=n_runs, n_success=n_success, success_rate=p,
                         success_rate_err=p_err, mean_fidelity=mean_f,
                         mean_fidelity_err=f_err, outcomes=outcomes)


def bell_preparation_effective(spectators: int = 0) -> np.ndarray:
    """Product state (|0>+|1>)(|0>+|1>)/2 on the in-cavity pair."""
    v = np.zeros(4 * 2 ** spectators, dtype=complex)
    v[:4] = 0.5
    return v


def ghz_preparation_effective() -> np.ndarray:
    """Two Bell pairs with qubits 2 and 3 in the cavity.

    Register order is (spectators q1, q4; atoms q2, q3); the state is
    (|01>+|10>)_{12} (|01>+|10>)_{34} / 2 re-ordered accordingly.
    """
    v = np.zeros(16, dtype=complex)
    # (q1,q4,q2,q3) amplitudes of |0101>,|0110>,|1001>,|1010> over (q1..q4)
    for q in (0b0101, 0b0110, 0b1001, 0b1010):
        q1 = (q >> 3) & 1
        q2 = (q >> 2) & 1
        q3 = (q >> 1) & 1
        q4 = q & 1
        v[(q1 << 3) | (q4 << 2) | (q2 << 1) | q3] = 0.5
    return v


def ghz_target_effective() -> np.ndarray:
    """GHZ_4 target re-ordered to the (q1, q4, q2, q3) register."""
    v = np.zeros(16, dtype=complex)
    for q in (0b0101, 0b1010):
        q1 = (q >> 3) & 1
        q2 = (q >> 2) & 1
        q3 = (q >> 1) & 1
        q4 = q & 1
        v[(q1 << 3) | (q4 << 2) | (q2 << 1) | q3] = 1 / math.sqrt(2)
    return v
