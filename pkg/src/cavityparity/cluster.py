"""Exact small-register cluster states, fusion, and growth accounting.

States are explicit vectors over up to 16 qubits.  Qubit labels are
1-based; qubit 1 occupies the most significant bit of the basis index.
Entanglement structure is tracked as directed links (control, target):
building a state applies, for every link, the phase sigma_z^(target)
to each basis component with the control qubit in |1>, starting from the
uniform product state.  A linear chain carries links (i, i-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CapacityError

MAX_QUBITS = 16

OUTCOME_D = "D"
OUTCOME_L = "L"
OUTCOME_H = "H"

# sigma_z = |1><1| - |0><0|: eigenvalue -1 on |0>, +1 on |1>
_Z = np.diag([-1.0, 1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class ClusterState:
    """Explicit state vector with its entanglement-link bookkeeping."""

    n_qubits: int
    amps: np.ndarray
    links: tuple = ()

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(
                f"{self.n_qubits} qubits exceeds cap {MAX_QUBITS}")
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude vector has wrong length")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)
        for c, t in self.links:
            if not (1 <= c <= self.n_qubits and 1 <= t <= self.n_qubits):
                raise ValueError(f"link ({c},{t}) out of range")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def bit(self, index: int, qubit: int) -> int:
        return (index >> (self.n_qubits - qubit)) & 1


def _bit_mask(n: int, qubit: int) -> int:
    return 1 << (n - qubit)


def graph_state(n_qubits: int, links) -> ClusterState:
    """Product |+>^n with the link phases applied; order-independent."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds cap {MAX_QUBITS}")
    dim = 2 ** n_qubits
    amps = np.full(dim, 2.0 ** (-n_qubits / 2), dtype=complex)
    idx = np.arange(dim)
    for c, t in links:
        control_on = (idx >> (n_qubits - c)) & 1 == 1
        target_off = (idx >> (n_qubits - t)) & 1 == 0
        amps[control_on & target_off] *= -1.0
    return ClusterState(n_qubits=n_qubits, amps=amps,
                        links=tuple((c, t) for c, t in links))


def linear_cluster(n: int) -> ClusterState:
    """Canonical n-qubit chain: product of (|0>_i + sigma_z^(i-1) |1>_i)."""
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"chain length {n} outside [1, {MAX_QUBITS}]")
    return graph_state(n, [(i, i - 1) for i in range(2, n + 1)])


def tensor(a: ClusterState, b: ClusterState) -> ClusterState:
    """Combined register with a's qubits first; b's labels shift by a.n."""
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds cap {MAX_QUBITS}")
    links = list(a.links) + [(c + a.n_qubits, t + a.n_qubits)
                             for c, t in b.links]
    return ClusterState(n_qubits=n, amps=np.kron(a.amps, b.amps),
                        links=tuple(links))


def apply_single(state: ClusterState, qubit: int, op: np.ndarray,
                 links=None) -> ClusterState:
    v = state.amps.reshape([2] * state.n_qubits)
    v = np.moveaxis(v, qubit - 1, 0)
    v = np.tensordot(op, v, axes=([1], [0]))
    v = np.moveaxis(v, 0, qubit - 1)
    return ClusterState(n_qubits=state.n_qubits, amps=v.reshape(-1),
                        links=state.links if links is None else tuple(links))


def apply_z(state: ClusterState, qubit: int) -> ClusterState:
    return apply_single(state, qubit, _Z)


def apply_hadamard(state: ClusterState, qubit: int) -> ClusterState:
    return apply_single(state, qubit, _H)


def overlap(a: ClusterState, b: ClusterState) -> float:
    """|<a|b>| of two normalised registers."""
    return float(abs(np.vdot(a.amps, b.amps)))


def parity_project(state: ClusterState, q1: int, q2: int,
                   outcome: str):
    """Apply the two-qubit parity projector for the given D/L/H outcome.

    Returns (renormalised state, outcome probability); raises on an
    impossible (zero-probability) branch.
    """
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    keep = {OUTCOME_D: {(0, 0)}, OUTCOME_L: {(0, 1), (1, 0)},
            OUTCOME_H: {(1, 1)}}[outcome]
    amps = state.amps.copy()
    for i in range(amps.size):
        if (state.bit(i, q1), state.bit(i, q2)) not in keep:
            amps[i] = 0.0
    prob = float(np.linalg.norm(amps) ** 2)
    if prob < 1e-15:
        raise ValueError(f"outcome {outcome} has zero probability")
    return ClusterState(state.n_qubits, amps / math.sqrt(prob),
                        state.links), prob


def outcome_probabilities(state: ClusterState, q1: int, q2: int):
    probs = {}
    v = state.amps
    for i in range(v.size):
        b = (state.bit(i, q1), state.bit(i, q2))
        key = OUTCOME_D if b == (0, 0) else OUTCOME_H if b == (1, 1) \
            else OUTCOME_L
        probs[key] = probs.get(key, 0.0) + abs(v[i]) ** 2
    for key in (OUTCOME_D, OUTCOME_L, OUTCOME_H):
        probs.setdefault(key, 0.0)
    return probs


def measure_qubit(state: ClusterState, qubit: int, rng):
    """Projective Z measurement; returns (result, collapsed state)."""
    v = state.amps
    mask_on = np.array([state.bit(i, qubit) for i in range(v.size)], bool)
    p1 = float(np.sum(np.abs(v[mask_on]) ** 2))
    result = 1 if rng.random() < p1 else 0
    amps = v.copy()
    amps[mask_on != (result == 1)] = 0.0
    amps = amps / np.linalg.norm(amps)
    return result, ClusterState(state.n_qubits, amps, state.links)


def delete_qubit(state: ClusterState, qubit: int) -> ClusterState:
    """Drop a qubit that is in a product state; relabel the ones above it."""
    v = state.amps.reshape([2] * state.n_qubits)
    v = np.moveaxis(v, qubit - 1, 0).reshape(2, -1)
    # rank-1 factorisation: qubit factor times remainder
    _, s, vh = np.linalg.svd(v, full_matrices=False)
    if len(s) > 1 and s[1] > 1e-9:
        raise ValueError("qubit to delete is still entangled")
    amps = vh[0] / np.linalg.norm(vh[0])
    links = tuple((c - (c > qubit), t - (t > qubit))
                  for c, t in state.links if qubit not in (c, t))
    return ClusterState(state.n_qubits - 1, amps, links)


def _extract_range(state: ClusterState, lo: int, hi: int) -> ClusterState:
    """Sub-register for qubits lo..hi, which must factor off as a block."""
    n = state.n_qubits
    width = hi - lo + 1
    v = state.amps.reshape(2 ** (lo - 1), 2 ** width, 2 ** (n - hi))
    m = np.transpose(v, (1, 0, 2)).reshape(2 ** width, -1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if len(s) > 1 and s[1] > 1e-9:
        raise ValueError("requested block is entangled with the rest")
    amps = u[:, 0] / np.linalg.norm(u[:, 0])
    links = tuple((c - lo + 1, t - lo + 1) for c, t in state.links
                  if lo <= c <= hi and lo <= t <= hi)
    return ClusterState(width, amps, links)


@dataclass
class FusionResult:
    outcome: str  # D | L | H
    states: list  # resulting ClusterState registers
    probability: float
    measurement: int = None  # removed-qubit readout on success
    corrections: tuple = ()  # qubits that received a sigma_z fix-up
    decoupled: tuple = ()  # (qubit label, projected value) pairs on failure
    redundant: int = None  # retained double-encoded qubit (Nielsen variant)


def _fusion_corrections_failure(links, k, l, value_k, value_l):
    fixes = []
    for q, v in ((k, value_k), (l, value_l)):
        if v == 1:
            fixes.extend(t for c, t in links if c == q and t not in (k, l))
        else:
            fixes.extend(c for c, t in links if t == q and c not in (k, l))
    return fixes


def fuse_at(joint: ClusterState, k: int, l: int, rng,
            remove: str = "l", keep_redundant: bool = False) -> FusionResult:
    """Parity-check fusion of two sub-clusters inside one register.

    k and l are the atoms placed in the cavity.  An odd-parity (L) outcome
    links the clusters through a double-encoded qubit; the superfluous
    atom (l by default) is then removed with a Hadamard, a readout and
    conditional sigma_z corrections, unless keep_redundant is set.  A D or
    H outcome projects both atoms onto known states and decouples them.
    """
    probs = outcome_probabilities(joint, k, l)
    u = rng.random()
    if u < probs[OUTCOME_D]:
        outcome = OUTCOME_D
    elif u < probs[OUTCOME_D] + probs[OUTCOME_L]:
        outcome = OUTCOME_L
    else:
        outcome = OUTCOME_H
    state, prob = parity_project(joint, k, l, outcome)

    if outcome != OUTCOME_L:
        value = 0 if outcome == OUTCOME_D else 1
        fixes = _fusion_corrections_failure(state.links, k, l, value, value)
        for q in fixes:
            state = apply_z(state, q)
        # split into the surviving sub-registers, dropping k and l
        survivors = state
        labels = sorted((k, l), reverse=True)
        for q in labels:
            survivors = delete_qubit(survivors, q)
        pieces = _split_components(survivors)
        return FusionResult(outcome=outcome, states=pieces,
                            probability=prob,
                            corrections=tuple(fixes),
                            decoupled=((k, value), (l, value)))

    if remove not in ("k", "l"):
        raise ValueError("remove must be 'k' or 'l'")
    gone, kept = (l, k) if remove == "l" else (k, l)

    # relink: the kept atom inherits the removed atom's neighbours
    new_links = []
    for c, t in state.links:
        if c == gone:
            c = kept
        if t == gone:
            t = kept
        if c != t:
            new_links.append((c, t))
    state = ClusterState(state.n_qubits, state.amps, tuple(new_links))

    if keep_redundant:
        return FusionResult(outcome=OUTCOME_L, states=[state],
                            probability=prob, redundant=gone)

    state = apply_hadamard(state, gone)
    result, state = measure_qubit(state, gone, rng)
    fixes = []
    # sigma_z on every original neighbour of the removed atom ...
    for c, t in joint.links:
        if c == gone and t != kept:
            fixes.append(t)
        if t == gone and c != kept:
            fixes.append(c)
    # ... plus the partner when the readout gives |1>
    if result == 1:
        fixes.append(kept)
    for q in fixes:
        state = apply_z(state, q)
    state = delete_qubit(state, gone)
    return FusionResult(outcome=OUTCOME_L, states=[state], probability=prob,
                        measurement=result, corrections=tuple(fixes))


def _split_components(state: ClusterState):
    """Split a register into link-connected components (product factors)."""
    n = state.n_qubits
    if n == 0:
        return []
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c, t in state.links:
        parent[find(c)] = find(t)
    groups = {}
    for q in range(1, n + 1):
        groups.setdefault(find(q), []).append(q)
    if len(groups) == 1:
        return [state]
    pieces = []
    for qs in sorted(groups.values()):
        lo, hi = min(qs), max(qs)
        if qs != list(range(lo, hi + 1)):
            # non-contiguous component: keep the full register instead
            return [state]
        pieces.append(_extract_range(state, lo, hi))
    return pieces


def fuse_linear(a: ClusterState, b: ClusterState, rng,
                keep_redundant: bool = False) -> FusionResult:
    """End-to-end fusion of two chains into one chain of size n_a + n_b - 1.

    Chain b occupies qubits 1..m, chain a sits above it; the parity check
    acts on b's last and a's first atom and the b-side atom is removed on
    success.  Results are relabelled to close the gap.
    """
    m = b.n_qubits
    joint = tensor(b, a)
    return fuse_at(joint, k=m + 1, l=m, rng=rng,
                   keep_redundant=keep_redundant)


def fuse_2d(a: ClusterState, b: ClusterState, k: int, l: int, rng,
            remove: str = "l") -> FusionResult:
    """Fusion of two chains at interior atoms into a cross-shaped cluster.

    k indexes into chain a (qubits 1..n), l into chain b (relabelled to
    n+1..n+m).  On success one of the linked atoms is removed; on failure
    both chains split at the measured atoms.
    """
    if not 1 < k < a.n_qubits:
        raise ValueError("k must be interior to chain a")
    if not 1 < l < b.n_qubits:
        raise ValueError("l must be interior to chain b")
    joint = tensor(a, b)
    return fuse_at(joint, k=k, l=a.n_qubits + l, rng=rng, remove=remove)


# --- abstract growth accounting ---------------------------------------------

@dataclass(frozen=True)
class GrowthStrategy:
    """Resource policy: fuse the main chain with fresh chains of fixed size."""

    fresh_size: int = 2
    nielsen: bool = False  # keep the redundant qubit on success
    max_attempts: int = 10 ** 6


@dataclass
class GrowthStats:
    attempts: int
    qubits_consumed: int
    final_sizes: tuple
    seed: int
    reached_target: bool
    redundant_qubits: int = 0


def growth_monte_carlo(p_suc: float, target: int,
                       strategy: GrowthStrategy, rng,
                       seed: int = 0) -> GrowthStats:
    """Grow one chain by repeated probabilistic fusions.

    The main chain starts as a single qubit.  Each attempt consumes a
    fresh chain of strategy.fresh_size qubits; success joins it to the
    main chain (sizes s1 + s2 - 1, or s1 + s2 with a flagged redundant
    qubit in the Nielsen variant), failure shortens both by one and the
    remainder of the fresh chain is scrapped.  A main chain ground down
    to nothing is reseeded from a fresh single qubit.
    """
    if not 0.0 <= p_suc <= 1.0:
        raise ValueError("p_suc must lie in [0, 1]")
    # the initial single-qubit seed is free; only fused-in material counts
    main = 1
    consumed = 0
    attempts = 0
    redundant = 0
    scraps = []
    while main < target:
        if attempts >= strategy.max_attempts:
            return GrowthStats(attempts=attempts, qubits_consumed=consumed,
                               final_sizes=tuple(sorted([main] + scraps)),
                               seed=seed, reached_target=False,
                               redundant_qubits=redundant)
        fresh = strategy.fresh_size
        consumed += fresh
        attempts += 1
        if rng.random() < p_suc:
            if strategy.nielsen:
                main = main + fresh
                redundant += 1
            else:
                main = main + fresh - 1
        else:
            main -= 1
            if fresh - 1 > 0:
                scraps.append(fresh - 1)
            if main == 0:
                main = 1
                consumed += 1
    return GrowthStats(attempts=attempts, qubits_consumed=consumed,
                       final_sizes=tuple(sorted([main] + scraps)),
                       seed=seed, reached_target=True,
                       redundant_qubits=redundant)


def expected_growth_cost(p_suc: float, target: int,
                         strategy: GrowthStrategy) -> float:
    """Expected qubits consumed, by solving the size-transition recurrence.

    Independent of the Monte-Carlo path: E[m] = s + p E[min(m+s-1, T)] +
    (1-p) E[m-1], with E[0] = 1 + E[1] and E[m >= target] = 0.
    """
    if strategy.nielsen:
        raise ValueError("expectation implemented for the standard variant")
    s = strategy.fresh_size
    p = p_suc
    if p <= 0:
        return math.inf
    t = target
    # unknowns E[0..t-1]; E[m>=t] = 0
    a = np.zeros((t, t))
    rhs = np.zeros(t)
    # E[0] = 1 + E[1]
    a[0, 0] = 1.0
    if t > 1:
        a[0, 1] = -1.0
    rhs[0] = 1.0
    for m in range(1, t):
        a[m, m] = 1.0
        up = m + s - 1
        if up < t:
            a[m, up] -= p
        a[m, m - 1] -= (1 - p)
        rhs[m] = s
    sol = np.linalg.solve(a, rhs)
    return float(sol[1])
