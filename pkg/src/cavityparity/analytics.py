"""Closed-form performance predictions and the three-subspace Markov oracle.

All rates are plain floats in any consistent unit; only ratios enter the
final probabilities.  Detector efficiency is folded in by replacing the
cavity rates kappa_X with eta * kappa_X; atomic emission rates are
unaffected by eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .params import MarkovRates

EVENT_A = "A"
EVENT_B = "B"
EVENT_NONE = "none"


# --- waiting-time building blocks -------------------------------------------

def pn_L(n: int, t: float, r: MarkovRates) -> float:
    """Probability of n L->L emissions and no L->D emission in (0, t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return ((r.gamma_LL * t) ** n / math.factorial(n)
            * math.exp(-(r.gamma_LL + r.gamma_LD) * t))


def pn_H(n: int, t: float, r: MarkovRates) -> float:
    """Probability of n H->H emissions and no H->L emission in (0, t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return ((r.gamma_HH * t) ** n / math.factorial(n)
            * math.exp(-(r.gamma_HH + r.gamma_HL) * t))


# --- closed-form event densities and probabilities --------------------------

def _detected(r: MarkovRates):
    return r.eta * r.kappa_L, r.eta * r.kappa_H


def w_A(t1: float, t2: float, r: MarkovRates) -> float:
    """Density for a double herald that leaves the desired entangled state."""
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be >= 0")
    kl, _ = _detected(r)
    s = t1 + t2
    return 0.25 * kl ** 2 * (
        math.exp(-(kl + r.gamma_LD + r.gamma_LL) * s)
        + math.exp(-(kl + r.gamma_LD) * s))


def w_B(t1: float, t2: float, r: MarkovRates) -> float:
    """Density for a double herald whose final state is not the desired one."""
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be >= 0")
    kl, kh = _detected(r)
    s = t1 + t2
    denom = kh - kl + r.gamma_HL - r.gamma_LD
    leak = (r.gamma_HL / denom
            * (math.exp(-(kl + r.gamma_LD) * s)
               - math.exp(-(kl + r.gamma_LD) * t2)
               * math.exp(-(kh + r.gamma_HL) * t1)))
    poison = (-math.exp(-(kl + r.gamma_LD + r.gamma_LL) * s)
              + math.exp(-(kl + r.gamma_LD) * s))
    return 0.25 * kl ** 2 * (leak + poison)


def p_A_p_B(r: MarkovRates):
    """Total event probabilities at unbounded round duration."""
    kl, kh = _detected(r)
    if kl <= 0:
        raise ValueError("detected cavity rate in L must be > 0")
    a = kl + r.gamma_LD + r.gamma_LL
    b = kl + r.gamma_LD
    p_a = 0.25 * kl ** 2 * (1.0 / a ** 2 + 1.0 / b ** 2)
    p_b = 0.25 * kl ** 2 / b ** 2 * (
        r.gamma_LL * (r.gamma_LL + 2 * kl + 2 * r.gamma_LD) / a ** 2
        + r.gamma_HL / (kh + r.gamma_HL))
    return p_a, p_b


def p_event_quadrature(r: MarkovRates, which: str, lifetimes: float = 50.0,
                       tol: float = 1e-9):
    """Adaptive double integral of w_A or w_B over [0, inf)^2.

    The improper integrals are truncated at `lifetimes` mean lifetimes of
    the slowest decaying exponential, where the integrand tail is far below
    the requested tolerance.
    """
    kl, _ = _detected(r)
    dens = w_A if which == EVENT_A else w_B
    cap = lifetimes / max(kl + r.gamma_LD, 1e-300)

    def inner(t1):
        val, _ = integrate.quad(lambda t2: dens(t1, t2, r), 0.0, cap,
                                epsabs=tol, epsrel=tol, limit=200)
        return val

    val, _ = integrate.quad(inner, 0.0, cap, epsabs=tol, epsrel=tol,
                            limit=200)
    return val


# --- C-parametrised rational forms (gamma0 = gamma1) ------------------------

def f_av(c: float) -> float:
    """Average success fidelity as a function of the cooperativity."""
    if c <= 0:
        raise ValueError("C must be > 0")
    return ((5.0 / 32 + 4 * c + 28 * c ** 2 + 64 * c ** 3)
            / (3.0 / 8 + 7 * c + 38 * c ** 2 + 64 * c ** 3))


def p_suc(c: float) -> float:
    """Odd-parity success probability as a function of the cooperativity."""
    if c <= 0:
        raise ValueError("C must be > 0")
    return ((6 * c ** 2 + 64 * c ** 3)
            / (1.0 / 8 + 4 * c + 40 * c ** 2 + 128 * c ** 3))


def f_av_eta(c: float, eta: float) -> float:
    """Finite detector efficiency enters only through the product eta*C."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return f_av(eta * c)


def p_suc_eta(c: float, eta: float) -> float:
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return p_suc(eta * c)


# --- unequal-coupling robustness --------------------------------------------

def robust_w(t1: float, t2: float, kappa_bar: float, epsilon: float) -> float:
    """Click-time density for permanently unequal couplings (Gamma = 0)."""
    k1 = (1 + epsilon) * kappa_bar
    k2 = (1 - epsilon) * kappa_bar
    return 0.25 * k1 * k2 * (math.exp(-(k2 * t1 + k1 * t2))
                             + math.exp(-(k1 * t1 + k2 * t2)))


def robust_f(t1: float, t2: float, kappa_bar: float, epsilon: float) -> float:
    """Conditional fidelity of the post-click state against the Bell target."""
    # ratio of exponentials rewritten through cosh for stability at large t
    d = epsilon * kappa_bar * (t2 - t1)
    return 0.5 + 0.5 / math.cosh(d)


def robust_f_av(epsilon: float) -> float:
    """Closed-form click-time-averaged fidelity, 1 - epsilon^2 / 2."""
    if abs(epsilon) > 1:
        raise ValueError("|epsilon| must be <= 1")
    return 1.0 - 0.5 * epsilon ** 2


def robust_f_av_quadrature(epsilon: float, kappa_bar: float = 1.0,
                           lifetimes: float = 60.0, tol: float = 1e-9):
    """Numerically averaged fidelity, integrating density times fidelity."""
    if abs(epsilon) >= 1:
        # one coupling vanishes; the quadrature degenerates with the density
        k_slow = (1 - abs(epsilon)) * kappa_bar
        if k_slow <= 0:
            return 0.5
    cap = lifetimes / ((1 - abs(epsilon)) * kappa_bar)

    def avg(fn):
        def inner(t1):
            val, _ = integrate.quad(lambda t2: fn(t1, t2), 0.0, cap,
                                    epsabs=tol, epsrel=tol, limit=200)
            return val
        val, _ = integrate.quad(inner, 0.0, cap, epsabs=tol, epsrel=tol,
                                limit=200)
        return val

    num = avg(lambda a, b: robust_w(a, b, kappa_bar, epsilon)
              * robust_f(a, b, kappa_bar, epsilon))
    den = avg(lambda a, b: robust_w(a, b, kappa_bar, epsilon))
    return num / den


# --- Markov jump oracle ------------------------------------------------------

_D, _L, _H = 0, 1, 2


def markov_simulate(r: MarkovRates, initial_weights, rng, t_max=math.inf):
    """One double-herald run of the D/L/H jump process.

    initial_weights: mapping with keys 'D', 'L', 'H' summing to one.
    Each round races the detected cavity click against the atomic
    emissions; the pi pulse between rounds swaps D and H and leaves L
    unchanged.  Returns (event, t1, t2) where event is 'A', 'B' or 'none';
    an L->L emission leaves the desired state with probability one half.
    """
    weights = [initial_weights.get(k, 0.0) for k in ("D", "L", "H")]
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("initial weights must sum to 1")
    state = int(rng.choice(3, p=weights))
    kl, kh = _detected(r)

    started_in_l = state == _L
    n_poison = 0
    left_h = False
    times = []
    for _ in range(2):
        if times:  # pi pulse between rounds
            if state == _D:
                state = _H
            elif state == _H:
                state = _D
        t = 0.0
        clicked = False
        while True:
            if state == _D:
                break
            if state == _L:
                moves = ((kl, "click"), (r.gamma_LL, "ll"),
                         (r.gamma_LD, "ld"))
            else:
                moves = ((kh, "click"), (r.gamma_HH, "hh"),
                         (r.gamma_HL, "hl"))
            total = sum(m[0] for m in moves)
            if total <= 0:
                break
            t += rng.exponential(1.0 / total)
            if t > t_max:
                break
            u = rng.random() * total
            acc = 0.0
            kind = moves[-1][1]
            for w, k in moves:
                acc += w
                if u <= acc:
                    kind = k
                    break
            if kind == "click":
                clicked = True
                break
            if kind == "ll":
                n_poison += 1
            elif kind == "ld":
                state = _D
            elif kind == "hl":
                state = _L
                left_h = True
        if not clicked:
            return EVENT_NONE, None, None
        times.append(t)

    if left_h or not started_in_l:
        return EVENT_B, times[0], times[1]
    if n_poison == 0:
        return EVENT_A, times[0], times[1]
    return (EVENT_A if rng.random() < 0.5 else EVENT_B), times[0], times[1]


@dataclass
class MarkovStats:
    n_runs: int
    n_a: int
    n_b: int

    @property
    def p_suc(self):
        return (self.n_a + self.n_b) / self.n_runs

    @property
    def p_suc_err(self):
        p = self.p_suc
        return math.sqrt(max(p * (1 - p), 1e-300) / self.n_runs)

    @property
    def f_av(self):
        n = self.n_a + self.n_b
        return self.n_a / n if n else float("nan")

    @property
    def f_av_err(self):
        n = self.n_a + self.n_b
        if not n:
            return float("nan")
        f = self.f_av
        return math.sqrt(max(f * (1 - f), 1e-300) / n)


GHZ_WEIGHTS = {"D": 0.25, "L": 0.5, "H": 0.25}


def markov_ensemble(r: MarkovRates, initial_weights, n_runs: int,
                    rng, t_max=math.inf) -> MarkovStats:
    n_a = n_b = 0
    for _ in range(n_runs):
        event, _, _ = markov_simulate(r, initial_weights, rng, t_max)
        if event == EVENT_A:
            n_a += 1
        elif event == EVENT_B:
            n_b += 1
    return MarkovStats(n_runs=n_runs, n_a=n_a, n_b=n_b)
