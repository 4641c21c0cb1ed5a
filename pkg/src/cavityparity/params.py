"""Physical parameters of the driven two-atom cavity system.

All rates are expressed in units of the cavity decay kappa, which is the
internal normalisation constant (kappa = 1 unless stated otherwise).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import SingularDetuningError


@dataclass(frozen=True)
class SystemParams:
    """Rates and detunings of two driven three-level atoms in one cavity.

    omega   : Rabi frequency of the driving laser on the 1-2 transition.
    g1, g2  : atom-cavity coupling constants of atoms 1 and 2.
    delta   : laser/cavity detuning from the 1-2 transition.
    gamma0  : spontaneous rate on the 2-0 transition.
    gamma1  : spontaneous rate on the 2-1 transition.
    kappa   : cavity decay rate (normalisation constant, 1 by default).
    eta     : photon detector efficiency in [0, 1].
    n_max   : cavity Fock-space truncation (photon numbers 0..n_max).
    """

    omega: float
    g1: float
    g2: float
    delta: float
    gamma0: float
    gamma1: float
    kappa: float = 1.0
    eta: float = 1.0
    n_max: int = 3

    def __post_init__(self):
        for name in ("omega", "g1", "g2", "gamma0", "gamma1", "kappa"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        scale = max(self.omega, self.g1, self.g2, self.kappa, self.gamma)
        if scale > 0 and self.delta < 10 * scale:
            warnings.warn(
                "detuning is less than 10x the largest system rate; the "
                "adiabatic elimination underlying the effective model is "
                "unreliable in this regime",
                stacklevel=2,
            )

    @property
    def gamma(self) -> float:
        """Total spontaneous decay rate of the excited state."""
        return self.gamma0 + self.gamma1

    @property
    def cooperativity(self) -> float:
        """Single-atom cooperativity C = g^2 / (kappa Gamma).

        For unequal couplings the geometric mean g1*g2 replaces g^2.
        """
        if self.gamma == 0:
            return math.inf
        return self.g1 * self.g2 / (self.kappa * self.gamma)

    @classmethod
    def symmetric(cls, omega=1.0, g=1.0, delta=50.0, gamma0=0.05,
                  gamma1=0.05, kappa=1.0, eta=1.0, n_max=3) -> "SystemParams":
        """Equal-coupling parameter set (the common case in this package)."""
        return cls(omega=omega, g1=g, g2=g, delta=delta, gamma0=gamma0,
                   gamma1=gamma1, kappa=kappa, eta=eta, n_max=n_max)

    @classmethod
    def from_cooperativity(cls, c, omega=1.0, g=1.0, delta=50.0, kappa=1.0,
                           eta=1.0, n_max=3, gamma_ratio=1.0) -> "SystemParams":
        """Equal-coupling parameters with total Gamma fixed by C = g^2/(kappa Gamma).

        gamma_ratio is gamma0/gamma1.
        """
        gamma = g * g / (kappa * c)
        gamma1 = gamma / (1.0 + gamma_ratio)
        gamma0 = gamma - gamma1
        return cls(omega=omega, g1=g, g2=g, delta=delta, gamma0=gamma0,
                   gamma1=gamma1, kappa=kappa, eta=eta, n_max=n_max)


@dataclass(frozen=True)
class MarkovRates:
    """Transition rates of the three-subspace (D/L/H) jump process.

    gamma_XY is the atomic-emission rate taking the atoms from subspace X
    to subspace Y; kappa_X is the cavity-emission rate in subspace X.
    """

    gamma_LL: float
    gamma_LD: float
    gamma_HL: float
    gamma_HH: float
    kappa_L: float
    kappa_H: float
    eta: float = 1.0

    def __post_init__(self):
        for name in ("gamma_LL", "gamma_LD", "gamma_HL", "gamma_HH",
                     "kappa_L", "kappa_H"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    @classmethod
    def from_cooperativity(cls, c: float, eta: float = 1.0) -> "MarkovRates":
        """Symmetric-decay rates in units of Gamma_eff, parametrised by C.

        Uses kappa_H = 4 kappa_L = 16 C gamma_HH, valid for gamma0 = gamma1.
        """
        g_eff = 1.0
        return cls(gamma_LL=g_eff / 2, gamma_LD=g_eff / 2, gamma_HL=g_eff,
                   gamma_HH=g_eff, kappa_L=4 * c * g_eff,
                   kappa_H=16 * c * g_eff, eta=eta)


@dataclass(frozen=True)
class EffectiveRates:
    """Constants of the adiabatically eliminated ground-state model."""

    delta_eff: float
    gamma_eff: float
    kappa_eff: float
    gamma_eff_0: float
    gamma_eff_1: float
    kappa_eff_1: float
    kappa_eff_2: float
    coop: float
    markov: MarkovRates = field(repr=False, default=None)


def effective_rates(params: SystemParams) -> EffectiveRates:
    """Derive the effective ground-state rates from the full parameters.

    delta_eff = Omega^2 / (4 Delta)
    gamma_eff = Omega^2 Gamma / (4 Delta^2)
    kappa_eff;i = Omega^2 g_i^2 / (Delta^2 kappa), kappa_eff their mean.
    """
    if params.delta == 0:
        raise SingularDetuningError("effective rates undefined at delta = 0")
    om2 = params.omega ** 2
    d2 = params.delta ** 2
    delta_eff = om2 / (4 * params.delta)
    gamma_eff = om2 * params.gamma / (4 * d2)
    kappa_eff_1 = om2 * params.g1 ** 2 / (d2 * params.kappa)
    kappa_eff_2 = om2 * params.g2 ** 2 / (d2 * params.kappa)
    kappa_eff = 0.5 * (kappa_eff_1 + kappa_eff_2)
    if params.gamma > 0:
        gamma_eff_0 = params.gamma0 * gamma_eff / params.gamma
        gamma_eff_1 = params.gamma1 * gamma_eff / params.gamma
    else:
        gamma_eff_0 = gamma_eff_1 = 0.0
    markov = MarkovRates(
        gamma_LL=gamma_eff_1,
        gamma_LD=gamma_eff_0,
        gamma_HL=2 * gamma_eff_1,
        gamma_HH=2 * gamma_eff_0,
        kappa_L=kappa_eff,
        kappa_H=4 * kappa_eff,
        eta=params.eta,
    )
    return EffectiveRates(
        delta_eff=delta_eff,
        gamma_eff=gamma_eff,
        kappa_eff=kappa_eff,
        gamma_eff_0=gamma_eff_0,
        gamma_eff_1=gamma_eff_1,
        kappa_eff_1=kappa_eff_1,
        kappa_eff_2=kappa_eff_2,
        coop=params.cooperativity,
        markov=markov,
    )


def excited_population(params: SystemParams) -> float:
    """Quasi-steady excited-state population of an odd-parity atom pair."""
    if params.delta <= 0:
        raise SingularDetuningError("excited population undefined at delta <= 0")
    return params.omega ** 2 / (4 * params.delta ** 2)


def detection_time_cap(rates: EffectiveRates, eta: float) -> float:
    """Default per-round driving cap: three mean detected-click lifetimes in L."""
    if eta <= 0 or rates.kappa_eff <= 0:
        return math.inf
    return 3.0 / (eta * rates.kappa_eff)
