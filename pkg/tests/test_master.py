import numpy as np
import pytest

from cavityparity.effective import (IDX_01, IDX_11, build_effective_model,
                                    subspace_populations)
from cavityparity.errors import NumericalError
from cavityparity.master import (evolve_master, evolve_master_series,
                                 max_rate, mean_intensity)
from cavityparity.params import SystemParams, effective_rates


@pytest.fixture
def model():
    p = SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                               gamma0=0.1, gamma1=0.1)
    return build_effective_model(effective_rates(p))


@pytest.fixture
def rates():
    p = SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                               gamma0=0.1, gamma1=0.1)
    return effective_rates(p)


def bell_density():
    psi = np.full(4, 0.5, dtype=complex)
    return np.outer(psi, psi.conj())


class TestEvolveMaster:
    def test_trace_and_hermiticity_preserved(self, model, rates):
        rho = evolve_master(bell_density(), model, 2.0 / rates.kappa_eff)
        assert np.real(np.trace(rho)) == pytest.approx(1.0, abs=1e-7)
        assert np.linalg.norm(rho - rho.conj().T) < 1e-9

    def test_l_population_decays_at_gamma_ld(self, model, rates):
        """Starting inside L, the only leak out of the odd-parity sector is
        the atomic-0 emission into D; the cavity channel recycles L."""
        psi = np.zeros(4, dtype=complex)
        psi[IDX_01] = 1.0
        rho0 = np.outer(psi, psi.conj())
        t = 0.5 / rates.gamma_eff_0
        rho = evolve_master(rho0, model, t)
        p_l = np.real(rho[1, 1] + rho[2, 2])
        assert p_l == pytest.approx(np.exp(-rates.gamma_eff_0 * t), rel=1e-4)

    def test_rejects_oversized_step(self, model):
        with pytest.raises(ValueError):
            evolve_master(bell_density(), model, 10.0,
                          dt=1.0 / max_rate(model))

    def test_rejects_bad_density(self, model):
        rho = bell_density() * 2.0
        with pytest.raises(ValueError):
            evolve_master(rho, model, 1.0)

    def test_series_matches_single_step(self, model, rates):
        t1, t2 = 1.0 / rates.kappa_eff, 2.0 / rates.kappa_eff
        series = evolve_master_series(bell_density(), model, [t1, t2])
        direct = evolve_master(bell_density(), model, t2)
        assert np.linalg.norm(series[1] - direct) < 1e-8


def test_mean_intensity_from_subspaces(model, rates):
    cav = [r for r in model.resets if r.channel == "cavity"][0]
    psi = np.zeros(4, dtype=complex)
    psi[IDX_11] = 1.0
    rho = np.outer(psi, psi.conj())
    assert mean_intensity(rho, cav) == pytest.approx(4 * rates.kappa_eff)
