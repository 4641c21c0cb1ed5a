"""End-to-end acceptance checks.

Each test exercises one headline requirement at its stated tolerance and
prints a single PASS/FAIL line (visible with pytest -s or in the captured
output of a failing run).
"""

import math

import numpy as np
import pytest

from cavityparity import analytics as an
from cavityparity import cluster as cl
from cavityparity.cli import robustness_monte_carlo, run_experiment
from cavityparity.config import ExperimentConfig, parse_config
from cavityparity.effective import build_effective_model, subspace_populations
from cavityparity.fullmodel import build_full_model, ground_state_vector
from cavityparity.master import evolve_master_series
from cavityparity.operators import CHANNEL_CAVITY
from cavityparity.params import MarkovRates, SystemParams, effective_rates
from cavityparity.protocols import (ProtocolConfig, ProtocolContext,
                                    bell_preparation_effective,
                                    classify_clicks, ghz_preparation_effective,
                                    ghz_target_effective, parity_targets,
                                    run_protocol_ensemble)
from cavityparity.trajectory import (DetectorModel, Propagator, run_ensemble,
                                     run_trajectory, trajectory_rng)


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {status}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def reference_params():
    return SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                                  gamma0=0.1, gamma1=0.1)


def test_closed_form_layer():
    ok = (abs(an.f_av(1.0) - 0.8791) <= 1e-4
          and abs(an.p_suc(1.0) - 0.4067) <= 1e-4
          and an.f_av(20.0) > 0.99
          and abs(an.f_av(1e6) - 1.0) <= 1e-5
          and abs(an.p_suc(1e6) - 0.5) <= 1e-5)
    report("closed-form layer reference values and limits", ok,
           f"f_av(1)={an.f_av(1.0):.5f}, p_suc(1)={an.p_suc(1.0):.5f}")


def test_quadrature_matches_closed_forms_on_grid():
    """Double integrals of the event densities against the closed event
    probabilities, over a 5x5 (C, branching-ratio) grid, tolerance 1e-6."""
    worst = 0.0
    for c in (0.5, 1.0, 2.0, 5.0, 10.0):
        for ratio in (0.25, 0.5, 1.0, 2.0, 4.0):
            g1 = 1.0 / (1.0 + ratio)
            g0 = ratio / (1.0 + ratio)
            r = MarkovRates(gamma_LL=g1, gamma_LD=g0, gamma_HL=2 * g1,
                            gamma_HH=2 * g0, kappa_L=4 * c, kappa_H=16 * c)
            pa, pb = an.p_A_p_B(r)
            worst = max(worst,
                        abs(pa - an.p_event_quadrature(r, an.EVENT_A)),
                        abs(pb - an.p_event_quadrature(r, an.EVENT_B)))
    report("quadrature vs closed-form event probabilities (5x5 grid)",
           worst < 1e-6, f"worst |diff| = {worst:.2e}")


def test_markov_oracle_equivalence():
    """Monte Carlo on the three-subspace jump process vs the closed-form
    average fidelity and success probability, 1e5 runs per point."""
    n_runs = 100_000
    worst_z = 0.0
    for c in (1.0, 5.0, 10.0):
        for eta in (0.2, 1.0):
            r = MarkovRates.from_cooperativity(c, eta)
            rng = trajectory_rng(2026, int(1000 * c + 10 * eta))
            stats = an.markov_ensemble(r, an.GHZ_WEIGHTS, n_runs, rng)
            z_f = abs(stats.f_av - an.f_av_eta(c, eta)) / stats.f_av_err
            z_p = abs(stats.p_suc - an.p_suc_eta(c, eta)) / stats.p_suc_err
            worst_z = max(worst_z, z_f, z_p)
    report("Markov-oracle equivalence at C in {1,5,10}, eta in {0.2,1}",
           worst_z < 3.0, f"worst |z| = {worst_z:.2f}")


def test_effective_trajectory_protocol_without_decay():
    """Double herald on effective-model trajectories at Gamma = 0:
    success rate 0.5 +- 0.015 and unit success fidelity, 1e4 runs."""
    p = SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                               gamma0=0.0, gamma1=0.0)
    r = effective_rates(p)
    model = build_effective_model(r)
    # the driving window must dominate the mean click time so that the
    # odd-parity population is heralded with certainty
    cfg = ProtocolConfig(variant="double-herald", t_max=60.0 / r.kappa_eff)
    ctx = ProtocolContext(model=model, cfg=cfg, detector=DetectorModel(1.0),
                          target=parity_targets("bell"))
    stats = run_protocol_ensemble(ctx, bell_preparation_effective(),
                                  515, 10_000)
    ok = (abs(stats.success_rate - 0.5) <= 0.015
          and abs(stats.mean_fidelity - 1.0) <= 1e-9)
    report("effective-model double herald at Gamma=0", ok,
           f"p_suc={stats.success_rate:.4f}, "
           f"f={stats.mean_fidelity:.12f}")


def test_eta_equivalence():
    """Ensembles at (eta=0.5, C=40) and (eta=1, C=20) share their
    statistics within 3 sigma, 1e4 runs each."""
    def ensemble(c, eta, seed):
        p = SystemParams.from_cooperativity(c, eta=eta)
        r = effective_rates(p)
        model = build_effective_model(r, spectators=2)
        cfg = ProtocolConfig(variant="double-herald",
                             t_max=60.0 / (eta * r.kappa_eff))
        ctx = ProtocolContext(model=model, cfg=cfg,
                              detector=DetectorModel(eta), spectators=2,
                              target=ghz_target_effective())
        return run_protocol_ensemble(ctx, ghz_preparation_effective(),
                                     seed, 10_000)

    a = ensemble(40.0, 0.5, 616)
    b = ensemble(20.0, 1.0, 717)
    z_p = (abs(a.success_rate - b.success_rate)
           / math.hypot(a.success_rate_err, b.success_rate_err))
    z_f = (abs(a.mean_fidelity - b.mean_fidelity)
           / math.hypot(a.mean_fidelity_err, b.mean_fidelity_err))
    report("eta-equivalence (0.5, C=40) vs (1.0, C=20)",
           max(z_p, z_f) < 3.0, f"z_p={z_p:.2f}, z_f={z_f:.2f}")


def test_full_model_fluorescence_levels():
    """Detected click rates from |11>, |01>, |00> near 4 kappa_eff,
    kappa_eff, 0 within 10%, measured on trajectories without atomic
    emissions over 20 mean lifetimes; odd-parity outcome frequency from
    the symmetric product state equals 0.5 +- 0.05 over 1e3 runs."""
    p = reference_params()
    r = effective_rates(p)
    model = build_full_model(p)
    prop = Propagator(model.h)
    det = DetectorModel(1.0)
    window = 20.0 / r.kappa_eff

    rates_ok = True
    detail = []
    for amps, expect in (([0, 0, 0, 1], 4 * r.kappa_eff),
                         ([0, 1, 0, 0], r.kappa_eff),
                         ([1, 0, 0, 0], 0.0)):
        psi0 = ground_state_vector(p, amps)
        clicks = 0
        used = 0
        i = 0
        while used < 60:
            rec = run_trajectory(model, psi0, window, det,
                                 trajectory_rng(818, i), propagator=prop)
            i += 1
            if any(e.channel != CHANNEL_CAVITY for e in rec.events):
                continue
            used += 1
            clicks += rec.count_detected()
            if expect == 0.0 and i >= 60:
                break
        rate = clicks / (used * window)
        if expect > 0:
            rates_ok = rates_ok and abs(rate - expect) / expect <= 0.10
            detail.append(f"{rate / expect:.3f}x")
        else:
            rates_ok = rates_ok and rate == 0.0

    # classification window short against atomic transitions, long
    # against the cavity click period
    t_short = 4.0 / r.kappa_eff
    mean_l = r.kappa_eff * t_short
    psi0 = ground_state_vector(p, [0.5, 0.5, 0.5, 0.5])
    n_l = 0
    n_runs = 1000
    for i in range(n_runs):
        rec = run_trajectory(model, psi0, t_short, det,
                             trajectory_rng(919, i), propagator=prop)
        n_l += classify_clicks(rec.count_detected(), mean_l) == "L"
    frac = n_l / n_runs
    ok = rates_ok and abs(frac - 0.5) <= 0.05
    report("full-model fluorescence levels and odd-parity frequency", ok,
           f"rates {detail}, L-fraction {frac:.3f}")


def test_full_model_simple_protocol_fidelity():
    """Simple click-counting protocol on the full model at C = 10:
    mean fidelity of odd-parity-classified runs above 0.9, 1e4 runs."""
    p = SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                               gamma0=0.05, gamma1=0.05)
    r = effective_rates(p)
    model = build_full_model(p)
    cfg = ProtocolConfig(variant="simple", t_window=5.0 / r.kappa_eff,
                         kappa_eff=r.kappa_eff)
    ctx = ProtocolContext(model=model, cfg=cfg, detector=DetectorModel(1.0),
                          model_kind="full", params=p,
                          target=parity_targets("bell"))
    psi0 = ground_state_vector(p, [0.5, 0.5, 0.5, 0.5])
    stats = run_protocol_ensemble(ctx, psi0, 2020, 10000)
    report("full-model simple protocol mean fidelity above 0.9",
           stats.mean_fidelity > 0.9,
           f"f_av = {stats.mean_fidelity:.4f} "
           f"+- {stats.mean_fidelity_err:.4f}")


def test_trajectory_master_consistency():
    """Ensemble-averaged subspace populations against the density-matrix
    evolution at ten sample times, tolerance 4 / sqrt(N) with N = 1e4."""
    p = reference_params()
    r = effective_rates(p)
    model = build_effective_model(r)
    init = bell_preparation_effective()
    times = np.linspace(0.0, 3.0 / r.kappa_eff, 11)[1:]
    rho0 = np.outer(init, init.conj())
    rhos = evolve_master_series(rho0, model, times)
    n_runs = 10_000
    records = run_ensemble(model, init, times[-1], DetectorModel(1.0),
                           1234, n_runs, sample_times=times)
    worst = 0.0
    for k in range(len(times)):
        mc = np.zeros(3)
        for rec in records:
            pops = subspace_populations(rec.samples[k])
            mc += (pops["D"], pops["L"], pops["H"])
        mc /= n_runs
        diag = np.real(np.diag(rhos[k]))
        ref = np.array([diag[0], diag[1] + diag[2], diag[3]])
        worst = max(worst, float(np.max(np.abs(mc - ref))))
    bound = 4.0 / math.sqrt(n_runs)
    report("trajectory vs master-equation populations", worst < bound,
           f"worst |diff| = {worst:.4f}, bound = {bound:.4f}")


def test_robustness_closed_form_and_monte_carlo():
    """Averaged fidelity under permanently unequal couplings: quadrature
    matches 1 - eps^2/2 to 1e-6 across the eps grid, and the trajectory
    Monte Carlo at eps = 0.3 gives 0.955 +- 0.01 over 1e4 runs."""
    worst = 0.0
    for i in range(11):
        eps = 0.1 * i
        if eps >= 1.0:
            quad = an.robust_f_av_quadrature(1.0)
        else:
            quad = an.robust_f_av_quadrature(eps)
        worst = max(worst, abs(quad - an.robust_f_av(eps)))
    f_mc, err = robustness_monte_carlo(0.3, 1.0, 60.0, 321, 10_000)
    ok = worst < 1e-6 and abs(f_mc - 0.955) <= 0.01
    report("robustness: closed form vs quadrature and Monte Carlo", ok,
           f"worst quad diff = {worst:.2e}, F_mc = {f_mc:.4f}")


def test_cluster_fusion_exactness():
    """Every successful chain fusion with at most ten qubits reproduces
    the canonical cluster at overlap 1 +- 1e-12 for both readout branches,
    and the four-qubit GHZ state is prepared exactly without decay."""
    ok = True
    for n in range(1, 10):
        for m in range(1, 10):
            if n + m > 10:
                continue
            seen = set()
            seed = 0
            while seen != {0, 1} and seed < 200:
                rng = trajectory_rng(100 * n + m, seed)
                seed += 1
                res = cl.fuse_linear(cl.linear_cluster(n),
                                     cl.linear_cluster(m), rng)
                if res.outcome != cl.OUTCOME_L:
                    continue
                seen.add(res.measurement)
                ov = cl.overlap(res.states[0], cl.linear_cluster(n + m - 1))
                ok = ok and abs(ov - 1.0) < 1e-12
            ok = ok and seen == {0, 1}

    # two Bell pairs, parity projection on the inner pair
    bell = np.zeros(4, dtype=complex)
    bell[0b01] = bell[0b10] = 1 / math.sqrt(2)
    pairs = cl.ClusterState(4, np.kron(bell, bell))
    state, prob = cl.parity_project(pairs, 2, 3, cl.OUTCOME_L)
    ghz = np.zeros(16, dtype=complex)
    ghz[0b0101] = ghz[0b1010] = 1 / math.sqrt(2)
    ghz_ok = (abs(abs(np.vdot(ghz, state.amps)) - 1.0) < 1e-12
              and abs(prob - 0.5) < 1e-12)

    # the same state through the heralded protocol at Gamma = 0
    p = SystemParams.symmetric(omega=1.0, g=1.0, delta=50.0,
                               gamma0=0.0, gamma1=0.0)
    r = effective_rates(p)
    model = build_effective_model(r, spectators=2)
    cfg = ProtocolConfig(variant="double-herald", t_max=60.0 / r.kappa_eff)
    ctx = ProtocolContext(model=model, cfg=cfg, detector=DetectorModel(1.0),
                          spectators=2, target=ghz_target_effective())
    stats = run_protocol_ensemble(ctx, ghz_preparation_effective(), 99, 500)
    herald_ok = abs(stats.mean_fidelity - 1.0) < 1e-12

    report("cluster fusion exactness and GHZ preparation",
           ok and ghz_ok and herald_ok,
           f"herald GHZ fidelity = {stats.mean_fidelity:.12f}")


def test_csv_determinism(tmp_path):
    """Identical configuration and seed produce byte-identical CSVs."""
    text = ("[run]\nexperiment = parity-herald\nruns = 40\nbase_seed = 5\n"
            "[params]\ngamma0 = 0.1\ngamma1 = 0.1\n")
    cfg = parse_config(text)
    outputs = []
    for sub in ("x", "y"):
        run_experiment(ExperimentConfig(**{**cfg.__dict__,
                                           "output_path":
                                               str(tmp_path / sub)}))
        outputs.append((tmp_path / sub / "protocol.csv").read_bytes())
    report("byte-identical CSV under identical config and seed",
           outputs[0] == outputs[1] and len(outputs[0]) > 0)
