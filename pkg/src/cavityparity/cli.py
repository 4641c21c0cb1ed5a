"""Command-line experiment runner with deterministic CSV output.

One subcommand per experiment.  All numeric CSV fields use full-precision
scientific notation; files are UTF-8 with LF line endings, so a rerun with
the same configuration and seed is byte-identical.

CSV schemas (one flat table per experiment):
  trajectory series : time, p_D, p_L, p_H
  event log         : run, time, channel, detected
  protocol ensemble : run, label, t1, t2, clicks, fidelity
  analytics         : C, eta, f_av, p_suc
  robustness        : epsilon, f_av_closed, f_av_quadrature, f_av_mc, mc_err
  sweep             : C, eta, f_av, p_suc, f_av_mc, f_av_mc_err,
                      p_suc_mc, p_suc_mc_err
  cluster fusion    : run, outcome, probability, measurement, sizes, overlap
  cluster growth    : run, attempts, qubits_consumed, reached_target,
                      largest_size, redundant
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import analytics, cluster
from .config import EXPERIMENTS, ExperimentConfig, parse_config
from .effective import build_effective_model, subspace_populations
from .errors import CapacityError, ConfigError, NumericalError
from .fullmodel import (BasisIndex, build_full_model, full_dim,
                        ground_state_vector)
from .master import evolve_master_series
from .operators import Model
from .params import EffectiveRates, MarkovRates, SystemParams, effective_rates
from .protocols import (LABEL_SUCCESS, ProtocolConfig, ProtocolContext,
                        bell_preparation_effective, ghz_preparation_effective,
                        ghz_target_effective, parity_targets,
                        run_double_herald, run_simple_protocol)
from .trajectory import DetectorModel, run_ensemble, trajectory_rng

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17e")


def write_csv(path: str, header, rows):
    """Deterministic CSV: header row, LF endings, full-precision numbers."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _num(v)
                              for v in row) + "\n")


# --- initial states ----------------------------------------------------------

def _initial_effective(cfg: ExperimentConfig):
    """(state, spectators) for the requested effective-model preparation."""
    if cfg.initial == "ghz":
        return ghz_preparation_effective(), 2
    if cfg.initial == "bell":
        v = np.zeros(4, dtype=complex)
        v[1] = v[2] = 1 / math.sqrt(2)
        return v, 0
    return bell_preparation_effective(), 0


def _initial_full(cfg: ExperimentConfig):
    if cfg.initial == "ghz":
        raise ConfigError("full-model runs support initial=product|bell only")
    if cfg.initial == "bell":
        amps = np.array([0, 1, 1, 0]) / math.sqrt(2)
    else:
        amps = np.full(4, 0.5)
    return ground_state_vector(cfg.params, amps), 0


def full_subspace_populations(psi: np.ndarray, params: SystemParams,
                              spectators: int = 0):
    """D/L/H qubit-sector populations of a full-model state, traced over
    the cavity field and spectators; excited-level amplitude is excluded."""
    n_max = params.n_max
    pops = {"D": 0.0, "L": 0.0, "H": 0.0}
    for flat, amp in enumerate(psi):
        if amp == 0:
            continue
        idx = BasisIndex.from_flat(flat, n_max, spectators)
        if idx.j == 2 or idx.k == 2:
            continue
        key = "D" if (idx.j, idx.k) == (0, 0) else \
            "H" if (idx.j, idx.k) == (1, 1) else "L"
        pops[key] += abs(amp) ** 2
    return pops


def _build_model(cfg: ExperimentConfig, spectators: int) -> Model:
    if cfg.model == "full":
        return build_full_model(cfg.params, spectators)
    return build_effective_model(effective_rates(cfg.params), spectators)


# --- experiments -------------------------------------------------------------

def _run_trajectory(cfg: ExperimentConfig, out_dir: str):
    if cfg.model == "full":
        initial, spectators = _initial_full(cfg)
    else:
        initial, spectators = _initial_effective(cfg)
    model = _build_model(cfg, spectators)
    rates = effective_rates(cfg.params)
    t_end = cfg.t_end if cfg.t_end is not None else cfg.resolved_t_max()
    times = np.linspace(0.0, t_end, cfg.n_samples)
    detector = DetectorModel(eta=cfg.params.eta)
    records = run_ensemble(model, initial, t_end, detector, cfg.base_seed,
                           cfg.runs, sample_times=times)
    mean = {k: np.zeros(len(times)) for k in ("D", "L", "H")}
    event_rows = []
    for i, rec in enumerate(records):
        for s, psi in enumerate(rec.samples):
            if cfg.model == "full":
                pops = full_subspace_populations(psi, cfg.params, spectators)
            else:
                pops = subspace_populations(psi, spectators)
            for k in mean:
                mean[k][s] += pops[k]
        for ev in rec.events:
            event_rows.append((i, ev.time, ev.channel, int(ev.detected)))
    for k in mean:
        mean[k] /= cfg.runs
    write_csv(os.path.join(out_dir, "trajectory.csv"),
              ("time", "p_D", "p_L", "p_H"),
              [(t, mean["D"][s], mean["L"][s], mean["H"][s])
               for s, t in enumerate(times)])
    write_csv(os.path.join(out_dir, "events.csv"),
              ("run", "time", "channel", "detected"), event_rows)


def _run_master(cfg: ExperimentConfig, out_dir: str):
    if cfg.model == "full":
        raise ConfigError("master experiment supports model=effective only")
    initial, spectators = _initial_effective(cfg)
    model = _build_model(cfg, spectators)
    t_end = cfg.t_end if cfg.t_end is not None else cfg.resolved_t_max()
    times = np.linspace(0.0, t_end, cfg.n_samples)[1:]
    rho0 = np.outer(initial, initial.conj())
    rows = []
    pops0 = subspace_populations(initial, spectators)
    rows.append((0.0, pops0["D"], pops0["L"], pops0["H"]))
    for t, rho in zip(times, evolve_master_series(rho0, model, times)):
        diag = np.real(np.diag(rho))
        v = diag.reshape(2 ** spectators, 4)
        p = v.sum(axis=0)
        rows.append((t, p[0], p[1] + p[2], p[3]))
    write_csv(os.path.join(out_dir, "trajectory.csv"),
              ("time", "p_D", "p_L", "p_H"), rows)


def _protocol_context(cfg: ExperimentConfig) -> tuple:
    rates = effective_rates(cfg.params)
    t_window = cfg.t_window
    if cfg.variant == "simple" and t_window is None:
        if cfg.params.eta <= 0 or rates.kappa_eff <= 0:
            raise ConfigError("t_window has no finite default at "
                              "eta * kappa_eff = 0; set protocol.t_window")
        t_window = 5.0 / (cfg.params.eta * rates.kappa_eff)
    pcfg = ProtocolConfig(
        variant=cfg.variant,
        t_window=t_window,
        t_max=cfg.resolved_t_max() if cfg.variant == "double-herald" else None,
        kappa_eff=rates.kappa_eff if cfg.variant == "simple" else None,
        eta=cfg.params.eta)
    if cfg.model == "full":
        initial, spectators = _initial_full(cfg)
    else:
        initial, spectators = _initial_effective(cfg)
    if cfg.initial == "ghz":
        target = ghz_target_effective()
    else:
        target = parity_targets(cfg.target)
    ctx = ProtocolContext(model=_build_model(cfg, spectators), cfg=pcfg,
                          detector=DetectorModel(eta=cfg.params.eta),
                          spectators=spectators, model_kind=cfg.model,
                          params=cfg.params, target=target)
    return ctx, initial


def _protocol_chunk(cfg: ExperimentConfig, indices):
    """Outcome tuples for a block of run indices (picklable worker)."""
    ctx, initial = _protocol_context(cfg)
    ctx = ctx.with_propagator()
    runner = (run_simple_protocol if cfg.variant == "simple"
              else run_double_herald)
    rows = []
    for i in indices:
        rng = trajectory_rng(cfg.base_seed, i)
        out = runner(ctx, initial, rng)
        rows.append((i, out.label, out.t1, out.t2, out.clicks, out.fidelity))
    return rows


def _run_protocol(cfg: ExperimentConfig, out_dir: str):
    indices = list(range(cfg.runs))
    if cfg.threads > 1:
        chunks = [indices[i::cfg.threads] for i in range(cfg.threads)]
        with concurrent.futures.ProcessPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(_protocol_chunk, [cfg] * len(chunks),
                                  chunks))
        rows = sorted(r for part in parts for r in part)
    else:
        rows = _protocol_chunk(cfg, indices)
    write_csv(os.path.join(out_dir, "protocol.csv"),
              ("run", "label", "t1", "t2", "clicks", "fidelity"), rows)


def _run_analytics_table(cfg: ExperimentConfig, out_dir: str):
    rows = []
    for c in cfg.c_values:
        for eta in cfg.eta_values:
            rows.append((c, eta, analytics.f_av_eta(c, eta),
                         analytics.p_suc_eta(c, eta)))
    write_csv(os.path.join(out_dir, "analytics.csv"),
              ("C", "eta", "f_av", "p_suc"), rows)


def unequal_coupling_rates(kappa_bar: float, epsilon: float,
                           delta_eff: float = 0.0) -> EffectiveRates:
    """Decay-free effective rates with couplings (1 +- epsilon) kappa_bar."""
    k1 = (1 + epsilon) * kappa_bar
    k2 = (1 - epsilon) * kappa_bar
    return EffectiveRates(delta_eff=delta_eff, gamma_eff=0.0,
                          kappa_eff=kappa_bar, gamma_eff_0=0.0,
                          gamma_eff_1=0.0, kappa_eff_1=k1, kappa_eff_2=k2,
                          coop=math.inf)


def robustness_monte_carlo(epsilon: float, kappa_bar: float, t_max: float,
                           base_seed: int, n_runs: int):
    """Double-herald ensemble with unequal couplings; returns (f_av, err)."""
    rates = unequal_coupling_rates(kappa_bar, epsilon)
    model = build_effective_model(rates)
    pcfg = ProtocolConfig(variant="double-herald", t_max=t_max)
    ctx = ProtocolContext(model=model, cfg=pcfg, detector=DetectorModel(1.0),
                          target=parity_targets("bell")).with_propagator()
    initial = bell_preparation_effective()
    fids = []
    for i in range(n_runs):
        rng = trajectory_rng(base_seed, i)
        out = run_double_herald(ctx, initial, rng)
        if out.label == LABEL_SUCCESS:
            fids.append(out.fidelity)
    if not fids:
        return float("nan"), float("nan")
    f = float(np.mean(fids))
    err = float(np.std(fids) / math.sqrt(len(fids)))
    return f, err


def _run_robustness(cfg: ExperimentConfig, out_dir: str):
    rates = effective_rates(cfg.params)
    kappa_bar = rates.kappa_eff
    # the closed form averages over unbounded click separations, so the
    # driving window must dominate the mean click time
    t_max = cfg.t_max if cfg.t_max is not None else 30.0 / kappa_bar
    rows = []
    for eps in cfg.epsilon_values:
        closed = analytics.robust_f_av(eps)
        quad = analytics.robust_f_av_quadrature(eps, kappa_bar) \
            if abs(eps) < 1 else 0.5
        mc, err = robustness_monte_carlo(eps, kappa_bar, t_max,
                                         cfg.base_seed, cfg.runs)
        rows.append((eps, closed, quad, mc, err))
    write_csv(os.path.join(out_dir, "robustness.csv"),
              ("epsilon", "f_av_closed", "f_av_quadrature", "f_av_mc",
               "mc_err"), rows)


def _run_sweep(cfg: ExperimentConfig, out_dir: str):
    rows = []
    for c in cfg.c_values:
        for eta in cfg.eta_values:
            r = MarkovRates.from_cooperativity(c, eta)
            rng = trajectory_rng(cfg.base_seed,
                                 hash((round(c, 12), round(eta, 12)))
                                 & 0xFFFFFFFF)
            stats = analytics.markov_ensemble(r, analytics.GHZ_WEIGHTS,
                                              cfg.runs, rng)
            rows.append((c, eta, analytics.f_av_eta(c, eta),
                         analytics.p_suc_eta(c, eta),
                         stats.f_av, stats.f_av_err,
                         stats.p_suc, stats.p_suc_err))
    write_csv(os.path.join(out_dir, "sweep.csv"),
              ("C", "eta", "f_av", "p_suc", "f_av_mc", "f_av_mc_err",
               "p_suc_mc", "p_suc_mc_err"), rows)


def _run_cluster_fuse(cfg: ExperimentConfig, out_dir: str):
    rows = []
    for i in range(cfg.runs):
        rng = trajectory_rng(cfg.base_seed, i)
        a = cluster.linear_cluster(cfg.size_a)
        b = cluster.linear_cluster(cfg.size_b)
        if cfg.fuse_mode == "2d":
            res = cluster.fuse_2d(a, b, cfg.fuse_k, cfg.fuse_l, rng)
        else:
            res = cluster.fuse_linear(a, b, rng)
        sizes = ";".join(str(s.n_qubits) for s in res.states)
        ov = None
        if cfg.fuse_mode == "linear" and res.outcome == cluster.OUTCOME_L:
            ov = cluster.overlap(
                res.states[0],
                cluster.linear_cluster(cfg.size_a + cfg.size_b - 1))
        rows.append((i, res.outcome, res.probability,
                     res.measurement, sizes, ov))
    write_csv(os.path.join(out_dir, "cluster_fuse.csv"),
              ("run", "outcome", "probability", "measurement", "sizes",
               "overlap"), rows)


def _run_cluster_grow(cfg: ExperimentConfig, out_dir: str):
    strategy = cluster.GrowthStrategy(fresh_size=cfg.fresh_size,
                                      nielsen=cfg.nielsen)
    rows = []
    for i in range(cfg.runs):
        rng = trajectory_rng(cfg.base_seed, i)
        stats = cluster.growth_monte_carlo(cfg.p_suc, cfg.target_size,
                                           strategy, rng, seed=i)
        rows.append((i, stats.attempts, stats.qubits_consumed,
                     int(stats.reached_target), max(stats.final_sizes),
                     stats.redundant_qubits))
    write_csv(os.path.join(out_dir, "cluster_grow.csv"),
              ("run", "attempts", "qubits_consumed", "reached_target",
               "largest_size", "redundant"), rows)


_RUNNERS = {
    "trajectory": _run_trajectory,
    "master": _run_master,
    "parity-simple": _run_protocol,
    "parity-herald": _run_protocol,
    "analytics-table": _run_analytics_table,
    "robustness": _run_robustness,
    "sweep": _run_sweep,
    "cluster-fuse": _run_cluster_fuse,
    "cluster-grow": _run_cluster_grow,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute one experiment, writing its CSVs under cfg.output_path."""
    if cfg.experiment == "parity-simple" and cfg.variant != "simple":
        cfg = replace(cfg, variant="simple")
    if cfg.experiment == "parity-herald" and cfg.variant != "double-herald":
        cfg = replace(cfg, variant="double-herald")
    out_dir = cfg.output_path
    os.makedirs(out_dir, exist_ok=True)
    _RUNNERS[cfg.experiment](cfg, out_dir)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cavityparity",
        description="Simulations of heralded parity measurements in an "
                    "atom-cavity system")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="configuration file (key = value sections)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override run.base_seed")
        sp.add_argument("--out", default=None,
                        help="override run.output_path")
        sp.add_argument("--threads", type=int, default=None,
                        help="override run.threads")
        sp.add_argument("--runs", type=int, default=None,
                        help="override run.runs")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
            if cfg.experiment != args.experiment:
                cfg = replace(cfg, experiment=args.experiment)
        else:
            cfg = parse_config(f"[run]\nexperiment = {args.experiment}\n")
        overrides = {}
        if args.seed is not None:
            overrides["base_seed"] = args.seed
        if args.out is not None:
            overrides["output_path"] = args.out
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.runs is not None:
            overrides["runs"] = args.runs
        if overrides:
            cfg = replace(cfg, **overrides)
        return run_experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
