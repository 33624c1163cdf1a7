"""Experiment runners: schedulers, benchmark triples, oscillation fits.

A run takes an ExperimentConfig, builds the model and initial state from the
master seed, then advances the state leap by leap, recording observables after
every leap.  Record times come from closed formulas over leap indices (never
from accumulating floats), so the grids of two runs with the same scheduler
match exactly and delta_metric can compare them.

Normalization policy: the state is renormalized after every leap and the
pre-renormalization drift |<psi|psi> - 1| is recorded with that point; the
reported max_norm_drift is the largest single-leap drift, which is what the
unitarity bound constrains.

Wall times are split three ways (setup: model sampling and plan or
coefficient construction; propagation: leaps plus renormalization;
observables: reduced density matrix and expectation extraction) so that
operation-count ratios can be read next to time ratios without I/O noise.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import chebyshev, trotter
from .config import (ExperimentConfig, OneLeapSchedule, PropagatorSpec,
                     TwoLeapSchedule, config_to_dict)
from .errors import ConfigError, NumericError
from .hilbert import (AXIS_INDEX, WorkerPool, basis_state, product_state,
                      random_bath_state, vector_norm)
from .model import (SpinModel, energy_bound_e1, oscillation_preset,
                    pointer_preset)
from .observables import delta_metric, record_observables


def _spawn_seeds(seed: int, count: int) -> tuple:
    seqs = np.random.SeedSequence(seed).spawn(count)
    return tuple(int(s.generate_state(1, np.uint64)[0]) for s in seqs)


# ---------------------------------------------------------------------------
# model and state construction


def build_model(config: ExperimentConfig, model_seed: int) -> SpinModel:
    if config.preset == "oscillation":
        return oscillation_preset(config.bath_spins, j=config.exchange,
                                  seed=model_seed)
    if config.preset == "pointer":
        return pointer_preset(config.bath_spins, j=config.exchange,
                              h=config.field_z, u_max=config.pair_coupling_max,
                              seed=model_seed,
                              coupling_range=config.coupling_range)
    # custom: explicit term list, no sampling
    groups = {"system": [], "bath": [], "coupling": []}
    for group, term in config.custom_terms:
        groups[group].append(term)
    try:
        return SpinModel(
            m=config.central_spins,
            n=config.bath_spins,
            system_terms=tuple(groups["system"]),
            bath_terms=tuple(groups["bath"]),
            coupling_terms=tuple(groups["coupling"]),
            metadata={"preset": "custom"},
        )
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"model.terms: {exc}") from None


def central_state(spec, m: int) -> np.ndarray:
    """Build the initial central-spin state: a named state or amplitudes."""
    if spec == "up-down":
        if m != 2:
            raise ConfigError("initial_state: up-down needs two central spins")
        return basis_state(2, 2)  # spin 1 up, spin 2 down
    if spec == "singlet":
        if m != 2:
            raise ConfigError("initial_state: singlet needs two central spins")
        psi = np.zeros(4, dtype=np.complex128)
        psi[2] = 1.0 / math.sqrt(2.0)   # |up down>
        psi[1] = -1.0 / math.sqrt(2.0)  # |down up>
        return psi
    amps = np.asarray(spec, dtype=np.complex128)
    if amps.shape != (1 << m,):
        raise ConfigError(
            f"initial_state: expected {1 << m} amplitudes, got {amps.shape}")
    norm = vector_norm(amps)
    if norm == 0.0:
        raise ConfigError("initial_state: amplitudes have zero norm")
    return amps / norm


def prepare_run(config: ExperimentConfig):
    """Sample the model and assemble the full initial state.

    Returns (model, psi0, seeds) where seeds is the (model_seed, bath_seed)
    pair derived from the master seed.  The derivation order is part of the
    reproducibility contract: model first, bath second.
    """
    model_seed, bath_seed = _spawn_seeds(config.seed, 2)
    model = build_model(config, model_seed)
    central = central_state(config.resolved_initial_state(), model.m)
    bath = random_bath_state(model.n, bath_seed)
    return model, product_state(central, bath), (model_seed, bath_seed)


# ---------------------------------------------------------------------------
# leap sequencing


def leap_times(scheduler, dt: float):
    """Expand a scheduler into (durations, record_times).

    durations has one entry per leap; record_times has one more entry, the
    leading 0.0 for the initial record.  Times are closed-form in the leap
    index so every method lands on the identical grid.
    """
    if isinstance(scheduler, OneLeapSchedule):
        span = scheduler.leap_length(dt)
        durations = [span] * scheduler.leaps
        record = [i * span for i in range(scheduler.leaps + 1)]
        return durations, record
    long_span = scheduler.long_length(dt)
    short_span = scheduler.short_length(dt)
    if long_span <= scheduler.n_short * short_span:
        warnings.warn(
            "two-leap schedule: the long leap does not exceed the burst span; "
            "the bursts will overlap the region they are meant to skip",
            stacklevel=2)
    durations, record = [], [0.0]
    for c in range(scheduler.cycles):
        durations.append(long_span)
        record.append((c + 1) * long_span + (c * scheduler.n_short) * short_span)
        for j in range(1, scheduler.n_short + 1):
            durations.append(short_span)
            record.append((c + 1) * long_span
                          + (c * scheduler.n_short + j) * short_span)
    return durations, record


def _burst_slices(scheduler: TwoLeapSchedule):
    width = scheduler.n_short + 1
    return [slice(1 + c * width, 1 + (c + 1) * width)
            for c in range(scheduler.cycles)]


# ---------------------------------------------------------------------------
# propagation driver


class _Propagation:
    """Uniform leap interface over the two propagators, with op counting."""

    def __init__(self, model, spec: PropagatorSpec, dt: float, pool):
        self.model = model
        self.pool = pool
        self.is_chebyshev = spec.method in ("chebyshev", "reference")
        self.epsilon = 1e-12 if spec.method == "reference" else spec.epsilon
        self.g_applications = 0
        self.steps = 0
        self.term_exponentials = 0
        self.setup_seconds = 0.0
        self.leap_diagnostics = []
        t0 = time.perf_counter()
        if self.is_chebyshev:
            self.bound = energy_bound_e1(model)
            self._plans = {}
        else:
            self.plan = trotter.build_plan(model, dt)
        self.setup_seconds += time.perf_counter() - t0

    def _plan_for(self, span: float):
        plan = self._plans.get(span)
        if plan is None:
            t0 = time.perf_counter()
            plan = chebyshev.build_plan(self.bound.tau(span), self.epsilon)
            self.setup_seconds += time.perf_counter() - t0
            self._plans[span] = plan
            self.leap_diagnostics.append({
                "leap_time": span, "tau": plan.tau, "order": plan.order,
                "tail_abs": plan.tail_abs,
            })
        return plan

    def leap(self, psi: np.ndarray, span: float) -> np.ndarray:
        if self.is_chebyshev:
            plan = self._plan_for(span) if self.bound.e1 != 0.0 else None
            psi, info = chebyshev.propagate(psi, self.model, self.bound, span,
                                            epsilon=self.epsilon, plan=plan,
                                            pool=self.pool)
            self.g_applications += info.g_applications
        else:
            psi, info = trotter.propagate(psi, self.plan, span)
            if not self.leap_diagnostics or \
                    self.leap_diagnostics[-1]["leap_time"] != span:
                self.leap_diagnostics.append(
                    {"leap_time": span, "steps": info.steps})
            self.steps += info.steps
            self.term_exponentials += info.term_exponentials
        return psi

    def op_counts(self) -> dict:
        counts = {"hamiltonian_terms": len(self.model.all_terms)}
        if self.is_chebyshev:
            counts["g_applications"] = self.g_applications
        else:
            counts["trotter_steps"] = self.steps
            counts["term_exponentials"] = self.term_exponentials
        return counts


@dataclass
class RunReport:
    method: str
    records: tuple
    op_counts: dict
    setup_seconds: float
    propagation_seconds: float
    observable_seconds: float
    leap_diagnostics: tuple
    max_norm_drift: float
    fitted_frequency: float | None
    burst_amplitudes: tuple
    config_echo: dict


def run_experiment(config: ExperimentConfig) -> RunReport:
    durations, record_times = leap_times(config.scheduler, config.dt)
    setup0 = time.perf_counter()
    model, psi, seeds = prepare_run(config)
    prepare_seconds = time.perf_counter() - setup0
    pool = WorkerPool(config.threads) if config.threads > 1 else None
    try:
        prop = _Propagation(model, config.propagator, config.dt, pool)
        obs_seconds = 0.0
        prop_seconds = 0.0
        max_drift = 0.0
        t0 = time.perf_counter()
        records = [record_observables(psi, model.m, 0.0)]
        obs_seconds += time.perf_counter() - t0
        for span, when in zip(durations, record_times[1:]):
            t0 = time.perf_counter()
            psi = prop.leap(psi, span)
            norm = vector_norm(psi)
            drift = abs(norm * norm - 1.0)
            if norm == 0.0:
                raise NumericError("propagated state collapsed to zero")
            psi = psi / norm
            prop_seconds += time.perf_counter() - t0
            max_drift = max(max_drift, drift)
            t0 = time.perf_counter()
            records.append(record_observables(psi, model.m, when,
                                              norm_drift=drift))
            obs_seconds += time.perf_counter() - t0
    finally:
        if pool is not None:
            pool.close()

    frequency = None
    amplitudes = ()
    if isinstance(config.scheduler, TwoLeapSchedule):
        frequency, amplitudes = burst_summary(records, config.scheduler)

    echo = config_to_dict(config)
    echo["model_seed"], echo["bath_seed"] = seeds
    echo["t_max"] = record_times[-1]
    echo["model_metadata"] = dict(model.metadata)
    method = config.propagator.method
    return RunReport(
        method=method,
        records=tuple(records),
        op_counts=prop.op_counts(),
        setup_seconds=prepare_seconds + prop.setup_seconds,
        propagation_seconds=prop_seconds,
        observable_seconds=obs_seconds,
        leap_diagnostics=tuple(prop.leap_diagnostics),
        max_norm_drift=max_drift,
        fitted_frequency=frequency,
        burst_amplitudes=tuple(amplitudes),
        config_echo=echo,
    )


def run_one_leap(config: ExperimentConfig) -> RunReport:
    if not isinstance(config.scheduler, OneLeapSchedule):
        raise ConfigError("scheduler: run_one_leap needs a one-leap schedule")
    return run_experiment(config)


def run_two_leap(config: ExperimentConfig) -> RunReport:
    if not isinstance(config.scheduler, TwoLeapSchedule):
        raise ConfigError("scheduler: run_two_leap needs a two-leap schedule")
    return run_experiment(config)


# ---------------------------------------------------------------------------
# oscillation fits


def series_component(records, spin: int = 0, axis: str = "z", doubled=True):
    """Extract (times, values) for one spin component from a record list."""
    t = np.array([r.time for r in records])
    scale = 2.0 if doubled else 1.0
    y = np.array([scale * r.spin_expectations[spin, AXIS_INDEX[axis]]
                  for r in records])
    return t, y


def zero_crossing_frequency(times, values):
    """Angular frequency from mean zero-crossing spacing; None if < 2 crossings."""
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    y = y - y.mean()
    sign = np.sign(y)
    # walk exact zeros forward so a grid point on the axis is not two crossings
    for i in range(1, len(sign)):
        if sign[i] == 0.0:
            sign[i] = sign[i - 1]
    hits = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(hits) < 2:
        return None
    frac = y[hits] / (y[hits] - y[hits + 1])
    crossings = t[hits] + frac * (t[hits + 1] - t[hits])
    spacing = float(np.mean(np.diff(crossings)))
    if spacing <= 0.0:
        return None
    return math.pi / spacing


def _fit_amplitude(times, values, omega: float) -> float:
    """Amplitude of a cos/sin/constant least-squares fit at fixed omega.

    The 3x3 normal equations are summed explicitly (no BLAS) so the result
    does not depend on the thread count.
    """
    t = np.asarray(times, dtype=np.float64)
    t = t - t[0]
    y = np.asarray(values, dtype=np.float64)
    cols = (np.cos(omega * t), np.sin(omega * t), np.ones_like(t))
    normal = np.array([[float(np.sum(a * b)) for b in cols] for a in cols])
    rhs = np.array([float(np.sum(a * y)) for a in cols])
    try:
        sol = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError:
        return 0.5 * float(np.max(y) - np.min(y))
    return math.hypot(float(sol[0]), float(sol[1]))


def oscillation_summary(times, values, windows: int = 8, frequency=None):
    """Fit (frequency, per-window amplitudes) to an oscillating series.

    Frequency comes from zero crossings unless given.  Each window of the
    series gets its own amplitude from a fixed-frequency sinusoid fit, which
    tracks decoherence envelopes without assuming a decay law.
    """
    if frequency is None:
        frequency = zero_crossing_frequency(times, values)
    if frequency is None:
        raise ValueError("no oscillation detected; pass frequency explicitly")
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    amplitudes = [
        _fit_amplitude(t[part], y[part], frequency)
        for part in np.array_split(np.arange(len(t)), windows) if len(part) >= 3
    ]
    return frequency, np.array(amplitudes)


def burst_summary(records, scheduler: TwoLeapSchedule, spin: int = 0,
                  axis: str = "z"):
    """Per-burst amplitudes for a two-leap run.

    Each burst (long-leap arrival plus the short leaps after it) is fit
    separately; the frequency is pooled across bursts first so sparse bursts
    still get a stable fit.
    """
    t, y = series_component(records, spin=spin, axis=axis)
    slices = _burst_slices(scheduler)
    estimates = [zero_crossing_frequency(t[s], y[s]) for s in slices]
    estimates = [f for f in estimates if f is not None]
    frequency = float(np.mean(estimates)) if estimates else None
    if frequency is None:
        amplitudes = [0.5 * float(np.max(y[s]) - np.min(y[s])) for s in slices]
    else:
        amplitudes = [_fit_amplitude(t[s], y[s], frequency) for s in slices]
    return frequency, tuple(amplitudes)


# ---------------------------------------------------------------------------
# benchmark triple


@dataclass
class CompareResult:
    reference: RunReport
    candidate: RunReport
    baseline: RunReport
    delta_candidate: float
    delta_baseline: float
    work_ratio: float | None
    time_ratio: float | None


def benchmark_compare(config: ExperimentConfig, reference_spec=None,
                      baseline_spec=None) -> CompareResult:
    """Run reference, candidate, and baseline over one physical scenario.

    The three runs share the seed, so they share the model and initial state;
    only the propagator differs.  work_ratio counts baseline term
    exponentials against candidate G-applications times the term count, the
    operation-level analogue of a CPU-time ratio.
    """
    if reference_spec is None:
        reference_spec = PropagatorSpec("reference", 1e-12)
    if baseline_spec is None:
        baseline_spec = PropagatorSpec("trotter")
    reference = run_experiment(replace(config, propagator=reference_spec))
    candidate = run_experiment(config)
    baseline = run_experiment(replace(config, propagator=baseline_spec))
    delta_candidate = delta_metric(reference.records, candidate.records,
                                   config.delta_quantities)
    delta_baseline = delta_metric(reference.records, baseline.records,
                                  config.delta_quantities)
    work_ratio = None
    base_exps = baseline.op_counts.get("term_exponentials")
    cand_gapps = candidate.op_counts.get("g_applications")
    if base_exps and cand_gapps:
        work_ratio = base_exps / (cand_gapps
                                  * candidate.op_counts["hamiltonian_terms"])
    time_ratio = None
    if candidate.propagation_seconds > 0.0:
        time_ratio = baseline.propagation_seconds / candidate.propagation_seconds
    return CompareResult(reference, candidate, baseline, delta_candidate,
                         delta_baseline, work_ratio, time_ratio)


def _ops_cell(report: RunReport) -> str:
    ops = report.op_counts
    if "g_applications" in ops:
        return f"{ops['g_applications']} G-apps x {ops['hamiltonian_terms']} terms"
    return f"{ops['term_exponentials']} term-exps ({ops['trotter_steps']} steps)"


def comparison_table(result: CompareResult) -> str:
    """Human-readable triple-run table: method, grid, delta, ops, seconds."""
    echo = result.candidate.config_echo
    dt = echo["dt"]
    t_max = echo["t_max"]
    rows = [("reference", result.reference, ""),
            ("candidate", result.candidate, f"{result.delta_candidate:.3e}"),
            ("baseline", result.baseline, f"{result.delta_baseline:.3e}")]
    header = (f"{'run':<11}{'method':<11}{'dt':<9}{'t_max':<11}{'epsilon':<10}"
              f"{'delta':<12}{'ops':<34}{'setup_s':<10}{'prop_s':<10}")
    lines = [header, "-" * len(header)]
    for label, report, delta in rows:
        eps = report.config_echo["propagator"]["epsilon"]
        eps_cell = "--" if report.method == "trotter" else f"{eps:.0e}"
        lines.append(
            f"{label:<11}{report.method:<11}{dt:<9g}{t_max:<11g}"
            f"{eps_cell:<10}{delta or '--':<12}{_ops_cell(report):<34}"
            f"{report.setup_seconds:<10.3f}{report.propagation_seconds:<10.3f}")
    if result.work_ratio is not None:
        lines.append(f"work ratio (baseline term-exps / candidate G-apps x terms): "
                     f"{result.work_ratio:.3f}")
    if result.time_ratio is not None:
        lines.append(f"propagation time ratio (baseline / candidate): "
                     f"{result.time_ratio:.3f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# named benchmark scenarios


SCENARIOS = {
    "table1-test1": ("oscillation", 0.035, {"kind": "one-leap",
                                            "leap_steps": 200, "leaps": 8}),
    "table1-test2": ("oscillation", 0.035, {"kind": "one-leap",
                                            "leap_steps": 8, "leaps": 200}),
    "table1-test3": ("oscillation", 0.035, {"kind": "one-leap",
                                            "leap_steps": 2, "leaps": 800}),
    "table2-test4": ("oscillation", 0.02, {"kind": "two-leap",
                                           "long_steps": 150, "short_steps": 1,
                                           "n_short": 21, "cycles": 8}),
    "table2-test5": ("oscillation", 0.02, {"kind": "two-leap",
                                           "long_steps": 300, "short_steps": 1,
                                           "n_short": 21, "cycles": 8}),
    "table3-test6": ("pointer", 0.14, {"kind": "one-leap",
                                       "leap_steps": 100, "leaps": 500}),
    "table3-test7": ("pointer", 0.14, {"kind": "one-leap",
                                       "leap_steps": 10, "leaps": 5000}),
    "table3-test8": ("pointer", 0.14, {"kind": "one-leap",
                                       "leap_steps": 1000, "leaps": 50}),
}


def scenario_config(name: str, bath_spins: int = 16, seed: int = 7,
                    epsilon: float = 1e-6, threads: int = 1) -> ExperimentConfig:
    """Build the config for a named benchmark scenario.

    The catalog pairs the standard one- and two-leap geometries with the two
    model presets at their standard step sizes; bath size and seed stay free
    so the same geometry can run at desk scale.
    """
    if name not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise ConfigError(f"unknown scenario {name!r} (known: {known})")
    preset, dt, sched = SCENARIOS[name]
    if sched["kind"] == "one-leap":
        scheduler = OneLeapSchedule(leaps=sched["leaps"],
                                    leap_steps=sched["leap_steps"])
    else:
        scheduler = TwoLeapSchedule(n_short=sched["n_short"],
                                    cycles=sched["cycles"],
                                    long_steps=sched["long_steps"],
                                    short_steps=sched["short_steps"])
    exchange = 16.0 if preset == "oscillation" else 0.1
    return ExperimentConfig(
        preset=preset, dt=dt, scheduler=scheduler,
        propagator=PropagatorSpec("chebyshev", epsilon),
        seed=seed, threads=threads, bath_spins=bath_spins, exchange=exchange,
    )


__all__ = [
    "RunReport", "CompareResult", "build_model", "central_state",
    "prepare_run", "leap_times", "run_experiment", "run_one_leap",
    "run_two_leap", "series_component", "zero_crossing_frequency",
    "oscillation_summary", "burst_summary", "benchmark_compare",
    "comparison_table", "SCENARIOS", "scenario_config",
]
