"""Experiment configuration (YAML) and series serialization (CSV).

The config is nested key-value text.  Schema (defaults in parentheses):

    preset: oscillation | pointer | custom          [required]
    seed: int (7)              master seed; model and bath seeds derive from it
    threads: int (1)           worker threads; never changes results, only speed
    dt: float                  [required] time step / leap unit
    initial_state: up-down | singlet | list of [re, im] pairs (preset default)
    delta_quantities: [spins, correlators, entropy] (all three)
    output: str ("")           CSV series path; the run command's --out wins
    model:
      bath_spins: int (16)
      exchange: float (16.0)               central exchange J
      field_z: float (0.1)                 pointer bath field
      pair_coupling_max: float (0.013)     pointer intra-bath |U| bound
      coupling_range: [low, high] ([-0.5, 0.0])   bath-coupling A range
      central_spins: int (2)               custom preset only
      terms:                               custom preset only
        - {group: system|bath|coupling, kind: two-spin|field,
           axis: x|y|z, sites: [a] or [a, b], strength: float}
    scheduler:
      kind: one-leap | two-leap
      # one-leap: leap_steps (int) or leap_time (float), plus leaps (int)
      # two-leap: long_steps|long_time, short_steps|short_time,
      #           n_short (int), cycles (int)
    propagator:
      method: chebyshev | trotter | reference
      epsilon: float (1e-6)    Chebyshev cutoff; reference pins 1e-12

Leap lengths given as *_steps are integer multiples of dt (the only form a
Trotter run accepts); *_time is an absolute float.  Record times are always
computed as (integer step count) * dt or (leap index) * leap_time, never by
repeated accumulation.

CSV columns for a two-central-spin run (fixed order, %.17g full precision):

    time, sx1, sy1, sz1, sx2, sy2, sz2,
    corr_xx, corr_yy, corr_zz, corr_xy, corr_xz, corr_yz,
    entropy_q, rho_uu, rho_ud, rho_du, rho_dd, rho12_re, rho12_im, norm_drift

sx1 etc. are the raw <S^alpha_m>; corr_* the symmetrized first-spin
products; rho_* the rho_S diagonal in the (uu, ud, du, dd) display order
(basis indices 0, 2, 1, 3); rho12 is <ud|rho|du>.  For other central sizes
the rho block is rho_0 .. rho_{2^M-1} in index order and the rho12 columns
are omitted.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError
from .hilbert import AXES, HamiltonianTerm
from .observables import CORRELATOR_PAIRS, DELTA_QUANTITIES, ObservableRecord

_REQUIRED = object()


# ---------------------------------------------------------------------------
# schedule / propagator / model specs


@dataclass(frozen=True)
class OneLeapSchedule:
    """Repeat the same leap `leaps` times, recording after each."""

    leaps: int
    leap_steps: int | None = None
    leap_time: float | None = None

    def __post_init__(self):
        if (self.leap_steps is None) == (self.leap_time is None):
            raise ConfigError("scheduler: give exactly one of leap_steps or leap_time")
        if self.leaps < 1:
            raise ConfigError("scheduler.leaps: must be a positive integer")
        if self.leap_steps is not None and self.leap_steps < 1:
            raise ConfigError("scheduler.leap_steps: must be a positive integer")
        if self.leap_time is not None and not self.leap_time > 0:
            raise ConfigError("scheduler.leap_time: must be positive")

    def leap_length(self, dt: float) -> float:
        return self.leap_steps * dt if self.leap_steps is not None else self.leap_time


@dataclass(frozen=True)
class TwoLeapSchedule:
    """cycles x [one long leap, then n_short short leaps], recording after
    every leap.  The short burst samples fast oscillations; the long leap
    skips ahead.  A zero-length long leap degenerates to plain sampling."""

    n_short: int
    cycles: int
    long_steps: int | None = None
    long_time: float | None = None
    short_steps: int | None = None
    short_time: float | None = None

    def __post_init__(self):
        if (self.long_steps is None) == (self.long_time is None):
            raise ConfigError("scheduler: give exactly one of long_steps or long_time")
        if (self.short_steps is None) == (self.short_time is None):
            raise ConfigError("scheduler: give exactly one of short_steps or short_time")
        if self.n_short < 1:
            raise ConfigError("scheduler.n_short: must be a positive integer")
        if self.cycles < 1:
            raise ConfigError("scheduler.cycles: must be a positive integer")
        if self.long_steps is not None and self.long_steps < 0:
            raise ConfigError("scheduler.long_steps: must be non-negative")
        if self.long_time is not None and self.long_time < 0:
            raise ConfigError("scheduler.long_time: must be non-negative")
        if self.short_steps is not None and self.short_steps < 1:
            raise ConfigError("scheduler.short_steps: must be a positive integer")
        if self.short_time is not None and not self.short_time > 0:
            raise ConfigError("scheduler.short_time: must be positive")

    def long_length(self, dt: float) -> float:
        return self.long_steps * dt if self.long_steps is not None else self.long_time

    def short_length(self, dt: float) -> float:
        return self.short_steps * dt if self.short_steps is not None else self.short_time


@dataclass(frozen=True)
class PropagatorSpec:
    method: str  # chebyshev | trotter | reference
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.method not in ("chebyshev", "trotter", "reference"):
            raise ConfigError(f"propagator.method: unknown method {self.method!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("propagator.epsilon: must lie in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    dt: float
    scheduler: OneLeapSchedule | TwoLeapSchedule
    propagator: PropagatorSpec
    seed: int = 7
    threads: int = 1
    initial_state: str | tuple = ""  # "" means the preset default
    delta_quantities: tuple[str, ...] = DELTA_QUANTITIES
    output: str = ""
    bath_spins: int = 16
    exchange: float = 16.0
    field_z: float = 0.1
    pair_coupling_max: float = 0.013
    coupling_range: tuple[float, float] = (-0.5, 0.0)
    central_spins: int = 2
    custom_terms: tuple = ()  # ((group, HamiltonianTerm), ...) for preset=custom

    def __post_init__(self):
        if self.preset not in ("oscillation", "pointer", "custom"):
            raise ConfigError(f"preset: unknown preset {self.preset!r}")
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise ConfigError("dt: must be positive and finite")
        if self.threads < 1:
            raise ConfigError("threads: must be at least 1")
        if self.bath_spins < 0:
            raise ConfigError("model.bath_spins: must be non-negative")
        unknown = set(self.delta_quantities) - set(DELTA_QUANTITIES)
        if unknown:
            raise ConfigError(f"delta_quantities: unknown entries {sorted(unknown)}")
        object.__setattr__(self, "delta_quantities", tuple(self.delta_quantities))
        object.__setattr__(self, "coupling_range",
                           (float(self.coupling_range[0]), float(self.coupling_range[1])))
        if isinstance(self.initial_state, (list, tuple)):
            object.__setattr__(self, "initial_state",
                               tuple(complex(z) for z in self.initial_state))
        object.__setattr__(self, "custom_terms", tuple(self.custom_terms))

    def resolved_initial_state(self) -> str | tuple:
        if self.initial_state != "":
            return self.initial_state
        return "singlet" if self.preset == "pointer" else "up-down"


# ---------------------------------------------------------------------------
# dict <-> dataclass with field-path diagnostics


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{path or 'config'}: unknown keys {sorted(unknown)}")


def _pull(d: dict, key: str, types, path: str, default=_REQUIRED):
    if key not in d:
        if default is _REQUIRED:
            raise ConfigError(f"{path}{key}: missing required field")
        return default
    value = d[key]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if types is int and isinstance(value, bool):
        raise ConfigError(f"{path}{key}: expected an integer, got a boolean")
    if not isinstance(value, types if isinstance(types, tuple) else (types,)):
        wanted = types.__name__ if not isinstance(types, tuple) else \
            "/".join(t.__name__ for t in types)
        raise ConfigError(f"{path}{key}: expected {wanted}, got {type(value).__name__}")
    return value


def _scheduler_from_dict(d, path="scheduler."):
    if not isinstance(d, dict):
        raise ConfigError("scheduler: expected a mapping")
    kind = _pull(d, "kind", str, path)
    if kind == "one-leap":
        _check_keys(d, {"kind", "leaps", "leap_steps", "leap_time"}, "scheduler")
        return OneLeapSchedule(
            leaps=_pull(d, "leaps", int, path),
            leap_steps=_pull(d, "leap_steps", int, path, None),
            leap_time=_pull(d, "leap_time", float, path, None),
        )
    if kind == "two-leap":
        _check_keys(d, {"kind", "n_short", "cycles", "long_steps", "long_time",
                        "short_steps", "short_time"}, "scheduler")
        return TwoLeapSchedule(
            n_short=_pull(d, "n_short", int, path),
            cycles=_pull(d, "cycles", int, path),
            long_steps=_pull(d, "long_steps", int, path, None),
            long_time=_pull(d, "long_time", float, path, None),
            short_steps=_pull(d, "short_steps", int, path, None),
            short_time=_pull(d, "short_time", float, path, None),
        )
    raise ConfigError(f"scheduler.kind: unknown kind {kind!r}")


def _scheduler_to_dict(s) -> dict:
    if isinstance(s, OneLeapSchedule):
        d = {"kind": "one-leap", "leaps": s.leaps}
        if s.leap_steps is not None:
            d["leap_steps"] = s.leap_steps
        else:
            d["leap_time"] = s.leap_time
        return d
    d = {"kind": "two-leap", "n_short": s.n_short, "cycles": s.cycles}
    if s.long_steps is not None:
        d["long_steps"] = s.long_steps
    else:
        d["long_time"] = s.long_time
    if s.short_steps is not None:
        d["short_steps"] = s.short_steps
    else:
        d["short_time"] = s.short_time
    return d


_TERM_GROUPS = ("system", "bath", "coupling")


def _term_from_dict(d, path):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping")
    _check_keys(d, {"group", "kind", "axis", "sites", "strength"}, path)
    group = _pull(d, "group", str, path + ".")
    if group not in _TERM_GROUPS:
        raise ConfigError(f"{path}.group: must be one of {_TERM_GROUPS}")
    kind = _pull(d, "kind", str, path + ".")
    axis = _pull(d, "axis", str, path + ".")
    sites = _pull(d, "sites", list, path + ".")
    strength = _pull(d, "strength", float, path + ".")
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in sites):
        raise ConfigError(f"{path}.sites: expected a list of integers")
    try:
        if kind == "field":
            if len(sites) != 1:
                raise ConfigError(f"{path}.sites: a field term takes one site")
            term = HamiltonianTerm("field", axis, sites[0], None, strength)
        elif kind == "two-spin":
            if len(sites) != 2:
                raise ConfigError(f"{path}.sites: a two-spin term takes two sites")
            term = HamiltonianTerm("two-spin", axis, sites[0], sites[1], strength)
        else:
            raise ConfigError(f"{path}.kind: unknown kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return (group, term)


def _term_to_dict(group: str, term: HamiltonianTerm) -> dict:
    return {
        "group": group,
        "kind": term.kind,
        "axis": term.axis,
        "sites": list(term.sites),
        "strength": term.strength,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: expected a top-level mapping")
    _check_keys(d, {"preset", "seed", "threads", "dt", "initial_state",
                    "delta_quantities", "model", "scheduler", "propagator",
                    "output"}, "")
    preset = _pull(d, "preset", str, "")
    model = _pull(d, "model", dict, "", {})
    _check_keys(model, {"bath_spins", "exchange", "field_z", "pair_coupling_max",
                        "coupling_range", "central_spins", "terms"}, "model")
    rng_pair = _pull(model, "coupling_range", list, "model.", [-0.5, 0.0])
    if len(rng_pair) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                     for x in rng_pair):
        raise ConfigError("model.coupling_range: expected [low, high] numbers")
    terms_raw = _pull(model, "terms", list, "model.", [])
    custom_terms = tuple(
        _term_from_dict(t, f"model.terms[{i}]") for i, t in enumerate(terms_raw)
    )
    if preset != "custom" and custom_terms:
        raise ConfigError("model.terms: explicit terms are only valid with preset: custom")
    initial = _pull(d, "initial_state", (str, list), "", "")
    if isinstance(initial, list):
        amps = []
        for i, pair in enumerate(initial):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                               for x in pair)):
                raise ConfigError(f"initial_state[{i}]: expected an [re, im] pair")
            amps.append(complex(pair[0], pair[1]))
        initial = tuple(amps)
    elif initial not in ("", "up-down", "singlet"):
        raise ConfigError(f"initial_state: unknown state {initial!r}")
    quantities = _pull(d, "delta_quantities", list, "", list(DELTA_QUANTITIES))
    prop = _pull(d, "propagator", dict, "")
    _check_keys(prop, {"method", "epsilon"}, "propagator")
    try:
        return ExperimentConfig(
            preset=preset,
            seed=_pull(d, "seed", int, "", 7),
            threads=_pull(d, "threads", int, "", 1),
            dt=_pull(d, "dt", float, ""),
            initial_state=initial,
            delta_quantities=tuple(quantities),
            output=_pull(d, "output", str, "", ""),
            bath_spins=_pull(model, "bath_spins", int, "model.", 16),
            exchange=_pull(model, "exchange", float, "model.", 16.0),
            field_z=_pull(model, "field_z", float, "model.", 0.1),
            pair_coupling_max=_pull(model, "pair_coupling_max", float, "model.", 0.013),
            coupling_range=(float(rng_pair[0]), float(rng_pair[1])),
            central_spins=_pull(model, "central_spins", int, "model.", 2),
            custom_terms=custom_terms,
            scheduler=_scheduler_from_dict(_pull(d, "scheduler", dict, "")),
            propagator=PropagatorSpec(
                method=_pull(prop, "method", str, "propagator."),
                epsilon=_pull(prop, "epsilon", float, "propagator.", 1e-6),
            ),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    if isinstance(config.initial_state, tuple):
        initial = [[z.real, z.imag] for z in config.initial_state]
    else:
        initial = config.initial_state
    d = {
        "preset": config.preset,
        "seed": config.seed,
        "threads": config.threads,
        "dt": config.dt,
        "initial_state": initial,
        "delta_quantities": list(config.delta_quantities),
        "output": config.output,
        "model": {
            "bath_spins": config.bath_spins,
            "exchange": config.exchange,
            "field_z": config.field_z,
            "pair_coupling_max": config.pair_coupling_max,
            "coupling_range": list(config.coupling_range),
            "central_spins": config.central_spins,
        },
        "scheduler": _scheduler_to_dict(config.scheduler),
        "propagator": {"method": config.propagator.method,
                       "epsilon": config.propagator.epsilon},
    }
    if config.custom_terms:
        d["model"]["terms"] = [_term_to_dict(g, t) for g, t in config.custom_terms]
    return d


def parse_config(text: str) -> ExperimentConfig:
    """Parse YAML config text; raises ConfigError with field diagnostics."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ConfigError(f"config syntax error{where}: {exc}") from exc
    if raw is None:
        raise ConfigError("config: file is empty")
    return config_from_dict(raw)


def emit_config(config: ExperimentConfig) -> str:
    """Canonical YAML for a config; parse_config(emit_config(c)) == c."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


# ---------------------------------------------------------------------------
# CSV series


def csv_columns(m: int) -> list[str]:
    cols = ["time"]
    for i in range(m):
        cols += [f"sx{i + 1}", f"sy{i + 1}", f"sz{i + 1}"]
    cols += [f"corr_{a}{b}" for a, b in CORRELATOR_PAIRS]
    cols.append("entropy_q")
    if m == 2:
        cols += ["rho_uu", "rho_ud", "rho_du", "rho_dd", "rho12_re", "rho12_im"]
    else:
        cols += [f"rho_{i}" for i in range(1 << m)]
    cols.append("norm_drift")
    return cols


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_text(records) -> str:
    """Render a recorded series to CSV text (deterministic bytes)."""
    if not records:
        raise ValueError("nothing to serialize: empty series")
    m = records[0].spin_expectations.shape[0]
    out = io.StringIO()
    out.write(",".join(csv_columns(m)) + "\n")
    for r in records:
        row = [_fmt(r.time)]
        for i in range(m):
            row += [_fmt(v) for v in r.spin_expectations[i]]
        row += [_fmt(v) for v in r.correlators]
        row.append(_fmt(r.entropy_q))
        if m == 2:
            d = r.rho_diag
            row += [_fmt(d[0]), _fmt(d[2]), _fmt(d[1]), _fmt(d[3])]
            row += [_fmt(r.rho_12.real), _fmt(r.rho_12.imag)]
        else:
            row += [_fmt(v) for v in r.rho_diag]
        row.append(_fmt(r.norm_drift))
        out.write(",".join(row) + "\n")
    return out.getvalue()


def write_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(csv_text(records))


def read_series(path_or_text: str, is_text: bool = False) -> list[ObservableRecord]:
    """Rebuild ObservableRecords from a CSV file (rho_full is not stored)."""
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as f:
            text = f.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    m = sum(1 for c in header if c.startswith("sx"))
    if header != csv_columns(m):
        raise ValueError("unrecognized CSV column layout")
    idx = {c: i for i, c in enumerate(header)}
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        vals = [float(p) for p in parts]
        spins = np.array([[vals[idx[f"s{a}{i + 1}"]] for a in AXES]
                          for i in range(m)])
        corr = np.array([vals[idx[f"corr_{a}{b}"]] for a, b in CORRELATOR_PAIRS])
        if m == 2:
            diag = np.array([vals[idx["rho_uu"]], vals[idx["rho_du"]],
                             vals[idx["rho_ud"]], vals[idx["rho_dd"]]])
            rho_12 = complex(vals[idx["rho12_re"]], vals[idx["rho12_im"]])
        else:
            diag = np.array([vals[idx[f"rho_{i}"]] for i in range(1 << m)])
            rho_12 = None
        records.append(ObservableRecord(
            time=vals[idx["time"]],
            spin_expectations=spins,
            correlators=corr,
            entropy_q=vals[idx["entropy_q"]],
            rho_diag=diag,
            rho_12=rho_12,
            rho_full=None,
            norm_drift=vals[idx["norm_drift"]],
        ))
    return records


__all__ = [
    "OneLeapSchedule", "TwoLeapSchedule", "PropagatorSpec", "ExperimentConfig",
    "config_from_dict", "config_to_dict", "parse_config", "emit_config",
    "load_config", "csv_columns", "csv_text", "write_csv", "read_series",
]
