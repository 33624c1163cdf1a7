"""Spin-bath Hamiltonians, spectral bounds, and the two experiment presets.

A model is H = H_S + H_B + V: central-system terms, bath terms, and
central-bath couplings.  All terms are products of at most two spin-1/2
operators along a single axis, which is what the matrix-free kernels in
`hilbert` understand.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError, ZeroGenerator
from .hilbert import (
    AXES,
    HamiltonianTerm,
    WorkerPool,
    apply_hamiltonian,
    basis_dimension,
    field,
    two_spin,
)


@dataclass(frozen=True)
class SpinModel:
    """Immutable spin-bath model: M central spins, N bath spins, three term groups.

    Site indices: central spins are 0..m-1, bath spins m..m+n-1.  `metadata`
    carries sampled couplings and preset parameters for exact reproduction;
    it never affects equality.
    """

    m: int
    n: int
    system_terms: tuple[HamiltonianTerm, ...]
    bath_terms: tuple[HamiltonianTerm, ...]
    coupling_terms: tuple[HamiltonianTerm, ...]
    metadata: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "system_terms", tuple(self.system_terms))
        object.__setattr__(self, "bath_terms", tuple(self.bath_terms))
        object.__setattr__(self, "coupling_terms", tuple(self.coupling_terms))
        basis_dimension(self.m, self.n)  # validates sizes, raises ConfigError
        for t in self.system_terms:
            if any(s >= self.m for s in t.sites):
                raise ConfigError(f"system term touches a non-central site: {t}")
        for t in self.bath_terms:
            if any(not self.m <= s < self.m + self.n for s in t.sites):
                raise ConfigError(f"bath term touches a non-bath site: {t}")
        for t in self.coupling_terms:
            if t.kind != "two-spin":
                raise ConfigError("coupling terms must be two-spin products")
            central = [s for s in t.sites if s < self.m]
            bath = [s for s in t.sites if self.m <= s < self.m + self.n]
            if len(central) != 1 or len(bath) != 1:
                raise ConfigError(f"coupling term must pair one central and one bath site: {t}")
        object.__setattr__(
            self, "_all_terms",
            self.system_terms + self.coupling_terms + self.bath_terms,
        )

    @property
    def n_sites(self) -> int:
        return self.m + self.n

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def all_terms(self) -> tuple[HamiltonianTerm, ...]:
        return self._all_terms  # type: ignore[attr-defined]

    def coupling_b(self) -> float:
        """Sum of squared bath-coupling strengths, one per bath spin.

        Reads the z-axis couplings attached to central spin 0, which every
        preset emits exactly once per bath spin.
        """
        return sum(
            t.strength ** 2
            for t in self.coupling_terms
            if t.axis == "z" and t.site_a == 0
        )


@dataclass(frozen=True)
class SpectralBound:
    """Rigorous bound e1 on the full spectral spread of H (e1 >= 2 max|<H>|)."""

    e1: float

    def tau(self, t: float) -> float:
        """Dimensionless leap length for a physical time t."""
        return 0.5 * self.e1 * t


def energy_bound_e1(model: SpinModel) -> SpectralBound:
    """Triangle-inequality spectral bound.

    Each two-spin term contributes |strength| * 2 * (1/2)(1/2) = |strength|/2
    and each field term |strength| * 2 * (1/2) = |strength|, so the scaled
    generator 2 H / e1 has its numerical range inside [-1, 1].  No centering
    shift is applied (the spectrum is treated as symmetric about zero).
    """
    e1 = 0.0
    for t in model.all_terms:
        e1 += abs(t.strength) * (0.5 if t.kind == "two-spin" else 1.0)
    return SpectralBound(e1=e1)


def rescaled_apply(state: np.ndarray, model: SpinModel, bound: SpectralBound,
                   pool: WorkerPool | None = None) -> np.ndarray:
    """G|state> = (2/e1) H|state>, the generator with range inside [-1, 1].

    Raises ZeroGenerator when e1 == 0 so callers can skip the expansion
    entirely (evolution is the identity).
    """
    if bound.e1 == 0.0:
        raise ZeroGenerator("spectral bound is zero; evolution is the identity")
    img = apply_hamiltonian(state, model, pool)
    img *= 2.0 / bound.e1
    return img


def oscillation_preset(n_bath: int, j: float = 16.0, seed: int = 0) -> SpinModel:
    """Two exchange-coupled central spins, both coupled isotropically to
    every bath spin; the bath itself is free.

    H_S = j S_1.S_2, V = sum_n A_n (S_1 + S_2).I_n with A_n i.i.d. uniform
    on (-0.5, 0], sampled from `seed`.
    """
    if n_bath < 1:
        raise ConfigError("the oscillation preset needs at least one bath spin")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.5, 0.0, n_bath)
    system = tuple(two_spin(ax, 0, 1, j) for ax in AXES)
    coupling = tuple(
        two_spin(ax, m, 2 + k, a[k])
        for k in range(n_bath)
        for m in (0, 1)
        for ax in AXES
    )
    meta = {
        "preset": "oscillation",
        "exchange": float(j),
        "seed": int(seed),
        "couplings_a": [float(x) for x in a],
        "b": float(sum(float(x) ** 2 for x in a)),
    }
    return SpinModel(2, n_bath, system, (), coupling, metadata=meta)


def pointer_preset(n_bath: int, j: float = 0.1, h: float = 0.1,
                   u_max: float = 0.013, seed: int = 0,
                   coupling_range: tuple[float, float] = (-0.5, 0.0)) -> SpinModel:
    """Weakly exchange-coupled central pair; only spin 1 talks to the bath.

    H_S = j S_1.S_2, V = sum_n A_n S_1.I_n with A_n uniform on
    `coupling_range`, and a self-interacting bath
    H_B = sum_n h I^z_n + sum_{n<n'} U_{nn'} I^x_n I^x_{n'} with U uniform on
    [-u_max, u_max].  Sampling order (A first, then U over lexicographic
    pairs) is part of the reproducibility contract.
    """
    if n_bath < 1:
        raise ConfigError("the pointer preset needs at least one bath spin")
    if u_max < 0:
        raise ConfigError("pair-coupling bound must be non-negative")
    lo, hi = float(coupling_range[0]), float(coupling_range[1])
    if not lo <= hi:
        raise ConfigError("coupling range must be ordered (low, high)")
    rng = np.random.default_rng(seed)
    a = rng.uniform(lo, hi, n_bath)
    pairs = [(p, q) for p in range(n_bath) for q in range(p + 1, n_bath)]
    u = rng.uniform(-u_max, u_max, len(pairs))
    system = tuple(two_spin(ax, 0, 1, j) for ax in AXES)
    coupling = tuple(
        two_spin(ax, 0, 2 + k, a[k]) for k in range(n_bath) for ax in AXES
    )
    bath = tuple(field("z", 2 + k, h) for k in range(n_bath)) + tuple(
        two_spin("x", 2 + p, 2 + q, u[i]) for i, (p, q) in enumerate(pairs)
    )
    meta = {
        "preset": "pointer",
        "exchange": float(j),
        "field_z": float(h),
        "pair_coupling_max": float(u_max),
        "coupling_range": [lo, hi],
        "seed": int(seed),
        "couplings_a": [float(x) for x in a],
        "couplings_u": [float(x) for x in u],
        "b": float(sum(float(x) ** 2 for x in a)),
    }
    return SpinModel(2, n_bath, system, bath, coupling, metadata=meta)
