"""Bit-indexed spin-1/2 Hilbert space with matrix-free operator application.

A compound system of M central spins and N bath spins lives in a product
space of dimension 2**(M+N).  State vectors are plain 1-D complex128 numpy
arrays.  The basis-index convention is fixed package-wide:

* central spin m (0-based) occupies bit m of the basis index,
* bath spin n occupies bit M + n,
* bit value 0 is spin up (S^z eigenvalue +1/2), bit value 1 is spin down.

No Hamiltonian matrix is ever stored.  S^z scales an amplitude by +-1/2
according to the bit, S^x flips the bit with factor 1/2, and S^y flips it
with factor -+ i/2.  Two-spin terms compose the single-spin actions.
Operator images are returned unnormalized (they are images, not states);
normalization is always an explicit caller action.

Determinism: sums over terms and over amplitudes use fixed chunk boundaries
and a fixed combination order, so results are bit-identical for any worker
count, including 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MAX_TOTAL_SPINS = 26

AXES = ("x", "y", "z")
AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

# Fixed work granularity; never derived from the worker count.
_TERM_CHUNK = 8
_SUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class HamiltonianTerm:
    """One product term of a spin Hamiltonian.

    Either a two-spin coupling ``strength * S^axis_a S^axis_b`` or a local
    field ``strength * S^axis_a``.  ``site_b`` is None for field terms.
    """

    kind: str  # "two-spin" | "field"
    axis: str  # "x" | "y" | "z"
    site_a: int
    site_b: int | None
    strength: float

    def __post_init__(self):
        if self.kind not in ("two-spin", "field"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.site_a < 0 or (self.site_b is not None and self.site_b < 0):
            raise ValueError("term sites must be non-negative")
        if self.kind == "two-spin":
            if self.site_b is None or self.site_b == self.site_a:
                raise ValueError("a two-spin term needs two distinct sites")
        elif self.site_b is not None:
            raise ValueError("a field term carries a single site")
        if not math.isfinite(self.strength):
            raise ValueError("term strength must be finite")

    @property
    def sites(self) -> tuple[int, ...]:
        if self.site_b is None:
            return (self.site_a,)
        return (self.site_a, self.site_b)


def two_spin(axis: str, site_a: int, site_b: int, strength: float) -> HamiltonianTerm:
    return HamiltonianTerm("two-spin", axis, site_a, site_b, float(strength))


def field(axis: str, site: int, strength: float) -> HamiltonianTerm:
    return HamiltonianTerm("field", axis, site, None, float(strength))


def basis_dimension(m: int, n: int, max_total: int = MAX_TOTAL_SPINS) -> int:
    """Dimension 2**(m+n) of the compound space.

    The full state holds 2**(m+n) complex amplitudes, i.e. twice that many
    real degrees of freedom.  Raises ConfigError beyond `max_total` spins.
    """
    if m < 1:
        raise ConfigError("at least one central spin is required")
    if n < 0:
        raise ConfigError("bath size must be non-negative")
    if m + n > max_total:
        raise ConfigError(
            f"{m} central + {n} bath spins exceed the configured maximum "
            f"of {max_total} total spins"
        )
    return 1 << (m + n)


def basis_state(n_spins: int, index: int) -> np.ndarray:
    """Computational basis vector |index> on n_spins spins."""
    dim = 1 << n_spins
    if not 0 <= index < dim:
        raise ValueError("basis index out of range")
    out = np.zeros(dim, dtype=np.complex128)
    out[index] = 1.0
    return out


def _spin_count(state: np.ndarray) -> int:
    if state.ndim != 1:
        raise ValueError("state vectors are 1-D arrays")
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise ValueError("state length must be a power of two")
    return n


def _single_spin_image(src: np.ndarray, out: np.ndarray, site: int, axis: str,
                       scale: complex) -> None:
    # out <- scale * S^axis_site src, both flat views of equal length
    block = 1 << site
    s = src.reshape(-1, 2, block)
    o = out.reshape(-1, 2, block)
    up, down = s[:, 0, :], s[:, 1, :]
    half = 0.5 * scale
    if axis == "z":
        np.multiply(up, half, out=o[:, 0, :])
        np.multiply(down, -half, out=o[:, 1, :])
    elif axis == "x":
        np.multiply(down, half, out=o[:, 0, :])
        np.multiply(up, half, out=o[:, 1, :])
    else:
        np.multiply(down, -1j * half, out=o[:, 0, :])
        np.multiply(up, 1j * half, out=o[:, 1, :])


def apply_term(state: np.ndarray, term: HamiltonianTerm) -> np.ndarray:
    """Image of one Hamiltonian term applied to `state` (unnormalized)."""
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    n = _spin_count(psi)
    if any(site >= n for site in term.sites):
        raise ValueError("term sites outside the state's basis")
    out = np.empty_like(psi)
    if term.kind == "field":
        _single_spin_image(psi, out, term.site_a, term.axis, term.strength)
    else:
        tmp = np.empty_like(psi)
        _single_spin_image(psi, tmp, term.site_b, term.axis, 1.0)
        _single_spin_image(tmp, out, term.site_a, term.axis, term.strength)
    return out


class WorkerPool:
    """Thread pool whose work split never depends on the worker count.

    Items are mapped in fixed chunks and recombined in submission order, so
    any pool size produces bit-identical floating-point results.
    """

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ConfigError("worker count must be at least 1")
        self.workers = int(workers)
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def map(self, fn, items):
        if self._pool is None:
            return [fn(item) for item in items]
        return list(self._pool.map(fn, items))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def apply_hamiltonian(state: np.ndarray, model, pool: WorkerPool | None = None) -> np.ndarray:
    """H|state>: the sum of all term images of `model`.

    `model` is anything exposing `all_terms`.  Terms are grouped in fixed
    chunks and the chunk images are added in chunk order, independent of the
    pool, so the result does not depend on the worker count.
    """
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    terms = model.all_terms
    if not terms:
        return np.zeros_like(psi)

    chunks = [terms[i:i + _TERM_CHUNK] for i in range(0, len(terms), _TERM_CHUNK)]

    def chunk_image(chunk):
        img = apply_term(psi, chunk[0])
        for t in chunk[1:]:
            img += apply_term(psi, t)
        return img

    if pool is None:
        images = (chunk_image(c) for c in chunks)
    else:
        images = pool.map(chunk_image, chunks)
    out = None
    for img in images:
        if out is None:
            out = img
        else:
            out += img
    return out


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b> with conjugation on `a`.

    Accumulated over fixed 2**16-element chunks in index order; the reduction
    never runs on a thread pool, so it is deterministic by construction.
    """
    if a.shape != b.shape:
        raise ValueError("states live in different spaces")
    total = 0.0 + 0.0j
    for start in range(0, a.shape[0], _SUM_CHUNK):
        sl = slice(start, start + _SUM_CHUNK)
        total += np.sum(np.conj(a[sl]) * b[sl])
    return complex(total)


def vector_norm(state: np.ndarray) -> float:
    return math.sqrt(inner_product(state, state).real)


def random_bath_state(n: int, seed: int) -> np.ndarray:
    """Normalized bath state with i.i.d. complex-Gaussian amplitudes.

    The rotation-invariant ensemble on the 2**n sphere; fully reproducible
    from `seed`.
    """
    if n < 1:
        raise ValueError("a random bath needs at least one spin")
    rng = np.random.default_rng(seed)
    parts = rng.standard_normal((2, 1 << n))
    psi = parts[0] + 1j * parts[1]
    return psi / vector_norm(psi)


def product_state(system: np.ndarray, bath: np.ndarray) -> np.ndarray:
    """Tensor product with the central amplitudes in the low bits.

    Psi[a + e * 2**M] = system[a] * bath[e].  Norm is the product of the
    factor norms.
    """
    sys_v = np.ascontiguousarray(system, dtype=np.complex128)
    bath_v = np.ascontiguousarray(bath, dtype=np.complex128)
    _spin_count(sys_v)
    _spin_count(bath_v)
    return np.multiply.outer(bath_v, sys_v).reshape(-1)
