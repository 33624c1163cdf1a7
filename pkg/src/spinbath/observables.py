"""Reduced density matrices and the tracked observable set.

The measured quantities follow the central-spin pair convention: doubled
spin expectations 2<S^alpha_m>, quadrupled symmetrized first-spin
correlators 4<(S^a S^b + S^b S^a)/2>, and the quadratic entropy
S2 = 1 - Tr rho_S^2, all dimensionless and of order unity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import AXES, AXIS_INDEX, apply_term, field, inner_product

# fixed accumulation block over bath indices; independent of worker count
_RDM_CHUNK = 4096

# symmetrized first-spin pairs tracked by the delta metric, fixed order
CORRELATOR_PAIRS = (("x", "x"), ("y", "y"), ("z", "z"),
                    ("x", "y"), ("x", "z"), ("y", "z"))

DELTA_QUANTITIES = ("spins", "correlators", "entropy")


def reduced_density_matrix(state: np.ndarray, m: int) -> np.ndarray:
    """rho_S over the m central (low-bit) spins, tracing out the bath.

    rho[a, b] = sum_e conj(Psi[b + e 2^m]) Psi[a + e 2^m], accumulated over
    fixed-size blocks of bath indices in index order, so the result is
    deterministic for any worker count.  Exactly Hermitian by construction.
    """
    dim = state.shape[0]
    m_dim = 1 << m
    if dim % m_dim:
        raise ValueError("state length incompatible with the central dimension")
    amps = state.reshape(-1, m_dim)
    rho = np.zeros((m_dim, m_dim), dtype=np.complex128)
    for start in range(0, amps.shape[0], _RDM_CHUNK):
        blk = amps[start:start + _RDM_CHUNK]
        rho += np.einsum("ea,eb->ab", blk, blk.conj())
    return rho


def quadratic_entropy(rho: np.ndarray) -> float:
    """1 - Tr rho^2: zero for pure states, 1 - 1/d for the maximally mixed."""
    return float(1.0 - np.sum(np.abs(rho) ** 2))


def spin_expectation(state: np.ndarray, site: int, axis: str) -> float:
    """<S^axis_site> for a normalized state (real up to roundoff)."""
    return inner_product(state, apply_term(state, field(axis, site, 1.0))).real


def central_correlator(state: np.ndarray, axis_a: str, axis_b: str,
                       site: int = 0) -> float:
    """Symmetrized same-site product <(S^a S^b + S^b S^a)/2> on one spin.

    Computed as Re <S^a psi|S^b psi>.  For spin-1/2 the mixed-axis values
    vanish identically and same-axis ones equal 1/4 <psi|psi>; they are
    still measured through the operators, not asserted.
    """
    img_a = apply_term(state, field(axis_a, site, 1.0))
    img_b = apply_term(state, field(axis_b, site, 1.0))
    return inner_product(img_a, img_b).real


@dataclass(frozen=True)
class PointerDecomposition:
    """Eigensystem of rho_S: weights descending, states phase-fixed."""

    weights: np.ndarray
    states: np.ndarray  # states[i] is the eigenvector for weights[i]
    rho_12: complex | None  # <up,down|rho|down,up>, two-spin systems only


def pointer_analysis(rho: np.ndarray) -> PointerDecomposition:
    """Pointer-state decomposition with a deterministic phase convention.

    Eigenvalues come from a Hermitian eigensolve and are returned in
    descending order (ties keep the solver's relative order, which is
    deterministic for identical input).  Each eigenvector is rotated so its
    largest-magnitude component (lowest index on magnitude ties) is real
    and positive.  rho_12 is read off directly for a two-spin system:
    basis index 2 is |up,down>, index 1 is |down,up>.
    """
    w, v = np.linalg.eigh(rho)
    w = w[::-1]
    v = v[:, ::-1]
    states = np.empty((v.shape[1], v.shape[0]), dtype=np.complex128)
    for i in range(v.shape[1]):
        vec = v[:, i]
        lead = vec[int(np.argmax(np.abs(vec)))]
        if abs(lead) > 0.0:
            vec = vec * (lead.conjugate() / abs(lead))
        states[i] = vec
    rho_12 = complex(rho[2, 1]) if rho.shape == (4, 4) else None
    return PointerDecomposition(weights=np.ascontiguousarray(w),
                                states=states, rho_12=rho_12)


@dataclass(frozen=True)
class ObservableRecord:
    """Everything measured at one record time.

    spin_expectations[m, a] is the raw <S^a_m> for central spin m and axis
    a in (x, y, z) order; correlators follows CORRELATOR_PAIRS; rho_diag is
    the real diagonal of rho_S in basis-index order; norm_drift is
    |norm - 1| accumulated over the leap that produced this record, before
    renormalization.
    """

    time: float
    spin_expectations: np.ndarray
    correlators: np.ndarray
    entropy_q: float
    rho_diag: np.ndarray
    rho_12: complex | None
    rho_full: np.ndarray | None
    norm_drift: float


def record_observables(state: np.ndarray, m: int, time: float,
                       norm_drift: float = 0.0) -> ObservableRecord:
    """Measure the full tracked set on a normalized state."""
    spins = np.empty((m, 3))
    for site in range(m):
        for axis in AXES:
            spins[site, AXIS_INDEX[axis]] = spin_expectation(state, site, axis)
    corr = np.array([central_correlator(state, a, b) for a, b in CORRELATOR_PAIRS])
    rho = reduced_density_matrix(state, m)
    rho_12 = complex(rho[2, 1]) if rho.shape == (4, 4) else None
    return ObservableRecord(
        time=float(time),
        spin_expectations=spins,
        correlators=corr,
        entropy_q=quadratic_entropy(rho),
        rho_diag=np.ascontiguousarray(rho.diagonal().real),
        rho_12=rho_12,
        rho_full=rho,
        norm_drift=float(norm_drift),
    )


def _check_alignment(reference, candidate):
    if len(reference) != len(candidate):
        raise ValueError("series have different lengths")
    for r, c in zip(reference, candidate):
        if abs(r.time - c.time) > 1e-12 * max(1.0, abs(r.time)):
            raise ValueError(
                f"misaligned time grids: {r.time} vs {c.time}"
            )


def delta_metric(reference, candidate,
                 quantities: tuple[str, ...] = DELTA_QUANTITIES) -> float:
    """Largest absolute deviation of the tracked unit-normalized quantities
    over a shared time grid: 2<S^a_m>, 4 x symmetrized correlators, and the
    quadratic entropy.  The quantity set is configurable but defaults to
    exactly that list."""
    _check_alignment(reference, candidate)
    unknown = set(quantities) - set(DELTA_QUANTITIES)
    if unknown:
        raise ValueError(f"unknown delta quantities: {sorted(unknown)}")
    delta = 0.0
    for r, c in zip(reference, candidate):
        if "spins" in quantities:
            delta = max(delta, 2.0 * float(np.max(np.abs(
                r.spin_expectations - c.spin_expectations))))
        if "correlators" in quantities:
            delta = max(delta, 4.0 * float(np.max(np.abs(
                r.correlators - c.correlators))))
        if "entropy" in quantities:
            delta = max(delta, abs(r.entropy_q - c.entropy_q))
    return delta
