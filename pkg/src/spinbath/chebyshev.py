"""Chebyshev expansion of the evolution operator for one time leap.

With G = 2H/e1 the generator scaled into [-1, 1] and tau = e1 t / 2,

    exp(-i t H) = exp(-i tau G) = sum_k c_k T_k(G),
    c_0 = J_0(tau),   c_k = 2 (-i)^k J_k(tau)  for k >= 1,

where J_k are Bessel functions of the first kind.  |J_k(tau)| collapses
super-exponentially once k exceeds tau (envelope (tau/2)^k / k!), so the
series is truncated at the minimal order K for which every coefficient from
K on is below the cutoff epsilon.  The polynomials are never stored: three
rotating vectors carry the recurrence

    T_{k+1}(G) psi = 2 G T_k(G) psi - T_{k-1}(G) psi,

which costs exactly one application of G per retained order beyond T_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .model import SpectralBound, SpinModel, rescaled_apply
from .hilbert import WorkerPool

# Rescaling bounds for the downward recurrence working values.
_BIG = 1e250
_SMALL = 1e-250

# (-i)^k cycle, exact.
_PHASE = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


def bessel_sequence(tau: float, k_max: int) -> np.ndarray:
    """J_0(tau) .. J_k_max(tau) by downward recurrence.

    The recurrence starts at L + max(20, ceil(sqrt(40 L))) with
    L = max(k_max, ceil(tau)), i.e. far enough above both the requested
    order and the turning point k ~ tau that the seeded tail has decayed
    below double precision, and is normalized with
    J_0 + 2 sum_j J_{2j} = 1.  Absolute error is at machine level
    (tested <= 1e-14).
    """
    if tau < 0:
        raise ValueError("tau must be non-negative (pass |tau|)")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    out = np.zeros(k_max + 1)
    if tau == 0.0:
        out[0] = 1.0
        return out
    length = max(k_max, int(math.ceil(tau)))
    start = length + max(20, int(math.ceil(math.sqrt(40.0 * length))))
    f = np.zeros(start + 2)
    f[start] = _SMALL  # arbitrary seed, removed by the normalization
    for k in range(start, 0, -1):
        f[k - 1] = (2.0 * k / tau) * f[k] - f[k + 1]
        if abs(f[k - 1]) > _BIG:
            # rescale every value computed so far; entries that underflow
            # to zero are genuinely negligible at double precision
            f[k - 1:] *= _SMALL
    norm = f[0] + 2.0 * np.sum(f[2::2])
    out[:] = f[:k_max + 1] / norm
    return out


def _certified_tail_start(tau: float, epsilon: float) -> int:
    # smallest k >= tau from which the envelope 2 (tau/2)^k / k! stays
    # below epsilon (the envelope is decreasing there, so it certifies
    # every later coefficient as well)
    k = max(1, int(math.ceil(tau)))
    log_eps = math.log(epsilon)
    log_half_tau = math.log(0.5 * tau) if tau > 0 else float("-inf")
    while math.log(2.0) + k * log_half_tau - math.lgamma(k + 1) >= log_eps:
        k += 1
    return k


def expansion_order(tau: float, epsilon: float) -> int:
    """Minimal K with |c_k| < epsilon for every k >= K.

    One Bessel sweep up to the certified factorial-envelope cutoff, then a
    suffix-maximum scan; K = 1 keeps only c_0 (the tau = 0 limit).
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if tau == 0.0:
        return 1
    k_hi = _certified_tail_start(tau, epsilon)
    coef = 2.0 * np.abs(bessel_sequence(tau, k_hi))
    coef[0] *= 0.5
    suffix_max = np.maximum.accumulate(coef[::-1])[::-1]
    below = suffix_max < epsilon  # guaranteed True at k_hi by the envelope
    return max(int(np.argmax(below)), 1)


@dataclass(frozen=True)
class ChebyshevPlan:
    """Truncated expansion for one leap length.

    `coefficients` holds c_0 .. c_K; the sum uses c_0 .. c_{K-1} and the
    last entry is the first dropped coefficient, kept for diagnostics.
    """

    tau: float
    epsilon: float
    order: int
    coefficients: np.ndarray

    @property
    def tail_abs(self) -> float:
        """|c_K|, the first neglected coefficient."""
        return float(abs(self.coefficients[-1]))


def build_plan(tau: float, epsilon: float) -> ChebyshevPlan:
    order = expansion_order(tau, epsilon)
    bessel = bessel_sequence(tau, order)
    coef = np.empty(order + 1, dtype=np.complex128)
    coef[0] = bessel[0]
    for k in range(1, order + 1):
        coef[k] = 2.0 * _PHASE[k % 4] * bessel[k]
    return ChebyshevPlan(tau=tau, epsilon=epsilon, order=order, coefficients=coef)


@dataclass(frozen=True)
class LeapInfo:
    """Per-leap diagnostics: dimensionless length, kept orders, first dropped
    coefficient magnitude, and the number of generator applications."""

    tau: float
    order: int
    tail_abs: float
    g_applications: int


def propagate(state: np.ndarray, model: SpinModel, bound: SpectralBound,
              t: float, epsilon: float = 1e-6,
              plan: ChebyshevPlan | None = None,
              pool: WorkerPool | None = None) -> tuple[np.ndarray, LeapInfo]:
    """Evolve `state` by one leap of physical time t.

    Returns (new_state, LeapInfo).  The output is not renormalized; for a
    normalized input its norm deviates from 1 by at most ~10 epsilon.
    Exactly order-1 generator applications are performed (three rotating
    vectors plus the accumulator, never a table of T_k images).  A plan may
    be passed in to reuse coefficients across identical leaps.
    """
    if t < 0:
        raise ValueError("leap time must be non-negative")
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    if bound.e1 == 0.0:
        return psi.copy(), LeapInfo(tau=0.0, order=1, tail_abs=0.0, g_applications=0)
    tau = bound.tau(t)
    if plan is None:
        plan = build_plan(tau, epsilon)
    elif not math.isclose(plan.tau, tau, rel_tol=1e-12, abs_tol=1e-300):
        raise ValueError("plan was built for a different leap length")
    coef = plan.coefficients
    order = plan.order

    acc = coef[0] * psi
    g_applications = 0
    if order > 1:
        v_prev = psi
        v = rescaled_apply(psi, model, bound, pool)
        g_applications += 1
        acc += coef[1] * v
        for k in range(2, order):
            w = rescaled_apply(v, model, bound, pool)
            w *= 2.0
            w -= v_prev
            g_applications += 1
            acc += coef[k] * w
            v_prev = v
            v = w
    if not np.isfinite(acc).all():
        raise NumericError("non-finite amplitudes after a Chebyshev leap")
    return acc, LeapInfo(tau=tau, order=order, tail_abs=plan.tail_abs,
                         g_applications=g_applications)
