"""Closed-form predictions for periodic and regularly perturbed pulse trains.

Two coupling conventions coexist on purpose: :func:`photons_resonant` takes
the amplitude reflection ``|r|`` of one barrier, while :func:`photons_detuned`
and :func:`photons_alternating` take ``|g|``.  They are related by
``|r| = |g| / |f| = tanh(nu)`` and ``|g| = sinh(nu)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyTrain, NumericalBreakdown
from .numerics import DEFAULT_POLICY, NumericPolicy
from .scattering import BarrierCoefficients, CanonicalBarrier, TransferState, canonicalize


@dataclass(frozen=True)
class PulseSchedule:
    """Strictly periodic train with a systematic offset from resonance.

    ``theta`` is the phase ``omega T`` between consecutive pulses,
    ``theta_res`` the resonant value and ``delta_theta = theta - theta_res``.
    """

    theta: float
    n: int
    theta_res: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @classmethod
    def at_resonance(cls, barrier: CanonicalBarrier, n: int, m: int = 0,
                     delta_theta: float = 0.0, omega: float = 1.0) -> "PulseSchedule":
        theta_res, _ = resonance_phase(barrier, m, omega)
        return cls(theta_res + delta_theta, n, theta_res, omega)

    @property
    def delta_theta(self) -> float:
        return self.theta - self.theta_res

    @property
    def T0(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def T(self) -> float:
        return self.theta / self.omega

    def phases(self) -> np.ndarray:
        """Start phase of the k-th barrier, ``(k - 1) theta`` for k = 1..n."""
        return self.theta * np.arange(self.n)


@dataclass(frozen=True)
class AlternatingSpec:
    """Periodic schedule with jumps ``+chi`` on odd and ``-chi`` on even pulses."""

    chi: float
    schedule: PulseSchedule

    def phases(self) -> np.ndarray:
        k = np.arange(1, self.schedule.n + 1)
        return self.schedule.phases() + np.where(k % 2 == 1, self.chi, -self.chi)


# ----------------------------------------------------------------------------
# Chebyshev powers


def _u_near_one(k: int, delta: float) -> float:
    """``U_k(1 + delta)`` by the recurrence rewritten in differences.

    The plain three-term recurrence would need ``z = 1 + delta`` rounded to
    double precision, which discards most of ``delta``.
    """
    if k < 0:
        return 0.0
    u, d = 1.0, 1.0  # U_0, U_0 - U_{-1}
    for _ in range(k):
        d += 2.0 * delta * u
        u += d
    return u


def _chebyshev_u(k: int, delta: float, switch: float) -> float:
    """``U_k(1 + delta)`` for ``delta >= -1``."""
    if k < 0:
        return 0.0
    if abs(delta) < switch:
        return _u_near_one(k, delta)
    try:
        if delta > 0:
            nu = math.log1p(delta + math.sqrt(delta * (2.0 + delta)))
            return math.sinh((k + 1) * nu) / math.sinh(nu)
        mu = 2.0 * math.asin(math.sqrt(-0.5 * delta))
        return math.sin((k + 1) * mu) / math.sin(mu)
    except OverflowError:
        raise NumericalBreakdown(f"U_{k} overflows double precision") from None


def chebyshev_argument(barrier: CanonicalBarrier, theta: float):
    """Return ``(sign, delta)`` with ``Re(f e^{-i theta}) = sign * (1 + delta)``.

    ``delta`` is formed without cancellation:
    ``|f| cos(c) - 1 = (|f| - 1) - 2 |f| sin^2(c/2)`` and ``|f| - 1 = |g|^2/(|f| + 1)``.
    """
    a = abs(barrier.f)
    c = math.remainder(theta - barrier.phi, 2 * math.pi)
    sign = 1
    if abs(c) > math.pi / 2:
        sign = -1
        c = c - math.copysign(math.pi, c)
    delta = abs(barrier.g) ** 2 / (a + 1.0) - 2.0 * a * math.sin(0.5 * c) ** 2
    return sign, delta


def chebyshev_power(barrier: CanonicalBarrier, theta: float, n: int,
                    policy: NumericPolicy = DEFAULT_POLICY) -> TransferState:
    """``(F_n, G_n)`` of ``n`` identical barriers spaced by phase ``theta``.

    Equal to ``n`` applications of :func:`~casimir_train.scattering.compose_step`
    with start phases ``0, theta, ..., (n - 1) theta``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return TransferState()
    sign, delta = chebyshev_argument(barrier, theta)
    u1 = _chebyshev_u(n - 1, delta, policy.chebyshev_switch) * sign ** (n - 1)
    u2 = _chebyshev_u(n - 2, delta, policy.chebyshev_switch) * sign ** (n - 2) if n >= 2 else 0.0
    e1 = cmath.exp(1j * theta * (n - 1))
    G = barrier.g * u1 * e1
    F = barrier.f * u1 * e1 - u2 * cmath.exp(1j * theta * n)
    return TransferState(F, G, n)


def resonance_phase(barrier: CanonicalBarrier, m: int, omega: float = 1.0):
    """Resonant phase ``phi + pi m`` and the matching pulse period.

    Returns ``(theta_res, T)`` with ``T = (T0 / 2) (m + phi / pi)``.
    """
    theta_res = barrier.phi + math.pi * m
    return theta_res, theta_res / omega


def growth_exponent(barrier: CanonicalBarrier, theta: float) -> float:
    """Real ``nu`` with ``|z| = cosh(nu)``, or 0 when ``|z| <= 1`` (no growth)."""
    _, delta = chebyshev_argument(barrier, theta)
    if delta <= 0:
        return 0.0
    return math.log1p(delta + math.sqrt(delta * (2.0 + delta)))


# ----------------------------------------------------------------------------
# closed forms


def _sinh_ratio_sq(n: float, a2: float) -> float:
    """``sinh^2(n sqrt(a2)) / a2``, continued to ``sin^2(n sqrt(-a2)) / (-a2)``.

    Continuous through ``a2 = 0`` where it equals ``n^2``.
    """
    y2 = n * n * a2
    if abs(y2) < 1e-4:
        return n * n * (1.0 + y2 / 3.0 + 2.0 * y2 * y2 / 45.0)
    if a2 > 0:
        return math.sinh(n * math.sqrt(a2)) ** 2 / a2
    return math.sin(n * math.sqrt(-a2)) ** 2 / (-a2)


def photons_resonant(n: int, r_abs: float) -> float:
    """Photons after ``n`` resonant pulses of amplitude reflection ``r_abs``."""
    if n < 0 or not 0.0 <= r_abs < 1.0:
        raise ValueError("need n >= 0 and 0 <= r_abs < 1")
    return math.sinh(n * math.atanh(r_abs)) ** 2


def photons_resonant_bracket(n: int, r_abs: float) -> float:
    """Same count written with ``((1+|r|)/(1-|r|))^(n/2)`` powers."""
    q = ((1.0 + r_abs) / (1.0 - r_abs)) ** (n / 2.0)
    return 0.25 * (q - 1.0 / q) ** 2


def photons_resonant_asymptotic(n: int, r_abs: float) -> float:
    """Large-``n |r|`` form ``exp(2 n |r|) / 4`` (``nu`` replaced by ``|r|``)."""
    return 0.25 * math.exp(2.0 * n * r_abs)


def photons_detuned(n: int, g_abs: float, delta_theta: float) -> float:
    """Small-``|g|`` count for a systematic detuning ``delta_theta`` per pulse."""
    g2 = g_abs * g_abs
    if g2 == 0:
        return 0.0
    return g2 * _sinh_ratio_sq(n, g2 - delta_theta * delta_theta)


def critical_detuning(g_abs: float) -> float:
    """Largest systematic shift per pulse that still allows growth."""
    if g_abs < 0:
        raise ValueError("g_abs must be non-negative")
    return g_abs


def max_detuning_estimate(delta_L: float, L: float) -> float:
    """Order-of-magnitude bound ``delta_L / (2 L)`` on the critical shift."""
    if L <= 0 or not 0 <= delta_L < L:
        raise ValueError("need 0 <= delta_L < L")
    return delta_L / (2.0 * L)


def photons_alternating(n: int, g_abs: float, delta_theta: float, chi: float) -> float:
    """Asymptotic count with alternating phase jumps ``+-chi``.

    Valid for ``|g| << 1``, ``n >> 1``, ``|delta_theta| << 1``.
    """
    g2 = g_abs * g_abs
    if g2 == 0:
        return 0.0
    c = math.cos(2.0 * chi) ** 2
    return c * g2 * _sinh_ratio_sq(n, g2 * c - delta_theta * delta_theta)


def alternating_cutoff_chi(g_abs: float, delta_theta: float) -> float:
    """Jump amplitude in ``[0, pi/4]`` where the alternating formula stops growth.

    ``nan`` when ``|delta_theta| > |g|``: no jump amplitude restores growth.
    """
    ratio = abs(delta_theta) / g_abs
    if ratio > 1.0:
        return math.nan
    return 0.5 * math.acos(ratio)


def photons_amplitude_varied(nus: Sequence[float]):
    """``(|rho_n|, photons)`` for barriers of rapidities ``nus`` kept in phase."""
    total = 0.0
    for nu in nus:
        if nu < 0:
            raise ValueError("rapidities must be non-negative")
        total += nu
    return math.tanh(total), math.sinh(total) ** 2


def generalized_resonance_phases(barriers: Sequence[BarrierCoefficients]) -> np.ndarray:
    """Start phases that keep every partial reflection ``rho_k`` in one phase.

    Barrier k (1-based) gets ``(C - zeta_k + 2 sum_{j<k} phi_j) / 2`` with
    ``zeta = arg r_minus`` and ``phi = arg f``; ``C`` is chosen so that
    identical barriers get ``k * phi``.
    """
    if not barriers:
        raise EmptyTrain("need at least one barrier")
    zetas = np.array([b.zeta for b in barriers])
    phis = np.array([canonicalize(b).phi for b in barriers])
    prior = np.concatenate(([0.0], np.cumsum(phis)[:-1]))
    C = zetas[0] + 2.0 * phis[0]
    return 0.5 * (C - zetas + 2.0 * prior)


def harmonic_reference(epsilon: float, delta: float, omega0: float, t: float) -> float:
    """Photons under sinusoidal wall motion near twice the mode frequency.

    ``sinh^2(omega0 eps gamma t) / gamma^2`` with
    ``gamma^2 = 1 - delta^2 / (omega0 eps)^2``, continued past ``gamma = 0``.
    """
    k2 = (omega0 * epsilon) ** 2
    if k2 == 0:
        return 0.0
    return k2 * _sinh_ratio_sq(t, k2 - delta * delta)
