"""Barrier coefficients, unimodular transfer matrices and photon numbers.

Conventions
-----------
Outside every barrier the mode oscillates at a constant frequency ``omega``
and a solution is written ``a exp(i omega t) + b exp(-i omega t)``.  A barrier
occupying ``[0, t*]`` maps the amplitudes before it onto the amplitudes after
it through

    M = [[conj(f), -conj(g)],
         [-g,       f      ]],      f = 1/t,  g = r_minus/t,

with ``|f|^2 - |g|^2 = 1``.  A barrier that starts at time ``t_s`` instead of 0
enters with phase ``theta = omega * t_s``.  Starting from vacuum,
``(F, G) = (1, 0)``, the created photon number after the train is ``|G|^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBarrier, NumericalBreakdown, UnitarityViolation
from .numerics import DEFAULT_POLICY, NumericPolicy


@dataclass(frozen=True)
class BogoliubovPair:
    """Coefficients of ``x(t -> inf) = omega_f**-0.5 (xi e^{i w t} + eta e^{-i w t})``."""

    xi: complex
    eta: complex

    def defect(self) -> float:
        return abs(self.xi) ** 2 - abs(self.eta) ** 2 - 1.0

    @property
    def reflection(self) -> float:
        """Energy reflection ``|eta/xi|^2``."""
        return abs(self.eta / self.xi) ** 2

    @property
    def transmission(self) -> float:
        return 1.0 / abs(self.xi) ** 2


@dataclass(frozen=True)
class BarrierCoefficients:
    """Amplitude reflection/transmission of one barrier beginning at ``t = 0``.

    ``r_minus`` belongs to the solution incident as ``e^{i omega t}`` from the
    past, ``r_plus`` to the one arriving as ``e^{-i omega t}`` from the future.
    Both solutions share the transmission ``t``.
    """

    r_minus: complex
    r_plus: complex
    t: complex
    omega: float = 1.0
    duration: float = 0.0

    def residuals(self) -> dict:
        """Magnitudes of the reciprocity identities (all zero when exact)."""
        rm, rp, t = self.r_minus, self.r_plus, self.t
        return {
            "cross": abs(rm * t.conjugate() + rp.conjugate() * t),
            "flux_minus": abs(abs(rm) ** 2 + abs(t) ** 2 - 1.0),
            "flux_plus": abs(abs(rp) ** 2 + abs(t) ** 2 - 1.0),
        }

    def max_residual(self) -> float:
        return max(self.residuals().values())

    @property
    def zeta(self) -> float:
        """Phase of ``r_minus``."""
        return cmath.phase(self.r_minus)


@dataclass(frozen=True)
class CanonicalBarrier:
    """Barrier in transfer-matrix form, ``|f|^2 - |g|^2 = 1``."""

    f: complex
    g: complex

    @classmethod
    def from_coupling(cls, g: complex, phi: float = 0.0) -> "CanonicalBarrier":
        """Barrier with given ``g`` and transmission phase ``phi = arg f``."""
        g = complex(g)
        return cls(math.sqrt(1.0 + abs(g) ** 2) * cmath.exp(1j * phi), g)

    @classmethod
    def from_rapidity(cls, nu: float, phi: float = 0.0, zeta: float = 0.0) -> "CanonicalBarrier":
        return cls(math.cosh(nu) * cmath.exp(1j * phi), math.sinh(nu) * cmath.exp(1j * (zeta + phi)))

    @property
    def nu(self) -> float:
        return math.asinh(abs(self.g))

    @property
    def phi(self) -> float:
        return cmath.phase(self.f)

    @property
    def r_abs(self) -> float:
        return abs(self.g) / abs(self.f)

    def defect(self) -> float:
        return abs(self.f) ** 2 - abs(self.g) ** 2 - 1.0

    def matrix(self, theta: float = 0.0) -> np.ndarray:
        """Transfer matrix of the barrier shifted to start at phase ``theta``."""
        e = cmath.exp(2j * theta)
        f, g = self.f, self.g
        return np.array([[f.conjugate(), -(g.conjugate()) / e], [-g * e, f]], dtype=complex)


IDENTITY_BARRIER = CanonicalBarrier(1.0 + 0j, 0j)


@dataclass(frozen=True)
class TransferState:
    """Accumulated ``(F, G)`` of the total matrix ``[[F*, -G*], [-G, F]]``."""

    F: complex = 1.0 + 0j
    G: complex = 0j
    pulses_applied: int = 0

    def defect(self) -> float:
        return abs(self.F) ** 2 - abs(self.G) ** 2 - 1.0

    def matrix(self) -> np.ndarray:
        F, G = self.F, self.G
        return np.array([[F.conjugate(), -G.conjugate()], [-G, F]], dtype=complex)

    def bogoliubov(self) -> BogoliubovPair:
        """Vacuum-input ``(a0, b0) = (1, 0)`` mapped to ``(conj F, -G)``."""
        return BogoliubovPair(self.F.conjugate(), -self.G)


VACUUM = TransferState()


@dataclass(frozen=True)
class MobiusState:
    """Combined reflection ``rho`` and transmission ``tau`` of a train.

    ``pulses_applied == 0`` marks the empty train; its ``rho = 0``, ``tau = 1``
    make the first step return the bare barrier coefficients.
    """

    rho: complex = 0j
    tau: complex = 1.0 + 0j
    pulses_applied: int = 0

    @property
    def s(self) -> complex:
        return self.tau / self.tau.conjugate()

    @property
    def is_empty(self) -> bool:
        return self.pulses_applied == 0

    def defect(self) -> float:
        return abs(self.rho) ** 2 + abs(self.tau) ** 2 - 1.0

    def photon_number(self) -> float:
        """``|rho|^2 / (1 - |rho|^2)``, evaluated with ``1 - |rho|^2 = |tau|^2``."""
        return abs(self.rho) ** 2 / abs(self.tau) ** 2


EMPTY_MOBIUS = MobiusState()


@dataclass(frozen=True)
class WaveAmplitudes:
    """Coefficients of ``a e^{i omega t} + b e^{-i omega t}`` between barriers."""

    a: complex
    b: complex

    def through(self, barrier: CanonicalBarrier, theta: float = 0.0) -> "WaveAmplitudes":
        a, b = barrier.matrix(theta) @ np.array([self.a, self.b])
        return WaveAmplitudes(complex(a), complex(b))


def canonicalize(b: BarrierCoefficients, policy: NumericPolicy = DEFAULT_POLICY) -> CanonicalBarrier:
    """Convert reflection/transmission amplitudes to ``f = 1/t``, ``g = r_minus/t``."""
    if abs(b.t) < policy.transmission_floor:
        raise DegenerateBarrier(f"|t| = {abs(b.t):.3e} below floor {policy.transmission_floor:g}")
    return CanonicalBarrier(1.0 / b.t, b.r_minus / b.t)


def decanonicalize(c: CanonicalBarrier, omega: float = 1.0, duration: float = 0.0) -> BarrierCoefficients:
    """Inverse of :func:`canonicalize`; ``r_plus = -conj(g)/f`` follows from reciprocity."""
    return BarrierCoefficients(
        r_minus=c.g / c.f,
        r_plus=-c.g.conjugate() / c.f,
        t=1.0 / c.f,
        omega=omega,
        duration=duration,
    )


def compose_step(state: TransferState, barrier: CanonicalBarrier, theta_prev: float) -> TransferState:
    """Append one barrier whose start time corresponds to phase ``theta_prev``."""
    e = cmath.exp(2j * theta_prev)
    F, G = state.F, state.G
    f, g = barrier.f, barrier.g
    return TransferState(
        F=g * G.conjugate() * e + f * F,
        G=g * F.conjugate() * e + f * G,
        pulses_applied=state.pulses_applied + 1,
    )


def compose_train(
    barriers: CanonicalBarrier | Sequence[CanonicalBarrier],
    thetas: Iterable[float],
    state: TransferState = VACUUM,
) -> TransferState:
    """Fold :func:`compose_step` over a train.

    A single barrier is reused for every phase in ``thetas``.
    """
    if isinstance(barriers, CanonicalBarrier):
        for th in thetas:
            state = compose_step(state, barriers, th)
        return state
    thetas = list(thetas)
    if len(thetas) != len(barriers):
        raise ValueError(f"{len(barriers)} barriers but {len(thetas)} phases")
    for b, th in zip(barriers, thetas):
        state = compose_step(state, b, th)
    return state


def mobius_step(
    state: MobiusState,
    barrier: BarrierCoefficients,
    theta_prev: float,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> MobiusState:
    """Nonlinear update of the combined reflection and transmission."""
    w = barrier.r_minus * state.s * cmath.exp(2j * theta_prev)
    den = 1.0 + state.rho.conjugate() * w
    if abs(den) < policy.denominator_floor:
        raise NumericalBreakdown(f"Mobius denominator {abs(den):.3e} below floor")
    return MobiusState(
        rho=(state.rho + w) / den,
        tau=state.tau * barrier.t / den,
        pulses_applied=state.pulses_applied + 1,
    )


def photon_number(state: TransferState, n_thermal: float = 0.0) -> float:
    """Mean created quanta ``(1 + 2 n_thermal) |G|^2``."""
    if n_thermal < 0:
        raise ValueError("n_thermal must be non-negative")
    return (1.0 + 2.0 * n_thermal) * abs(state.G) ** 2


def photon_number_from_bogoliubov(p: BogoliubovPair, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """``|eta|^2``; refuses pairs that violate ``|xi|^2 - |eta|^2 = 1``."""
    scale = max(1.0, abs(p.xi) ** 2 + abs(p.eta) ** 2)
    if abs(p.defect()) > policy.unitarity_tol * scale:
        raise UnitarityViolation(f"|xi|^2 - |eta|^2 - 1 = {p.defect():.3e}")
    return abs(p.eta) ** 2


def fresnel_limit(omega_i: float, omega_f: float) -> float:
    """Sudden-jump energy reflection ``((w_i - w_f)/(w_i + w_f))^2``."""
    if omega_i <= 0 or omega_f <= 0:
        raise ValueError("frequencies must be positive")
    return ((omega_i - omega_f) / (omega_i + omega_f)) ** 2


def landauer_compose(reflectances: Iterable[float]) -> float:
    """Dephased chain resistance ``prod((1+R_k)/(1-R_k))/2 - 1/2``.

    Accumulated in log space so long chains do not lose the ``-1/2``.
    """
    log_prod = 0.0
    for R in reflectances:
        if not 0.0 <= R < 1.0:
            raise ValueError(f"reflectance {R!r} outside [0, 1)")
        log_prod += math.log1p(R) - math.log1p(-R)
    return 0.5 * math.expm1(log_prod)


def landauer_dephased_step(resistance_prev: float, r_abs: float, psi: float | None) -> float:
    """Advance the chain resistance ``|rho|^2 / (1 - |rho|^2)`` across one barrier.

    ``r_abs`` is the barrier's amplitude reflection and ``psi`` the
    interference phase between the accumulated and the new reflection;
    ``None`` drops the interference term (phase-averaged step).  Written in
    the resistance itself so that ``|rho| -> 1`` loses no precision.
    """
    X = resistance_prev
    if not X >= 0:
        raise ValueError("resistance must be non-negative")
    if not 0.0 <= r_abs < 1.0:
        raise ValueError("r_abs must lie in [0, 1)")
    r_sq = r_abs * r_abs
    cross = 0.0 if psi is None else 2.0 * r_abs * math.sqrt(X * (1.0 + X)) * math.cos(psi)
    return (X + r_sq * (1.0 + X) + cross) / (1.0 - r_sq)


def resistance(rho_sq: float) -> float:
    """``|rho|^2 / (1 - |rho|^2)`` from the reflection probability."""
    return rho_sq / (1.0 - rho_sq)


def interference_phase(state: MobiusState, barrier: BarrierCoefficients, theta_prev: float) -> float:
    """Phase of ``conj(rho) r s e^{2i theta}`` entering the next Mobius step."""
    w = barrier.r_minus * state.s * cmath.exp(2j * theta_prev)
    return cmath.phase(state.rho.conjugate() * w)
