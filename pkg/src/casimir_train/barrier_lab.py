"""Frequency profiles, barrier synthesis and the direct-evolution oracle.

Everything here works with the classical equation ``x'' + omega(t)^2 x = 0``.
Pulse shapes are integrated with an embedded Runge-Kutta pair (scipy's
DOP853); constant stretches are propagated exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, IdentityViolation, IntegrationFailure, UnitarityViolation
from .scattering import BarrierCoefficients, BogoliubovPair, canonicalize

# ----------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class CavityGeometry:
    lx: float
    ly: float
    lz: float
    nx: int = 1
    ny: int = 1
    nz: int = 1
    c: float = 1.0

    def __post_init__(self):
        for name in ("lx", "ly", "lz", "c"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(name, "must be positive")
        for name in ("nx", "ny", "nz"):
            if getattr(self, name) < 0:
                raise ConfigurationError(name, "must be non-negative")
        if self.nx == self.ny == self.nz == 0:
            raise ConfigurationError("nx", "at least one mode index must be positive")


def eigenfrequency(geom: CavityGeometry) -> float:
    """Mode frequency of a rectangular cavity with ideal walls."""
    return math.pi * geom.c * math.sqrt(
        (geom.nx / geom.lx) ** 2 + (geom.ny / geom.ly) ** 2 + (geom.nz / geom.lz) ** 2
    )


# ----------------------------------------------------------------------------
# profile segments


@dataclass(frozen=True)
class Constant:
    omega: float
    duration: float

    kind = "const"


@dataclass(frozen=True)
class SquarePulse:
    omega_inner: float
    duration: float
    base_omega: float = 1.0

    kind = "square"

    def omega_at(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.omega_inner)

    def scalar_omega(self) -> Callable[[float], float]:
        w = self.omega_inner
        return lambda t: w


@dataclass(frozen=True)
class HarmonicPulse:
    """``omega0 (1 + 2 epsilon sin(Omega t))`` over ``[0, duration]``."""

    omega0: float
    epsilon: float
    Omega: float
    duration: float
    base_omega: float | None = None

    kind = "harmonic"

    def __post_init__(self):
        if self.base_omega is None:
            object.__setattr__(self, "base_omega", self.omega0)

    def omega_at(self, t):
        return self.omega0 * (1.0 + 2.0 * self.epsilon * np.sin(self.Omega * np.asarray(t, dtype=float)))

    def scalar_omega(self) -> Callable[[float], float]:
        w0, two_eps, Om = self.omega0, 2.0 * self.epsilon, self.Omega
        return lambda t: w0 * (1.0 + two_eps * math.sin(Om * t))


@dataclass(frozen=True)
class TabulatedPulse:
    """Sampled ``(t, omega)`` pairs; times are shifted so the pulse starts at 0."""

    samples: tuple
    interpolation: str = "linear"
    base_omega: float = 1.0

    kind = "tabulated"

    def __post_init__(self):
        pts = tuple((float(t), float(w)) for t, w in self.samples)
        if len(pts) < 2:
            raise ConfigurationError("samples", "need at least two samples")
        ts = [p[0] for p in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigurationError("samples", "times must be strictly increasing")
        if self.interpolation not in ("linear", "cubic"):
            raise ConfigurationError("interpolation", "must be 'linear' or 'cubic'")
        object.__setattr__(self, "samples", pts)

    @property
    def duration(self) -> float:
        return self.samples[-1][0] - self.samples[0][0]

    @property
    def _grid(self):
        arr = np.array(self.samples)
        return arr[:, 0] - arr[0, 0], arr[:, 1]

    def omega_at(self, t):
        ts, ws = self._grid
        if self.interpolation == "linear":
            return np.interp(t, ts, ws)
        return CubicSpline(ts, ws)(t)

    def scalar_omega(self) -> Callable[[float], float]:
        ts, ws = self._grid
        if self.interpolation == "linear":
            return lambda t: float(np.interp(t, ts, ws))
        spline = CubicSpline(ts, ws)
        return lambda t: float(spline(t))

    def breakpoints(self):
        return self._grid[0]


Pulse = Union[SquarePulse, HarmonicPulse, TabulatedPulse]
Segment = Union[Constant, SquarePulse, HarmonicPulse, TabulatedPulse]


def _is_pulse(seg) -> bool:
    return not isinstance(seg, Constant)


def _endpoint_mismatch(pulse: Pulse) -> float:
    if isinstance(pulse, SquarePulse):
        # the jumps to and from omega_inner sit exactly at the endpoints
        return 0.0
    w = pulse.omega_at(np.array([0.0, pulse.duration]))
    return float(np.max(np.abs(w - pulse.base_omega))) / pulse.base_omega


def _min_omega(seg: Segment) -> float:
    if isinstance(seg, Constant):
        return seg.omega
    if isinstance(seg, SquarePulse):
        return min(seg.omega_inner, seg.base_omega)
    if isinstance(seg, HarmonicPulse):
        return seg.omega0 * (1.0 - 2.0 * abs(seg.epsilon))
    ts = seg.breakpoints()
    if seg.interpolation == "linear":
        return float(min(w for _, w in seg.samples))
    fine = np.linspace(0.0, ts[-1], 64 * len(ts))
    return float(np.min(seg.omega_at(fine)))


@dataclass(frozen=True)
class FrequencyProfile:
    """Ordered segments describing ``omega(t)`` from ``t = 0``."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def validate(self, rel_tol: float = 1e-9) -> None:
        """Raise :class:`ConfigurationError` unless the profile is well formed."""
        segs = self.segments
        if not segs:
            raise ConfigurationError("segments", "profile is empty")
        for i, seg in enumerate(segs):
            if seg.duration < 0:
                raise ConfigurationError(f"segments[{i}].duration", "must be non-negative")
            if not _min_omega(seg) > 0:
                raise ConfigurationError(f"segments[{i}]", "omega(t) must stay positive")
            if not _is_pulse(seg):
                continue
            if _endpoint_mismatch(seg) > rel_tol:
                raise ConfigurationError(
                    f"segments[{i}]", "pulse must begin and end at its base_omega"
                )
            for j in (i - 1, i + 1):
                if 0 <= j < len(segs):
                    nb = segs[j]
                    if _is_pulse(nb):
                        raise ConfigurationError(
                            f"segments[{i}]", "pulses must be separated by constant segments"
                        )
                    if abs(nb.omega - seg.base_omega) > rel_tol * seg.base_omega:
                        raise ConfigurationError(
                            f"segments[{j}].omega", "must equal the neighbouring pulse's base_omega"
                        )

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def pulses(self):
        """``(start_time, pulse)`` for every pulse segment."""
        out, t = [], 0.0
        for seg in self.segments:
            if _is_pulse(seg):
                out.append((t, seg))
            t += seg.duration
        return out

    def omega_at(self, t: float) -> float:
        t0 = 0.0
        last = len(self.segments) - 1
        for i, seg in enumerate(self.segments):
            if t < t0 + seg.duration or i == last:
                if isinstance(seg, Constant):
                    return seg.omega
                return float(seg.omega_at(t - t0))
            t0 += seg.duration
        raise ValueError("empty profile")


def periodic_profile(pulse: Pulse, period: float, count: int, head: float = 1.0, tail: float = 1.0) -> FrequencyProfile:
    """``count`` copies of ``pulse`` starting every ``period``."""
    gap = period - pulse.duration
    if gap <= 0:
        raise ConfigurationError("period", "must exceed the pulse duration")
    w = pulse.base_omega
    segs = [Constant(w, head)]
    for k in range(count):
        segs.append(pulse)
        segs.append(Constant(w, gap if k < count - 1 else tail))
    return FrequencyProfile(tuple(segs))


# ----------------------------------------------------------------------------
# serialization

_FIELDS = {
    "const": (Constant, ("omega", "duration")),
    "square": (SquarePulse, ("omega_inner", "duration", "base_omega")),
    "harmonic": (HarmonicPulse, ("omega0", "epsilon", "Omega", "duration", "base_omega")),
    "tabulated": (TabulatedPulse, ("samples", "interpolation", "base_omega")),
}


def segment_to_dict(seg: Segment) -> dict:
    d = {"type": seg.kind}
    d.update(asdict(seg))
    if isinstance(seg, TabulatedPulse):
        d["samples"] = [list(p) for p in seg.samples]
    return d


def segment_from_dict(d: dict) -> Segment:
    kind = d.get("type")
    if kind not in _FIELDS:
        raise ConfigurationError("type", f"unknown segment type {kind!r}")
    cls, names = _FIELDS[kind]
    unknown = set(d) - set(names) - {"type"}
    if unknown:
        raise ConfigurationError(sorted(unknown)[0], f"unexpected field for {kind!r} segment")
    kwargs = {k: d[k] for k in names if k in d}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(kind, str(exc)) from None


def profile_to_dict(profile: FrequencyProfile) -> dict:
    return {"segments": [segment_to_dict(s) for s in profile.segments]}


def profile_from_dict(d: dict) -> FrequencyProfile:
    if "segments" not in d:
        raise ConfigurationError("segments", "missing")
    return FrequencyProfile(tuple(segment_from_dict(s) for s in d["segments"]))


def dumps_profile(profile: FrequencyProfile) -> str:
    return json.dumps(profile_to_dict(profile), indent=2)


def loads_profile(text: str) -> FrequencyProfile:
    return profile_from_dict(json.loads(text))


# ----------------------------------------------------------------------------
# integration


@dataclass(frozen=True)
class IntegratorPolicy:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 2_000_000
    dense_output: bool = False
    method: str = "DOP853"

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigurationError("rtol", "tolerances must be positive")
        if self.max_steps <= 0:
            raise ConfigurationError("max_steps", "must be positive")


DEFAULT_INTEGRATOR = IntegratorPolicy()

# right-hand-side evaluations per accepted DOP853 step (upper bound)
_EVALS_PER_STEP = 12


class _StepLimit(Exception):
    pass


def _free_propagator(omega: float, dt: float) -> np.ndarray:
    c, s = math.cos(omega * dt), math.sin(omega * dt)
    return np.array([[c, s / omega], [-omega * s, c]])


def pulse_fundamental(pulse: Pulse, policy: IntegratorPolicy = DEFAULT_INTEGRATOR):
    """Real 2x2 map ``(x, x')(0) -> (x, x')(duration)`` across one pulse.

    Returns ``(matrix, solution)``; ``solution`` is the scipy result (with a
    dense interpolant when ``policy.dense_output``) or ``None`` when the pulse
    has zero length.
    """
    D = pulse.duration
    if D == 0:
        return np.eye(2), None
    omega_at = pulse.scalar_omega()
    count = [0]
    limit = _EVALS_PER_STEP * policy.max_steps

    def rhs(t, y):
        count[0] += 1
        if count[0] > limit:
            raise _StepLimit
        w2 = omega_at(t) ** 2
        return [y[1], -w2 * y[0], y[3], -w2 * y[2]]

    # piecewise-linear tables have kinks at the samples; integrate between them
    if isinstance(pulse, TabulatedPulse) and pulse.interpolation == "linear":
        knots = pulse.breakpoints()
    else:
        knots = np.array([0.0, D])
    y = np.array([1.0, 0.0, 0.0, 1.0])
    sol = None
    try:
        for a, b in zip(knots[:-1], knots[1:]):
            sol = solve_ivp(
                rhs, (a, b), y, method=policy.method, rtol=policy.rtol, atol=policy.atol,
                dense_output=policy.dense_output,
            )
            if not sol.success:
                raise IntegrationFailure(sol.message)
            y = sol.y[:, -1]
    except _StepLimit:
        raise IntegrationFailure(f"step limit {policy.max_steps} exceeded") from None
    return np.array([[y[0], y[2]], [y[1], y[3]]]), sol


def _plane_wave_basis(omega: float, t: float) -> np.ndarray:
    """Columns: ``(x, x')`` of ``e^{i w t}`` and ``e^{-i w t}``."""
    ep, em = np.exp(1j * omega * t), np.exp(-1j * omega * t)
    return np.array([[ep, em], [1j * omega * ep, -1j * omega * em]])


def _amplitude_map(phi: np.ndarray, omega: float, t_end: float) -> np.ndarray:
    """Plane-wave amplitudes before (origin at 0) to after (at ``t_end``)."""
    return np.linalg.solve(_plane_wave_basis(omega, t_end), phi @ _plane_wave_basis(omega, 0.0))


def _coefficients_from_map(M: np.ndarray, omega: float, duration: float, tol: float) -> BarrierCoefficients:
    # incident e^{i w t} from the past: M (1, r-) = (t-, 0)
    r_minus = -M[1, 0] / M[1, 1]
    t_minus = M[0, 0] + M[0, 1] * r_minus
    # incident e^{-i w t} from the future: M (0, t+) = (r+, 1)
    t_plus = 1.0 / M[1, 1]
    r_plus = M[0, 1] * t_plus
    b = BarrierCoefficients(complex(r_minus), complex(r_plus), complex(t_plus), omega, duration)
    res = b.residuals()
    res["transmission"] = float(abs(t_minus - t_plus))
    worst_key = max(res, key=res.get)
    if res[worst_key] > tol:
        raise IdentityViolation(f"barrier identities violated: {worst_key} residual {res[worst_key]:.3e} > {tol:.1e}")
    return b


def synthesize_barrier(pulse: Pulse, policy: IntegratorPolicy = DEFAULT_INTEGRATOR) -> BarrierCoefficients:
    """Integrate one pulse and extract ``r_minus, r_plus, t``.

    Exterior solutions are referenced to absolute time with the pulse
    starting at ``t = 0`` so a trivial pulse has ``r = 0``, ``t = 1``.
    """
    if _endpoint_mismatch(pulse) > 1e-9:
        raise ConfigurationError("base_omega", "pulse must begin and end at its base_omega")
    phi, _ = pulse_fundamental(pulse, policy)
    M = _amplitude_map(phi, pulse.base_omega, pulse.duration)
    return _coefficients_from_map(M, pulse.base_omega, pulse.duration, 10 * policy.rtol)


def square_barrier_analytic(omega_inner: float, duration: float, base_omega: float = 1.0) -> BarrierCoefficients:
    """Plane-wave matching at the two jumps of a rectangular frequency pulse.

    Independent of the integrator: unknowns ``(r, c, d, t)`` with interior
    solution ``c e^{i wb t} + d e^{-i wb t}`` are fixed by continuity of
    ``x`` and ``x'`` at ``t = 0`` and ``t = duration``.
    """
    w, wb, tau = base_omega, omega_inner, duration

    def solve(incoming_from_past: bool):
        ep, em = np.exp(1j * wb * tau), np.exp(-1j * wb * tau)
        eo, eoi = np.exp(1j * w * tau), np.exp(-1j * w * tau)
        A = np.zeros((4, 4), dtype=complex)
        rhs = np.zeros(4, dtype=complex)
        if incoming_from_past:
            # before: e^{iwt} + r e^{-iwt}; after: t e^{iwt}; unknowns (r, c, d, t)
            A[0] = [1, -1, -1, 0]
            rhs[0] = -1
            A[1] = [-1j * w, -1j * wb, 1j * wb, 0]
            rhs[1] = -1j * w
            A[2] = [0, ep, em, -eo]
            A[3] = [0, 1j * wb * ep, -1j * wb * em, -1j * w * eo]
        else:
            # before: t e^{-iwt}; after: e^{-iwt} + r e^{iwt}; unknowns (r, c, d, t)
            A[0] = [0, 1, 1, -1]
            A[1] = [0, 1j * wb, -1j * wb, 1j * w]
            A[2] = [-eo, ep, em, 0]
            rhs[2] = eoi
            A[3] = [-1j * w * eo, 1j * wb * ep, -1j * wb * em, 0]
            rhs[3] = -1j * w * eoi
        r, _, _, t = np.linalg.solve(A, rhs)
        return complex(r), complex(t)

    r_minus, t_minus = solve(True)
    r_plus, _ = solve(False)
    return BarrierCoefficients(r_minus, r_plus, t_minus, base_omega, duration)


def _segments_map(segments: Sequence[Segment], policy: IntegratorPolicy) -> np.ndarray:
    phi = np.eye(2)
    for seg in segments:
        if isinstance(seg, Constant):
            step = _free_propagator(seg.omega, seg.duration)
        else:
            step, _ = pulse_fundamental(seg, policy)
        phi = step @ phi
    return phi


def _bogoliubov_from_map(phi: np.ndarray, omega_i: float, omega_f: float, t_end: float) -> BogoliubovPair:
    x0 = np.array([1.0, 1j * omega_i]) / math.sqrt(omega_i)
    x, v = phi @ x0
    # x = w^-1/2 (xi e^{iwT} + eta e^{-iwT}),  v = i w^1/2 (xi e^{iwT} - eta e^{-iwT})
    sw = math.sqrt(omega_f)
    xi = 0.5 * (sw * x + v / (1j * sw)) * np.exp(-1j * omega_f * t_end)
    eta = 0.5 * (sw * x - v / (1j * sw)) * np.exp(1j * omega_f * t_end)
    return BogoliubovPair(complex(xi), complex(eta))


def _error_weight(pulses: Sequence[Pulse]) -> float:
    """Number of integrated oscillation cycles, at least one per pulse."""
    total = 0.0
    for pulse in pulses:
        w_max = float(np.max(pulse.omega_at(np.linspace(0.0, pulse.duration, 65))))
        total += max(1.0, pulse.duration * w_max / (2 * math.pi))
    return max(1.0, total)


def _check_unitarity(p: BogoliubovPair, policy: IntegratorPolicy, weight: float) -> BogoliubovPair:
    scale = abs(p.xi) ** 2 + abs(p.eta) ** 2
    bound = 10 * policy.rtol * scale * weight
    if abs(p.defect()) > bound:
        raise UnitarityViolation(f"|xi|^2 - |eta|^2 - 1 = {p.defect():.3e} exceeds {bound:.1e}")
    return p


def direct_evolution(profile: FrequencyProfile, policy: IntegratorPolicy = DEFAULT_INTEGRATOR) -> BogoliubovPair:
    """Evolve ``omega_i^-1/2 e^{i omega_i t}`` through the whole profile.

    The profile must start and end with constant segments.  The unitarity
    check scales with the number of integrated cycles because the global
    integration error accumulates over them.
    """
    profile.validate()
    segs = profile.segments
    if _is_pulse(segs[0]) or _is_pulse(segs[-1]):
        raise ConfigurationError("segments", "profile must begin and end with constant segments")
    phi = _segments_map(segs, policy)
    p = _bogoliubov_from_map(phi, segs[0].omega, segs[-1].omega, profile.total_duration)
    return _check_unitarity(p, policy, _error_weight([q for _, q in profile.pulses()]))


def profile_barriers(profile: FrequencyProfile, policy: IntegratorPolicy = DEFAULT_INTEGRATOR):
    """Synthesized canonical barriers and their start phases for composition.

    Phases are measured from the start of the first pulse; the overall
    offset does not affect photon numbers.
    """
    profile.validate()
    pulses = profile.pulses()
    if not pulses:
        return [], []
    t_first = pulses[0][0]
    barriers, thetas = [], []
    cache = {}
    for t_start, pulse in pulses:
        if pulse not in cache:
            cache[pulse] = canonicalize(synthesize_barrier(pulse, policy))
        barriers.append(cache[pulse])
        thetas.append(pulse.base_omega * (t_start - t_first))
    return barriers, thetas


def sweep_reflection(
    times: Sequence[float],
    omegas: Sequence[float],
    policy: IntegratorPolicy = DEFAULT_INTEGRATOR,
    interpolation: str = "linear",
) -> float:
    """Energy reflection ``|eta/xi|^2`` of a single sweep ``omega_i -> omega_f``.

    ``omega(t)`` is tabulated by ``(times, omegas)`` and held constant outside
    the table.  A single-sample table is an instantaneous jump.
    """
    omegas = [float(w) for w in omegas]
    if min(omegas) <= 0:
        raise ConfigurationError("omegas", "must be positive")
    if len(omegas) == 1 or times[-1] == times[0]:
        raise ConfigurationError("times", "use jump_reflection for a sudden change")
    pulse = TabulatedPulse(tuple(zip(times, omegas)), interpolation, base_omega=omegas[0])
    phi, _ = pulse_fundamental(pulse, policy)
    p = _bogoliubov_from_map(phi, omegas[0], omegas[-1], pulse.duration)
    return _check_unitarity(p, policy, _error_weight([pulse])).reflection


def jump_reflection(omega_i: float, omega_f: float) -> float:
    """Reflection of an instantaneous change, from continuity of ``x, x'``."""
    p = _bogoliubov_from_map(np.eye(2), omega_i, omega_f, 0.0)
    return p.reflection
