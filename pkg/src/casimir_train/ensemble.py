"""Monte-Carlo engine for pulse trains with random phase jitter.

Every realization draws its jitter from its own Philox stream keyed by
``(master_seed, realization)``; the k-th uniform of that stream belongs to
pulse k.  Realizations are processed in fixed-size blocks, vectorized over
the block, so results do not depend on how many workers run the blocks.

Phase conventions
-----------------
``"theta"``
    ``delta_theta`` and ``chi_k`` are added to the pulse start phase
    ``theta_k`` itself, which enters the recursion as ``exp(2 i theta_k)``.
``"psi"``
    ``delta_theta`` and ``chi_k`` are increments of the interference phase
    ``2 theta_k``; equivalently ``theta_k`` receives half of each.  Jitter of
    amplitude ``chi`` then has ``<cos> = sin(chi)/chi``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigurationError, NoCrossing
from .periodic import alternating_cutoff_chi

CONVENTIONS = ("theta", "psi")
BLOCK = 128
_RESCALE_AT = 1e150


@dataclass(frozen=True)
class JitterSpec:
    chi_max: float = 0.0
    master_seed: int = 0
    resample_per_step: bool = True

    def __post_init__(self):
        if not self.chi_max >= 0:
            raise ConfigurationError("chi", "must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("seed", "must fit in 64 unsigned bits")


@dataclass(frozen=True)
class ExperimentSpec:
    """Pulse train with real coupling ``g`` and ``f = sqrt(1 + g^2)``.

    The resonant phase is then 0; ``delta_theta`` is the systematic offset.
    """

    n_pulses: int = 500
    g: float = 0.01
    delta_theta: float = 0.0
    jitter: JitterSpec = field(default_factory=JitterSpec)
    realizations: int = 700
    n_thermal: float = 0.0
    convention: str = "theta"

    def __post_init__(self):
        if self.n_pulses < 0:
            raise ConfigurationError("n", "must be non-negative")
        if self.realizations <= 0:
            raise ConfigurationError("realizations", "must be positive")
        if not self.n_thermal >= 0:
            raise ConfigurationError("n_thermal", "must be non-negative")
        if self.convention not in CONVENTIONS:
            raise ConfigurationError("convention", f"must be one of {CONVENTIONS}")

    def with_(self, **changes) -> "ExperimentSpec":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        jitter = d["jitter"]
        if "chi" in changes:
            jitter = JitterSpec(changes.pop("chi"), jitter.master_seed, jitter.resample_per_step)
        if "seed" in changes:
            jitter = JitterSpec(jitter.chi_max, changes.pop("seed"), jitter.resample_per_step)
        d.update(changes, jitter=jitter)
        return ExperimentSpec(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnsembleResult:
    mean_photons: float
    std_photons: float
    relative_std: float
    log_mean_photons: float
    mean_chi_bar: float
    per_realization: tuple | None
    metadata: dict


# ----------------------------------------------------------------------------
# random streams


@lru_cache(maxsize=16)
def _uniform_block(seed: int, start: int, stop: int, n: int) -> np.ndarray:
    """Uniforms ``u[k, j]`` for pulse k+1 of realization ``start + j``."""
    out = np.empty((n, stop - start))
    for j, r in enumerate(range(start, stop)):
        bitgen = np.random.Philox(key=np.array([seed, r], dtype=np.uint64))
        out[:, j] = np.random.Generator(bitgen).random(n)
    out.setflags(write=False)
    return out


def jitter_draws(spec: ExperimentSpec, realization: int) -> np.ndarray:
    """The ``chi_k`` (k = 1..n) of one realization."""
    u = _uniform_block(spec.jitter.master_seed, realization, realization + 1, max(spec.n_pulses, 1))
    return _jitter_from_uniforms(spec, u)[: spec.n_pulses, 0]


def _jitter_from_uniforms(spec: ExperimentSpec, u: np.ndarray) -> np.ndarray:
    chi = spec.jitter.chi_max
    if not spec.jitter.resample_per_step:
        u = np.broadcast_to(u[:1], u.shape)
    return chi * (2.0 * u - 1.0)


# ----------------------------------------------------------------------------
# vectorized composition


def _run_block(spec: ExperimentSpec, start: int, stop: int, record_every: int | None = None):
    """Compose the trains of realizations ``start..stop-1`` side by side.

    Returns ``(log_photons, chi_bar, trajectory)``; ``trajectory`` holds
    ``log |G_k|^2`` at ``k = record_every, 2 record_every, ...`` or is None.
    """
    n, R = spec.n_pulses, stop - start
    g = spec.g
    f = math.sqrt(1.0 + g * g)
    F = np.ones(R, dtype=complex)
    G = np.zeros(R, dtype=complex)
    log_scale = np.zeros(R)
    traj = [] if record_every else None
    if spec.jitter.chi_max > 0 and n > 0:
        chis = _jitter_from_uniforms(spec, _uniform_block(spec.jitter.master_seed, start, stop, n))
        chi_bar = chis.mean(axis=0)
    else:
        chis = None
        chi_bar = np.zeros(R)
    half = 0.5 if spec.convention == "psi" else 1.0
    for k in range(n):
        # barrier k+1 starts at phase k * delta_theta (+ its jitter)
        base = k * spec.delta_theta
        if chis is None:
            e = complex(math.cos(2 * half * base), math.sin(2 * half * base))
        else:
            ph = 2.0 * half * (base + chis[k])
            e = np.cos(ph) + 1j * np.sin(ph)
        ge = g * e
        F, G = ge * np.conj(G) + f * F, ge * np.conj(F) + f * G
        big = np.abs(F) > _RESCALE_AT
        if big.any():
            s = np.where(big, np.abs(F), 1.0)
            F = F / s
            G = G / s
            log_scale += np.log(s)
        if record_every and (k + 1) % record_every == 0:
            traj.append(2.0 * (np.log(np.abs(G)) + log_scale))
    with np.errstate(divide="ignore"):
        log_n = 2.0 * (np.log(np.abs(G)) + log_scale)
    log_n = log_n + math.log1p(2.0 * spec.n_thermal)
    if traj is not None:
        traj = np.array(traj).reshape(-1, R) + math.log1p(2.0 * spec.n_thermal)
    return log_n, chi_bar, traj


def _blocks(total: int):
    return [(a, min(a + BLOCK, total)) for a in range(0, total, BLOCK)]


def _run_all(spec: ExperimentSpec, workers: int = 1, record_every: int | None = None):
    blocks = _blocks(spec.realizations)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _run_block(spec, *b, record_every), blocks))
    else:
        parts = [_run_block(spec, a, b, record_every) for a, b in blocks]
    log_n = np.concatenate([p[0] for p in parts])
    chi_bar = np.concatenate([p[1] for p in parts])
    traj = np.concatenate([p[2] for p in parts], axis=1) if record_every else None
    return log_n, chi_bar, traj


def simulate_realization(spec: ExperimentSpec, realization_index: int, trajectory: bool = False):
    """Final photon count of one realization (and optionally ``N_k``, k = 1..n)."""
    if realization_index < 0:
        raise ConfigurationError("realization_index", "must be non-negative")
    one = spec.with_(realizations=1)
    log_n, _, traj = _run_block(one, realization_index, realization_index + 1, 1 if trajectory else None)
    photons = float(np.exp(log_n[0]))
    if trajectory:
        return photons, np.exp(traj[:, 0]) if traj.size else np.zeros(0)
    return photons


def _log_mean(log_n: np.ndarray) -> float:
    return float(logsumexp(log_n) - math.log(log_n.size))


def ensemble_average(spec: ExperimentSpec, workers: int = 1, keep_per_realization: bool = True) -> EnsembleResult:
    """Mean and spread of the final photon count over all realizations."""
    log_n, chi_bar, _ = _run_all(spec, workers)
    with np.errstate(over="ignore"):
        photons = np.exp(log_n)
    if photons.size and np.all(photons == photons[0]):
        # identical realizations (no jitter); avoid summation round-off
        mean, std = float(photons[0]), 0.0
    elif np.all(np.isfinite(photons)):
        mean = float(np.mean(photons))
        std = float(np.std(photons))
    else:
        mean, std = math.inf, math.nan
    log_mean = _log_mean(log_n)
    rel = std / mean if mean > 0 and math.isfinite(mean) else math.nan
    meta = {"spec": spec.to_dict(), "seed": spec.jitter.master_seed, "realizations": spec.realizations,
            "n_pulses": spec.n_pulses}
    return EnsembleResult(
        mean_photons=mean,
        std_photons=std,
        relative_std=rel,
        log_mean_photons=log_mean,
        mean_chi_bar=float(np.mean(chi_bar)),
        per_realization=tuple(photons.tolist()) if keep_per_realization else None,
        metadata=meta,
    )


def full_dephasing_chi(convention: str) -> float:
    """Jitter amplitude that spreads the interference phase over a full turn."""
    return math.pi / 2 if convention == "theta" else math.pi


def critical_chi(delta_theta: float, template: ExperimentSpec, band=(9.0, 10.0),
                 chi_upper: float | None = None, width: float = 1e-3, workers: int = 1,
                 stop: str = "center") -> float:
    """Jitter amplitude at which the ensemble mean falls into ``band``.

    Bisection on ``chi`` in ``(0, chi_upper]`` (full dephasing by default)
    with the template's seed held fixed, so every trial reuses the same
    uniforms.

    Parameters
    ----------
    stop : {"center", "band"}
        ``"band"`` returns the first bisection midpoint whose mean lies in the
        band, which quantizes the answer to the bracket width at that point.
        ``"center"`` keeps bisecting toward the band midpoint until the
        bracket is narrower than ``width``.
    """
    lo_n, hi_n = band
    if not 0 < lo_n < hi_n:
        raise ConfigurationError("band", "need 0 < lo < hi")
    if stop not in ("center", "band"):
        raise ConfigurationError("stop", f"unknown rule {stop!r}")
    spec = template.with_(delta_theta=delta_theta)
    upper = full_dephasing_chi(spec.convention) if chi_upper is None else chi_upper

    def mean_at(chi):
        return ensemble_average(spec.with_(chi=chi), workers, keep_per_realization=False).mean_photons

    base = mean_at(0.0)
    if base < lo_n:
        raise NoCrossing(f"zero-jitter mean {base:.4g} already below {lo_n:g}")
    if base <= hi_n:
        return 0.0
    top = mean_at(upper)
    if top > hi_n:
        raise NoCrossing(f"mean {top:.4g} at chi={upper:.4g} still above {hi_n:g}")
    target = 0.5 * (lo_n + hi_n)
    a, b = 0.0, upper
    while b - a >= width:
        mid = 0.5 * (a + b)
        m = mean_at(mid)
        if stop == "band" and lo_n <= m <= hi_n:
            return mid
        if m > (hi_n if stop == "band" else target):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def alternating_cutoff(g: float, delta_theta: float, convention: str = "theta") -> float:
    """Jump amplitude where alternating jumps stop growth (``nan`` if none).

    Expressed in the same convention as the jitter, so it can be compared
    with :func:`critical_chi`; under ``"psi"`` jumps and detuning act on
    ``theta`` at half size.
    """
    if convention not in CONVENTIONS:
        raise ConfigurationError("convention", f"must be one of {CONVENTIONS}")
    if convention == "theta":
        return alternating_cutoff_chi(abs(g), delta_theta)
    return 2.0 * alternating_cutoff_chi(abs(g), 0.5 * delta_theta)


def mean_cos(chi: float) -> float:
    """``<cos x>`` for ``x`` uniform on ``(-chi, chi)``."""
    if chi < 0:
        raise ValueError("chi must be non-negative")
    return float(np.sinc(chi / math.pi))


@dataclass(frozen=True)
class LandauerScan:
    g: float
    r_sq: float
    n_grid: tuple
    log_mean: dict          # chi -> tuple of ln<N_n> on n_grid
    slopes: dict            # chi -> OLS slope on the upper half of n_grid
    reference: tuple        # 2 n r^2 - ln 2 on n_grid
    metadata: dict

    @property
    def reference_slope(self) -> float:
        return 2.0 * self.r_sq

    def rows(self):
        """``(chi, n, ln_mean, ln_landauer)`` records."""
        out = []
        for chi, series in self.log_mean.items():
            for n, v, ref in zip(self.n_grid, series, self.reference):
                out.append((chi, n, v, ref))
        return out


def upper_half_slope(ns: Sequence[float], ys: Sequence[float]) -> float:
    ns, ys = np.asarray(ns, float), np.asarray(ys, float)
    h = len(ns) // 2
    slope, _ = np.polyfit(ns[h:], ys[h:], 1)
    return float(slope)


def landauer_regime_scan(chi_values: Sequence[float], n_max: int, g: float, realizations: int = 20,
                         seed: int = 0, record_every: int | None = None,
                         convention: str = "psi", workers: int = 1) -> LandauerScan:
    """``ln<N_n>`` against ``n`` for large jitter amplitudes at zero detuning."""
    if n_max <= 0:
        raise ConfigurationError("n_max", "must be positive")
    every = record_every or max(1, n_max // 100)
    r_sq = g * g / (1.0 + g * g)
    grid = tuple(range(every, n_max + 1, every))
    log_mean, slopes = {}, {}
    for chi in chi_values:
        spec = ExperimentSpec(n_pulses=n_max, g=g, delta_theta=0.0, jitter=JitterSpec(chi, seed),
                              realizations=realizations, convention=convention)
        _, _, traj = _run_all(spec, workers, every)
        series = tuple(float(logsumexp(row) - math.log(row.size)) for row in traj)
        log_mean[chi] = series
        slopes[chi] = upper_half_slope(grid, series)
    reference = tuple(2.0 * n * r_sq - math.log(2.0) for n in grid)
    meta = {"seed": seed, "realizations": realizations, "convention": convention, "n_max": n_max}
    return LandauerScan(g, r_sq, grid, log_mean, slopes, reference, meta)
