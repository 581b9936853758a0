"""Photon creation in a cavity mode driven by a train of frequency pulses.

Each pulse of the mode frequency acts as a barrier in time with reflection
and transmission amplitudes; trains are composed with 2x2 unimodular transfer
matrices, analysed in closed form, and sampled under random phase jitter.
"""

__version__ = "0.1.0"

from .errors import (
    CasimirError,
    ConfigurationError,
    DegenerateBarrier,
    EmptyTrain,
    IdentityViolation,
    IntegrationFailure,
    NoCrossing,
    NumericalBreakdown,
    NumericalFailure,
    UnitarityViolation,
)
from .numerics import DEFAULT_POLICY, NumericPolicy
from .scattering import (
    EMPTY_MOBIUS,
    IDENTITY_BARRIER,
    VACUUM,
    BarrierCoefficients,
    BogoliubovPair,
    CanonicalBarrier,
    MobiusState,
    TransferState,
    WaveAmplitudes,
    canonicalize,
    compose_step,
    compose_train,
    decanonicalize,
    fresnel_limit,
    interference_phase,
    landauer_compose,
    landauer_dephased_step,
    mobius_step,
    photon_number,
    photon_number_from_bogoliubov,
    resistance,
)
from .barrier_lab import (
    CavityGeometry,
    Constant,
    FrequencyProfile,
    HarmonicPulse,
    IntegratorPolicy,
    SquarePulse,
    TabulatedPulse,
    direct_evolution,
    dumps_profile,
    eigenfrequency,
    jump_reflection,
    loads_profile,
    periodic_profile,
    profile_barriers,
    square_barrier_analytic,
    sweep_reflection,
    synthesize_barrier,
)
from .periodic import (
    AlternatingSpec,
    PulseSchedule,
    alternating_cutoff_chi,
    chebyshev_power,
    critical_detuning,
    generalized_resonance_phases,
    growth_exponent,
    harmonic_reference,
    max_detuning_estimate,
    photons_alternating,
    photons_amplitude_varied,
    photons_detuned,
    photons_resonant,
    photons_resonant_asymptotic,
    photons_resonant_bracket,
    resonance_phase,
)
from .ensemble import (
    EnsembleResult,
    ExperimentSpec,
    JitterSpec,
    LandauerScan,
    critical_chi,
    ensemble_average,
    jitter_draws,
    landauer_regime_scan,
    mean_cos,
    simulate_realization,
)

__all__ = [
    "__version__",
    "DEFAULT_POLICY",
    "NumericPolicy",
    "CasimirError",
    "ConfigurationError",
    "DegenerateBarrier",
    "EmptyTrain",
    "IdentityViolation",
    "IntegrationFailure",
    "NoCrossing",
    "NumericalBreakdown",
    "NumericalFailure",
    "UnitarityViolation",
    "EMPTY_MOBIUS",
    "IDENTITY_BARRIER",
    "VACUUM",
    "BarrierCoefficients",
    "BogoliubovPair",
    "CanonicalBarrier",
    "MobiusState",
    "TransferState",
    "WaveAmplitudes",
    "canonicalize",
    "compose_step",
    "compose_train",
    "decanonicalize",
    "fresnel_limit",
    "interference_phase",
    "landauer_compose",
    "landauer_dephased_step",
    "mobius_step",
    "photon_number",
    "photon_number_from_bogoliubov",
    "resistance",
    "CavityGeometry",
    "Constant",
    "FrequencyProfile",
    "HarmonicPulse",
    "IntegratorPolicy",
    "SquarePulse",
    "TabulatedPulse",
    "direct_evolution",
    "dumps_profile",
    "eigenfrequency",
    "jump_reflection",
    "loads_profile",
    "periodic_profile",
    "profile_barriers",
    "square_barrier_analytic",
    "sweep_reflection",
    "synthesize_barrier",
    "AlternatingSpec",
    "PulseSchedule",
    "alternating_cutoff_chi",
    "chebyshev_power",
    "critical_detuning",
    "generalized_resonance_phases",
    "growth_exponent",
    "harmonic_reference",
    "max_detuning_estimate",
    "photons_alternating",
    "photons_amplitude_varied",
    "photons_detuned",
    "photons_resonant",
    "photons_resonant_asymptotic",
    "photons_resonant_bracket",
    "resonance_phase",
    "EnsembleResult",
    "ExperimentSpec",
    "JitterSpec",
    "LandauerScan",
    "critical_chi",
    "ensemble_average",
    "jitter_draws",
    "landauer_regime_scan",
    "mean_cos",
    "simulate_realization",
]
