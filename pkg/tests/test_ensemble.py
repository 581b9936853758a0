import math

import numpy as np
import pytest

from casimir_train.ensemble import (
    ExperimentSpec,
    JitterSpec,
    alternating_cutoff,
    critical_chi,
    ensemble_average,
    full_dephasing_chi,
    jitter_draws,
    landauer_regime_scan,
    mean_cos,
    simulate_realization,
    upper_half_slope,
)
from casimir_train.errors import ConfigurationError, NoCrossing
from casimir_train.periodic import chebyshev_power
from casimir_train.scattering import CanonicalBarrier, compose_train, photon_number


def spec(**kw):
    base = dict(n_pulses=500, g=0.01, realizations=200, jitter=JitterSpec(0.3, 11))
    base.update(kw)
    return ExperimentSpec(**base)


class TestSpec:
    def test_with_updates_jitter(self):
        s = spec().with_(chi=0.5, seed=3, n_pulses=10)
        assert (s.jitter.chi_max, s.jitter.master_seed, s.n_pulses) == (0.5, 3, 10)

    @pytest.mark.parametrize("kw, key", [
        ({"n_pulses": -1}, "n"),
        ({"realizations": 0}, "realizations"),
        ({"convention": "phase"}, "convention"),
        ({"n_thermal": -1.0}, "n_thermal"),
    ])
    def test_rejects(self, kw, key):
        with pytest.raises(ConfigurationError) as err:
            spec(**kw)
        assert err.value.key == key

    def test_jitter_rejects(self):
        with pytest.raises(ConfigurationError):
            JitterSpec(-0.1)
        with pytest.raises(ConfigurationError):
            JitterSpec(0.1, -1)

    def test_to_dict(self):
        d = spec().to_dict()
        assert d["jitter"]["chi_max"] == 0.3


class TestDraws:
    def test_range_and_reproducibility(self):
        s = spec(jitter=JitterSpec(0.7, 5))
        a = jitter_draws(s, 3)
        assert a.shape == (500,)
        assert np.all(np.abs(a) <= 0.7)
        assert np.array_equal(a, jitter_draws(s, 3))
        assert not np.array_equal(a, jitter_draws(s, 4))
        assert not np.array_equal(a, jitter_draws(s.with_(seed=6), 3))

    def test_frozen_jitter(self):
        s = spec(jitter=JitterSpec(0.7, 5, resample_per_step=False))
        a = jitter_draws(s, 0)
        assert np.all(a == a[0])

    def test_realization_matches_scalar_composition(self):
        s = spec(jitter=JitterSpec(0.4, 9), n_pulses=300)
        chis = jitter_draws(s, 17)
        b = CanonicalBarrier.from_coupling(0.01)
        ref = photon_number(compose_train(b, chis + s.delta_theta * np.arange(300)))
        assert simulate_realization(s, 17) == pytest.approx(ref, rel=1e-11)

    def test_psi_convention_halves_phases(self):
        s = spec(jitter=JitterSpec(0.4, 9), n_pulses=300, delta_theta=0.002, convention="psi")
        chis = jitter_draws(s, 2)
        b = CanonicalBarrier.from_coupling(0.01)
        ref = photon_number(compose_train(b, 0.5 * (chis + 0.002 * np.arange(300))))
        assert simulate_realization(s, 2) == pytest.approx(ref, rel=1e-11)

    def test_trajectory(self):
        s = spec(n_pulses=50)
        final, traj = simulate_realization(s, 0, trajectory=True)
        assert traj.shape == (50,)
        assert traj[-1] == pytest.approx(final)


class TestEnsemble:
    def test_zero_jitter_collapse(self):
        s = spec(jitter=JitterSpec(0.0, 1), realizations=300)
        r = ensemble_average(s)
        exact = photon_number(chebyshev_power(CanonicalBarrier.from_coupling(0.01), 0.0, 500))
        assert r.std_photons == 0.0
        assert r.mean_photons == pytest.approx(exact, rel=1e-10)
        assert r.mean_chi_bar == 0.0

    def test_detuned_collapse(self):
        s = spec(jitter=JitterSpec(0.0, 1), realizations=5, delta_theta=0.007)
        exact = photon_number(chebyshev_power(CanonicalBarrier.from_coupling(0.01), 0.007, 500))
        assert ensemble_average(s).mean_photons == pytest.approx(exact, rel=1e-10)

    def test_empty_train(self):
        assert ensemble_average(spec(n_pulses=0)).mean_photons == 0.0

    def test_workers_do_not_change_results(self):
        s = spec(realizations=300)
        a = ensemble_average(s, workers=1)
        b = ensemble_average(s, workers=4)
        assert a.per_realization == b.per_realization
        assert a.mean_photons == b.mean_photons

    def test_thermal_factor(self):
        s = spec(realizations=50)
        assert ensemble_average(s.with_(n_thermal=1.0)).mean_photons == pytest.approx(
            3 * ensemble_average(s).mean_photons, rel=1e-14)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_trend_over_seeds(self, seed):
        s = spec(realizations=700, jitter=JitterSpec(0.0, seed))
        means = [ensemble_average(s.with_(chi=c), keep_per_realization=False).mean_photons
                 for c in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)]
        assert all(b <= a for a, b in zip(means, means[1:]))

    def test_standard_error_scaling(self):
        s = spec(jitter=JitterSpec(0.4, 21))
        sem = []
        for R in (100, 400):
            r = ensemble_average(s.with_(realizations=R))
            sem.append(r.std_photons / math.sqrt(R))
        ratio = sem[0] / sem[1]
        assert 1.0 < ratio < 4.0  # 2 within a factor of 2

    def test_chi_bar_diagnostic(self):
        chi, n, R = 0.5, 500, 700
        r = ensemble_average(spec(jitter=JitterSpec(chi, 4), realizations=R))
        assert abs(r.mean_chi_bar) <= 3 * chi / math.sqrt(3 * n * R)

    def test_overflow_guard(self):
        s = ExperimentSpec(n_pulses=5000, g=0.1, realizations=3)
        r = ensemble_average(s)
        nu = math.asinh(0.1)
        assert math.isinf(r.mean_photons)
        assert r.log_mean_photons == pytest.approx(2 * 5000 * nu - math.log(4), rel=1e-10)


class TestCriticalChi:
    T = ExperimentSpec(realizations=150, jitter=JitterSpec(0.0, 42))

    def test_located_value_is_in_band(self):
        chi = critical_chi(0.0, self.T)
        m = ensemble_average(self.T.with_(chi=chi), keep_per_realization=False).mean_photons
        assert 0 < chi < math.pi / 2
        assert 8.5 < m < 10.5

    def test_band_rule_returns_in_band_point(self):
        chi = critical_chi(0.0, self.T, stop="band")
        m = ensemble_average(self.T.with_(chi=chi), keep_per_realization=False).mean_photons
        assert 9 <= m <= 10

    def test_baseline_below_band(self):
        with pytest.raises(NoCrossing):
            critical_chi(0.05, self.T)

    def test_baseline_in_band(self):
        s = self.T.with_(n_pulses=300)
        base = ensemble_average(s, keep_per_realization=False).mean_photons
        assert critical_chi(0.0, s, band=(base - 1, base + 1)) == 0.0

    def test_theta_convention_has_no_crossing_past_g(self):
        # detuning 1.2 g in theta is past threshold: the zero-jitter mean is already below 9
        with pytest.raises(NoCrossing):
            critical_chi(0.012, self.T)

    def test_psi_convention_crosses_past_g(self):
        # the same number as an interference-phase shift moves theta by only 0.6 g
        assert critical_chi(0.012, self.T.with_(convention="psi")) > 0

    def test_bad_band(self):
        with pytest.raises(ConfigurationError):
            critical_chi(0.0, self.T, band=(10, 9))
        with pytest.raises(ConfigurationError):
            critical_chi(0.0, self.T, stop="never")

    def test_full_dephasing(self):
        assert full_dephasing_chi("theta") == pytest.approx(math.pi / 2)
        assert full_dephasing_chi("psi") == pytest.approx(math.pi)

    def test_alternating_cutoff(self):
        assert alternating_cutoff(-0.01, 0.0) == pytest.approx(math.pi / 4)
        assert alternating_cutoff(0.01, 0.0, "psi") == pytest.approx(math.pi / 2)
        assert alternating_cutoff(0.01, 0.012, "psi") == pytest.approx(math.acos(0.6))
        assert math.isnan(alternating_cutoff(0.01, 0.012))


class TestLandauer:
    def test_mean_cos(self):
        assert mean_cos(0.0) == 1.0
        assert abs(mean_cos(math.pi)) < 1e-16
        assert mean_cos(1.5 * math.pi) == pytest.approx(-1 / (1.5 * math.pi))
        with pytest.raises(ValueError):
            mean_cos(-1.0)

    def test_slope_fit(self):
        ns = np.arange(1, 21)
        assert upper_half_slope(ns, 0.3 * ns + 2) == pytest.approx(0.3)

    def test_scan_shape_and_reference(self):
        scan = landauer_regime_scan([10 * math.pi], 400, 0.05, realizations=4, record_every=40)
        assert scan.n_grid == tuple(range(40, 401, 40))
        assert len(scan.log_mean[10 * math.pi]) == 10
        assert scan.reference[0] == pytest.approx(2 * 40 * scan.r_sq - math.log(2))
        assert len(scan.rows()) == 10

    def test_dephased_mean_tracks_expectation(self):
        # fully dephased phases make <N_n> + 1/2 = q^n / 2 exactly
        g = 0.05
        r2 = g * g / (1 + g * g)
        q = (1 + r2) / (1 - r2)
        r = ensemble_average(ExperimentSpec(n_pulses=200, g=g, realizations=4000, convention="psi",
                                            jitter=JitterSpec(20 * math.pi, 3)))
        expected = 0.5 * q ** 200 - 0.5
        sem = r.std_photons / math.sqrt(r.metadata["realizations"])
        assert abs(r.mean_photons - expected) < 4 * sem

    def test_small_jitter_grows_at_resonant_rate(self):
        # single realization with chi -> 0: slope 2|g| per pulse, not 2 r^2
        scan = landauer_regime_scan([1e-6], 2000, 0.01, realizations=1, record_every=20)
        slope = list(scan.slopes.values())[0]
        assert slope == pytest.approx(2 * math.asinh(0.01), rel=1e-3)
        assert slope > 100 * scan.reference_slope

    def test_rejects_bad_n(self):
        with pytest.raises(ConfigurationError):
            landauer_regime_scan([10.0], 0, 0.05)
