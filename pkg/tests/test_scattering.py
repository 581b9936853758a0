import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_train.errors import DegenerateBarrier, NumericalBreakdown, UnitarityViolation
from casimir_train.scattering import (
    EMPTY_MOBIUS,
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

nus = st.floats(0.0, 1.5)
angles = st.floats(-math.pi, math.pi)


def barrier(nu, phi, zeta):
    return CanonicalBarrier.from_rapidity(nu, phi, zeta)


class TestBarrier:
    def test_from_coupling_is_unimodular(self):
        b = CanonicalBarrier.from_coupling(0.3 + 0.4j, phi=0.7)
        assert abs(b.defect()) < 1e-15
        assert b.phi == pytest.approx(0.7)
        assert b.r_abs == pytest.approx(0.5 / math.sqrt(1.25))

    def test_rapidity_roundtrip(self):
        b = barrier(0.8, -0.3, 1.1)
        assert b.nu == pytest.approx(0.8)
        assert cmath.phase(b.g) == pytest.approx(0.8)  # zeta + phi

    @given(nus, angles, angles)
    def test_canonicalize_roundtrip(self, nu, phi, zeta):
        c = barrier(nu, phi, zeta)
        b = decanonicalize(c)
        assert b.max_residual() < 1e-12
        back = canonicalize(b)
        assert abs(back.f - c.f) < 1e-12 * abs(c.f)
        assert abs(back.g - c.g) < 1e-12 * abs(c.f)

    def test_degenerate_transmission(self):
        with pytest.raises(DegenerateBarrier):
            canonicalize(BarrierCoefficients(1.0, -1.0, 1e-13))

    def test_zeta_is_phase_of_r_minus(self):
        b = decanonicalize(barrier(0.2, 0.4, -1.0))
        assert b.zeta == pytest.approx(cmath.phase(b.r_minus))

    def test_matrix_has_unit_determinant(self):
        M = barrier(0.6, 0.2, 0.9).matrix(theta=1.3)
        assert abs(np.linalg.det(M) - 1) < 1e-13


class TestComposition:
    def test_vacuum_and_identity(self):
        assert photon_number(VACUUM) == 0.0
        s = compose_step(VACUUM, CanonicalBarrier(1 + 0j, 0j), 0.4)
        assert (s.F, s.G, s.pulses_applied) == (1, 0, 1)

    def test_single_step_equals_barrier(self):
        b = barrier(0.3, 0.5, 0.1)
        s = compose_step(VACUUM, b, 0.0)
        assert s.F == b.f and s.G == b.g

    @given(st.lists(st.tuples(nus, angles, angles, angles), min_size=1, max_size=8))
    def test_step_matches_matrix_product(self, spec):
        state = VACUUM
        M = np.eye(2, dtype=complex)
        for nu, phi, zeta, th in spec:
            b = barrier(nu, phi, zeta)
            state = compose_step(state, b, th)
            M = b.matrix(th) @ M
        scale = max(1.0, abs(M).max())
        assert np.allclose(state.matrix(), M, atol=1e-12 * scale, rtol=0)

    def test_matrix_acts_on_amplitudes(self):
        b = barrier(0.4, 0.3, -0.2)
        out = WaveAmplitudes(1.0, 0.0).through(b, 0.7)
        assert out.a == pytest.approx(b.f.conjugate())
        assert out.b == pytest.approx(-b.g * cmath.exp(1.4j))

    def test_compose_train_length_mismatch(self):
        with pytest.raises(ValueError):
            compose_train([barrier(0.1, 0, 0)] * 3, [0.0, 0.0])

    def test_single_barrier_broadcast(self):
        b = barrier(0.1, 0.0, 0.0)
        a = compose_train(b, [0.0] * 4)
        c = compose_train([b] * 4, [0.0] * 4)
        assert a == c

    def test_resonant_growth(self):
        # in-phase identical barriers add rapidities
        s = compose_train(barrier(0.05, 0.0, 0.0), [0.0] * 40)
        assert photon_number(s) == pytest.approx(math.sinh(2.0) ** 2, rel=1e-12)

    def test_thermal_factor(self):
        s = TransferState(1.5 + 0j, 0.7 + 0.2j)
        assert photon_number(s, 1.0) == 3 * photon_number(s)
        with pytest.raises(ValueError):
            photon_number(s, -0.1)

    def test_bogoliubov_view(self):
        s = compose_train(barrier(0.2, 0.1, 0.3), [0.0, 0.5])
        p = s.bogoliubov()
        assert abs(p.defect()) < 1e-13
        assert photon_number_from_bogoliubov(p) == pytest.approx(photon_number(s))


class TestMobius:
    def test_first_step_returns_barrier(self):
        c = decanonicalize(barrier(0.3, 0.2, 0.4))
        m = mobius_step(EMPTY_MOBIUS, c, 0.0)
        assert m.rho == pytest.approx(c.r_minus)
        assert m.tau == pytest.approx(c.t)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.floats(0, 0.5), angles, angles, angles), min_size=1, max_size=20))
    def test_matches_transfer(self, spec):
        state, m = VACUUM, EMPTY_MOBIUS
        for nu, phi, zeta, th in spec:
            b = barrier(nu, phi, zeta)
            state = compose_step(state, b, th)
            m = mobius_step(m, decanonicalize(b), th)
        assert m.photon_number() == pytest.approx(photon_number(state), rel=1e-10, abs=1e-14)
        assert abs(m.defect()) < 1e-12

    def test_breakdown_on_tiny_denominator(self):
        m = MobiusState(rho=0.5 + 0j, tau=math.sqrt(0.75) + 0j, pulses_applied=1)
        bad = BarrierCoefficients(-2.0 + 0j, 0j, 1.0 + 0j)
        with pytest.raises(NumericalBreakdown):
            mobius_step(m, bad, 0.0)

    def test_interference_phase_enters_landauer_step(self):
        b1, b2 = barrier(0.3, 0.1, 0.2), barrier(0.2, -0.4, 1.0)
        c2 = decanonicalize(b2)
        m = mobius_step(EMPTY_MOBIUS, decanonicalize(b1), 0.0)
        psi = interference_phase(m, c2, 0.9)
        nxt = mobius_step(m, c2, 0.9)
        got = landauer_dephased_step(m.photon_number(), abs(c2.r_minus), psi)
        assert got == pytest.approx(nxt.photon_number(), rel=1e-12)


class TestUnitarity:
    def test_rejects_violation(self):
        with pytest.raises(UnitarityViolation):
            photon_number_from_bogoliubov(BogoliubovPair(1.0, 0.5))

    def test_accepts_exact(self):
        p = BogoliubovPair(math.cosh(0.7), math.sinh(0.7))
        assert photon_number_from_bogoliubov(p) == pytest.approx(math.sinh(0.7) ** 2)

    def test_tolerance_scales_with_magnitude(self):
        x = math.cosh(12.0)
        p = BogoliubovPair(x, math.sqrt(x * x - 1) * (1 + 1e-16))
        assert photon_number_from_bogoliubov(p) > 0


class TestLandauer:
    def test_fresnel(self):
        assert fresnel_limit(1.0, 3.0) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            fresnel_limit(0.0, 1.0)

    def test_constant_chain(self):
        R = 0.01
        assert landauer_compose([R] * 10) == pytest.approx(0.5 * ((1 + R) / (1 - R)) ** 10 - 0.5, rel=1e-13)

    def test_empty_chain(self):
        assert landauer_compose([]) == 0.0

    def test_rejects_bad_reflectance(self):
        with pytest.raises(ValueError):
            landauer_compose([1.0])

    @given(st.lists(st.floats(0.0, 0.9), min_size=1, max_size=30))
    def test_dropped_cosine_reproduces_compose(self, Rs):
        X = 0.0
        for R in Rs:
            X = landauer_dephased_step(X, math.sqrt(R), None)
        assert X == pytest.approx(landauer_compose(Rs), rel=1e-9)

    def test_resistance(self):
        assert resistance(0.5) == 1.0
        with pytest.raises(ValueError):
            landauer_dephased_step(-1.0, 0.1, None)
