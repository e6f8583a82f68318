from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from kuramoto_continuum.asymptotics import (
    DegenerateMeanField,
    HorizonTooShort,
    NoSteadyState,
    band,
    band_from_ratio,
    comparison_check,
    critical_angle,
    epsilon_of_t,
    epsilon_star,
    growth_identity_check,
    lock_indicator,
    psi_limit,
)
from kuramoto_continuum.characteristics import CharacteristicEnsemble, MeanFieldTrace, SolverConfig, evolve
from kuramoto_continuum.density import TWO_PI, make_cos_power, make_cosine_family, make_uniform


def reduced(x):
    d = np.mod(x, TWO_PI)
    return np.minimum(d, TWO_PI - d)


class TestEpsilon:
    def test_symmetric_ensemble(self):
        ens = CharacteristicEnsemble.initial(make_cosine_family(0.0, 0.5), 64)
        assert abs(epsilon_of_t(ens, 1.0)) < 1e-16

    def test_single_node(self):
        # A lone node defines psi itself; probe the formula with psi held at 0 by a
        # negligible counterweight at phase 0.
        ens = CharacteristicEnsemble.from_nodes([0.0, -math.pi / 4], [1e-12, 1.0 - 1e-12], [1.0, 1.0])
        psi = ens.order_parameter().psi
        d = psi - ens.y
        assert epsilon_of_t(ens, 1.0) == pytest.approx(float(np.dot(ens.w, np.cos(d) * np.sin(d))), abs=1e-15)

    @given(a=st.floats(0.05, 0.9), b=st.floats(0.0, 0.2), t_idx=st.integers(0, 40))
    def test_matches_fine_quadrature(self, a, b, t_idx):
        from kuramoto_continuum.density import make_fourier

        rho = make_fourier([[a, 1, 0.0], [b, 2, 1.0]])
        ens = CharacteristicEnsemble.initial(rho, 512)
        eps = epsilon_of_t(ens, 1.0)
        psi = ens.order_parameter().psi
        exact = quad(lambda u: float(rho(u)) * math.cos(psi - u) * math.sin(psi - u), 0.0, TWO_PI, epsabs=1e-14)[0]
        assert eps == pytest.approx(exact, abs=1e-10)
        sin2 = float(np.dot(ens.w, np.sin(psi - ens.y) ** 2))
        assert abs(eps) <= math.sqrt(sin2) + 1e-15

    def test_run_diagnostic_matches(self, run10):
        assert run10.eps[-1] == pytest.approx(epsilon_of_t(run10.ensemble, 1.0), abs=1e-15)


class TestEpsilonStar:
    def test_zero_and_spike(self):
        t = np.linspace(0, 10, 101)
        assert epsilon_star(np.zeros(101), t, 2.0, 10.0) == 0.0
        eps = np.zeros(101)
        eps[50] = -0.3
        assert epsilon_star(eps, t, 2.0, 10.0) == pytest.approx(0.3)

    def test_empty_window(self):
        with pytest.raises(ValueError):
            epsilon_star([0.1, 0.2], [0.0, 1.0], 1.0, 1.0)
        with pytest.raises(ValueError):
            epsilon_star([0.1, 0.2], [0.0, 1.0], 0.3, 0.6)

    @given(st.lists(st.floats(-1, 1), min_size=5, max_size=50))
    def test_non_increasing_in_T(self, eps):
        t = np.arange(len(eps), dtype=float)
        vals = [epsilon_star(eps, t, T, t[-1]) for T in t[:-1]]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_symmetric_run_is_non_increasing(self, run20):
        vals = [epsilon_star(run20.eps, run20.trace.t, T, 20.0) for T in (2.0, 5.0, 8.0)]
        assert vals[0] >= vals[1] >= vals[2] and vals[0] < 1e-14

    def test_mixture_strictly_decreases_early(self, mixture):
        run = evolve(mixture, SolverConfig(T=20.0), history_stride=0, check_invariants=False)
        vals = [epsilon_star(run.eps, run.trace.t, T, 20.0) for T in (2.0, 5.0, 8.0)]
        assert vals[0] > vals[1] >= vals[2] > 0


class TestBand:
    def test_zero_eps(self):
        b = band_from_ratio(5.0, 0.0, 0.0)
        assert (b.s_plus, b.u_plus, b.u_minus, b.s_minus) == (0.0, math.pi, math.pi, TWO_PI)

    def test_half_ratio(self):
        b = band_from_ratio(5.0, 0.1, 0.5)
        assert b.s_plus == pytest.approx(math.pi / 6)
        assert b.u_plus == pytest.approx(5 * math.pi / 6)
        assert b.u_minus == pytest.approx(7 * math.pi / 6)
        assert b.s_minus == pytest.approx(11 * math.pi / 6)

    def test_no_band(self):
        with pytest.raises(NoSteadyState):
            band_from_ratio(5.0, 0.6, 1.2)

    @given(r=st.floats(0.0, 1.0))
    def test_invariants(self, r):
        b = band_from_ratio(1.0, r, r)
        assert math.sin(b.s_plus) == pytest.approx(r, abs=1e-12)
        assert math.sin(b.u_plus) == pytest.approx(r, abs=1e-12)
        assert math.sin(b.u_minus) == pytest.approx(-r, abs=1e-12)
        assert math.sin(b.s_minus) == pytest.approx(-r, abs=1e-12)
        assert 0 <= b.s_plus <= math.pi / 2 <= b.u_plus <= math.pi <= b.u_minus <= 1.5 * math.pi <= b.s_minus <= TWO_PI

    def test_from_trace(self, run20):
        b = band(5.0, run20.trace, 0.1, 1.0)
        C5 = run20.trace.C[run20.trace.index_of(5.0)]
        assert b.ratio == pytest.approx(0.1 / C5)

    def test_degenerate(self):
        trace = MeanFieldTrace(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))
        with pytest.raises(DegenerateMeanField):
            band(0.5, trace, 0.0, 1.0)

    def test_bands_tighten(self, mixture):
        run = evolve(mixture, SolverConfig(T=20.0), history_stride=0, check_invariants=False)
        s = []
        for T in (2.0, 5.0, 8.0):
            s.append(band(T, run.trace, epsilon_star(run.eps, run.trace.t, T, 20.0), 1.0).s_plus)
        assert s[0] >= s[1] >= s[2]


class TestComparison:
    def test_zero_gap_is_contained(self):
        # psi fixed at 0, C = 1: the characteristic through psi never moves.
        t = np.linspace(0, 10, 1001)
        trace = MeanFieldTrace(t, np.ones_like(t), np.zeros_like(t))
        rep = comparison_check(2.0, 0.0, trace, 0.0, 1.0)
        assert rep.passed and rep.violation_time is None

    def test_decreasing_C_is_caught(self):
        t = np.linspace(0, 10, 2001)
        C = 0.5 + 0.4 * np.tanh(-(t - 4.0) * 5)  # drops from 0.9 to 0.1 around t = 4
        trace = MeanFieldTrace(t, C, np.zeros_like(t))
        rep = comparison_check(3.0, 1.0, trace, 0.0, 1.0)
        assert not rep.passed and rep.violation_time > 3.0

    def test_clean_pass_cosine(self, run20):
        eps_star = epsilon_star(run20.eps, run20.trace.t, 5.0, 20.0)
        rep = comparison_check(5.0, 1.0, run20.trace, eps_star, 1.0, 20.0)
        assert rep.passed and rep.side == "lower"

    def test_mixture_passes(self, mixture):
        run = evolve(mixture, SolverConfig(T=20.0), history_stride=0, check_invariants=False)
        eps_star = epsilon_star(run.eps, run.trace.t, 5.0, 20.0)
        for th in np.linspace(0.2, 6.0, 6):
            assert comparison_check(5.0, float(th), run.trace, eps_star, 1.0).passed


class TestCriticalAngle:
    def test_rotation_equivariance(self):
        a = critical_angle(make_cosine_family(0.0, 0.5), 1.0, 20.0, 1e-4, dt=1e-2)
        b = critical_angle(make_cosine_family(1.0, 0.5), 1.0, 20.0, 1e-4, dt=1e-2)
        assert reduced(b.theta_c - a.theta_c - 1.0) < 1e-3

    def test_horizon_doubling(self, mixture):
        a = critical_angle(mixture, 1.0, 20.0, 1e-4, dt=1e-2)
        b = critical_angle(mixture, 1.0, 40.0, 1e-4, dt=1e-2)
        assert abs(a.theta_c - b.theta_c) < 10 * 1e-4 and a.width < 1e-4

    def test_horizon_too_short(self):
        with pytest.raises(HorizonTooShort):
            critical_angle(make_cosine_family(0.0, 0.5), 1.0, 0.5, 1e-4, dt=1e-2)

    def test_degenerate(self):
        with pytest.raises(DegenerateMeanField):
            critical_angle(make_uniform(), 1.0, 2.0, 1e-3, dt=1e-2)

    def test_dichotomy(self, run20):
        res = critical_angle(make_cosine_family(0.0, 0.5), 1.0, 20.0, 1e-4, run=run20)
        theta0 = np.linspace(0, TWO_PI, 41, endpoint=False)
        theta0 = theta0[reduced(theta0 - res.theta_c) > 0.05]
        assert np.all(reduced(lock_indicator(theta0, run20, 1.0)) < 0.05)


class TestPsiLimit:
    def test_symmetric(self):
        assert psi_limit(make_cosine_family(0.0, 0.5), math.pi, 0) == pytest.approx(0.0, abs=1e-12)

    def test_narrow_bump(self):
        c = 2.0
        rho = make_cos_power(c, 40)
        res = critical_angle(rho, 1.0, 20.0, 1e-4, dt=1e-2)
        run = evolve(rho, SolverConfig(T=20.0, dt=1e-2), history_stride=0, check_invariants=False)
        limit = psi_limit(rho, res.theta_c, res.j_C)
        assert reduced(limit - c) < 0.05
        assert reduced(limit - run.trace.psi[-1]) < 1e-3

    def test_range_check(self):
        with pytest.raises(ValueError):
            psi_limit(make_cosine_family(0.0, 0.5), TWO_PI, 0)


class TestGrowthIdentity:
    def test_uniform_degenerate(self):
        run = evolve(make_uniform(), SolverConfig(T=1.0, N=16, dt=1e-2))
        assert growth_identity_check(run.trace, run.history, 1.0).degenerate

    def test_single_node(self):
        ens = CharacteristicEnsemble.from_nodes([1.0], [1.0], [1.0])
        run = evolve(make_uniform(), SolverConfig(T=1.0, N=8, dt=1e-2), ensemble=ens)
        rep = growth_identity_check(run.trace, run.history, 1.0)
        assert np.allclose(run.trace.C, 1.0) and rep.max_relative_discrepancy < 1e-15

    def test_limit_tracks_log_ratio(self, run10):
        rep = growth_identity_check(run10.trace, run10.history, 1.0)
        assert rep.log_gap < 1e-8

    def test_requires_history(self, run20):
        with pytest.raises(ValueError):
            growth_identity_check(run20.trace, run20.history, 1.0)


def test_C_approaches_one(cosine, run20):
    run40 = evolve(cosine, SolverConfig(T=40.0, dt=1e-2), history_stride=0, check_invariants=False)
    delta10 = 1 - run20.trace.C[run20.trace.index_of(10.0)]
    delta20 = 1 - run20.trace.C[-1]
    assert delta20 < delta10 and 1 - run40.trace.C[-1] <= delta20


def test_comparison_at_locked_phase_does_not_exit(run20):
    rep = comparison_check(1.0, 0.0, run20.trace, 0.0, 1.0, 20.0)
    assert rep.passed and rep.exit_time is None
