from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kuramoto_continuum.characteristics import (
    CharacteristicEnsemble,
    InvariantViolation,
    MeanFieldTrace,
    SolverConfig,
    backward_phase,
    characteristic_path,
    check_ensemble,
    density_at,
    evolve,
    lift_phase,
    p_along,
    q_along,
    q_bound,
    read_trace_csv,
    step,
    trace_csv,
    transport,
)
from kuramoto_continuum.density import TWO_PI, PhaseGrid, make_cos_power, make_cosine_family, make_fourier, make_uniform
from kuramoto_continuum.integrate import rk4_step, step_count


def test_rk4_exponential():
    y = np.array([1.0])
    for _ in range(100):
        y = rk4_step(lambda s: -s, y, 0.01)
    assert y[0] == pytest.approx(math.exp(-1.0), rel=1e-10)


@pytest.mark.parametrize("T, dt, n", [(1.0, 0.1, 10), (1.0, 0.3, 4), (0.0, 0.1, 0)])
def test_step_count(T, dt, n):
    count, h = step_count(T, dt)
    assert count == n
    if n:
        assert count * h == pytest.approx(T)


class TestSolverConfig:
    def test_default_dt_scales_with_k(self):
        assert SolverConfig(k=4.0).dt == pytest.approx(2.5e-4)
        assert SolverConfig(k=0.5).dt == pytest.approx(1e-3)

    @pytest.mark.parametrize("kwargs", [{"k": 0}, {"dt": -1}, {"N": 4}, {"M": 7.5}, {"T": -1}, {"output_times": (11.0,)}])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestStep:
    def test_uniform_is_stationary(self):
        ens = CharacteristicEnsemble.initial(make_uniform(), 64)
        out = step(ens, 0.01, 1.0)
        assert np.allclose(out.y, ens.y, atol=1e-15)
        assert np.allclose(out.z, ens.z, atol=1e-15) and np.allclose(out.J, 1.0, atol=1e-15)

    def test_single_node_self_coupling(self):
        ens = CharacteristicEnsemble.from_nodes([1.0], [1.0], [0.3])
        for _ in range(100):
            ens = step(ens, 0.01, 2.0)
        assert ens.y[0] == pytest.approx(1.0, abs=1e-14)
        assert ens.z[0] == pytest.approx(0.3 * math.exp(2.0), rel=1e-8)

    def test_push_forward_every_step(self):
        rho = make_fourier([[1.0, 1, 0.0]])
        ens = CharacteristicEnsemble.initial(rho, 256)
        for _ in range(200):
            ens = step(ens, 1e-3, 1.0)
            assert np.max(np.abs(ens.z * ens.J - ens.rho0_u)) < 1e-9

    def test_periodic_equivariance(self):
        rho = make_cosine_family(0.4, 0.6)
        base = CharacteristicEnsemble.initial(rho, 32)
        shifted = CharacteristicEnsemble.from_nodes(base.u + TWO_PI, base.w, base.rho0_u)
        for _ in range(500):
            base, shifted = step(base, 1e-2, 1.0), step(shifted, 1e-2, 1.0)
        assert np.max(np.abs(shifted.y - base.y - TWO_PI)) < 1e-10

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            step(CharacteristicEnsemble.initial(make_uniform(), 8), 0.0, 1.0)


def test_nodes_avoid_antipode():
    ens = CharacteristicEnsemble.initial(make_cosine_family(0.0, 0.5), 16)
    assert np.min(np.abs(ens.u - math.pi)) == pytest.approx(math.pi / 16)
    assert ens.w.sum() == pytest.approx(1.0, abs=1e-14)


def test_zero_density_nodes_carry_zero():
    rho = make_cos_power(0.0, 2)
    ens = CharacteristicEnsemble.initial(rho, 16, offset=0.0)
    assert ens.z[8] == 0.0
    run = evolve(rho, SolverConfig(T=1.0, N=16, dt=1e-2), ensemble=ens)
    assert run.ensemble.z[8] == 0.0


class TestEvolve:
    def test_uniform(self):
        run = evolve(make_uniform(), SolverConfig(T=1.0, N=32, M=32, dt=1e-2, output_times=(0.5, 1.0)))
        assert np.all(run.trace.C < 1e-15)
        for s in run.snapshots:
            assert np.allclose(s.values, 1 / TWO_PI, atol=1e-15)

    def test_unit_amplitude_cosine(self):
        rho = make_fourier([[1.0, 1, 0.0]])
        run = evolve(rho, SolverConfig(T=10.0, N=256), history_stride=0)
        C = run.trace.C
        assert C[0] == pytest.approx(0.5, abs=1e-12)
        assert np.all(np.diff(C) > 0)
        # Frozen from a pairwise-oracle run at N = 256, dt = 1e-3.
        assert C[run.trace.index_of(1.0)] == pytest.approx(0.758481678162767, abs=1e-9)
        assert C[-1] == pytest.approx(0.9999999875338538, abs=1e-9)

    def test_mean_phase_conserved(self, run10):
        assert np.max(np.abs(run10.mean_phase - run10.mean_phase[0])) < 1e-8

    def test_speed_bound(self, run10):
        h = run10.history
        speed = np.abs(np.diff(h.y, axis=0)) / np.diff(h.t)[:, None]
        assert np.all(speed <= np.maximum(run10.trace.C[1:], run10.trace.C[:-1])[:, None] + 1e-6)

    def test_invariant_violation_names_invariant(self):
        ens = CharacteristicEnsemble.initial(make_cosine_family(0.0, 0.5), 16)
        bad = CharacteristicEnsemble(ens.u, ens.w, ens.rho0_u, 0.0, ens.y, ens.z * 1.1, ens.J)
        with pytest.raises(InvariantViolation, match="push-forward"):
            check_ensemble(bad, 1.0, 1e-6)
        swapped = ens.y.copy()
        swapped[[3, 4]] = swapped[[4, 3]]
        with pytest.raises(InvariantViolation, match="ordering"):
            check_ensemble(CharacteristicEnsemble(ens.u, ens.w, ens.rho0_u, 0.0, swapped, ens.z, ens.J), 1.0, 1e-6)

    def test_snapshot_mass_at_five(self, run10):
        snap = next(s for s in run10.snapshots if s.t == 5.0)
        assert abs(PhaseGrid(256).h * snap.values.sum() - 1.0) < 1e-6

    def test_under_resolved_snapshot_is_flagged(self, run10):
        assert not run10.resolved and set(run10.snapshot_mass_errors) == {10.0}


class TestBackward:
    def test_identity_at_zero(self, run10):
        th = np.linspace(0, TWO_PI, 7)
        assert np.array_equal(backward_phase(0.0, th, run10.trace, 1.0), th)

    def test_uniform_field(self):
        trace = evolve(make_uniform(), SolverConfig(T=2.0, N=16, dt=1e-2)).trace
        th = np.linspace(0, TWO_PI, 9)
        assert np.allclose(backward_phase(1.37, th, trace, 1.0), th, atol=1e-15)
        assert np.allclose(density_at(1.37, th, trace, make_uniform(), 1.0), 1 / TWO_PI, atol=1e-15)

    def test_round_trip(self, run10, rng):
        trace = run10.trace
        t = np.round(rng.uniform(0.0, 5.0, 100) / 1e-3) * 1e-3
        theta = rng.uniform(0.0, TWO_PI, 100)
        feet = backward_phase(t, theta, trace, 1.0)
        for ti, th, f in zip(t, theta, feet):
            y, _ = transport(np.array([f]), trace, 1.0, ti)
            assert abs(y[0] - th) < 1e-6

    def test_matches_node_values(self, run10, cosine):
        ens, trace = run10.ensemble, run10.trace
        assert np.allclose(backward_phase(10.0, ens.y, trace, 1.0), ens.u, atol=1e-9)
        rel = np.abs(density_at(10.0, ens.y, trace, cosine, 1.0) / ens.z - 1.0)
        assert rel.max() < 1e-6
        # The Jacobian route: rho0(theta0) / J.
        assert np.allclose(ens.rho0_u / ens.J, ens.z, rtol=1e-9)

    def test_outside_trace(self, run10):
        with pytest.raises(ValueError, match="outside"):
            backward_phase(10.5, 0.0, run10.trace, 1.0)

    def test_t_zero_density(self, run10, cosine):
        th = np.linspace(0, TWO_PI, 11)
        assert np.allclose(density_at(0.0, th, run10.trace, cosine, 1.0), cosine(th), atol=1e-15)


class TestDerivatives:
    def test_initial_q(self, run10, cosine):
        path = characteristic_path(0.7, run10.trace, cosine, 1.0, 0.0)
        assert q_along(path, 1.0)[0] == pytest.approx(cosine.derivative(0.7))

    def test_uniform_q_and_p(self):
        trace = evolve(make_uniform(), SolverConfig(T=1.0, N=16, dt=1e-2)).trace
        path = characteristic_path(1.0, trace, make_uniform(), 1.0, 1.0)
        q = q_along(path, 1.0)
        g, f = path.coupling(1.0)
        assert np.max(np.abs(q)) < 1e-15 and np.max(np.abs(p_along(q, path.z, g, f))) < 1e-15

    def test_p_at_zero_direct_substitution(self, run10, cosine):
        path = characteristic_path(math.pi / 2, run10.trace, cosine, 1.0, 0.0)
        g, f = path.coupling(1.0)
        q = q_along(path, 1.0)
        assert g[0] == pytest.approx(-0.25) and f[0] == pytest.approx(0.0, abs=1e-15)
        expected = -cosine.derivative(math.pi / 2) * g[0] + cosine(math.pi / 2) * f[0]
        assert p_along(q[0], path.z[0], g[0], f[0]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(-0.5 / TWO_PI * 0.25, rel=1e-12)

    def test_q_bound(self, run10, cosine):
        for th in (0.3, 2.0, 3.0, 5.5):
            path = characteristic_path(th, run10.trace, cosine, 1.0, 10.0)
            assert np.all(np.abs(q_along(path, 1.0)) <= q_bound(path, 1.0))

    def test_q_on_massless_characteristic(self):
        rho = make_cos_power(0.0, 2)
        trace = evolve(rho, SolverConfig(T=2.0, N=64), history_stride=0).trace
        path = characteristic_path(math.pi, trace, rho, 1.0, 2.0)
        assert path.rho0 == pytest.approx(0.0, abs=1e-30)
        assert np.allclose(q_along(path, 1.0), 0.0, atol=1e-15)

    def test_empty_history(self):
        from kuramoto_continuum.characteristics import CharacteristicPath

        empty = CharacteristicPath(np.array([]), np.array([]), np.array([]), np.array([], complex), 1.0, 0.0)
        with pytest.raises(ValueError, match="empty"):
            q_along(empty, 1.0)


class TestTrace:
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=30))
    def test_lift_is_continuous(self, steps):
        ang = np.cumsum(steps)
        lifted = lift_phase(np.exp(1j * ang))
        assert 0.0 <= lifted[0] < TWO_PI
        assert np.allclose(np.diff(lifted), np.diff(ang), atol=1e-9)

    def test_lift_freezes_when_degenerate(self):
        Z = np.array([1j, 0.0, 0.0, -1.0])
        assert np.allclose(lift_phase(Z), [math.pi / 2, math.pi / 2, math.pi / 2, math.pi])

    def test_csv_round_trip(self, run10):
        trace = MeanFieldTrace(run10.trace.t[:50], run10.trace.C[:50], run10.trace.psi[:50])
        back = read_trace_csv(trace_csv(trace))
        assert np.array_equal(back.t, trace.t) and np.array_equal(back.C, trace.C)
        assert np.array_equal(back.psi, trace.psi)

    def test_csv_rejects_bad_header(self):
        with pytest.raises(ValueError, match="header"):
            read_trace_csv("time,C,psi\n0,0,0\n1,0,0\n")
