"""Self-consistent projected characteristics for the identical-oscillator model.

The continuum density is carried by characteristics y(t; u) started at
quadrature nodes u_j. Each node has mass w_j = rho0(u_j) * 2*pi/N, so the
coupling integral becomes sum_j w_j*exp(i*y_j) = C*exp(i*psi) and every node
obeys

    y' = k*C*sin(psi - y),   z' = z*k*C*cos(psi - y),   J' = -J*k*C*cos(psi - y).

z is the density carried along the characteristic and J = dy/du its
stretching, so z*J = rho0(u) is conserved. Once the mean field (C, psi) is
known the characteristic field is fixed, which is what the backward solves
below exploit: rho(t, theta) only needs the stored trace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .density import (
    DEGENERATE_C,
    TWO_PI,
    DensitySnapshot,
    InitialDensity,
    OrderParameter,
    PhaseGrid,
    fmt,
    mass,
    order_parameter_from_moment,
    wrap_angle,
)
from .integrate import rk4_step, step_count

log = logging.getLogger(__name__)

ENVELOPE_SLACK = 1e-9
ORDER_SLACK = 1e-12
MONOTONE_SLACK = 1e-10


class SolverError(RuntimeError):
    """The integration produced an unusable state."""


class InvariantViolation(SolverError):
    """A structural invariant of the characteristic system failed."""

    def __init__(self, invariant: str, t: float, detail: str) -> None:
        self.invariant = invariant
        self.t = t
        super().__init__(f"invariant '{invariant}' violated at t={t:.6g}: {detail}")


@dataclass(frozen=True)
class SolverConfig:
    k: float = 1.0
    T: float = 10.0
    dt: float | None = None
    N: int = 256
    M: int = 256
    output_times: tuple[float, ...] = ()
    mass_tol: float = 1e-6
    invariant_tol: float = 1e-6
    picard_tol: float = 1e-5
    seed: int = 0
    # Fraction of a cell by which the nodes are shifted off 2*pi*j/N.
    node_offset: float = 0.5

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k!r}")
        if not self.T >= 0:
            raise ValueError(f"T must be >= 0, got {self.T!r}")
        if self.dt is None:
            object.__setattr__(self, "dt", 1e-3 * min(1.0, 1.0 / self.k))
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        for name in ("N", "M"):
            v = getattr(self, name)
            if int(v) != v or v < 8:
                raise ValueError(f"{name} must be an integer >= 8, got {v!r}")
        times = tuple(float(t) for t in self.output_times)
        if any(t < 0 or t > self.T + 1e-12 for t in times):
            raise ValueError(f"output_times must lie in [0, T={self.T}]")
        object.__setattr__(self, "output_times", times)
        for name in ("mass_tol", "invariant_tol", "picard_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0.0 <= self.node_offset < 1.0:
            raise ValueError("node_offset must lie in [0, 1)")


@dataclass(frozen=True)
class CharacteristicEnsemble:
    """Quadrature nodes and the evolving characteristic states at time t."""

    u: np.ndarray
    w: np.ndarray
    rho0_u: np.ndarray
    t: float
    y: np.ndarray
    z: np.ndarray
    J: np.ndarray

    @classmethod
    def initial(cls, rho0: InitialDensity, N: int, offset: float = 0.5) -> "CharacteristicEnsemble":
        u = TWO_PI * (np.arange(N) + offset) / N
        r = np.asarray(rho0(u), dtype=float)
        return cls.from_nodes(u, r * (TWO_PI / N), r)

    @classmethod
    def from_nodes(cls, u, w, rho0_u) -> "CharacteristicEnsemble":
        u = np.asarray(u, dtype=float)
        r = np.asarray(rho0_u, dtype=float)
        return cls(u=u, w=np.asarray(w, dtype=float), rho0_u=r, t=0.0, y=u.copy(), z=r.copy(), J=np.ones_like(u))

    @property
    def N(self) -> int:
        return self.u.size

    def moment(self) -> complex:
        return complex(np.dot(self.w, np.exp(1j * self.y)))

    def order_parameter(self) -> OrderParameter:
        return order_parameter_from_moment(self.moment())

    def state(self) -> np.ndarray:
        return np.stack([self.y, self.z, self.J])

    def with_state(self, t: float, state: np.ndarray) -> "CharacteristicEnsemble":
        return CharacteristicEnsemble(self.u, self.w, self.rho0_u, t, state[0], state[1], state[2])


@dataclass(frozen=True)
class MeanFieldTrace:
    """Sampled mean field (t, C, psi) with psi as a continuous lift.

    ``stages`` optionally holds the four RK4 stage moments of every step the
    ensemble took; zero-weight probes replayed against them follow exactly
    the path a node of the ensemble would have followed.
    """

    t: np.ndarray
    C: np.ndarray
    psi: np.ndarray
    stages: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_moments(cls, t, Z, stages=None) -> "MeanFieldTrace":
        Z = np.asarray(Z, dtype=complex)
        C = np.abs(Z)
        # Roundoff-level coherence is recorded as exactly zero, matching OrderParameter.
        C[C < DEGENERATE_C] = 0.0
        return cls(np.asarray(t, dtype=float), C, lift_phase(Z), stages)

    @cached_property
    def Z(self) -> np.ndarray:
        return self.C * np.exp(1j * self.psi)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @cached_property
    def dt(self) -> float:
        if self.t.size < 2:
            return 1.0
        steps = np.diff(self.t)
        if np.ptp(steps) > 1e-9 * steps.mean():
            return float(steps.min())
        return float(steps.mean())

    @cached_property
    def _spline(self):
        if self.t.size < 2:
            return None
        return CubicSpline(self.t, np.column_stack([self.Z.real, self.Z.imag]))

    def moment_at(self, s) -> np.ndarray:
        """Cubic interpolant of C*exp(i*psi) at times s."""
        s = np.asarray(s, dtype=float)
        if self._spline is None:
            return np.full(s.shape, self.Z[0], dtype=complex)
        v = self._spline(s)
        return v[..., 0] + 1j * v[..., 1]

    def index_of(self, t: float) -> int | None:
        """Sample index whose time equals t (to 1e-9), else None."""
        i = int(round((t - self.t[0]) / self.dt)) if self.t.size > 1 else 0
        if 0 <= i < self.t.size and abs(self.t[i] - t) <= 1e-9 * max(1.0, abs(t)):
            return i
        return None

    def require_time(self, t) -> None:
        t = np.asarray(t, dtype=float)
        lo, hi = self.t[0], self.t[-1]
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-9 * max(1.0, hi)):
            raise ValueError(f"time outside trace range [{lo}, {hi}]")


def lift_phase(Z: np.ndarray) -> np.ndarray:
    """Continuous lift of arg(Z) starting in [0, 2*pi); frozen where |Z| is degenerate."""
    ang = np.angle(Z)
    good = np.abs(Z) >= DEGENERATE_C
    if not good.any():
        return np.zeros(Z.shape)
    idx = np.where(good, np.arange(Z.size), -1)
    np.maximum.accumulate(idx, out=idx)
    filled = np.where(idx >= 0, ang[np.maximum(idx, 0)], 0.0)
    lifted = np.unwrap(filled)
    return lifted - lifted[0] + wrap_angle(float(lifted[0]))


@dataclass(frozen=True)
class CharacteristicPath:
    """One characteristic sampled in time, with the mean field it saw."""

    t: np.ndarray
    y: np.ndarray
    z: np.ndarray
    Z: np.ndarray
    rho0: float
    drho0: float

    def coupling(self, k: float) -> tuple[np.ndarray, np.ndarray]:
        """(g, f) = k*C*(sin, cos)(psi - y) along the path."""
        e = self.Z * np.exp(-1j * self.y)
        return k * e.imag, k * e.real


@dataclass(frozen=True)
class History:
    t: np.ndarray
    y: np.ndarray
    z: np.ndarray
    J: np.ndarray
    Z: np.ndarray
    w: np.ndarray
    u: np.ndarray
    rho0_u: np.ndarray
    drho0_u: np.ndarray

    def node(self, j: int) -> CharacteristicPath:
        return CharacteristicPath(self.t, self.y[:, j], self.z[:, j], self.Z, float(self.rho0_u[j]), float(self.drho0_u[j]))


@dataclass
class Evolution:
    ensemble: CharacteristicEnsemble
    trace: MeanFieldTrace
    snapshots: list[DensitySnapshot]
    history: History | None
    # Per-sample diagnostics on the trace times.
    eps: np.ndarray
    sin2: np.ndarray
    psi_residual: np.ndarray
    mean_phase: np.ndarray
    snapshot_mass_errors: dict[float, float]

    def __iter__(self):
        return iter((self.ensemble, self.trace, self.snapshots))

    @property
    def resolved(self) -> bool:
        return not self.snapshot_mass_errors


# --- forward solve -------------------------------------------------------------


def _ensemble_rhs(w: np.ndarray, k: float, record: list | None) -> Callable[[np.ndarray], np.ndarray]:
    def rhs(state: np.ndarray) -> np.ndarray:
        y, z, J = state
        ph = np.exp(1j * y)
        Z = complex(np.dot(w, ph))
        if record is not None:
            record.append(Z)
        e = Z * ph.conjugate()
        a = k * e.real
        return np.stack([k * e.imag, z * a, -J * a])

    return rhs


def _advance(ens: CharacteristicEnsemble, dt: float, k: float) -> tuple[CharacteristicEnsemble, list[complex]]:
    stages: list[complex] = []
    new = rk4_step(_ensemble_rhs(ens.w, k, stages), ens.state(), dt)
    if not np.all(np.isfinite(new)):
        bad = int(np.argmin(np.isfinite(new).all(axis=0)))
        raise SolverError(f"non-finite state at t={ens.t + dt:.6g} (node {bad})")
    return ens.with_state(ens.t + dt, new), stages


def step(ensemble: CharacteristicEnsemble, dt: float, k: float) -> CharacteristicEnsemble:
    """One RK4 step; (C, psi) is recomputed from the whole ensemble at every stage."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    return _advance(ensemble, dt, k)[0]


def _moment_diagnostics(ens: CharacteristicEnsemble, k: float):
    ph = np.exp(1j * ens.y)
    Z = complex(np.dot(ens.w, ph))
    C = abs(Z)
    if C < DEGENERATE_C:
        return Z, 0.0, 0.0, 0.0
    e = Z * ph.conjugate() / C  # exp(i*(psi - y_j))
    s, c = e.imag, e.real
    return Z, k * float(np.dot(ens.w, c * s)), float(np.dot(ens.w, s * s)), float(np.dot(ens.w, s))


def check_ensemble(ens: CharacteristicEnsemble, k: float, tol: float) -> None:
    """Raise InvariantViolation if any per-node invariant fails at ens.t."""
    t = ens.t
    pf = np.abs(ens.z * ens.J - ens.rho0_u)
    if pf.max() > tol:
        raise InvariantViolation("push-forward z*J = rho0", t, f"max error {pf.max():.3g}")
    grow = math.exp(k * t)
    if np.any(ens.z > ens.rho0_u * grow + ENVELOPE_SLACK):
        raise InvariantViolation("upper envelope z <= rho0*exp(kt)", t, "")
    if np.any(ens.z < ens.rho0_u / grow - ENVELOPE_SLACK):
        raise InvariantViolation("lower envelope z >= rho0*exp(-kt)", t, "")
    if np.any(ens.J > grow + ENVELOPE_SLACK) or np.any(ens.J <= 0):
        raise InvariantViolation("Jacobian 0 < J <= exp(kt)", t, f"max J {ens.J.max():.6g}")
    gaps = np.diff(ens.y)
    if ens.N > 1 and (gaps.min() < -ORDER_SLACK or ens.y[-1] - ens.y[0] > TWO_PI + ORDER_SLACK):
        raise InvariantViolation("ordering of characteristics", t, f"min gap {gaps.min():.3g}")


def evolve(
    rho0: InitialDensity,
    config: SolverConfig,
    *,
    history_stride: int = 1,
    check_invariants: bool = True,
    ensemble: CharacteristicEnsemble | None = None,
) -> Evolution:
    """Integrate the characteristic system over [0, T].

    The trace is sampled at every step. Snapshots at ``config.output_times``
    are rebuilt from the trace with ``density_at``; a snapshot whose trapezoid
    mass misses 1 by more than ``mass_tol`` is kept but logged, since that
    means the grid no longer resolves the density rather than a solver fault.

    Args:
        history_stride: keep y, z, J every this many steps (0 keeps none).
        ensemble: start from this ensemble instead of nodes built from rho0.

    Raises:
        InvariantViolation: naming the invariant that failed.
    """
    k = config.k
    ens = ensemble if ensemble is not None else CharacteristicEnsemble.initial(rho0, config.N, config.node_offset)
    if abs(ens.w.sum() - 1.0) > 1e-8:
        raise InvariantViolation("node masses sum to 1", 0.0, f"sum {ens.w.sum():.12g}")
    n, dt = step_count(config.T, config.dt)

    Zs = np.empty(n + 1, dtype=complex)
    eps, sin2, resid, mean_phase = (np.empty(n + 1) for _ in range(4))
    stages = np.empty((n, 4), dtype=complex)
    keep = [] if history_stride <= 0 else [i for i in range(0, n + 1, history_stride)]
    if keep and keep[-1] != n:
        keep.append(n)
    keep_row = {i: r for r, i in enumerate(keep)}
    hist = {name: np.empty((len(keep), ens.N)) for name in ("y", "z", "J")}

    def record(i: int, e: CharacteristicEnsemble) -> None:
        Zs[i], eps[i], sin2[i], resid[i] = _moment_diagnostics(e, k)
        mean_phase[i] = float(np.dot(e.w, e.y))
        r = keep_row.get(i)
        if r is not None:
            hist["y"][r], hist["z"][r], hist["J"][r] = e.y, e.z, e.J
        if check_invariants:
            check_ensemble(e, k, config.invariant_tol)
            if i > 0 and abs(Zs[i]) < abs(Zs[i - 1]) - MONOTONE_SLACK:
                raise InvariantViolation("C non-decreasing", e.t, f"dropped by {abs(Zs[i - 1]) - abs(Zs[i]):.3g}")

    record(0, ens)
    for i in range(n):
        ens, st = _advance(ens, dt, k)
        ens = CharacteristicEnsemble(ens.u, ens.w, ens.rho0_u, (i + 1) * dt, ens.y, ens.z, ens.J)
        stages[i] = st
        record(i + 1, ens)

    times = dt * np.arange(n + 1)
    trace = MeanFieldTrace.from_moments(times, Zs, stages)
    history = None
    if keep:
        history = History(
            t=times[keep],
            y=hist["y"],
            z=hist["z"],
            J=hist["J"],
            Z=Zs[keep],
            w=ens.w,
            u=ens.u,
            rho0_u=ens.rho0_u,
            drho0_u=np.asarray(rho0.derivative(ens.u), dtype=float),
        )

    grid = PhaseGrid(config.M)
    snapshots, mass_errors = [], {}
    for t_out in config.output_times:
        snap = DensitySnapshot(t_out, grid, density_at(t_out, grid.nodes, trace, rho0, k))
        err = mass(snap) - 1.0
        if abs(err) > config.mass_tol:
            mass_errors[t_out] = err
            log.warning("snapshot at t=%g has trapezoid mass error %.3g on M=%d; grid under-resolves rho", t_out, err, config.M)
        snapshots.append(snap)

    return Evolution(ens, trace, snapshots, history, eps, sin2, resid, mean_phase, mass_errors)


# --- transport along a known mean field ----------------------------------------


def transport(theta0, trace: MeanFieldTrace, k: float, t_end: float, *, full: bool = False):
    """Carry zero-weight characteristics from t=0 to ``t_end`` through the trace.

    Returns (y, A) at ``t_end``, or the (times, y, A) paths when ``full``;
    A = int_0^t k*C*cos(psi - y) ds, so z = rho0(theta0)*exp(A) and J = exp(-A).
    When the trace carries RK4 stage moments and ``t_end`` is a sample time,
    the probes replay those stages exactly.
    """
    trace.require_time(t_end)
    y = np.array(theta0, dtype=float, copy=True)
    A = np.zeros_like(y)
    i_end = trace.index_of(t_end)
    exact = trace.stages is not None and i_end is not None
    if exact:
        n, h = i_end, trace.dt
        fields = trace.stages[:n]
        times = trace.t[: n + 1]
    else:
        n, h = step_count(t_end, trace.dt)
        times = h * np.arange(n + 1)
        mid = trace.moment_at(times[:-1] + 0.5 * h)
        ends = trace.moment_at(times)
        fields = np.column_stack([ends[:-1], mid, mid, ends[1:]]) if n else np.empty((0, 4), complex)
    if full:
        ys, As = np.empty((n + 1,) + y.shape), np.empty((n + 1,) + y.shape)
        ys[0], As[0] = y, A
    for m in range(n):
        f1, f2, f3, f4 = fields[m]
        e1 = f1 * np.exp(-1j * y)
        e2 = f2 * np.exp(-1j * (y + 0.5 * h * k * e1.imag))
        e3 = f3 * np.exp(-1j * (y + 0.5 * h * k * e2.imag))
        e4 = f4 * np.exp(-1j * (y + h * k * e3.imag))
        y = y + (h * k / 6.0) * (e1.imag + 2.0 * e2.imag + 2.0 * e3.imag + e4.imag)
        A = A + (h * k / 6.0) * (e1.real + 2.0 * e2.real + 2.0 * e3.real + e4.real)
        if full:
            ys[m + 1], As[m + 1] = y, A
    if full:
        return times, ys, As
    return y, A


def characteristic_path(theta0: float, trace: MeanFieldTrace, rho0: InitialDensity, k: float, t_end: float) -> CharacteristicPath:
    times, ys, As = transport(np.array([theta0]), trace, k, t_end, full=True)
    r0 = float(rho0(theta0))
    i_end = trace.index_of(t_end)
    Z = trace.Z[: i_end + 1] if (trace.stages is not None and i_end is not None) else trace.moment_at(times)
    return CharacteristicPath(times, ys[:, 0], r0 * np.exp(As[:, 0]), Z, r0, float(rho0.derivative(theta0)))


def trace_back(t, theta, moment_at: Callable[[np.ndarray], np.ndarray], k: float, n_steps: int):
    """Follow y' = k*Im(Z(s)*exp(-i*y)) backward from (t, theta) to s = 0.

    Each point takes ``n_steps`` equal RK4 steps of size t/n_steps. Returns
    the foot theta0 = y(0) and int_0^t k*Re(Z(s)*exp(-i*y(s))) ds.
    """
    t, y = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
    y = y.astype(float, copy=True)
    B = np.zeros_like(y)
    if n_steps <= 0 or not np.any(t > 0):
        return y, B
    h = t / n_steps
    scalar_t = np.ndim(t) == 0 or np.ptp(t) == 0.0
    if scalar_t:
        t0, h0 = float(t.flat[0]), float(h.flat[0])
        pre = moment_at(t0 - 0.5 * h0 * np.arange(2 * n_steps + 1))
    else:
        Z_hi = moment_at(t)

    for m in range(n_steps):
        if scalar_t:
            Z_hi, Z_mid, Z_lo = pre[2 * m], pre[2 * m + 1], pre[2 * m + 2]
        else:
            s = t - m * h
            Z_mid, Z_lo = moment_at(s - 0.5 * h), moment_at(s - h)
        e1 = Z_hi * np.exp(-1j * y)
        e2 = Z_mid * np.exp(-1j * (y - 0.5 * h * k * e1.imag))
        e3 = Z_mid * np.exp(-1j * (y - 0.5 * h * k * e2.imag))
        e4 = Z_lo * np.exp(-1j * (y - h * k * e3.imag))
        y = y - (h * k / 6.0) * (e1.imag + 2.0 * e2.imag + 2.0 * e3.imag + e4.imag)
        B = B + (h * k / 6.0) * (e1.real + 2.0 * e2.real + 2.0 * e3.real + e4.real)
        if not scalar_t:
            Z_hi = Z_lo
    return y, B


def _backward(t, theta, trace: MeanFieldTrace, k: float):
    trace.require_time(t)
    n = int(np.ceil(np.max(t) / trace.dt - 1e-9)) if np.max(t) > 0 else 0
    return trace_back(t, theta, trace.moment_at, k, n)


def backward_phase(t, theta, trace: MeanFieldTrace, k: float):
    """Initial phase y(0; t, theta) of the characteristic through (t, theta)."""
    return _backward(t, theta, trace, k)[0]


def density_at(t, theta, trace: MeanFieldTrace, rho0: InitialDensity, k: float):
    """rho(t, theta) = rho0(theta0) * exp(k * int_0^t C*cos(psi - y) ds) along the characteristic."""
    theta0, A = _backward(t, theta, trace, k)
    return np.asarray(rho0(theta0)) * np.exp(A)


# --- derivatives along characteristics -----------------------------------------


def _cumulative(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    if t.size >= 3:
        return cumulative_simpson(values, x=t, initial=0.0)
    return cumulative_trapezoid(values, x=t, initial=0.0)


def q_along(path: CharacteristicPath, k: float) -> np.ndarray:
    """d rho / d theta along the characteristic at every path time.

    Uses z**2 * (int g/z ds + rho0'/rho0**2) where rho0(theta0) > 0 and
    rho0' * exp(2 int f ds) where the characteristic carries no mass.
    """
    if path.t.size == 0:
        raise ValueError("empty characteristic history")
    g, f = path.coupling(k)
    if path.rho0 > 0.0:
        return path.z**2 * (_cumulative(g / path.z, path.t) + path.drho0 / path.rho0**2)
    return path.drho0 * np.exp(2.0 * _cumulative(f, path.t))


def q_bound(path: CharacteristicPath, k: float) -> np.ndarray:
    """Growth bound on |q|: exp(2kt)*(rho0*exp(kt) + |rho0'|), or |rho0'|*exp(2kt) on massless paths."""
    if path.rho0 > 0.0:
        return np.exp(2 * k * path.t) * (path.rho0 * np.exp(k * path.t) + abs(path.drho0))
    return abs(path.drho0) * np.exp(2 * k * path.t)


def p_along(q, z, g, f):
    """d rho / d t from the transport equation: -q*g + z*f (k folded into g and f)."""
    return -np.asarray(q) * g + np.asarray(z) * f


def snapshot_at(t: float, grid: PhaseGrid, trace: MeanFieldTrace, rho0: InitialDensity, k: float) -> DensitySnapshot:
    return DensitySnapshot(t, grid, density_at(t, grid.nodes, trace, rho0, k))


def snapshots_at(times: Sequence[float], grid: PhaseGrid, trace: MeanFieldTrace, rho0: InitialDensity, k: float):
    return [snapshot_at(t, grid, trace, rho0, k) for t in times]


# --- CSV serialization ---------------------------------------------------------


def trace_csv(trace: MeanFieldTrace) -> str:
    """``t,C,psi`` rows with psi as the continuous lift, 17 significant digits."""
    lines = ["t,C,psi"] + [f"{fmt(t)},{fmt(C)},{fmt(p)}" for t, C, p in zip(trace.t, trace.C, trace.psi)]
    return "\n".join(lines) + "\n"


def read_trace_csv(text: str) -> MeanFieldTrace:
    """Parse a ``t,C,psi`` file; psi is re-lifted so wrapped inputs are accepted."""
    rows = [line.split(",") for line in text.strip().splitlines()]
    if not rows or [c.strip() for c in rows[0]] != ["t", "C", "psi"]:
        raise ValueError("trace CSV must have the header t,C,psi")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 3:
        raise ValueError("trace CSV needs at least two rows of three columns")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ValueError("trace times must be strictly increasing")
    if np.any(data[:, 1] < 0):
        raise ValueError("trace C must be non-negative")
    psi = np.unwrap(data[:, 2])
    return MeanFieldTrace(data[:, 0], data[:, 1], psi)
