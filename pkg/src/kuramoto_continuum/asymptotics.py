"""Long-time behavior: phase drift, steady-state bands, critical angle, limit of psi.

The phase gap Delta = psi - y of a characteristic obeys

    Delta' = eps(t) - k*C(t)*sin(Delta),   eps = psi' = k*sum_j w_j*cos(psi - y_j)*sin(psi - y_j).

Because C is non-decreasing and |eps| <= eps*(T) after T, Delta is trapped
between the solutions of f' = -k*C(T)*sin(f) +/- eps*(T), whose steady states
are the band angles. Every characteristic except one locks onto psi modulo
2*pi; the exception starts at the critical angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .characteristics import (
    CharacteristicEnsemble,
    Evolution,
    History,
    MeanFieldTrace,
    SolverConfig,
    _cumulative,
    evolve,
    lift_phase,
    transport,
)
from .density import DEGENERATE_C, TWO_PI, InitialDensity
from .integrate import rk4_step


class NoSteadyState(ValueError):
    """eps*(T) exceeds k*C(T), so the comparison equations have no fixed points."""


class DegenerateMeanField(ValueError):
    """C vanishes where a positive order parameter is required."""


class HorizonTooShort(RuntimeError):
    """The limit indicator has not separated from the threshold by the horizon."""


def epsilon_of_t(ensemble: CharacteristicEnsemble, k: float) -> float:
    """psi'(t) = k*sum_j w_j*cos(psi - y_j)*sin(psi - y_j) for the current ensemble."""
    psi = ensemble.order_parameter().psi
    d = psi - ensemble.y
    return float(k * np.sum(ensemble.w * np.cos(d) * np.sin(d)))


def epsilon_star(eps, times, T: float, T_end: float | None = None) -> float:
    """max |eps(t_i)| over samples with T <= t_i <= T_end.

    Raises:
        ValueError: if the window holds no sample.
    """
    eps = np.asarray(eps, dtype=float)
    times = np.asarray(times, dtype=float)
    hi = times[-1] if T_end is None else T_end
    if not T < hi:
        raise ValueError(f"window needs T < T_end (got T={T}, T_end={hi})")
    mask = (times >= T - 1e-12) & (times <= hi + 1e-12)
    if not np.any(mask):
        raise ValueError(f"no eps samples in [{T}, {hi}]")
    return float(np.max(np.abs(eps[mask])))


@dataclass(frozen=True)
class SteadyStateBand:
    T: float
    eps_star: float
    ratio: float
    s_plus: float
    u_plus: float
    u_minus: float
    s_minus: float

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "eps_star": self.eps_star,
            "ratio": self.ratio,
            "s_plus": self.s_plus,
            "u_plus": self.u_plus,
            "u_minus": self.u_minus,
            "s_minus": self.s_minus,
        }


def _C_at(trace: MeanFieldTrace, T: float) -> float:
    trace.require_time(T)
    i = trace.index_of(T)
    return float(trace.C[i]) if i is not None else float(abs(trace.moment_at(T)))


def band_from_ratio(T: float, eps_star: float, ratio: float) -> SteadyStateBand:
    if ratio > 1.0:
        raise NoSteadyState(f"eps*/(k*C) = {ratio:.6g} > 1 at T={T}: no steady states")
    s = math.asin(max(0.0, ratio))
    return SteadyStateBand(T, eps_star, ratio, s, math.pi - s, math.pi + s, TWO_PI - s)


def band(T: float, trace: MeanFieldTrace, eps_star: float, k: float) -> SteadyStateBand:
    """Steady states of f' = -k*C(T)*sin(f) +/- eps*: sin(s+) = eps*/(k*C(T)).

    Raises:
        DegenerateMeanField: if C(T) vanishes.
        NoSteadyState: if the ratio exceeds 1.
    """
    if eps_star < 0:
        raise ValueError(f"eps* must be non-negative, got {eps_star}")
    C = _C_at(trace, T)
    if C < DEGENERATE_C or k <= 0:
        raise DegenerateMeanField(f"k*C(T) vanishes at T={T}")
    return band_from_ratio(T, eps_star, eps_star / (k * C))


@dataclass
class ComparisonReport:
    T: float
    theta0: float
    t_end: float
    side: str
    passed: bool
    violation_time: float | None = None
    violation_size: float = 0.0
    exit_time: float | None = None
    max_gap: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def comparison_check(
    T: float,
    theta0: float,
    trace: MeanFieldTrace,
    eps_star: float,
    k: float,
    t_end: float | None = None,
    *,
    slack: float = 1e-9,
) -> ComparisonReport:
    """Check that psi - y stays on the correct side of the comparison solutions.

    Delta(T) is shifted into [0, 2*pi). If it lies below pi, Delta <= f+ is
    checked while Delta stays in [0, pi]; otherwise Delta >= f- is checked
    while it stays in [pi, 2*pi]. Leaving the interval ends the check without
    failing it. Violations beyond ``slack`` are reported, never raised.
    """
    t_end = trace.T if t_end is None else t_end
    trace.require_time(t_end)
    C_T = _C_at(trace, T)
    times, ys, _ = transport(np.array([theta0]), trace, k, t_end, full=True)
    y = ys[:, 0]
    if trace.index_of(t_end) is not None and trace.stages is not None:
        psi = trace.psi[: times.size]
    else:
        psi = lift_phase(trace.moment_at(times))
        psi += TWO_PI * np.round((trace.psi[0] - psi[0]) / TWO_PI)
    delta = psi - y
    i0 = int(np.searchsorted(times, T - 1e-9))
    delta = delta[i0:] - TWO_PI * math.floor(delta[i0] / TWO_PI)
    t = times[i0:]

    upper = delta[0] < math.pi
    sign = 1.0 if upper else -1.0
    lo, hi = (0.0, math.pi) if upper else (math.pi, TWO_PI)

    def rhs(f):
        return -k * C_T * np.sin(f) + sign * eps_star

    rep = ComparisonReport(T, float(theta0), float(t_end), "upper" if upper else "lower", True)
    f = np.array(delta[0])
    for i in range(1, t.size):
        f = rk4_step(rhs, f, t[i] - t[i - 1])
        d = delta[i]
        # Roundoff around a fixed point is not an exit.
        if not lo - slack <= d <= hi + slack:
            rep.exit_time = float(t[i])
            break
        gap = (d - float(f)) if upper else (float(f) - d)
        rep.max_gap = max(rep.max_gap, gap)
        if gap > slack:
            rep.passed = False
            rep.violation_time = float(t[i])
            rep.violation_size = gap
            break
    return rep


@dataclass(frozen=True)
class CriticalAngleResult:
    theta_c: float
    bracket: tuple[float, float]
    j_C: int
    horizon: float
    threshold: float
    margins: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    def to_dict(self) -> dict:
        return {
            "theta_c": self.theta_c,
            "bracket": list(self.bracket),
            "width": self.width,
            "j_C": self.j_C,
            "horizon": self.horizon,
            "threshold": self.threshold,
            "margins": list(self.margins),
        }


def lock_indicator(theta0, run: Evolution, k: float, horizon: float | None = None) -> np.ndarray:
    """y(H; theta0) - psi(H), both continuously lifted from t = 0.

    Increasing in theta0; every characteristic except the critical one ends
    near a multiple of 2*pi.
    """
    trace = run.trace
    H = trace.T if horizon is None else horizon
    y, _ = transport(np.atleast_1d(np.asarray(theta0, dtype=float)), trace, k, H)
    i = trace.index_of(H)
    psi_H = trace.psi[i] if i is not None else trace.psi[-1]
    return y - psi_H


def critical_angle(
    rho0: InitialDensity,
    k: float,
    horizon: float,
    tol: float,
    *,
    N: int = 256,
    dt: float | None = None,
    probes: int = 16,
    run: Evolution | None = None,
) -> CriticalAngleResult:
    """Bracket the one initial phase whose characteristic is repelled from psi.

    j_C is read from the indicator at theta0 = 0, which settles near 2*j_C*pi;
    the bracket is then narrowed by multisection with ``probes`` zero-weight
    characteristics per round on the sign of indicator - (2*j_C + 1)*pi.

    Raises:
        DegenerateMeanField: if C stays zero over the run.
        HorizonTooShort: if either final bracket end is within pi/2 of the threshold.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if run is None:
        run = evolve(rho0, SolverConfig(k=k, T=horizon, dt=dt, N=N), history_stride=0, check_invariants=False)
    if np.max(run.trace.C) < DEGENERATE_C:
        raise DegenerateMeanField("C vanishes over the whole run: no critical angle exists")
    D0 = float(lock_indicator(0.0, run, k, horizon)[0])
    j_C = math.floor((D0 + math.pi) / TWO_PI)
    threshold = (2 * j_C + 1) * math.pi

    a, b = 0.0, TWO_PI
    da, db = D0 - threshold, D0 + TWO_PI - threshold
    while b - a >= tol:
        x = np.linspace(a, b, probes + 2)[1:-1]
        vals = lock_indicator(x, run, k, horizon) - threshold
        above = np.nonzero(vals > 0)[0]
        i = int(above[0]) if above.size else probes
        if i > 0:
            a, da = float(x[i - 1]), float(vals[i - 1])
        if i < probes:
            b, db = float(x[i]), float(vals[i])
    margins = (abs(da), abs(db))
    if min(margins) <= math.pi / 2:
        raise HorizonTooShort(
            f"indicator within {min(margins):.3g} of the threshold at horizon {horizon}; extend the horizon"
        )
    theta_c = 0.5 * (a + b)
    return CriticalAngleResult(theta_c % TWO_PI, (a, b), j_C, float(horizon), threshold, margins)


def psi_limit(rho0: InitialDensity, theta_c: float, j_C: int) -> float:
    """int u*rho0(u) du - 2*j_C*pi*mu([0, theta_c)) - 2*(j_C + 1)*pi*mu((theta_c, 2*pi]), unreduced."""
    if not 0.0 <= theta_c < TWO_PI:
        raise ValueError(f"theta_c must lie in [0, 2*pi), got {theta_c}")

    def integral(fn, lo, hi):
        return quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0] if hi > lo else 0.0

    first = integral(lambda u: u * float(rho0(u)), 0.0, theta_c) + integral(lambda u: u * float(rho0(u)), theta_c, TWO_PI)
    below = integral(lambda u: float(rho0(u)), 0.0, theta_c)
    above = integral(lambda u: float(rho0(u)), theta_c, TWO_PI)
    return first - (2 * j_C * math.pi * below + 2 * (j_C + 1) * math.pi * above)


@dataclass
class GrowthReport:
    degenerate: bool
    max_relative_discrepancy: float = 0.0
    cumulative_end: float = 0.0
    log_ratio_end: float = 0.0

    @property
    def log_gap(self) -> float:
        return abs(self.cumulative_end - self.log_ratio_end)

    def to_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "max_relative_discrepancy": self.max_relative_discrepancy,
            "cumulative_end": self.cumulative_end,
            "log_ratio_end": self.log_ratio_end,
            "log_gap": self.log_gap,
        }


def growth_identity_check(trace: MeanFieldTrace, history: History, k: float) -> GrowthReport:
    """Compare C(t) with C(0)*exp(int_0^t k*sum_j w_j*sin^2(psi - y_j) ds).

    The integral is a cumulative Simpson sum over the history samples, so the
    history must be stored at trace resolution for a tight comparison.
    """
    if history is None or history.t.size == 0:
        raise ValueError("growth identity needs a stored ensemble history")
    C0 = float(abs(history.Z[0]))
    if C0 < DEGENERATE_C:
        return GrowthReport(degenerate=True)
    psi = np.angle(history.Z)[:, np.newaxis]
    s2 = np.sin(psi - history.y) ** 2 @ history.w
    cum = _cumulative(k * s2, history.t)
    recon = C0 * np.exp(cum)
    C = np.abs(history.Z)
    return GrowthReport(
        degenerate=False,
        max_relative_discrepancy=float(np.max(np.abs(C - recon) / C)),
        cumulative_end=float(cum[-1]),
        log_ratio_end=float(math.log(C[-1] / C0)),
    )
