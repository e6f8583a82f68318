"""Brute-force finite-N check of the characteristic solver.

The oracle integrates the weighted identical-oscillator system

    y_j' = k * sum_i m_i * sin(y_i - y_j)

by direct O(N^2) pairwise sums. It never forms the order parameter, so
agreement with ``characteristics.evolve`` certifies the mean-field reduction
rather than re-running the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .characteristics import CharacteristicEnsemble, SolverConfig, SolverError, evolve
from .density import InitialDensity
from .integrate import rk4_step, step_count

MAX_ORACLE_N = 512


@dataclass(frozen=True)
class PairwiseEnsemble:
    y: np.ndarray
    m: np.ndarray
    k: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if abs(float(np.sum(self.m)) - 1.0) > 1e-10:
            raise ValueError(f"oracle masses must sum to 1 (got {np.sum(self.m):.15g})")
        if np.any(np.asarray(self.m) < 0):
            raise ValueError("oracle masses must be non-negative")


def pairwise_rhs(y: np.ndarray, m: np.ndarray, k: float) -> np.ndarray:
    """k * sum_i m_i sin(y_i - y_j) for every j, summed in index order per row."""
    return k * np.sum(m[np.newaxis, :] * np.sin(y[np.newaxis, :] - y[:, np.newaxis]), axis=1)


def pairwise_step(ens: PairwiseEnsemble, dt: float) -> PairwiseEnsemble:
    y = rk4_step(lambda s: pairwise_rhs(s, ens.m, ens.k), ens.y, dt)
    if not np.all(np.isfinite(y)):
        raise SolverError(f"non-finite oracle state at t={ens.t + dt:.6g}")
    return replace(ens, y=y, t=ens.t + dt)


def pairwise_evolve(ens: PairwiseEnsemble, T: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Step to T; returns (times, phases) with phases[i] the state at times[i]."""
    n, h = step_count(T, dt)
    out = np.empty((n + 1, ens.y.size))
    out[0] = ens.y
    for i in range(n):
        ens = pairwise_step(ens, h)
        out[i + 1] = ens.y
    return h * np.arange(n + 1), out


def two_body_gap(delta0: float, k: float, t):
    """Closed-form gap of two equal masses: tan(gap/2) = tan(gap0/2) * exp(-k t)."""
    return 2.0 * np.arctan(math.tan(0.5 * delta0) * np.exp(-k * np.asarray(t, dtype=float)))


@dataclass
class OracleReport:
    max_deviation: float
    time_of_max: float
    node_of_max: int
    N: int
    dt_meanfield: float
    dt_oracle: float
    T: float
    compared_samples: int
    gate: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.gate is None or self.max_deviation <= self.gate

    def to_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "time_of_max": self.time_of_max,
            "node_of_max": self.node_of_max,
            "N": self.N,
            "dt_meanfield": self.dt_meanfield,
            "dt_oracle": self.dt_oracle,
            "T": self.T,
            "compared_samples": self.compared_samples,
            "gate": self.gate,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def compare_solvers(
    rho0: InitialDensity,
    config: SolverConfig,
    *,
    oracle_dt: float | None = None,
    gate: float | None = None,
) -> OracleReport:
    """Run the mean-field solver and the pairwise oracle on identical nodes.

    The deviation is max over nodes and shared sample times of the unreduced
    phase difference. A different ``oracle_dt`` is allowed; then only times
    that both grids hit are compared.

    Raises:
        ValueError: if N exceeds the oracle cap.
    """
    if config.N > MAX_ORACLE_N:
        raise ValueError(f"oracle runs are capped at N <= {MAX_ORACLE_N} (got {config.N})")
    start = CharacteristicEnsemble.initial(rho0, config.N, config.node_offset)
    run = evolve(rho0, replace(config, output_times=()), history_stride=1, check_invariants=False, ensemble=start)
    hist = run.history

    h_or = config.dt if oracle_dt is None else oracle_dt
    t_or, y_or = pairwise_evolve(PairwiseEnsemble(start.y.copy(), start.w.copy(), config.k), config.T, h_or)

    # Pair up samples that land on the same time in both runs.
    i_mf, i_or = [], []
    j = 0
    for i, t in enumerate(hist.t):
        while j < t_or.size and t_or[j] < t - 1e-9:
            j += 1
        if j < t_or.size and abs(t_or[j] - t) <= 1e-9:
            i_mf.append(i)
            i_or.append(j)
    notes = []
    if len(i_mf) < len(hist.t):
        notes.append(f"time grids differ; compared {len(i_mf)} shared samples")
    diff = np.abs(hist.y[i_mf] - y_or[i_or])
    flat = int(np.argmax(diff))
    r, c = divmod(flat, diff.shape[1])
    return OracleReport(
        max_deviation=float(diff.max()),
        time_of_max=float(hist.t[i_mf[r]]),
        node_of_max=int(c),
        N=config.N,
        dt_meanfield=float(hist.t[1] - hist.t[0]) if hist.t.size > 1 else config.dt,
        dt_oracle=float(t_or[1] - t_or[0]) if t_or.size > 1 else h_or,
        T=config.T,
        compared_samples=len(i_mf),
        gate=gate,
        notes=notes,
    )
