"""Picard iteration for the nonlinear transport equation.

Each iterate freezes the mean field (C_n, psi_n) of the previous space-time
field, so the next density solves a linear transport equation whose
characteristics are traced backward from every output point. The constant
extension of rho0 in time seeds the sequence. This is a second, independent
route to the solution computed by ``characteristics.evolve``.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .characteristics import MeanFieldTrace, SolverError, density_at, trace_back
from .density import DensitySnapshot, InitialDensity, PhaseGrid, fmt, snapshot_csv
from .integrate import step_count

log = logging.getLogger(__name__)


def worker_count(env: str = "KURAMOTO_THREADS") -> int:
    """Thread cap from the environment; 0 or unset means one per CPU."""
    raw = os.environ.get(env, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{env} must be a non-negative integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError(f"{env} must be a non-negative integer, got {raw!r}")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True)
class SpaceTimeField:
    """rho(t_i, theta_m) on a uniform time grid times a PhaseGrid."""

    grid: PhaseGrid
    times: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (times.size, self.grid.M):
            raise ValueError(f"field values need shape {(times.size, self.grid.M)}, got {values.shape}")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, rho0: InitialDensity, grid: PhaseGrid, times) -> "SpaceTimeField":
        times = np.asarray(times, dtype=float)
        return cls(grid, times, np.tile(rho0.sample(grid), (times.size, 1)))

    @cached_property
    def moments(self) -> np.ndarray:
        """First circular moment C_n(t_i)*exp(i*psi_n(t_i)) of each slice."""
        return self.grid.h * (self.values @ np.exp(1j * self.grid.nodes))

    @property
    def C(self) -> np.ndarray:
        return np.abs(self.moments)

    @cached_property
    def mass_drift(self) -> np.ndarray:
        """Raw trapezoid mass of each slice minus 1."""
        return self.grid.h * self.values.sum(axis=1) - 1.0

    def slice(self, i: int) -> DensitySnapshot:
        return DensitySnapshot(float(self.times[i]), self.grid, self.values[i])

    def moment_interpolant(self):
        """Cubic-in-time interpolant of the slice moments, returning complex values."""
        if self.times.size < 2:
            Z0 = self.moments[0]
            return lambda s: np.full(np.shape(s), Z0, dtype=complex)
        spline = CubicSpline(self.times, np.column_stack([self.moments.real, self.moments.imag]))

        def moment_at(s):
            v = spline(np.asarray(s, dtype=float))
            return v[..., 0] + 1j * v[..., 1]

        return moment_at


def sup_distance(a: SpaceTimeField, b: SpaceTimeField) -> float:
    """max |a - b| over the shared space-time grid.

    Raises:
        ValueError: if the grids differ.
    """
    if a.grid != b.grid or a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ValueError("sup_distance needs fields on identical space-time grids")
    return float(np.max(np.abs(a.values - b.values)))


def output_times(T: float, dt_out: float) -> np.ndarray:
    n, h = step_count(T, dt_out)
    return h * np.arange(n + 1)


def picard_iterate(
    field_n: SpaceTimeField,
    rho0: InitialDensity,
    k: float,
    *,
    dt: float | None = None,
    workers: int | None = None,
    return_feet: bool = False,
):
    """One Picard step: transport rho0 through the mean field frozen from ``field_n``.

    Every output point (t_i, theta_m) is traced back to its foot theta0 with
    the same number of RK4 steps (step t_i/n, n = ceil(T/dt)), and the new
    value is rho0(theta0)*exp(int_0^t_i k*C_n*cos(psi_n - y) ds). Values are
    never renormalized; ``mass_drift`` on the result reports the raw drift.

    Args:
        dt: largest inner backward step (default 1e-2*min(1, 1/k)).
        workers: thread count over time slices (default from KURAMOTO_THREADS).
        return_feet: also return the (n_t, M) array of feet.

    Raises:
        SolverError: on non-finite values.
    """
    if dt is None:
        dt = 1e-2 * min(1.0, 1.0 / k) if k > 0 else 1e-2
    times, grid = field_n.times, field_n.grid
    T = float(times[-1])
    n_steps = int(np.ceil(T / dt - 1e-9)) if T > 0 else 0
    moment_at = field_n.moment_interpolant()
    nodes = grid.nodes

    def solve(rows: np.ndarray):
        t = np.repeat(times[rows], grid.M)
        theta = np.tile(nodes, rows.size)
        feet, A = trace_back(t, theta, moment_at, k, n_steps)
        return feet.reshape(rows.size, grid.M), A.reshape(rows.size, grid.M)

    workers = worker_count() if workers is None else max(1, int(workers))
    chunks = [c for c in np.array_split(np.arange(times.size), min(workers, times.size)) if c.size]
    if len(chunks) == 1:
        parts = [solve(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(solve, chunks))
    feet = np.concatenate([p[0] for p in parts])
    A = np.concatenate([p[1] for p in parts])
    values = np.asarray(rho0(feet)) * np.exp(A)
    if not np.all(np.isfinite(values)):
        raise SolverError("non-finite values in Picard iterate")
    out = SpaceTimeField(grid, times, values)
    return (out, feet) if return_feet else out


@dataclass
class PicardDiagnostics:
    iterations: int = 0
    sup_distances: list[float] = field(default_factory=list)
    mass_drifts: list[float] = field(default_factory=list)
    converged: bool = False
    tol: float = 0.0
    max_iter: int = 0

    @property
    def contracting_after_two(self) -> bool:
        """Whether the sup-distances decrease monotonically from the second on."""
        d = self.sup_distances[1:]
        return all(b < a for a, b in zip(d, d[1:]))

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "sup_distances": list(self.sup_distances),
            "mass_drifts": list(self.mass_drifts),
            "converged": self.converged,
            "contracting_after_two": self.contracting_after_two,
            "tol": self.tol,
            "max_iter": self.max_iter,
        }


def picard_solve(
    rho0: InitialDensity,
    k: float,
    T: float,
    tol: float,
    max_iter: int,
    *,
    M: int = 128,
    dt_out: float = 0.02,
    dt: float | None = None,
    workers: int | None = None,
    dump_dir: str | Path | None = None,
) -> tuple[SpaceTimeField, PicardDiagnostics]:
    """Iterate from the constant-in-time seed until the sup-distance drops below ``tol``.

    Hitting ``max_iter`` first is reported through ``diagnostics.converged``
    and a warning, never silently. With ``dump_dir`` every iterate is written
    as ``iter_XXX.csv`` in the snapshot CSV layout.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValueError(f"max_iter must be an integer >= 1, got {max_iter!r}")
    grid = PhaseGrid(M)
    current = SpaceTimeField.constant(rho0, grid, output_times(T, dt_out))
    diag = PicardDiagnostics(tol=tol, max_iter=int(max_iter))
    dump = Path(dump_dir) if dump_dir is not None else None
    if dump is not None:
        dump.mkdir(parents=True, exist_ok=True)
    for it in range(1, int(max_iter) + 1):
        nxt = picard_iterate(current, rho0, k, dt=dt, workers=workers)
        d = sup_distance(nxt, current)
        drift = float(np.max(np.abs(nxt.mass_drift)))
        diag.iterations, current = it, nxt
        diag.sup_distances.append(d)
        diag.mass_drifts.append(drift)
        log.info("picard iteration %d: sup-distance %s, max mass drift %.3g", it, fmt(d), drift)
        if dump is not None:
            snaps = [nxt.slice(i) for i in range(nxt.times.size)]
            (dump / f"iter_{it:03d}.csv").write_text(snapshot_csv(snaps))
        if d < tol:
            diag.converged = True
            break
    if not diag.converged:
        log.warning("picard did not converge in %d iterations (last sup-distance %.3g)", max_iter, diag.sup_distances[-1])
    return current, diag


def field_from_trace(trace: MeanFieldTrace, rho0: InitialDensity, k: float, grid: PhaseGrid, times) -> SpaceTimeField:
    """Sample the characteristic-solver density on a space-time grid."""
    times = np.asarray(times, dtype=float)
    values = np.vstack([density_at(t, grid.nodes, trace, rho0, k) for t in times])
    return SpaceTimeField(grid, times, values)


def diagnostics_json(diag: PicardDiagnostics) -> str:
    return json.dumps(diag.to_dict(), sort_keys=True, indent=2)
