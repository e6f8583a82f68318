"""Periodic probability densities on the circle and their first circular moment.

Everything here is a pure function of immutable inputs. Angles are reduced to
[0, 2*pi) before evaluation; quadrature is the uniform-grid trapezoid rule,
which is spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi

# Below this magnitude the mean phase is undefined and pinned to 0.
DEGENERATE_C = 1e-14

ArrayFn = Callable[[np.ndarray], np.ndarray]


def wrap_angle(theta):
    """Reduce angles to [0, 2*pi), guarding the fmod edge case that returns 2*pi."""
    out = np.mod(theta, TWO_PI)
    if np.ndim(out) == 0:
        return 0.0 if out >= TWO_PI else float(out)
    out[out >= TWO_PI] = 0.0
    return out


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform grid theta_m = 2*pi*m/M on [0, 2*pi)."""

    M: int

    def __post_init__(self) -> None:
        if int(self.M) != self.M or self.M < 8:
            raise ValueError(f"PhaseGrid needs an integer M >= 8, got {self.M!r}")

    @property
    def h(self) -> float:
        return TWO_PI / self.M

    @property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.M) / self.M


@dataclass(frozen=True)
class InitialDensity:
    """A C^2, 2*pi-periodic probability density together with its derivative.

    Call the object to evaluate the density; ``derivative`` evaluates rho0'.
    ``descriptor`` records how it was built (family name and parameters) so a
    run configuration can be reproduced from it.
    """

    rho: ArrayFn
    drho: ArrayFn
    descriptor: Mapping[str, Any]
    mass_tol: float = 1e-12

    def __call__(self, theta):
        return self.rho(wrap_angle(np.asarray(theta, dtype=float)))

    def derivative(self, theta):
        return self.drho(wrap_angle(np.asarray(theta, dtype=float)))

    def sample(self, grid: PhaseGrid) -> np.ndarray:
        return np.asarray(self(grid.nodes), dtype=float)

    @property
    def family(self) -> str:
        return str(self.descriptor.get("family", "custom"))


@dataclass(frozen=True)
class DensitySnapshot:
    """rho(t, .) sampled on a PhaseGrid."""

    t: float
    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.M,):
            raise ValueError(f"snapshot needs {self.grid.M} values, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class OrderParameter:
    """Magnitude C and mean phase psi of the first circular moment C*exp(i*psi)."""

    C: float
    psi: float

    @property
    def degenerate(self) -> bool:
        return self.C < DEGENERATE_C

    @property
    def z(self) -> complex:
        return self.C * complex(math.cos(self.psi), math.sin(self.psi))


# --- constructors --------------------------------------------------------------


def make_uniform() -> InitialDensity:
    """The incoherent state 1/(2*pi)."""
    c = 1.0 / TWO_PI
    return InitialDensity(
        rho=lambda th: np.full_like(th, c, dtype=float),
        drho=lambda th: np.zeros_like(th, dtype=float),
        descriptor={"family": "uniform"},
    )


def make_cosine_family(center: float, concentration: float) -> InitialDensity:
    """(1 + a*cos(theta - center)) / (2*pi) for 0 <= a < 1."""
    a = float(concentration)
    if not 0.0 <= a < 1.0:
        raise ValueError(f"concentration must lie in [0, 1), got {concentration!r}")
    c0 = float(center)
    return InitialDensity(
        rho=lambda th: (1.0 + a * np.cos(th - c0)) / TWO_PI,
        drho=lambda th: -a * np.sin(th - c0) / TWO_PI,
        descriptor={"family": "cosine", "center": c0, "concentration": a},
    )


def make_fourier(terms: Sequence[Sequence[float]]) -> InitialDensity:
    """(1 + sum_n a_n*cos(m_n*theta - phi_n)) / (2*pi) from (a_n, m_n, phi_n) triples.

    Harmonics must be positive integers so the mass stays exactly 1; the
    density is rejected if it goes negative anywhere on a fine grid.
    """
    parsed = []
    for term in terms:
        if len(term) != 3:
            raise ValueError(f"fourier term must be (amplitude, harmonic, phase), got {term!r}")
        amp, harm, phase = float(term[0]), term[1], float(term[2])
        if int(harm) != harm or harm < 1:
            raise ValueError(f"harmonic must be a positive integer, got {harm!r}")
        parsed.append((amp, int(harm), phase))
    amps = np.array([p[0] for p in parsed])
    harms = np.array([p[1] for p in parsed], dtype=float)
    phases = np.array([p[2] for p in parsed])

    def rho(th):
        th = np.asarray(th, dtype=float)
        arg = np.multiply.outer(th, harms) - phases
        return (1.0 + np.cos(arg) @ amps) / TWO_PI

    def drho(th):
        th = np.asarray(th, dtype=float)
        arg = np.multiply.outer(th, harms) - phases
        return -(np.sin(arg) @ (amps * harms)) / TWO_PI

    probe = rho(PhaseGrid(4096).nodes)
    if probe.min() < 0.0:
        raise ValueError("fourier density goes negative; reduce the amplitudes")
    return InitialDensity(
        rho=rho,
        drho=drho,
        descriptor={"family": "fourier", "terms": [list(p) for p in parsed]},
    )


def make_cos_power(center: float, power: int) -> InitialDensity:
    """Bump ((1 + cos(theta - center))/2)**n, normalized; vanishes at the antipode.

    Larger ``power`` gives a narrower bump. The zero at center + pi makes this
    the family that exercises the rho0 = 0 branches downstream.
    """
    n = int(power)
    if n != power or n < 2:
        raise ValueError(f"power must be an integer >= 2 (C^2 at the zero), got {power!r}")
    c0 = float(center)
    norm = TWO_PI * math.comb(2 * n, n) / 4.0**n

    def rho(th):
        return ((1.0 + np.cos(th - c0)) / 2.0) ** n / norm

    def drho(th):
        base = (1.0 + np.cos(th - c0)) / 2.0
        return -n * base ** (n - 1) * np.sin(th - c0) / 2.0 / norm

    return InitialDensity(rho=rho, drho=drho, descriptor={"family": "cos_power", "center": c0, "power": n})


def make_from_grid(samples: Sequence[float]) -> InitialDensity:
    """Periodic cubic interpolant of non-negative samples on a uniform grid.

    Samples are rescaled so that their trapezoid mass is exactly 1. The
    interpolant can undershoot between nodes; evaluation clips at zero.
    """
    raw = np.asarray(samples, dtype=float)
    if raw.ndim != 1:
        raise ValueError("grid samples must be one-dimensional")
    grid = PhaseGrid(raw.size)
    if not np.all(np.isfinite(raw)):
        raise ValueError("grid samples must be finite")
    if np.any(raw < 0.0):
        raise ValueError(f"grid samples must be non-negative (min {raw.min():.3g})")
    total = grid.h * raw.sum()
    if total <= 0.0:
        raise ValueError("grid samples are all zero")
    vals = raw / total
    spline = CubicSpline(np.append(grid.nodes, TWO_PI), np.append(vals, vals[0]), bc_type="periodic")
    dspline = spline.derivative()
    return InitialDensity(
        rho=lambda th: np.maximum(spline(th), 0.0),
        drho=lambda th: dspline(th),
        descriptor={"family": "grid", "samples": raw.tolist()},
        mass_tol=1e-10,
    )


_FAMILIES = {
    "uniform": (make_uniform, ()),
    "cosine": (make_cosine_family, ("center", "concentration")),
    "fourier": (make_fourier, ("terms",)),
    "cos_power": (make_cos_power, ("center", "power")),
    "grid": (make_from_grid, ("samples",)),
}


def density_from_spec(spec: Mapping[str, Any]) -> InitialDensity:
    """Build a density from a ``{"family": name, **params}`` mapping."""
    if not isinstance(spec, Mapping) or "family" not in spec:
        raise ValueError("density spec must be a mapping with a 'family' key")
    name = spec["family"]
    if name not in _FAMILIES:
        raise ValueError(f"unknown density family {name!r}; choose from {sorted(_FAMILIES)}")
    ctor, params = _FAMILIES[name]
    unknown = set(spec) - set(params) - {"family"}
    if unknown:
        raise ValueError(f"unexpected parameters for {name!r}: {sorted(unknown)}")
    missing = [p for p in params if p not in spec]
    if missing:
        raise ValueError(f"missing parameters for {name!r}: {missing}")
    return ctor(*(spec[p] for p in params))


# --- quadrature and moments ----------------------------------------------------


def mass(snapshot: DensitySnapshot) -> float:
    """Trapezoid integral of the snapshot over one period."""
    return float(snapshot.grid.h * np.sum(snapshot.values))


def order_parameter(weights, phases) -> OrderParameter:
    """Weighted first circular moment C*exp(i*psi) = sum_j w_j*exp(i*y_j).

    Raises:
        ValueError: if weights are negative or do not sum to 1 within 1e-10.
    """
    w = np.asarray(weights, dtype=float)
    y = np.asarray(phases, dtype=float)
    if w.shape != y.shape:
        raise ValueError("weights and phases must have the same shape")
    if np.any(w < 0.0):
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-10:
        raise ValueError(f"weights must sum to 1 (got {w.sum():.15g})")
    return order_parameter_from_moment(np.sum(w * np.exp(1j * y)))


def order_parameter_from_moment(z: complex) -> OrderParameter:
    C = float(abs(z))
    psi = 0.0 if C < DEGENERATE_C else wrap_angle(math.atan2(z.imag, z.real))
    return OrderParameter(C=C, psi=psi)


def snapshot_order_parameter(snapshot: DensitySnapshot) -> OrderParameter:
    g = snapshot.grid
    return order_parameter_from_moment(g.h * np.sum(snapshot.values * np.exp(1j * g.nodes)))


def coupling_fields(op: OrderParameter, theta):
    """Return (g, f) = (C*sin(psi - theta), C*cos(psi - theta))."""
    d = op.psi - np.asarray(theta, dtype=float)
    return op.C * np.sin(d), op.C * np.cos(d)


# --- CSV serialization ---------------------------------------------------------


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def snapshot_csv(snapshots: Sequence[DensitySnapshot]) -> str:
    """One row per snapshot: header ``t,theta_0,...``, then ``t,values...``."""
    if not snapshots:
        raise ValueError("no snapshots to serialize")
    grid = snapshots[0].grid
    if any(s.grid != grid for s in snapshots):
        raise ValueError("snapshots on different grids cannot share a file")
    lines = [",".join(["t"] + [fmt(th) for th in grid.nodes])]
    for s in snapshots:
        lines.append(",".join([fmt(s.t)] + [fmt(v) for v in s.values]))
    return "\n".join(lines) + "\n"


def read_snapshot_csv(text: str) -> list[DensitySnapshot]:
    rows = [line.split(",") for line in text.strip().splitlines()]
    header, body = rows[0], rows[1:]
    if header[0] != "t":
        raise ValueError("snapshot CSV must start with a 't' column")
    grid = PhaseGrid(len(header) - 1)
    return [DensitySnapshot(float(r[0]), grid, np.array([float(v) for v in r[1:]])) for r in body]
