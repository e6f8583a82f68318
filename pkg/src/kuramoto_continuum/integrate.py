"""Fixed-step classical Runge-Kutta."""

from __future__ import annotations

from typing import Callable

import numpy as np


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], state: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of the autonomous system state' = rhs(state)."""
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(T: float, dt: float) -> tuple[int, float]:
    """Number of uniform steps covering [0, T] and the step actually used.

    If T is not a multiple of dt (to 1e-9 relative), the step is shrunk so
    that the grid lands exactly on T.
    """
    if T <= 0.0:
        return 0, dt
    n = max(1, int(round(T / dt)))
    if abs(n * dt - T) > 1e-9 * max(T, 1.0):
        n = int(np.ceil(T / dt))
    return n, T / n
