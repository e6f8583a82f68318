"""Critical angle and limiting phase for a rotated cosine profile and a two-mode mixture."""

from __future__ import annotations

import argparse
import math

import numpy as np

from kuramoto_continuum.asymptotics import critical_angle, psi_limit
from kuramoto_continuum.characteristics import SolverConfig, evolve
from kuramoto_continuum.density import make_cosine_family, make_fourier


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=20.0)
    parser.add_argument("--tol", type=float, default=1e-4)
    parser.add_argument("--centers", type=float, nargs="+", default=list(np.linspace(0.0, 6.0, 7)))
    args = parser.parse_args()

    print("case,theta_c,expected_or_psi_end,psi_limit")
    for c in args.centers:
        rho0 = make_cosine_family(c, 0.5)
        res = critical_angle(rho0, 1.0, args.horizon, args.tol, dt=1e-2)
        expected = math.fmod(c + math.pi, 2 * math.pi)
        print(f"cosine c={c:.3f},{res.theta_c:.6f},{expected:.6f},{psi_limit(rho0, res.theta_c, res.j_C):.6f}")

    mixture = make_fourier([[0.4, 1, 0.0], [0.2, 2, 1.0]])
    res = critical_angle(mixture, 1.0, args.horizon, args.tol, dt=1e-2)
    run = evolve(mixture, SolverConfig(T=2 * args.horizon, dt=1e-2), history_stride=0, check_invariants=False)
    psi_end = math.fmod(run.trace.psi[-1], 2 * math.pi)
    print(f"mixture,{res.theta_c:.6f},{psi_end:.6f},{psi_limit(mixture, res.theta_c, res.j_C):.6f}")


if __name__ == "__main__":
    main()
