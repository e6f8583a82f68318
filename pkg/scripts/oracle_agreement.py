"""Mean-field solver against the direct pairwise sum for growing node counts."""

from __future__ import annotations

import argparse

from kuramoto_continuum.characteristics import SolverConfig
from kuramoto_continuum.density import make_cosine_family
from kuramoto_continuum.oracle import compare_solvers


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=float, default=10.0)
    parser.add_argument("--counts", type=int, nargs="+", default=[16, 64, 128, 256])
    args = parser.parse_args()

    rho0 = make_cosine_family(0.0, 0.5)
    print("N,max_deviation,time_of_max")
    for N in args.counts:
        rep = compare_solvers(rho0, SolverConfig(T=args.T, N=N))
        print(f"{N},{rep.max_deviation:.3e},{rep.time_of_max:g}")


if __name__ == "__main__":
    main()
