"""Statevector pre-optimisation gap per chain length, from oracle and zero starts."""

import argparse
import time

from fermilength.pauli_model import exact_gs_energy
from fermilength.vqe import ConvergenceError, preoptimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l-max", type=int, default=12)
    ap.add_argument("--zero-l-max", type=int, default=6, help="largest L also tried from all-zero angles")
    args = ap.parse_args()
    print(f"{'L':>3} {'oracle gap':>12} {'zero gap':>12} {'seconds':>8}")
    for L in range(2, args.l_max + 1):
        start = time.perf_counter()
        _, e, _ = preoptimize(L)
        zero = ""
        if L <= args.zero_l_max:
            try:
                _, ez, _ = preoptimize(L, init="zero")
                zero = f"{abs(ez - exact_gs_energy(L)):.3e}"
            except ConvergenceError as exc:
                zero = f"miss {abs(exc.energy - exact_gs_energy(L)):.1e}"
        print(f"{L:3d} {abs(e - exact_gs_energy(L)):12.3e} {zero:>12} {time.perf_counter() - start:8.2f}")


if __name__ == "__main__":
    main()
