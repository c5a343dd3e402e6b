"""Raw readout bias against the pass threshold, per flip rate and chain length.

Large-shot estimates separate the systematic bias from shot noise; the
threshold column is the largest error that still passes at M = 8192.
"""

import argparse
import math

from fermilength.bench import DEFAULT_SHOTS, DEFAULT_THRESHOLD
from fermilength.simulator import NoiseModel
from fermilength.vqe import preoptimize, shot_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rates", type=float, nargs="+", default=[0.01, 0.03, 0.05])
    ap.add_argument("--l-max", type=int, default=6)
    ap.add_argument("--shots", type=int, default=1 << 18)
    args = ap.parse_args()
    print(f"{'p':>5} {'L':>3} {'raw bias':>9} {'+-':>7} {'allowed':>8} verdict")
    for L in range(2, args.l_max + 1):
        params, exact, _ = preoptimize(L)
        allowed = DEFAULT_THRESHOLD * L * math.sqrt(DEFAULT_SHOTS)
        for p in args.rates:
            est = shot_energy(L, params, args.shots, NoiseModel.uniform(2 * L, p, p, seed=1), key=(L,))
            bias = abs(est.value - exact)
            print(f"{p:5.2f} {L:3d} {bias:9.4f} {est.std_error:7.4f} {allowed:8.4f} {'pass' if bias <= allowed else 'FAIL'}")


if __name__ == "__main__":
    main()
