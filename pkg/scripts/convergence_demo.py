"""Shot-based VQE at L=3 from zero and from pre-optimised angles, noiseless and noisy.

Writes one CSV trace per run and an SVG of the best-so-far energies.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from fermilength import svgplot
from fermilength.simulator import NoiseModel
from fermilength.vqe import optimize_shotbased, preoptimize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("runs/convergence"))
    ap.add_argument("--length", type=int, default=3)
    ap.add_argument("--max-iter", type=int, default=20)
    ap.add_argument("--shots", type=int, default=8192)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    L, n = args.length, 2 * args.length
    args.out_dir.mkdir(parents=True, exist_ok=True)

    seeded, _, _ = preoptimize(L)
    noises = {
        "noiseless": NoiseModel.noiseless(n, seed=args.seed),
        "noisy": NoiseModel.uniform(n, 0.01, 0.02, 0.003, seed=args.seed),
    }
    plot = svgplot.Plot(f"Shot-based VQE, L={L}", "objective evaluation", "best energy so far")
    for label, noise in noises.items():
        for init_name, init in (("zero", np.zeros(L - 1)), ("seeded", seeded)):
            trace = optimize_shotbased(L, init, args.shots, noise, max_iter=args.max_iter)
            (args.out_dir / f"L{L}_{init_name}_{label}.csv").write_text(trace.to_csv())
            best = trace.best_so_far()
            plot.series.append(svgplot.Series(f"{init_name}, {label}", list(range(len(best))), list(best),
                                              dashed=label == "noisy"))
            print(f"{init_name:6s} {label:9s} start {trace.energies[0]:+.4f}  best {trace.final_energy:+.4f}")
    exact = -2 * math.cos(math.pi / (L + 1))
    plot.hlines.append(svgplot.HLine(exact, "exact"))
    (args.out_dir / "convergence.svg").write_text(svgplot.render(plot))
    print(f"exact {exact:+.4f} -> {args.out_dir}")


if __name__ == "__main__":
    main()
