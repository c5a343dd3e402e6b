"""Derivative-free optimisation of the ladder angles.

Two objectives: the exact statevector energy (pre-optimisation) and the
shot-based group estimate under a noise model (hybrid loop).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .ansatz import build_ladder_circuit, solve_parameters
from .estimator import energy_from_group_counts, energy_statevector
from .pauli_model import build_hamiltonian, group_commuting, single_particle_oracle
from .simulator import NoiseModel, measure_circuit, run_statevector

PARAM_TOL = 1e-10
ENERGY_TOL = 1e-9
DEFAULT_METHOD = "COBYLA"


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, parameters: np.ndarray, energy: float):
        super().__init__(message)
        self.parameters = parameters
        self.energy = energy


@dataclass
class OptimizerTrace:
    """Every objective evaluation in order. Step 0 is the initial point."""

    iterations: list[tuple[int, np.ndarray, float]] = field(default_factory=list)
    converged: bool = False
    final_parameters: np.ndarray | None = None
    method: str = DEFAULT_METHOD
    std_errors: list[float] = field(default_factory=list)

    def record(self, params: np.ndarray, energy: float, std_error: float = 0.0) -> None:
        self.iterations.append((len(self.iterations), np.array(params, dtype=float), float(energy)))
        self.std_errors.append(float(std_error))

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for _, _, e in self.iterations])

    def best(self) -> tuple[np.ndarray, float]:
        k = int(np.argmin(self.energies))
        return self.iterations[k][1], self.iterations[k][2]

    @property
    def final_energy(self) -> float:
        """Energy recorded at the final (best-evaluated) parameters."""
        return self.best()[1]

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.energies)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        n = len(self.iterations[0][1]) if self.iterations else 0
        writer.writerow(["step", "energy", "std_error"] + [f"theta_{k}" for k in range(n)])
        for (step, params, energy), err in zip(self.iterations, self.std_errors):
            writer.writerow([step, repr(energy), repr(err)] + [repr(float(p)) for p in params])
        return buf.getvalue()


def statevector_energy(L: int, thetas: Sequence[float], U: float = 2.0, t: float = 1.0) -> float:
    H = build_hamiltonian(L, t, U)
    return energy_statevector(H, run_statevector(build_ladder_circuit(L, thetas)))


def preoptimize(L: int, init: str = "oracle", U: float = 2.0, t: float = 1.0,
                max_iter: int = 2000, tol: float = 1e-8):
    """Minimise the exact energy over the L-1 angles.

    ``init="oracle"`` starts from the angles that reproduce the classical
    ground vector and only polishes them; ``init="zero"`` starts from all
    zeros. Returns ``(parameters, energy, trace)``; raises
    :class:`ConvergenceError` (carrying the best point) if the result misses
    the closed-form energy by more than ``tol``.
    """
    H = build_hamiltonian(L, t, U)
    trace = OptimizerTrace(method=DEFAULT_METHOD)

    def objective(x):
        e = energy_statevector(H, run_statevector(build_ladder_circuit(L, x)))
        trace.record(x, e)
        return e

    if init == "oracle":
        x0 = solve_parameters(single_particle_oracle(L, t).vector)
        rhobeg = 1e-4
    elif init == "zero":
        x0 = np.zeros(L - 1)
        rhobeg = 0.5
    else:
        raise ValueError(f"unknown init {init!r}")
    objective(x0)
    if init == "zero":
        # a coarse simplex pass first; COBYLA alone stalls on long chains from zero
        minimize(objective, x0, method="Nelder-Mead",
                 options={"xatol": PARAM_TOL, "fatol": ENERGY_TOL, "maxfev": max_iter * 5,
                          "adaptive": True})
        x0, _ = trace.best()
    minimize(objective, x0, method="COBYLA",
             options={"rhobeg": rhobeg, "tol": PARAM_TOL, "maxiter": max_iter})
    params, energy = trace.best()
    trace.final_parameters = params
    gap = energy - single_particle_oracle(L, t).energy
    trace.converged = abs(gap) <= tol
    if not trace.converged:
        raise ConvergenceError(f"pre-optimisation missed the exact energy by {gap:.3e}", params, energy)
    return params, energy, trace


def shot_energy(L: int, thetas: Sequence[float], shots: int, noise: NoiseModel,
                key: tuple[int, ...] = (), U: float = 2.0, t: float = 1.0):
    """Shot-based energy estimate of the ladder state, measured group by group."""
    H = build_hamiltonian(L, t, U)
    groups = group_commuting(H)
    circuit = build_ladder_circuit(L, thetas)
    counts = [measure_circuit(circuit, g.basis, shots, noise, key=(*key, k)) for k, g in enumerate(groups)]
    return energy_from_group_counts(H, groups, counts)


def optimize_shotbased(L: int, init: Sequence[float], shots: int, noise: NoiseModel,
                       max_iter: int = 20, U: float = 2.0, t: float = 1.0,
                       method: str = DEFAULT_METHOD, rhobeg: float = 0.5) -> OptimizerTrace:
    """Hybrid loop against shot-based energies. Stops on the evaluation budget only.

    ``max_iter`` counts objective evaluations after the initial one. Every
    evaluation draws fresh shots from a stream keyed by its step number.
    """
    init = np.asarray(init, dtype=float)
    if init.shape != (L - 1,):
        raise ValueError(f"init must have {L - 1} angles, got {init.shape}")
    if method not in ("COBYLA", "Nelder-Mead"):
        raise ValueError(f"unsupported optimizer {method!r}")
    trace = OptimizerTrace(method=method)

    def objective(x):
        if len(trace.iterations) == 1 and np.array_equal(x, init):
            return trace.iterations[0][2]
        if len(trace.iterations) > max_iter:
            # budget spent; hand back the best value without measuring again
            return float(trace.energies.min())
        est = shot_energy(L, x, shots, noise, key=(L, len(trace.iterations)), U=U, t=t)
        trace.record(x, est.value, est.std_error)
        return est.value

    objective(init)
    if max_iter > 0:
        # the optimiser's first call re-requests the cached initial point
        if method == "COBYLA":
            minimize(objective, init, method="COBYLA",
                     options={"rhobeg": rhobeg, "tol": 1e-12, "maxiter": max_iter + 1})
        else:
            simplex = init + rhobeg * np.vstack([np.zeros(L - 1), np.eye(L - 1)])
            minimize(objective, init, method="Nelder-Mead",
                     options={"maxfev": max_iter + 1, "xatol": 0.0, "fatol": 0.0,
                              "initial_simplex": simplex})
    trace.final_parameters, _ = trace.best()
    trace.converged = False
    return trace
