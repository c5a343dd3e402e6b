"""Tensor-factorised readout (SPAM) calibration and inversion.

Readout errors are assumed uncorrelated between qubits, so two calibration
circuits (all zeros, all ones) fix one 2x2 column-stochastic matrix per qubit.
Inversion applies each inverse factor along its own tensor axis of the dense
``2^N`` distribution; the ``2^N x 2^N`` matrix is never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .estimator import EnergyEstimate, _check_basis, _mean_and_var
from .pauli_model import CommutingGroup, QubitHamiltonian
from .simulator import CountsTable, NoiseModel, _apply_readout, _tabulate

MAX_MITIGATION_QUBITS = 26
PINV_TOL = 1e-10


@dataclass(frozen=True)
class CalibrationSet:
    """``matrices[k][i, j]`` = P(read i | prepared j) on qubit k."""

    matrices: np.ndarray
    shots: int = 0
    seed: int | None = None

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        if m.ndim != 3 or m.shape[1:] != (2, 2):
            raise ValueError(f"expected (N, 2, 2) matrices, got shape {m.shape}")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("calibration entries must lie in [0, 1]")
        if not np.allclose(m.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("calibration matrices must be column-stochastic")
        object.__setattr__(self, "matrices", m)

    @property
    def n_qubits(self) -> int:
        return self.matrices.shape[0]

    @property
    def flip_rates(self) -> np.ndarray:
        """(N, 2) array of (p10, p01)."""
        return np.stack([self.matrices[:, 1, 0], self.matrices[:, 0, 1]], axis=1)

    @classmethod
    def from_rates(cls, rates: Sequence[tuple[float, float]], shots: int = 0,
                   seed: int | None = None) -> "CalibrationSet":
        mats = np.array([[[1 - p10, p01], [p10, 1 - p01]] for p10, p01 in rates], dtype=float)
        return cls(mats.reshape(-1, 2, 2), shots, seed)

    @classmethod
    def identity(cls, n_qubits: int) -> "CalibrationSet":
        return cls(np.tile(np.eye(2), (n_qubits, 1, 1)))

    def restrict(self, n_qubits: int) -> "CalibrationSet":
        if n_qubits > self.n_qubits:
            raise ValueError(f"calibration covers {self.n_qubits} qubits, need {n_qubits}")
        return CalibrationSet(self.matrices[:n_qubits], self.shots, self.seed)

    def inverses(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-qubit inverse factors and a flag marking pseudo-inverse use."""
        invs = np.empty_like(self.matrices)
        singular = np.zeros(self.n_qubits, dtype=bool)
        for k, m in enumerate(self.matrices):
            u, s, vt = np.linalg.svd(m)
            keep = s > PINV_TOL
            singular[k] = not keep.all()
            s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
            invs[k] = (vt.T * s_inv) @ u.T
        return invs, singular

    def to_text(self) -> str:
        lines = [f"# n_qubits {self.n_qubits}", f"# shots {self.shots}", f"# seed {self.seed}"]
        lines += [f"{k} {float(p10)!r} {float(p01)!r}" for k, (p10, p01) in enumerate(self.flip_rates)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CalibrationSet":
        header: dict[str, str] = {}
        rows: dict[int, tuple[float, float]] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                header[key] = value.strip()
                continue
            k, p10, p01 = line.split()
            rows[int(k)] = (float(p10), float(p01))
        n = int(header.get("n_qubits", len(rows)))
        if sorted(rows) != list(range(n)):
            raise ValueError(f"calibration file must list qubits 0..{n - 1}")
        seed = header.get("seed")
        return cls.from_rates([rows[k] for k in range(n)], int(header.get("shots", 0)),
                              None if seed in (None, "None") else int(seed))


def calibration_counts(prepared: int, n_qubits: int, shots: int, noise: NoiseModel,
                       rng: np.random.Generator) -> CountsTable:
    """Counts from preparing every qubit in ``prepared`` (0 or 1) and measuring."""
    bits = np.full((shots, n_qubits), prepared, dtype=np.uint8)
    return _tabulate(_apply_readout(bits, noise, rng), "Z" * n_qubits, noise.seed)


def calibrate(n_qubits: int, shots: int, noise: NoiseModel, rng: np.random.Generator | None = None,
              seed: int | None = None) -> CalibrationSet:
    """Estimate per-qubit readout matrices from exactly two circuits.

    The all-zeros and all-ones preparations only contain X gates, which the
    CNOT noise model leaves untouched, so only readout flips enter.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if noise.n_qubits != n_qubits:
        raise ValueError(f"noise model covers {noise.n_qubits} qubits, need {n_qubits}")
    if rng is None:
        rng = np.random.default_rng(noise.seed if seed is None else seed)
    mats = np.empty((n_qubits, 2, 2))
    for prepared in (0, 1):
        bits, w = calibration_counts(prepared, n_qubits, shots, noise, rng).bit_matrix()
        ones = (w[:, None] * bits).sum(axis=0) / shots
        mats[:, 1, prepared] = ones
        mats[:, 0, prepared] = 1.0 - ones
    return CalibrationSet(mats, shots, noise.seed if seed is None else seed)


@dataclass(frozen=True)
class QuasiDistribution:
    """Dense weights over ``2^N`` outcomes; index uses qubit 0 as the top bit."""

    weights: np.ndarray
    n_qubits: int
    pseudo_inverse_used: bool = False

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def z_expectation(self, support: Sequence[int]) -> float:
        """``sum_x w(x) (-1)^(parity of x on support)``."""
        support = sorted(support)
        if not support:
            return self.total
        t = self.weights.reshape((2,) * self.n_qubits)
        others = tuple(k for k in range(self.n_qubits) if k not in support)
        marg = t.sum(axis=others) if others else t
        signs = np.ones((1,) * len(support))
        for pos in range(len(support)):
            shape = [1] * len(support)
            shape[pos] = 2
            signs = signs * np.array([1.0, -1.0]).reshape(shape)
        return float((marg * signs).sum())


def counts_to_vector(counts: CountsTable) -> np.ndarray:
    vec = np.zeros(2**counts.n_qubits)
    for bits, c in counts.counts.items():
        vec[int(bits, 2)] += c
    return vec / counts.shots


def apply_factors(vec: np.ndarray, factors: np.ndarray) -> np.ndarray:
    """Apply ``factors[k]`` along tensor axis k, one pass per qubit.

    Equivalent to multiplying by the Kronecker product of the factors, at
    O(N 2^N) cost and O(2^N) memory.
    """
    n = factors.shape[0]
    out = np.asarray(vec, dtype=float)
    for k in range(n):
        view = out.reshape(2**k, 2, 2 ** (n - k - 1))
        out = np.matmul(factors[k], view).reshape(-1)
    return out


def apply_mitigation(counts: CountsTable, cal: CalibrationSet) -> QuasiDistribution:
    """Quasi-distribution ``(M_0 x ... x M_{N-1})^{-1}`` applied to the empirical one."""
    n = counts.n_qubits
    if n != cal.n_qubits:
        raise ValueError(f"counts cover {n} qubits, calibration covers {cal.n_qubits}")
    if n > MAX_MITIGATION_QUBITS:
        raise ValueError(f"mitigation is limited to {MAX_MITIGATION_QUBITS} qubits, got {n}")
    if counts.shots < 1:
        raise ValueError("counts table has no shots")
    invs, singular = cal.inverses()
    weights = apply_factors(counts_to_vector(counts), invs)
    return QuasiDistribution(weights, n, bool(singular.any()))


def _mitigated_observable(group: CommutingGroup, bits: np.ndarray, invs: np.ndarray) -> np.ndarray:
    # Pull the inverse onto the observable: each term becomes a product of
    # per-qubit legs (M_k^-1)^T z or (M_k^-1)^T 1, evaluated on the raw shots.
    z_leg = invs.transpose(0, 2, 1) @ np.array([1.0, -1.0])
    one_leg = invs.transpose(0, 2, 1) @ np.ones(2)
    cols = np.arange(bits.shape[1])
    z_vals = z_leg[cols, bits]
    one_vals = one_leg[cols, bits]
    g = np.zeros(bits.shape[0])
    for term in group.terms:
        mask = np.zeros(bits.shape[1], dtype=bool)
        mask[list(term.support)] = True
        g += term.coeff * np.where(mask, z_vals, one_vals).prod(axis=1)
    return g


def mitigated_energy(H: QubitHamiltonian, groups: Sequence[CommutingGroup],
                     counts: Sequence[CountsTable], cal: CalibrationSet) -> EnergyEstimate:
    """Energy from the per-group quasi-distributions.

    Negative quasi-probabilities are kept as they are. The standard error comes
    from the same linear map pulled back onto the observable and evaluated
    shot by shot.
    """
    if len(counts) != len(groups):
        raise ValueError(f"need counts for {len(groups)} groups, got {len(counts)}")
    value = H.identity_offset
    var = 0.0
    per_group = []
    invs, _ = cal.inverses()
    for k, (group, table) in enumerate(zip(groups, counts)):
        if table.shots < 1:
            raise ValueError(f"group {k} has zero shots")
        quasi = apply_mitigation(table, cal)
        contrib = 0.0
        for term in group.terms:
            _check_basis(term, group.basis)
            contrib += term.coeff * quasi.z_expectation(term.support)
        bits, w = table.bit_matrix()
        _, v = _mean_and_var(_mitigated_observable(group, bits, invs), w)
        value += contrib
        var += v
        per_group.append((k, contrib, table.shots))
    return EnergyEstimate(value, math.sqrt(var), per_group)
