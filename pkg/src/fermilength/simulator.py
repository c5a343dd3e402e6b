"""Seeded statevector simulation with readout and CNOT depolarizing noise.

Only the top block (qubits ``0..L-1``) carries gates, so only those ``L`` qubits
are simulated. The idle bottom block is always ``|0...0>`` before measurement
and is handled analytically when shots are drawn.

Register convention: qubit 0 is the most significant bit, and bitstrings are
printed with qubit 0 leftmost.

RNG splitting rule: every random stream comes from
``np.random.SeedSequence(seed, spawn_key=key)`` with a tuple ``key`` naming
its role, e.g. ``(L, group, trajectory, 0)`` for fault insertion and
``(L, group, trajectory, 1)`` for shot sampling. Streams never depend on
execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import Circuit, Gate, ry_matrix

NORM_TOL = 1e-10
DEFAULT_TRAJECTORIES = 64

_SINGLE = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)
_BASIS_ROT = {"X": _H, "Y": _H @ _SDG}


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit readout flips plus a depolarizing rate applied after each CNOT.

    ``readout[k] = (p10, p01)`` with p10 = P(read 1 | true 0) and
    p01 = P(read 0 | true 1).
    """

    readout: tuple[tuple[float, float], ...]
    cnot_depolarizing: float = 0.0
    seed: int = 0
    trajectories: int = DEFAULT_TRAJECTORIES

    def __post_init__(self):
        for k, pair in enumerate(self.readout):
            if len(pair) != 2 or not all(0.0 <= p <= 1.0 for p in pair):
                raise ValueError(f"readout probabilities for qubit {k} must lie in [0, 1]")
        if not 0.0 <= self.cnot_depolarizing <= 1.0:
            raise ValueError("cnot_depolarizing must lie in [0, 1]")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")

    @classmethod
    def uniform(cls, n_qubits: int, p10: float = 0.0, p01: float = 0.0, p2: float = 0.0,
                seed: int = 0, trajectories: int = DEFAULT_TRAJECTORIES) -> "NoiseModel":
        return cls(((p10, p01),) * n_qubits, p2, seed, trajectories)

    @classmethod
    def noiseless(cls, n_qubits: int, seed: int = 0) -> "NoiseModel":
        return cls.uniform(n_qubits, seed=seed)

    @property
    def n_qubits(self) -> int:
        return len(self.readout)

    @property
    def has_readout_noise(self) -> bool:
        return any(p10 > 0 or p01 > 0 for p10, p01 in self.readout)


@dataclass(frozen=True)
class CountsTable:
    counts: dict[str, int]
    n_qubits: int
    basis: str = ""
    seed: int | None = None
    shots: int = field(init=False)

    def __post_init__(self):
        total = 0
        for bits, c in self.counts.items():
            if len(bits) != self.n_qubits or set(bits) - {"0", "1"}:
                raise ValueError(f"bad bitstring {bits!r} for {self.n_qubits} qubits")
            if c < 0:
                raise ValueError(f"negative count for {bits}")
            total += int(c)
        object.__setattr__(self, "shots", total)

    def bit_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct outcomes as a (K, N) uint8 array and their counts."""
        keys = sorted(self.counts)
        bits = np.array([[ch == "1" for ch in k] for k in keys], dtype=np.uint8).reshape(len(keys), self.n_qubits)
        weights = np.array([self.counts[k] for k in keys], dtype=np.int64)
        return bits, weights

    def to_text(self) -> str:
        lines = [f"# basis {self.basis}", f"# shots {self.shots}", f"# seed {self.seed}"]
        lines += [f"{k} {self.counts[k]}" for k in sorted(self.counts)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CountsTable":
        header: dict[str, str] = {}
        counts: dict[str, int] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                header[key] = value.strip()
                continue
            bits, c = line.split()
            counts[bits] = counts.get(bits, 0) + int(c)
        if not counts:
            raise ValueError("counts file has no records")
        n = len(next(iter(counts)))
        seed = header.get("seed")
        table = cls(counts, n, header.get("basis", ""), None if seed in (None, "None") else int(seed))
        if "shots" in header and int(header["shots"]) != table.shots:
            raise ValueError(f"header says {header['shots']} shots but records sum to {table.shots}")
        return table


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def _apply_1q(psi: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(mat, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def _apply_cnot(psi: np.ndarray, n: int, ctrl: int, targ: int) -> np.ndarray:
    t = psi.reshape((2,) * n).copy()
    idx1 = [slice(None)] * n
    idx1[ctrl] = 1
    sub = t[tuple(idx1)]
    tax = targ - 1 if targ > ctrl else targ
    t[tuple(idx1)] = np.flip(sub, axis=tax)
    return t.reshape(-1)


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind in _SINGLE:
        return _SINGLE[g.kind]
    if g.kind == "RY":
        return ry_matrix(g.angle).astype(complex)
    if g.kind == "RY_DAG":
        return ry_matrix(-g.angle).astype(complex)
    raise ValueError(f"{g.kind} is not a single-qubit gate")


def apply_gates(gates: Sequence[Gate], n: int, psi: np.ndarray | None = None,
                check_norm: bool = True) -> np.ndarray:
    """Apply gates to an n-qubit state (default ``|0...0>``)."""
    psi = zero_state(n) if psi is None else np.asarray(psi, dtype=complex).copy()
    if psi.shape != (2**n,):
        raise ValueError(f"state has shape {psi.shape}, expected ({2**n},)")
    if check_norm and abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise ValueError("input state is not normalized")
    for g in gates:
        if max(g.qubits) >= n:
            raise ValueError(f"gate {g} acts outside the {n}-qubit register")
        if g.kind == "CNOT":
            psi = _apply_cnot(psi, n, *g.qubits)
        else:
            psi = _apply_1q(psi, n, g.qubits[0], gate_matrix(g))
        if check_norm and abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
            raise FloatingPointError(f"norm drifted after {g}")
    return psi


def circuit_unitary(gates: Sequence[Gate], n: int) -> np.ndarray:
    """Columns are the images of computational basis states (small n only)."""
    cols = []
    for i in range(2**n):
        e = np.zeros(2**n, dtype=complex)
        e[i] = 1.0
        cols.append(apply_gates(gates, n, e))
    return np.stack(cols, axis=1)


def run_statevector(circuit: Circuit) -> np.ndarray:
    """Noiseless state of the top block, ``2^L`` amplitudes."""
    L = circuit.n_qubits // 2
    for g in circuit.gates:
        if max(g.qubits) >= L:
            raise ValueError(f"gate {g} touches the idle bottom block (qubits >= {L})")
    return apply_gates(circuit.gates, L)


def rotate_to_basis(psi: np.ndarray, basis: str) -> np.ndarray:
    """Pre-measurement rotation: H for X, S^dagger then H for Y, nothing for Z.

    Only the first ``log2(len(psi))`` axes act; the rest belong to the idle block.
    """
    n = int(round(math.log2(psi.size)))
    if len(basis) < n:
        raise ValueError(f"basis {basis!r} shorter than the {n}-qubit state")
    out = psi
    for q, ax in enumerate(basis[:n]):
        if ax == "Z":
            continue
        if ax not in _BASIS_ROT:
            raise ValueError(f"invalid measurement axis {ax!r}")
        out = _apply_1q(out, n, q, _BASIS_ROT[ax])
    return out


def _bits_from_index(idx: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def _apply_readout(bits: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    p = np.asarray(noise.readout, dtype=float)
    u = rng.random(bits.shape)
    flip_prob = np.where(bits == 0, p[:, 0], p[:, 1])
    return bits ^ (u < flip_prob).astype(np.uint8)


def _tabulate(bits: np.ndarray, basis: str, seed: int | None) -> CountsTable:
    n = bits.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    keys, counts = np.unique(bits.astype(np.int64) @ weights, return_counts=True)
    table = {format(int(k), f"0{n}b"): int(c) for k, c in zip(keys, counts)}
    return CountsTable(table, n, basis, seed)


def draw_bits(psi: np.ndarray, basis: str, shots: int, noise: NoiseModel,
              rng: np.random.Generator) -> np.ndarray:
    """Shot records as a (shots, N) uint8 array, readout noise applied."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    n_top = int(round(math.log2(psi.size)))
    n = len(basis)
    if noise.n_qubits != n:
        raise ValueError(f"noise model covers {noise.n_qubits} qubits, basis has {n}")
    rotated = rotate_to_basis(psi, basis)
    probs = np.abs(rotated) ** 2
    probs = probs / probs.sum()
    hist = rng.multinomial(shots, probs)
    idx = np.repeat(np.arange(probs.size, dtype=np.int64), hist)
    bits = np.zeros((shots, n), dtype=np.uint8)
    bits[:, :n_top] = _bits_from_index(idx, n_top)
    for q in range(n_top, n):
        ax = basis[q]
        if ax in "XY":
            bits[:, q] = rng.integers(0, 2, size=shots, dtype=np.uint8)
        elif ax != "Z":
            raise ValueError(f"invalid measurement axis {ax!r}")
    return _apply_readout(bits, noise, rng)


def sample_counts(psi: np.ndarray, basis: str, shots: int, noise: NoiseModel,
                  rng: np.random.Generator | None = None) -> CountsTable:
    """Sample ``shots`` full-register bitstrings from the rotated top-block state.

    Without an explicit generator the stream is seeded from ``noise.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    return _tabulate(draw_bits(psi, basis, shots, noise, rng), basis, noise.seed)


_PAULI_CHOICES = [(a, b) for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I")]


def apply_gate_noise(circuit: Circuit, noise: NoiseModel,
                     rng: np.random.Generator) -> tuple[Circuit, int]:
    """One stochastic realisation: after each CNOT, with probability p2, insert a
    uniformly random non-identity two-qubit Pauli. Returns the circuit and the
    number of inserted faults."""
    p2 = noise.cnot_depolarizing
    if p2 == 0.0:
        return circuit, 0
    gates: list[Gate] = []
    faults = 0
    for g in circuit.gates:
        gates.append(g)
        if g.kind != "CNOT" or rng.random() >= p2:
            continue
        faults += 1
        a, b = _PAULI_CHOICES[rng.integers(len(_PAULI_CHOICES))]
        for op, q in ((a, g.qubits[0]), (b, g.qubits[1])):
            if op != "I":
                gates.append(Gate(op, (q,)))
    return Circuit(circuit.n_qubits, tuple(gates), circuit.parameters), faults


def split_shots(shots: int, parts: int) -> list[int]:
    """Even split, remainder to the first parts."""
    base, extra = divmod(shots, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def measure_circuit(circuit: Circuit, basis: str, shots: int, noise: NoiseModel,
                    key: tuple[int, ...] = ()) -> CountsTable:
    """Counts for one measurement setting, with CNOT noise via trajectories.

    ``key`` names the setting (e.g. ``(L, group_index)``) and seeds its streams.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if noise.cnot_depolarizing == 0.0:
        psi = run_statevector(circuit)
        bits = draw_bits(psi, basis, shots, noise, make_rng(noise.seed, *key, 0, 1))
        return _tabulate(bits, basis, noise.seed)
    chunks = []
    for traj, m in enumerate(split_shots(shots, noise.trajectories)):
        if m == 0:
            continue
        realised, _ = apply_gate_noise(circuit, noise, make_rng(noise.seed, *key, traj, 0))
        psi = run_statevector(realised)
        chunks.append(draw_bits(psi, basis, m, noise, make_rng(noise.seed, *key, traj, 1)))
    return _tabulate(np.concatenate(chunks, axis=0), basis, noise.seed)
