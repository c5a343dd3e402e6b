"""Qubit Hamiltonian for the open 1-D Fermi-Hubbard chain.

Qubit layout is spin-block: qubit ``i`` (``0 <= i < L``) is site ``i`` spin-up,
qubit ``L + i`` is site ``i`` spin-down. Pauli strings are written left to right
in ascending qubit index, so ``"XXII"`` acts on qubits 0 and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable

import numpy as np
from scipy.linalg import eigh_tridiagonal

PAULI_LABELS = "IXYZ"
PRUNE_TOL = 1e-12
MAX_DENSE_QUBITS = 16

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_length(L: int) -> None:
    if isinstance(L, bool) or not isinstance(L, (int, np.integer)):
        raise TypeError(f"chain length must be an integer, got {L!r}")
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")


@dataclass(frozen=True)
class PauliTerm:
    string: str
    coeff: float

    def __post_init__(self):
        if any(c not in PAULI_LABELS for c in self.string):
            raise ValueError(f"invalid Pauli string {self.string!r}")
        if not math.isfinite(self.coeff):
            raise ValueError(f"non-finite coefficient for {self.string}")
        object.__setattr__(self, "coeff", float(self.coeff))

    @property
    def n_qubits(self) -> int:
        return len(self.string)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.string) if c != "I")

    @property
    def is_diagonal(self) -> bool:
        return all(c in "IZ" for c in self.string)


@dataclass(frozen=True)
class QubitHamiltonian:
    """Weighted Pauli strings plus a separately stored identity coefficient."""

    terms: tuple[PauliTerm, ...]
    n_qubits: int
    identity_offset: float = 0.0

    def __post_init__(self):
        seen = set()
        for term in self.terms:
            if term.n_qubits != self.n_qubits:
                raise ValueError(f"term {term.string} does not act on {self.n_qubits} qubits")
            if set(term.string) == {"I"}:
                raise ValueError("identity must be stored in identity_offset")
            if term.string in seen:
                raise ValueError(f"duplicate Pauli string {term.string}")
            seen.add(term.string)

    @property
    def length(self) -> int:
        return self.n_qubits // 2

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]], n_qubits: int) -> "QubitHamiltonian":
        """Merge duplicate strings, fold the identity out and prune tiny coefficients."""
        acc: dict[str, float] = {}
        for string, coeff in pairs:
            if len(string) != n_qubits:
                raise ValueError(f"string {string!r} has wrong length")
            acc[string] = acc.get(string, 0.0) + float(coeff)
        ident = "I" * n_qubits
        offset = acc.pop(ident, 0.0)
        terms = tuple(PauliTerm(s, c) for s, c in acc.items() if abs(c) >= PRUNE_TOL)
        if abs(offset) < PRUNE_TOL:
            offset = 0.0
        return cls(terms=terms, n_qubits=n_qubits, identity_offset=offset)

    def to_text(self) -> str:
        lines = [f"{float(self.identity_offset)!r} {'I' * self.n_qubits}"]
        lines += [f"{t.coeff!r} {t.string}" for t in self.terms]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QubitHamiltonian":
        pairs = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            coeff, string = line.split()
            pairs.append((string, float(coeff)))
        if not pairs:
            raise ValueError("empty Hamiltonian text")
        return cls.from_pairs(pairs, len(pairs[0][0]))


def _place(n: int, ops: dict[int, str]) -> str:
    chars = ["I"] * n
    for k, op in ops.items():
        chars[k] = op
    return "".join(chars)


def build_hamiltonian(L: int, t: float = 1.0, U: float = 2.0) -> QubitHamiltonian:
    """Jordan-Wigner Hamiltonian of the open chain on ``2L`` qubits.

    Hopping between adjacent modes of one spin block maps to
    ``-(t/2)(XX + YY)`` with no interior Z string; the on-site interaction
    ``U n_up n_down`` expands to ``(U/4)(I - Z_i)(I - Z_{i+L})``.
    """
    _check_length(L)
    if not (math.isfinite(t) and math.isfinite(U)):
        raise ValueError(f"t and U must be finite, got t={t}, U={U}")
    n = 2 * L
    pairs: list[tuple[str, float]] = []
    for block in (0, L):
        for i in range(L - 1):
            p = block + i
            pairs.append((_place(n, {p: "X", p + 1: "X"}), -t / 2))
            pairs.append((_place(n, {p: "Y", p + 1: "Y"}), -t / 2))
    for i in range(L):
        up, dn = i, i + L
        pairs.append(("I" * n, U / 4))
        pairs.append((_place(n, {up: "Z"}), -U / 4))
        pairs.append((_place(n, {dn: "Z"}), -U / 4))
        pairs.append((_place(n, {up: "Z", dn: "Z"}), U / 4))
    return QubitHamiltonian.from_pairs(pairs, n)


def exact_gs_energy(L: int) -> float:
    """Closed-form single-particle ground energy ``2 cos(L pi / (L + 1))`` in units of t."""
    _check_length(L)
    return 2.0 * math.cos(L * math.pi / (L + 1))


@dataclass(frozen=True)
class SingleParticleOracle:
    length: int
    hopping: np.ndarray = field(repr=False)
    energy: float
    vector: np.ndarray


def single_particle_oracle(L: int, t: float = 1.0) -> SingleParticleOracle:
    """Diagonalise the L x L hopping matrix of the one-particle sector."""
    _check_length(L)
    diag = np.zeros(L)
    off = np.full(L - 1, -float(t))
    hopping = np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    vec = vecs[:, 0]
    # fix the sign so the last amplitude is non-negative (all positive when t > 0)
    if vec[-1] < 0:
        vec = -vec
    vec = vec / np.linalg.norm(vec)
    return SingleParticleOracle(length=L, hopping=hopping, energy=float(vals[0]), vector=vec)


@dataclass(frozen=True)
class CommutingGroup:
    """Terms measurable together after rotating qubit k onto ``basis[k]``."""

    terms: tuple[PauliTerm, ...]
    basis: str
    label: str
    offset: float = 0.0

    def __post_init__(self):
        for term in self.terms:
            if not is_compatible(term, self.basis):
                raise ValueError(f"term {term.string} is not diagonal in basis {self.basis}")


def is_compatible(term: PauliTerm, basis: str) -> bool:
    """True if every non-identity factor of ``term`` matches the basis axis on that qubit."""
    return len(term.string) == len(basis) and all(
        op == "I" or op == ax for op, ax in zip(term.string, basis)
    )


def _bonds(L: int) -> list[tuple[int, int]]:
    # spin-up bonds first, then spin-down; the position in this list is the bond index
    return [(b + i, b + i + 1) for b in (0, L) for i in range(L - 1)]


def group_commuting(H: QubitHamiltonian) -> list[CommutingGroup]:
    """Split H into at most five qubit-wise commuting groups.

    Groups, in order: diagonal Z/ZZ terms; XX on even bonds; XX on odd bonds;
    YY on even bonds; YY on odd bonds. Bonds are numbered over the spin-up
    block followed by the spin-down block. Empty groups are dropped.
    """
    n = H.n_qubits
    L = H.length
    bonds = _bonds(L)
    bond_parity = {pair: idx % 2 for idx, pair in enumerate(bonds)}
    buckets: dict[str, list[PauliTerm]] = {k: [] for k in ("Z", "XX0", "XX1", "YY0", "YY1")}
    for term in H.terms:
        if term.is_diagonal:
            buckets["Z"].append(term)
            continue
        supp = term.support
        ops = {term.string[k] for k in supp}
        if len(supp) != 2 or len(ops) != 1 or (supp[0], supp[1]) not in bond_parity:
            raise ValueError(f"term {term.string} fits no measurement group")
        op = ops.pop()
        if op not in "XY":
            raise ValueError(f"term {term.string} fits no measurement group")
        buckets[f"{op}{op}{bond_parity[(supp[0], supp[1])]}"].append(term)

    groups = []
    if buckets["Z"] or H.identity_offset != 0.0:
        groups.append(
            CommutingGroup(tuple(buckets["Z"]), "Z" * n, "diagonal", offset=H.identity_offset)
        )
    for key, label in (("XX0", "XX even"), ("XX1", "XX odd"), ("YY0", "YY even"), ("YY1", "YY odd")):
        terms = buckets[key]
        if not terms:
            continue
        axis = key[0]
        basis = ["Z"] * n
        parity = int(key[2])
        for idx, (a, b) in enumerate(bonds):
            if idx % 2 == parity:
                basis[a] = basis[b] = axis
        groups.append(CommutingGroup(tuple(terms), "".join(basis), label))
    return groups


def pauli_matrix(string: str) -> np.ndarray:
    return reduce(np.kron, (_PAULI_MATS[c] for c in string))


def dense_matrix(H: QubitHamiltonian) -> np.ndarray:
    """Brute-force 2^N x 2^N matrix of H. Only meant as an oracle for small N."""
    n = H.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrix limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    mat = H.identity_offset * np.eye(2**n, dtype=complex)
    for term in H.terms:
        mat += term.coeff * pauli_matrix(term.string)
    if np.abs(mat.imag).max(initial=0.0) > 1e-12:
        raise ValueError("Hamiltonian matrix has an imaginary part")
    return mat.real.copy()
