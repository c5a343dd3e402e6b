"""Energy estimates from measurement counts, plus the infinite-shot reference."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli_model import CommutingGroup, PauliTerm, QubitHamiltonian, is_compatible
from .simulator import CountsTable, _apply_1q, _SINGLE


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    std_error: float
    per_group: list[tuple[int, float, int]] = field(default_factory=list)


def term_signs(term: PauliTerm, bits: np.ndarray) -> np.ndarray:
    """(-1)^(parity of the outcome bits on the term's support), per row of ``bits``."""
    supp = list(term.support)
    if not supp:
        return np.ones(bits.shape[0])
    parity = bits[:, supp].sum(axis=1) & 1
    return 1.0 - 2.0 * parity


def _check_basis(term: PauliTerm, basis: str) -> None:
    if not is_compatible(term, basis):
        raise ValueError(f"term {term.string} is not diagonal in measurement basis {basis}")


def pauli_expectation_from_counts(term: PauliTerm, counts: CountsTable,
                                  basis: str | None = None) -> float:
    """Weighted expectation ``coeff * <P>`` estimated from one counts table."""
    basis = counts.basis if basis is None else basis
    _check_basis(term, basis)
    if counts.shots < 1:
        raise ValueError("counts table has no shots")
    bits, w = counts.bit_matrix()
    return term.coeff * float(np.dot(w, term_signs(term, bits))) / counts.shots


def group_observable(group: CommutingGroup, bits: np.ndarray) -> np.ndarray:
    """Per-outcome value of the group's terms (offset excluded)."""
    f = np.zeros(bits.shape[0])
    for term in group.terms:
        _check_basis(term, group.basis)
        f += term.coeff * term_signs(term, bits)
    return f


def _mean_and_var(f: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    m = int(w.sum())
    mean = float(np.dot(w, f)) / m
    if m < 2:
        return mean, 0.0
    sample_var = float(np.dot(w, (f - mean) ** 2)) / (m - 1)
    return mean, sample_var / m


def energy_from_group_counts(H: QubitHamiltonian, groups: Sequence[CommutingGroup],
                             counts: Sequence[CountsTable]) -> EnergyEstimate:
    """Sum of group contributions plus the identity offset.

    Terms inside one group share shots, so the group variance is taken from the
    per-shot value of the whole group (covariances included). Groups are
    treated as independent.
    """
    if len(counts) != len(groups):
        raise ValueError(f"need counts for {len(groups)} groups, got {len(counts)}")
    value = H.identity_offset
    var = 0.0
    per_group = []
    for k, (group, table) in enumerate(zip(groups, counts)):
        if table.shots < 1:
            raise ValueError(f"group {k} has zero shots")
        if table.n_qubits != H.n_qubits:
            raise ValueError(f"group {k} counts cover {table.n_qubits} qubits, H has {H.n_qubits}")
        bits, w = table.bit_matrix()
        mean, v = _mean_and_var(group_observable(group, bits), w)
        value += mean
        var += v
        per_group.append((k, mean, table.shots))
    return EnergyEstimate(value, math.sqrt(var), per_group)


def pauli_expectation_statevector(term: PauliTerm, psi: np.ndarray) -> float:
    """Exact ``<P>`` for a top-block state with the bottom block in ``|0...0>``."""
    L = int(round(math.log2(psi.size)))
    if term.n_qubits != 2 * L:
        raise ValueError(f"term acts on {term.n_qubits} qubits, state implies {2 * L}")
    if any(op in "XY" for op in term.string[L:]):
        return 0.0
    phi = psi
    for q, op in enumerate(term.string[:L]):
        if op != "I":
            phi = _apply_1q(phi, L, q, _SINGLE[op])
    return float(np.vdot(psi, phi).real)


def energy_statevector(H: QubitHamiltonian, psi: np.ndarray) -> float:
    """Exact ``<H>`` term by term, without building a matrix."""
    return H.identity_offset + sum(
        t.coeff * pauli_expectation_statevector(t, psi) for t in H.terms
    )
