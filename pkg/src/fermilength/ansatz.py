"""Single-particle ladder ansatz built from the particle-conserving A gate.

A(theta) acts on a neighbouring pair (upper = lower index, lower = upper index + 1).
On the one-excitation states it maps

    |upper excited>  ->  sin(theta) |upper excited> + cos(theta) |lower excited>

which chains into hyperspherical amplitudes along the ladder.

Rotation angle convention: the elementary fragments use ``R_y(phi)^dagger`` and
``R_y(phi)`` with ``phi = -theta``. A brute-force 4x4 comparison against the A
matrix fixes this sign; with ``phi = +theta`` the fragment realises ``A(-theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

GATE_KINDS = ("X", "Y", "Z", "CNOT", "RY", "RY_DAG")
NORM_TOL = 1e-8
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits) or min(self.qubits) < 0:
            raise ValueError(f"invalid qubit indices {self.qubits}")
        if self.kind in ("RY", "RY_DAG"):
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    parameters: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(float(p) for p in self.parameters))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return self.count("CNOT")


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def a_gate_matrix(theta: float) -> np.ndarray:
    """A gate in the basis (|00>, |10>, |01>, |11>), first bit = upper qubit.

    The middle block is ``[[sin, cos], [cos, -sin]]``; the gate is real,
    symmetric and its own inverse.
    """
    s, c = math.sin(theta), math.cos(theta)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, s, c, 0.0],
            [0.0, c, -s, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _fragment_angle(theta: float) -> float:
    return -float(theta)


def decompose_a_full(theta: float, upper: int = 0, lower: int = 1) -> tuple[Gate, ...]:
    """General three-CNOT decomposition of A(theta), valid for any input state."""
    phi = _fragment_angle(theta)
    return (
        Gate("CNOT", (lower, upper)),
        Gate("RY_DAG", (lower,), phi),
        Gate("CNOT", (upper, lower)),
        Gate("RY", (lower,), phi),
        Gate("CNOT", (lower, upper)),
    )


def _first_fragment(theta: float) -> tuple[Gate, ...]:
    # Upper qubit is |1> and lower is |0>: the leading CNOT is idle, the middle
    # CNOT becomes X on the lower qubit, and X Ry(b)|0> = Ry(pi - b)|0>.
    phi = _fragment_angle(theta)
    return (
        Gate("RY", (1,), math.pi + phi),
        Gate("RY", (1,), phi),
        Gate("CNOT", (1, 0)),
    )


def _ladder_fragment(theta: float, upper: int) -> tuple[Gate, ...]:
    # Lower qubit is still |0>, so the leading CNOT of the full form is idle.
    lower = upper + 1
    phi = _fragment_angle(theta)
    return (
        Gate("RY_DAG", (lower,), phi),
        Gate("CNOT", (upper, lower)),
        Gate("RY", (lower,), phi),
        Gate("CNOT", (lower, upper)),
    )


def _check_angles(L: int, thetas: Sequence[float]) -> tuple[float, ...]:
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")
    thetas = tuple(float(x) for x in thetas)
    if len(thetas) != L - 1:
        raise ValueError(f"expected {L - 1} parameters for L={L}, got {len(thetas)}")
    return thetas


def build_ladder_circuit(L: int, thetas: Sequence[float]) -> Circuit:
    """Simplified ladder on ``2L`` qubits; gates only touch qubits ``0..L-1``."""
    thetas = _check_angles(L, thetas)
    gates: list[Gate] = [Gate("X", (0,))]
    gates += _first_fragment(thetas[0])
    for k in range(1, L - 1):
        gates += _ladder_fragment(thetas[k], k)
    return Circuit(n_qubits=2 * L, gates=tuple(gates), parameters=thetas)


def build_full_ladder_circuit(L: int, thetas: Sequence[float]) -> Circuit:
    """Unsimplified ladder using the general decomposition for every A gate."""
    thetas = _check_angles(L, thetas)
    gates: list[Gate] = [Gate("X", (0,))]
    for k, theta in enumerate(thetas):
        gates += decompose_a_full(theta, k, k + 1)
    return Circuit(n_qubits=2 * L, gates=tuple(gates), parameters=thetas)


def gate_counts(L: int) -> tuple[int, int]:
    """(CNOT count, parameter count) of the simplified ladder."""
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")
    return 2 * L - 3, L - 1


def state_coefficients(thetas: Sequence[float]) -> np.ndarray:
    """Hyperspherical amplitudes c_0..c_{L-1} of the ladder state."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size < 1:
        raise ValueError("need at least one angle")
    L = thetas.size + 1
    coeffs = np.empty(L)
    running = 1.0
    for k, th in enumerate(thetas):
        coeffs[k] = running * math.sin(th)
        running *= math.cos(th)
    coeffs[L - 1] = running
    return coeffs


class UnrepresentableTarget(ValueError):
    """Target needs a negative trailing amplitude the principal branch cannot give."""


def solve_parameters(target: Sequence[float]) -> np.ndarray:
    """Invert :func:`state_coefficients` with every angle in [-pi/2, pi/2].

    Raises :class:`UnrepresentableTarget` when the trailing coefficient is
    negative; negating the whole target (a global phase) fixes that.
    """
    c = np.asarray(target, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("target needs at least two amplitudes")
    norm = float(np.dot(c, c))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"target is not normalized (norm^2 = {norm})")
    if c[-1] < -math.sqrt(RESIDUAL_TOL):
        raise UnrepresentableTarget(
            "trailing amplitude is negative; negate the target to use principal branches"
        )
    # atan2 against the tail norm stays accurate where arcsin of a ratio near 1 does not
    tails = np.sqrt(np.cumsum((c * c)[::-1])[::-1])
    thetas = np.array([math.atan2(c[k], tails[k + 1]) for k in range(c.size - 1)])
    return thetas


def to_qasm(circuit: Circuit) -> str:
    """OpenQASM 2.0 text with every qubit measured."""
    n = circuit.n_qubits
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];", f"creg c[{n}];"]
    for g in circuit.gates:
        if g.kind in ("X", "Y", "Z"):
            lines.append(f"{g.kind.lower()} q[{g.qubits[0]}];")
        elif g.kind == "CNOT":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            angle = g.angle if g.kind == "RY" else -g.angle
            lines.append(f"ry({angle!r}) q[{g.qubits[0]}];")
    lines += [f"measure q[{k}] -> c[{k}];" for k in range(n)]
    return "\n".join(lines) + "\n"


def describe(circuit: Circuit) -> str:
    rows = [f"# qubits {circuit.n_qubits}", f"# parameters {' '.join(repr(p) for p in circuit.parameters)}"]
    for g in circuit.gates:
        qs = " ".join(str(q) for q in g.qubits)
        rows.append(f"{g.kind} {qs}" + ("" if g.angle is None else f" {g.angle!r}"))
    return "\n".join(rows) + "\n"
