"""Benchmark sweep over chain lengths, error scores and the L*/N* verdict."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

from .ansatz import build_ladder_circuit
from .estimator import EnergyEstimate, energy_from_group_counts
from .mitigation import MAX_MITIGATION_QUBITS, CalibrationSet, calibrate, mitigated_energy
from .pauli_model import build_hamiltonian, group_commuting, single_particle_oracle
from .simulator import DEFAULT_TRAJECTORIES, NoiseModel, make_rng, measure_circuit
from .vqe import DEFAULT_METHOD, preoptimize

log = logging.getLogger(__name__)

REPORT_SCHEMA = "fermilength.report/1"
DEFAULT_SHOTS = 8192
DEFAULT_THRESHOLD = 1e-3
CALIBRATION_KEY = 1_000_003


@dataclass
class BenchmarkConfig:
    L_min: int = 2
    L_max: int = 12
    shots: int = DEFAULT_SHOTS
    threshold: float = DEFAULT_THRESHOLD
    mitigation: bool = True
    U: float = 2.0
    t: float = 1.0
    seed: int = 0
    # default noise model: mild asymmetric readout error plus CNOT depolarizing
    p10: float = 0.01
    p01: float = 0.02
    p2: float = 0.003
    trajectories: int = DEFAULT_TRAJECTORIES
    calibration_shots: int | None = None

    def validate(self) -> None:
        """Raise ConfigError naming the first offending field."""
        if self.L_min < 2:
            raise ConfigError("L_min", f"must be >= 2, got {self.L_min}")
        if self.L_max < self.L_min:
            raise ConfigError("L_max", f"must be >= L_min ({self.L_min}), got {self.L_max}")
        if self.shots < 1:
            raise ConfigError("shots", f"must be >= 1, got {self.shots}")
        # zero is accepted as a degenerate "nothing passes" setting
        if not (math.isfinite(self.threshold) and self.threshold >= 0):
            raise ConfigError("threshold", f"must be a non-negative number, got {self.threshold}")
        for name in ("p10", "p01", "p2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {value}")
        if not (math.isfinite(self.U) and math.isfinite(self.t)):
            raise ConfigError("U" if not math.isfinite(self.U) else "t", "must be finite")
        if self.trajectories < 1:
            raise ConfigError("trajectories", f"must be >= 1, got {self.trajectories}")
        if self.calibration_shots is not None and self.calibration_shots < 1:
            raise ConfigError("calibration_shots", f"must be >= 1, got {self.calibration_shots}")

    def noise_model(self, n_qubits: int) -> NoiseModel:
        return NoiseModel.uniform(n_qubits, self.p10, self.p01, self.p2, self.seed, self.trajectories)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "BenchmarkConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            kwargs[key] = _coerce(key, known[key].type, raw)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "BenchmarkConfig":
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}", f"expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return cls.from_mapping(values)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _coerce(key: str, type_name, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if "bool" in str(type_name):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if "None" in str(type_name) and text.lower() in ("none", ""):
            return None
        if "int" in str(type_name):
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {type_name}") from None


def error_score(energy: float, exact: float, L: int, shots: int) -> float:
    """``|E - E_gs| / (L sqrt(M))``; smaller is better."""
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    return abs(energy - exact) / (L * math.sqrt(shots))


def passes(score: float, threshold: float) -> bool:
    # pass while the score does not exceed the threshold; a zero threshold passes nothing
    return score <= threshold and threshold > 0


def determine_lstar(flags: Sequence[bool], L_min: int = 2) -> int:
    """Largest L with every length from ``L_min`` up to it passing; 0 if the first fails.

    ``flags[i]`` is the verdict for ``L = L_min + i``; later passes after the
    first failure do not count.
    """
    lstar = 0
    for i, ok in enumerate(flags):
        if not ok:
            break
        lstar = L_min + i
    return lstar


@dataclass
class LengthResult:
    L: int
    N: int
    parameters: list[float]
    exact_energy: float
    raw_energy: float
    raw_std_error: float
    raw_score: float
    raw_pass: bool
    mitigated_energy: float | None = None
    mitigated_std_error: float | None = None
    mitigated_score: float | None = None
    mitigated_pass: bool | None = None
    mitigation_note: str = ""
    preopt_energy: float = float("nan")
    seconds: float = 0.0


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    results: list[LengthResult] = field(default_factory=list)
    lstar_raw: int = 0
    lstar_mitigated: int | None = None
    termination_raw: str = ""
    termination_mitigated: str = ""
    optimizer: str = DEFAULT_METHOD

    @property
    def nstar_raw(self) -> int:
        return 2 * self.lstar_raw

    @property
    def nstar_mitigated(self) -> int | None:
        return None if self.lstar_mitigated is None else 2 * self.lstar_mitigated

    def to_dict(self) -> dict:
        notes = []
        if self.config.threshold != DEFAULT_THRESHOLD:
            notes.append(
                f"NON-DEFAULT THRESHOLD {self.config.threshold:g} (standard value is {DEFAULT_THRESHOLD:g})"
            )
        return {
            "schema": REPORT_SCHEMA,
            "notes": notes,
            "config": asdict(self.config),
            "optimizer": self.optimizer,
            "L_star_raw": self.lstar_raw,
            "N_star_raw": self.nstar_raw,
            "L_star_mitigated": self.lstar_mitigated,
            "N_star_mitigated": self.nstar_mitigated,
            "termination_raw": self.termination_raw,
            "termination_mitigated": self.termination_mitigated,
            "results": [asdict(r) for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "raw_energy", "mitigated_energy", "exact_energy", "raw_score", "mitigated_score"])
        for r in self.results:
            writer.writerow([r.N, _fmt(r.raw_energy), _fmt(r.mitigated_energy), _fmt(r.exact_energy),
                             _fmt(r.raw_score), _fmt(r.mitigated_score)])
        return buf.getvalue()


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def measure_length(L: int, parameters: Sequence[float], config: BenchmarkConfig,
                   calibration: CalibrationSet | None = None):
    """Raw and (optionally) mitigated estimates for one chain length.

    Returns ``(raw, mitigated_or_None, note)``. Mitigation reuses the raw
    counts, so toggling it never changes the raw track.
    """
    H = build_hamiltonian(L, config.t, config.U)
    groups = group_commuting(H)
    n = H.n_qubits
    noise = config.noise_model(n)
    circuit = build_ladder_circuit(L, parameters)
    counts = [measure_circuit(circuit, g.basis, config.shots, noise, key=(L, k))
              for k, g in enumerate(groups)]
    raw = energy_from_group_counts(H, groups, counts)
    if not config.mitigation:
        return raw, None, "mitigation disabled"
    if n > MAX_MITIGATION_QUBITS:
        return raw, None, f"skipped: N={n} exceeds the {MAX_MITIGATION_QUBITS}-qubit mitigation limit"
    if calibration is None:
        cal_shots = config.calibration_shots or config.shots
        calibration = calibrate(n, cal_shots, noise, rng=make_rng(config.seed, L, CALIBRATION_KEY))
        note = f"calibrated with {cal_shots} shots"
    else:
        calibration = calibration.restrict(n)
        note = "calibration loaded from file"
    return raw, mitigated_energy(H, groups, counts, calibration), note


def run_sweep(config: BenchmarkConfig, calibration: CalibrationSet | None = None) -> BenchmarkReport:
    """Sweep L upward from L_min until the primary track fails or L_max is done.

    The primary track is the mitigated one when mitigation is enabled, else raw.
    """
    config.validate()
    report = BenchmarkReport(config=config)
    raw_flags: list[bool] = []
    mit_flags: list[bool] = []
    stopped_at = None
    for L in range(config.L_min, config.L_max + 1):
        start = time.perf_counter()
        try:
            params, preopt_e, _ = preoptimize(L, U=config.U, t=config.t)
            raw, mit, note = measure_length(L, params, config, calibration)
        except Exception as exc:
            raise RuntimeError(f"benchmark failed at L={L}: {exc}") from exc
        exact = single_particle_oracle(L, config.t).energy
        raw_score = error_score(raw.value, exact, L, config.shots)
        result = LengthResult(
            L=L, N=2 * L, parameters=[float(p) for p in params], exact_energy=exact,
            raw_energy=raw.value, raw_std_error=raw.std_error, raw_score=raw_score,
            raw_pass=passes(raw_score, config.threshold), mitigation_note=note,
            preopt_energy=preopt_e,
        )
        if mit is not None:
            result.mitigated_energy = mit.value
            result.mitigated_std_error = mit.std_error
            result.mitigated_score = error_score(mit.value, exact, L, config.shots)
            result.mitigated_pass = passes(result.mitigated_score, config.threshold)
        result.seconds = time.perf_counter() - start
        report.results.append(result)
        raw_flags.append(result.raw_pass)
        primary_ok = result.raw_pass
        if config.mitigation:
            mit_flags.append(bool(result.mitigated_pass))
            primary_ok = bool(result.mitigated_pass)
        log.info("L=%d raw=%.6f mitigated=%s exact=%.6f (%.1fs)", L, raw.value,
                 None if mit is None else f"{mit.value:.6f}", exact, result.seconds)
        if not primary_ok:
            stopped_at = L
            break

    report.lstar_raw = determine_lstar(raw_flags, config.L_min)
    report.termination_raw = _termination(raw_flags, config, stopped_at)
    if config.mitigation:
        report.lstar_mitigated = determine_lstar(mit_flags, config.L_min)
        report.termination_mitigated = _termination(mit_flags, config, stopped_at)
    else:
        report.termination_mitigated = "mitigation disabled"
    return report


def _termination(flags: list[bool], config: BenchmarkConfig, stopped_at: int | None) -> str:
    for i, ok in enumerate(flags):
        if not ok:
            return f"threshold exceeded at L={config.L_min + i}"
    if stopped_at is not None:
        return f"sweep stopped at L={stopped_at} by the primary track"
    return f"reached L_max={config.L_max}"
