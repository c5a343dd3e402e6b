"""Command-line driver.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import svgplot
from .ansatz import build_ladder_circuit, describe, to_qasm
from .bench import BenchmarkConfig, BenchmarkReport, ConfigError, error_score, passes, run_sweep
from .mitigation import CalibrationSet, calibrate
from .pauli_model import build_hamiltonian, exact_gs_energy, group_commuting, single_particle_oracle
from .vqe import optimize_shotbased, preoptimize

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("fermilength")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _length(text: str) -> int:
    try:
        L = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid chain length {text!r}") from None
    if L < 2:
        raise argparse.ArgumentTypeError(f"chain length must be >= 2, got {L}")
    return L


def _params(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid parameter list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master RNG seed")
    common.add_argument("--shots", type=int, help="shots per measured circuit")
    common.add_argument("--out-dir", type=Path, default=None, help="directory for output files")
    common.add_argument("--config", type=Path, help="flat 'key = value' config file")

    noise = _Parser(add_help=False)
    noise.add_argument("--p10", type=float, help="P(read 1 | true 0) on every qubit")
    noise.add_argument("--p01", type=float, help="P(read 0 | true 1) on every qubit")
    noise.add_argument("--p2", type=float, help="depolarizing probability after each CNOT")
    noise.add_argument("--trajectories", type=int, help="noise trajectories per circuit")
    noise.add_argument("--noiseless", action="store_true", help="zero every noise rate")

    parser = _Parser(prog="fermilength", description="Scalable single-particle Fermi-Hubbard VQE benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", parents=[common], help="closed-form ground energy")
    p.add_argument("--length", "-L", type=_length, required=True)

    p = sub.add_parser("circuit", parents=[common], help="ladder ansatz circuit")
    p.add_argument("--length", "-L", type=_length, required=True)
    p.add_argument("--params", type=_params, help="L-1 angles (default: pre-optimised)")
    p.add_argument("--qasm", action="store_true", help="emit OpenQASM 2.0")
    p.add_argument("--output", type=Path, help="write to this file instead of stdout")

    p = sub.add_parser("hamiltonian", parents=[common], help="qubit Hamiltonian as text")
    p.add_argument("--length", "-L", type=_length, required=True)
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--groups", action="store_true", help="also list measurement groups")

    p = sub.add_parser("calibrate", parents=[common, noise], help="readout calibration file")
    p.add_argument("--qubits", "-N", type=int, required=True)

    p = sub.add_parser("run", parents=[common, noise], help="full benchmark sweep")
    p.add_argument("--l-min", dest="L_min", type=int)
    p.add_argument("--l-max", dest="L_max", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--U", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--no-mitigation", action="store_true")
    p.add_argument("--calibration", type=Path, help="reuse a calibration file")
    p.add_argument("--save-counts", action="store_true", help="write per-group counts files")

    p = sub.add_parser("convergence", parents=[common, noise], help="shot-based VQE trace")
    p.add_argument("--length", "-L", type=_length, required=True)
    p.add_argument("--init", choices=("zero", "seeded"), required=True)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--method", choices=("COBYLA", "Nelder-Mead"), default="COBYLA")

    p = sub.add_parser("score", parents=[common], help="error score of a measured energy")
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--length", "-L", type=_length, required=True)
    p.add_argument("--threshold", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> BenchmarkConfig:
    """Defaults, then the config file, then command-line flags."""
    cfg = BenchmarkConfig()
    if getattr(args, "config", None):
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        cfg = BenchmarkConfig.from_text(text)
    overrides = {}
    for f in fields(BenchmarkConfig):
        value = getattr(args, f.name, None)
        if value is not None and not isinstance(value, bool):
            overrides[f.name] = value
    if getattr(args, "noiseless", False):
        overrides.update(p10=0.0, p01=0.0, p2=0.0)
    if getattr(args, "no_mitigation", False):
        overrides["mitigation"] = False
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _out_dir(args) -> Path:
    out = args.out_dir or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config(out: Path, cfg: BenchmarkConfig) -> None:
    (out / "config.txt").write_text(cfg.to_text())


def cmd_exact(args) -> int:
    print(f"{exact_gs_energy(args.length):.12f}")
    return EXIT_OK


def cmd_circuit(args) -> int:
    L = args.length
    if args.params is None:
        params, _, _ = preoptimize(L)
    else:
        params = args.params
        if len(params) != L - 1:
            raise ConfigError("params", f"expected {L - 1} angles for L={L}, got {len(params)}")
    circuit = build_ladder_circuit(L, params)
    text = to_qasm(circuit) if args.qasm else describe(circuit)
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_hamiltonian(args) -> int:
    cfg = resolve_config(args)
    H = build_hamiltonian(args.length, cfg.t if args.t is None else args.t, cfg.U if args.U is None else args.U)
    sys.stdout.write(H.to_text())
    if args.groups:
        for k, g in enumerate(group_commuting(H)):
            print(f"# group {k} ({g.label}) basis {g.basis}: " + " ".join(t.string for t in g.terms))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = resolve_config(args)
    if args.qubits < 1:
        raise ConfigError("qubits", f"must be >= 1, got {args.qubits}")
    noise = cfg.noise_model(args.qubits)
    cal = calibrate(args.qubits, cfg.calibration_shots or cfg.shots, noise, seed=cfg.seed)
    out = _out_dir(args)
    (out / "calibration.txt").write_text(cal.to_text())
    _write_config(out, cfg)
    sys.stdout.write(cal.to_text())
    return EXIT_OK


def write_plots(report: BenchmarkReport, out: Path) -> list[Path]:
    rs = report.results
    N = [r.N for r in rs]
    mit = [(r.N, r) for r in rs if r.mitigated_energy is not None]
    energy = svgplot.Plot("Single-particle energy", "qubits N = 2L", "energy (units of t)")
    energy.series.append(svgplot.Series("raw", N, [r.raw_energy for r in rs]))
    if mit:
        energy.series.append(svgplot.Series("mitigated", [n for n, _ in mit], [r.mitigated_energy for _, r in mit]))
    energy.series.append(svgplot.Series("exact", N, [r.exact_energy for r in rs], dashed=True, markers=False))

    score = svgplot.Plot("Error score", "qubits N = 2L", "error score", log_y=True)
    score.series.append(svgplot.Series("raw", N, [r.raw_score for r in rs]))
    if mit:
        score.series.append(svgplot.Series("mitigated", [n for n, _ in mit], [r.mitigated_score for _, r in mit]))
    score.hlines.append(svgplot.HLine(report.config.threshold, f"threshold {report.config.threshold:g}"))

    corr = svgplot.Plot("Mitigation correction", "qubits N = 2L", "raw - mitigated energy")
    if mit:
        corr.series.append(svgplot.Series("raw - mitigated", [n for n, _ in mit],
                                          [r.raw_energy - r.mitigated_energy for _, r in mit]))
    corr.hlines.append(svgplot.HLine(0.0, "zero"))

    paths = []
    for name, plot in (("energy.svg", energy), ("score.svg", score), ("correction.svg", corr)):
        path = out / name
        path.write_text(svgplot.render(plot))
        paths.append(path)
    return paths


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    out = _out_dir(args)
    _write_config(out, cfg)
    calibration = None
    if args.calibration:
        try:
            calibration = CalibrationSet.from_text(args.calibration.read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError("calibration", str(exc)) from None
        if calibration.n_qubits < 2 * cfg.L_max:
            raise ConfigError("calibration", f"file covers {calibration.n_qubits} qubits, "
                              f"L_max={cfg.L_max} needs {2 * cfg.L_max}")
    report = run_sweep(cfg, calibration)
    (out / "report.json").write_text(report.to_json())
    (out / "results.csv").write_text(report.to_csv())
    write_plots(report, out)
    if args.save_counts:
        _save_counts(report, cfg, out)
    mit = "n/a" if report.lstar_mitigated is None else f"{report.lstar_mitigated} (N*={report.nstar_mitigated})"
    print(f"L* raw: {report.lstar_raw} (N*={report.nstar_raw})  [{report.termination_raw}]")
    print(f"L* mitigated: {mit}  [{report.termination_mitigated}]")
    return EXIT_OK


def _save_counts(report: BenchmarkReport, cfg: BenchmarkConfig, out: Path) -> None:
    from .simulator import measure_circuit

    folder = out / "counts"
    folder.mkdir(exist_ok=True)
    for r in report.results:
        H = build_hamiltonian(r.L, cfg.t, cfg.U)
        circuit = build_ladder_circuit(r.L, r.parameters)
        noise = cfg.noise_model(H.n_qubits)
        for k, g in enumerate(group_commuting(H)):
            table = measure_circuit(circuit, g.basis, cfg.shots, noise, key=(r.L, k))
            (folder / f"L{r.L}_group{k}.txt").write_text(table.to_text())


def cmd_convergence(args) -> int:
    cfg = resolve_config(args)
    L = args.length
    if args.max_iter < 0:
        raise ConfigError("max_iter", f"must be >= 0, got {args.max_iter}")
    if args.init == "seeded":
        init, _, _ = preoptimize(L, U=cfg.U, t=cfg.t)
    else:
        init = np.zeros(L - 1)
    trace = optimize_shotbased(L, init, cfg.shots, cfg.noise_model(2 * L), max_iter=args.max_iter,
                               U=cfg.U, t=cfg.t, method=args.method)
    out = _out_dir(args)
    _write_config(out, cfg)
    path = out / f"convergence_L{L}_{args.init}.csv"
    path.write_text(trace.to_csv())
    exact = single_particle_oracle(L, cfg.t).energy
    print(f"final energy {trace.final_energy:.6f} (exact {exact:.6f}) "
          f"after {len(trace.iterations) - 1} steps -> {path}")
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = resolve_config(args)
    threshold = cfg.threshold if args.threshold is None else args.threshold
    if threshold < 0:
        raise ConfigError("threshold", f"must be non-negative, got {threshold}")
    exact = single_particle_oracle(args.length, cfg.t).energy
    s = error_score(args.energy, exact, args.length, cfg.shots)
    print(f"{s:.6e} {'PASS' if passes(s, threshold) else 'FAIL'}")
    return EXIT_OK


COMMANDS = {
    "exact": cmd_exact,
    "circuit": cmd_circuit,
    "hamiltonian": cmd_hamiltonian,
    "calibrate": cmd_calibrate,
    "run": cmd_run,
    "convergence": cmd_convergence,
    "score": cmd_score,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fermilength: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"fermilength: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
