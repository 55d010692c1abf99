"""Command-line driver: every computation behind machine-readable JSON.

Commands: area, gate, oracle, error, compile.  Complex matrices are printed
as nested [re, im] pairs, the effective configuration is echoed in every
record, and floats are rounded to the configured number of significant
digits, so identical inputs produce bit-identical output.

Exit codes: 0 success, 2 parse/validation error, 3 convergence failure,
4 truncation-policy violation under --strict.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import compiler, connection, error_model, gates, kicked
from . import loops as loops_mod
from .exceptions import ConvergenceFailureError, TruncationWarning
from .loops import LoopSpec, PlaneId, Rect

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_TRUNCATION = 4

DEFAULT_SINGLE_MODE_CUTOFF = 60
DEFAULT_TWO_MODE_CUTOFF = 14

# Reference rectangles conventionally paired with a pi/4 target; carried on area reports.
_PAPER_RECT_TARGETS = (
    (PlaneId.II, Rect(0.0, math.pi / 4.0, 0.0, math.log(2.0)), math.pi / 4.0),
    (PlaneId.III, Rect(0.0, math.acosh(2.0), 0.0, math.pi / 8.0), math.pi / 4.0),
)


def _round_floats(obj, digits: int):
    if isinstance(obj, float):
        return round(obj, digits) + 0.0  # normalize -0.0
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat, dtype=complex)]


def _emit(record: dict, precision: int) -> None:
    print(json.dumps(_round_floats(record, precision), sort_keys=True))


def _config_record(args, cutoff: int | None = None) -> dict:
    return {
        "cutoff": cutoff,
        "quadrature_tolerance": args.tolerance,
        "fd_step": args.fd_step,
        "seed": args.seed,
        "output_precision": args.precision,
        "strict": bool(args.strict),
    }


def _load_loop(path: str) -> LoopSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return loops_mod.loop_from_dict(data)


def _effective_cutoff(args, loop: LoopSpec) -> int:
    if args.cutoff is not None:
        return args.cutoff
    return DEFAULT_TWO_MODE_CUTOFF if loop.plane is PlaneId.III else DEFAULT_SINGLE_MODE_CUTOFF


def _paper_stated_sigma(loop: LoopSpec) -> float | None:
    if not isinstance(loop.shape, Rect):
        return None
    for plane, rect, target in _PAPER_RECT_TARGETS:
        if loop.plane is plane and all(
            math.isclose(getattr(loop.shape, f), getattr(rect, f), rel_tol=0, abs_tol=1e-12)
            for f in ("u_min", "u_max", "v_min", "v_max")
        ):
            return loop.orientation * target
    return None


def _area_record(loop: LoopSpec, args) -> dict:
    result = loops_mod.area(loop, args.tolerance)
    record = {
        "loop": loops_mod.loop_to_dict(loop),
        "sigma": result.sigma,
        "method": result.method,
        "abs_error_estimate": result.abs_error_estimate,
    }
    stated = _paper_stated_sigma(loop)
    if stated is not None:
        record["paper_stated_value"] = stated
    return record


def cmd_area(args) -> int:
    loop = _load_loop(args.loop_file)
    record = _area_record(loop, args)
    record["config"] = _config_record(args)
    _emit(record, args.precision)
    return EXIT_OK


def cmd_gate(args) -> int:
    loop = _load_loop(args.loop_file)
    gate = gates.gate_for_loop(loop, args.tolerance)
    record = {
        "config": _config_record(args),
        "area": _area_record(loop, args),
        "generator": gate.diagnostics["generator"],
        "provenance": gate.provenance,
        "matrix": matrix_to_json(gate.matrix),
    }
    _emit(record, args.precision)
    return EXIT_OK


def cmd_oracle(args) -> int:
    loop = _load_loop(args.loop_file)
    cutoff = _effective_cutoff(args, loop)
    formula = gates.gate_for_loop(loop, args.tolerance)
    record = {
        "config": _config_record(args, cutoff),
        "method": args.method,
        "steps": args.steps,
        "formula_gate": matrix_to_json(formula.matrix),
        "area": _area_record(loop, args),
    }
    if args.method == "connection":
        try:
            oracle = connection.holonomy_path_ordered(loop, cutoff, args.steps)
        except ConvergenceFailureError as exc:
            record["error"] = str(exc)
            _emit(record, args.precision)
            return EXIT_CONVERGENCE
        calibrated = connection.calibrated_code_matrix(loop.plane, oracle.matrix)
        record["oracle_gate"] = matrix_to_json(calibrated)
        record["oracle_gate_raw_frame"] = matrix_to_json(oracle.matrix)
        record["unitarity_defect"] = oracle.unitarity_defect
        record["convergence_estimate"] = oracle.diagnostics["convergence_estimate"]
        record["frobenius_distance"] = float(
            np.linalg.norm(calibrated - formula.matrix)
        )
    else:
        schedule = kicked.KickSchedule(loop, kick_count=args.steps, cutoff=cutoff)
        result = kicked.run_kicked(schedule)
        half = kicked.run_kicked(
            kicked.KickSchedule(loop, kick_count=max(args.steps // 2, 16), cutoff=cutoff)
        )
        calibrated = connection.calibrated_code_matrix(loop.plane, result.code_map)
        record["oracle_gate"] = matrix_to_json(calibrated)
        record["oracle_gate_raw_frame"] = matrix_to_json(result.code_map)
        record["leakage"] = result.leakage
        record["fidelity_to_prediction"] = result.fidelity_to_prediction
        record["convergence_estimate"] = float(
            np.linalg.norm(result.code_map - half.code_map)
        )
        record["frobenius_distance"] = float(
            np.linalg.norm(calibrated - formula.matrix)
        )
    _emit(record, args.precision)
    return EXIT_OK


def cmd_error(args) -> int:
    loop = _load_loop(args.loop_file)
    record: dict = {"config": _config_record(args), "loop": loops_mod.loop_to_dict(loop)}
    if args.shift is not None:
        parts = [float(tok) for tok in args.shift.split(",")]
        if len(parts) != 4:
            raise ValueError("--shift needs four comma-separated values: du_lo,du_hi,dv_lo,dv_hi")
        shift = error_model.BorderShift(*parts)
        report = error_model.perturbed_area(loop, shift, args.tolerance)
        sens = error_model.sensitivity(loop, args.fd_step)
        record.update(
            {
                "shift": dict(zip(error_model.BORDERS, shift.as_tuple())),
                "sigma_nominal": report.sigma_nominal,
                "sigma_perturbed": report.sigma_perturbed,
                "epsilon": report.epsilon,
                "sensitivity": sens,
                "flags": report.flags,
            }
        )
        if loop.plane is PlaneId.III and _paper_stated_sigma(loop) is not None:
            record["paper_stated_value"] = {
                "delta_coefficients": list(error_model.PAPER_STATED_DELTA_COEFFICIENTS)
            }
    elif args.statistical is not None:
        amplitude, samples = args.statistical
        summary = error_model.statistical_loop_noise(
            loop, float(amplitude), args.seed, int(samples)
        )
        record.update(
            {
                "sigma_nominal": summary.sigma_nominal,
                "mean": summary.mean,
                "std": summary.std,
                "mean_drift": summary.drift,
                "amplitude": summary.amplitude,
                "samples": summary.samples,
            }
        )
    else:
        raise ValueError("cmd_error needs --shift or --statistical")
    _emit(record, args.precision)
    return EXIT_OK


def cmd_compile(args) -> int:
    with open(args.circuit_file, "r", encoding="utf-8") as fh:
        text = fh.read()
    circuit = compiler.parse_circuit(text)
    record = compiler.compile_circuit(circuit, shift_magnitude=args.shift_magnitude)
    record["config"] = _config_record(args)
    _emit(record, args.precision)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hologate",
        description="Holonomic gates from closed loops in optical control space",
    )
    parser.add_argument("--cutoff", type=int, default=None, help="Fock cutoff per mode")
    parser.add_argument("--tolerance", type=float, default=1e-10, help="quadrature tolerance")
    parser.add_argument("--fd-step", dest="fd_step", type=float, default=1e-4)
    parser.add_argument("--steps", type=int, default=2000, help="oracle steps / kick count")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strict", action="store_true", help="truncation warnings become exit 4")
    parser.add_argument("--precision", type=int, default=12, help="output significant digits")
    sub = parser.add_subparsers(dest="command", required=True)

    p_area = sub.add_parser("area", help="weighted area of a loop file")
    p_area.add_argument("loop_file")
    p_area.set_defaults(func=cmd_area)

    p_gate = sub.add_parser("gate", help="area-formula gate of a loop file")
    p_gate.add_argument("loop_file")
    p_gate.set_defaults(func=cmd_gate)

    p_oracle = sub.add_parser("oracle", help="dynamical oracle vs formula gate")
    p_oracle.add_argument("loop_file")
    p_oracle.add_argument("--method", choices=("connection", "kicked"), default="connection")
    p_oracle.set_defaults(func=cmd_oracle)

    p_error = sub.add_parser("error", help="border-shift or statistical error analysis")
    p_error.add_argument("loop_file")
    p_error.add_argument("--shift", default=None, help="du_lo,du_hi,dv_lo,dv_hi")
    p_error.add_argument("--statistical", nargs=2, metavar=("AMPLITUDE", "SAMPLES"), default=None)
    p_error.set_defaults(func=cmd_error)

    p_compile = sub.add_parser("compile", help="compile a circuit file to a loop schedule")
    p_compile.add_argument("circuit_file")
    p_compile.add_argument(
        "--shift-magnitude", dest="shift_magnitude", type=float, default=0.0,
        help="per-border shift magnitude for the first-order error budget",
    )
    p_compile.set_defaults(func=cmd_compile)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            code = args.func(args)
        truncated = [w for w in caught if issubclass(w.category, TruncationWarning)]
        if truncated and args.strict:
            for w in truncated:
                print(f"truncation: {w.message}", file=sys.stderr)
            return EXIT_TRUNCATION
        return code
    except ConvergenceFailureError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, OSError, json.JSONDecodeError, compiler.CircuitParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
