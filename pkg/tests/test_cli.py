import json
import math

import numpy as np
import pytest

from hologate import cli, compiler
from hologate.loops import LoopSpec, PlaneId, Polyline, Rect, loop_to_dict


def write_loop(tmp_path, name, loop):
    path = tmp_path / name
    path.write_text(json.dumps(loop_to_dict(loop)))
    return str(path)


@pytest.fixture()
def hadamard_loop_file(tmp_path):
    return write_loop(
        tmp_path, "hadamard.json",
        LoopSpec(PlaneId.II, Rect(0.0, math.pi / 4.0, 0.0, math.log(2.0))),
    )


@pytest.fixture()
def plane3_loop_file(tmp_path):
    return write_loop(
        tmp_path, "p3.json",
        LoopSpec(PlaneId.III, Rect(0.0, math.acosh(2.0), 0.0, math.pi / 8.0)),
    )


@pytest.fixture()
def degenerate_loop_file(tmp_path):
    return write_loop(
        tmp_path, "degen.json",
        LoopSpec(PlaneId.I, Polyline(((0.0, 0.0), (1e-6, 0.0), (5e-7, 0.0)))),
    )


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def as_matrix(pairs):
    return np.array([[complex(re, im) for re, im in row] for row in pairs])


def test_area_hadamard_rect(capsys, hadamard_loop_file):
    code, record = run_cli(capsys, "area", hadamard_loop_file)
    assert code == 0
    assert record["sigma"] == pytest.approx(0.589048622548, abs=1e-12)
    assert record["paper_stated_value"] == pytest.approx(math.pi / 4.0)
    assert record["config"]["output_precision"] == 12


def test_area_plane3_rect(capsys, plane3_loop_file):
    code, record = run_cli(capsys, "area", plane3_loop_file)
    assert code == 0
    assert record["sigma"] == pytest.approx(2.356194490192, abs=1e-12)
    assert record["paper_stated_value"] == pytest.approx(math.pi / 4.0)


def test_area_degenerate_loop(capsys, degenerate_loop_file):
    code, record = run_cli(capsys, "area", degenerate_loop_file)
    assert code == 0
    assert record["sigma"] == 0.0


def test_gate_command_emits_matrix(capsys, plane3_loop_file):
    code, record = run_cli(capsys, "gate", plane3_loop_file)
    assert code == 0
    assert record["generator"] == "Sigma12"
    mat = as_matrix(record["matrix"])
    assert np.linalg.norm(mat.conj().T @ mat - np.eye(4)) < 1e-9


@pytest.mark.parametrize("method", ["connection", "kicked"])
def test_oracle_degenerate_loop_both_methods(capsys, degenerate_loop_file, method):
    code, record = run_cli(
        capsys, "--steps", "128", "--cutoff", "24",
        "oracle", degenerate_loop_file, "--method", method,
    )
    assert code == 0
    assert record["frobenius_distance"] < 1e-8


def test_oracle_connection_calibration_rect(capsys, tmp_path):
    loop_file = write_loop(
        tmp_path, "cal.json", LoopSpec(PlaneId.I, Rect(0.0, 0.1, 0.0, 0.1))
    )
    code, record = run_cli(capsys, "--steps", "400", "--cutoff", "40", "oracle", loop_file)
    assert code == 0
    assert record["frobenius_distance"] < 1e-2
    assert record["unitarity_defect"] < 1e-9
    assert "convergence_estimate" in record


def test_oracle_kicked_reports_leakage(capsys, tmp_path):
    loop_file = write_loop(
        tmp_path, "cal.json", LoopSpec(PlaneId.I, Rect(0.0, 0.1, 0.0, 0.1))
    )
    code, record = run_cli(
        capsys, "--steps", "256", "--cutoff", "40",
        "oracle", loop_file, "--method", "kicked",
    )
    assert code == 0
    assert record["leakage"] < 1e-6
    assert record["fidelity_to_prediction"] > 0.999


def test_error_shift_command(capsys, hadamard_loop_file):
    code, record = run_cli(capsys, "error", hadamard_loop_file, "--shift", "0,0.01,0,0")
    assert code == 0
    assert record["epsilon"] == pytest.approx(0.0075, abs=1e-10)
    assert record["sensitivity"]["u_high"] == pytest.approx(0.75, abs=1e-6)
    assert record["flags"]["shift_convention"] == "outward_positive"


def test_error_shift_plane3_reports_stated_coefficients(capsys, plane3_loop_file):
    code, record = run_cli(capsys, "error", plane3_loop_file, "--shift", "0,0.01,0,0.01")
    assert code == 0
    assert record["paper_stated_value"]["delta_coefficients"] == [1.7, 1.0]
    assert record["sensitivity"]["u_high"] == pytest.approx(math.pi * math.sqrt(3), rel=1e-6)


def test_error_statistical_command(capsys, hadamard_loop_file):
    code, record = run_cli(
        capsys, "--seed", "5", "error", hadamard_loop_file, "--statistical", "0.01", "500"
    )
    assert code == 0
    assert record["samples"] == 500
    assert abs(record["mean_drift"]) < 1e-3


def test_compile_empty_circuit(capsys, tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing here\n")
    code, record = run_cli(capsys, "compile", str(path))
    assert code == 0
    assert record["schedule"] == []
    assert record["total_first_order_epsilon_bound"] == 0.0


def test_compile_cnot_schedule(capsys, tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("CNOT q0 q1\n")
    code, record = run_cli(capsys, "compile", str(path))
    assert code == 0
    kinds = [e["kind"] for e in record["schedule"][0]["entries"]]
    assert kinds == ["phase_flip", "loop", "loop"]
    for entry in record["schedule"][0]["entries"][1:]:
        assert entry["sigma"] == pytest.approx(math.pi / 4.0, rel=1e-12)
        assert entry["loop"]["plane"] == "III"


def test_compile_hadamard_entry(capsys, tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("H q0\n")
    code, record = run_cli(capsys, "compile", str(path))
    assert code == 0
    entry = record["schedule"][0]["entries"][0]
    assert entry["kind"] == "hadamard_family"
    assert entry["target_sigma"] == pytest.approx(math.pi / 4.0)
    assert "convention-dependent" in entry["note"]


def test_compile_phase_gate_and_budget(capsys, tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("P(0.5) q0\nCROT q0 q1\n")
    code, record = run_cli(capsys, "compile", str(path), "--shift-magnitude", "0.001")
    assert code == 0
    assert record["schedule"][0]["entries"][0] == {"kind": "phase", "phi": 0.5}
    assert record["schedule"][1]["first_order_epsilon_bound"] > 0.0
    assert record["total_first_order_epsilon_bound"] == pytest.approx(
        record["schedule"][1]["first_order_epsilon_bound"]
    )


def test_compile_unknown_gate_exits_with_supported_list(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("SWAP q0 q1\n")
    code = cli.main(["compile", str(path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "CROT" in captured.err


def test_parse_error_exit_code(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["area", str(path)]) == 2


def test_missing_file_exit_code(capsys):
    assert cli.main(["area", "/nonexistent/loop.json"]) == 2


def test_strict_truncation_exit_code(capsys, tmp_path):
    # displacement amplitude far beyond what cutoff 8 can carry
    loop_file = write_loop(
        tmp_path, "wild.json", LoopSpec(PlaneId.I, Rect(0.0, 2.6, 0.0, 0.05))
    )
    code = cli.main(
        ["--cutoff", "8", "--steps", "128", "--strict", "oracle", loop_file]
    )
    captured = capsys.readouterr()
    assert code == 4
    assert "truncation" in captured.err
    # without --strict the same run succeeds
    assert cli.main(["--cutoff", "8", "--steps", "128", "oracle", loop_file]) == 0


def test_loop_file_round_trip(tmp_path, capsys):
    loop = LoopSpec(PlaneId.I, Polyline(((0.0, 0.0), (0.5, 0.1), (0.2, 0.6))), -1)
    path = write_loop(tmp_path, "poly.json", loop)
    from hologate.loops import loop_from_json

    assert loop_from_json(open(path).read()) == loop


def test_deterministic_output(capsys, hadamard_loop_file):
    outputs = []
    for _ in range(2):
        code = cli.main(["--seed", "3", "error", hadamard_loop_file, "--statistical", "0.01", "400"])
        assert code == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_parse_circuit_rejects_bad_arity():
    with pytest.raises(compiler.CircuitParseError):
        compiler.parse_circuit("H q0 q1\n")
    with pytest.raises(compiler.CircuitParseError):
        compiler.parse_circuit("P q0\n")
    with pytest.raises(compiler.CircuitParseError):
        compiler.parse_circuit("H(0.3) q0\n")


def test_parse_circuit_comments_and_params():
    parsed = compiler.parse_circuit("# header\nH q0  # trailing\nP(1.25) q3\n\n")
    assert parsed == [
        {"gate": "H", "qubits": [0], "phi": None},
        {"gate": "P", "qubits": [3], "phi": 1.25},
    ]


def test_crot_loop_area_is_quarter_pi():
    from hologate import loops as loops_mod

    assert loops_mod.area(compiler.CROT_LOOP).sigma == pytest.approx(math.pi / 4.0, rel=1e-14)
    assert loops_mod.area(compiler.HADAMARD_REFERENCE_LOOP).sigma == pytest.approx(
        math.pi / 4.0, rel=1e-14
    )
