import csv
import json

import numpy as np
import pytest
import yaml

from idqc.cli import main
from idqc.model import PAULI_X, PAULI_Z
from idqc.spectral import kron
from test_scenario import explicit_doc


def write(tmp_path, doc, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def spin(omega_S=1.0, omega_A=2.0, g=3.0, **extra):
    return {"preset": {"name": "spin-example", "omega_S": omega_S, "omega_A": omega_A, "g": g}, **extra}


def run(tmp_path, command, doc, *flags):
    out = tmp_path / "out"
    code = main([command, write(tmp_path, doc), "--out", str(out), *flags])
    result = out / f"{command}.json"
    return code, json.loads(result.read_text()) if result.exists() else None


def test_check_spin_preset(tmp_path, capsys):
    code, doc = run(tmp_path, "check", spin())
    assert code == 0
    assert doc["controllability"] == {"generated_dim": 3, "required_dim": 3, "controllable": True}
    assert doc["checks"]["nondemolition_residual"]["value"] == 0.0
    assert "PASS" in capsys.readouterr().out


def test_check_nondemolition_failure(tmp_path):
    code, doc = run(tmp_path, "check", explicit_doc(H_I=kron(PAULI_X, PAULI_X)))
    assert code != 0
    assert not doc["checks"]["nondemolition_residual"]["passed"]
    assert doc["checks"]["nondemolition_residual"]["value"] == pytest.approx(4.0)


def test_check_uncoupled(tmp_path):
    code, doc = run(tmp_path, "check", spin(g=0.0))
    assert code != 0
    assert doc["checks"]["nondemolition_residual"]["passed"]
    assert doc["controllability"]["generated_dim"] == 1


def test_malformed_scenario_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("preset: {name: spin-example, omega_S: 1}\n")
    assert main(["check", str(path), "--out", str(tmp_path)]) == 2
    assert "preset.omega_A" in capsys.readouterr().err


def test_simulate_trajectory(tmp_path):
    omega_S, g = 1.0, 3.0
    t1, t2 = 0.4, 0.9
    code, doc = run(tmp_path, "simulate", spin(schedule=[[0, t1, t2]]), "--samples", "16")
    assert code == 0
    with open(tmp_path / "out" / "trajectory.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "re_a0", "im_a0", "re_a1", "im_a1", "x", "y", "z"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (17, 8)
    omega = np.hypot(omega_S, g)
    on = data[:, 0] <= t1
    # interaction arc: z follows the Rabi formula; free arc: z frozen, rotation about z
    np.testing.assert_allclose(data[on, 7], 1 - 2 * (g / omega) ** 2 * np.sin(omega * data[on, 0]) ** 2, atol=1e-12)
    np.testing.assert_allclose(data[~on, 7], data[~on, 7][0], atol=1e-12)
    final = np.array(doc["final_state"]).view(complex).ravel()
    np.testing.assert_allclose(final, data[-1, 1:5].view(complex), atol=0)


def test_simulate_empty_schedule(tmp_path):
    code, doc = run(tmp_path, "simulate", spin(schedule=[]))
    assert code == 0
    assert doc["final_state"] == [[1.0, 0.0], [0.0, 0.0]]
    lines = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 2


def test_simulate_split_schedule_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _, whole = run(a, "simulate", spin(schedule=[[1, 0.6, 0.0], [0, 0.2, 0.3]]))
    _, split = run(b, "simulate", spin(schedule=[[1, 0.3, 0.0], [1, 0.3, 0.0], [0, 0.2, 0.3]]))
    np.testing.assert_allclose(whole["final_state"], split["final_state"], atol=1e-12)


def test_simulate_explicit_three_level_has_no_bloch(tmp_path):
    rng = np.random.default_rng(3)
    h = rng.normal(size=(3, 3))
    doc = explicit_doc(H_S=(h + h.T) / 2, H_A=PAULI_Z, H_I=kron(np.diag([1.0, 0, -1]), PAULI_Z))
    doc["schedule"] = [[0, 1.0, 0.5]]
    code, _ = run(tmp_path, "simulate", doc)
    assert code == 0
    header = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,re_a0,im_a0,re_a1,im_a1,re_a2,im_a2"


def test_simulate_requires_schedule(tmp_path):
    assert main(["simulate", write(tmp_path, spin()), "--out", str(tmp_path)]) == 2


def test_synthesize_closed_form(tmp_path):
    code, doc = run(tmp_path, "synthesize", spin(g=100.0, target={"theta": np.pi / 4, "phi": np.pi / 2}))
    assert code == 0
    assert doc["method"] == "closed-form"
    assert doc["fidelity"] >= 0.999


def test_synthesize_target_is_initial(tmp_path):
    code, doc = run(tmp_path, "synthesize", spin(target={"theta": 0.0, "phi": 0.0}))
    assert code == 0
    assert doc["schedule"] == [] and doc["fidelity"] == 1.0


def test_synthesize_general_warns_when_uncontrollable(tmp_path):
    doc = explicit_doc(H_I=kron(PAULI_Z, PAULI_Z))
    doc["target"] = {"theta": 0.5, "phi": 0.0}
    doc["synthesis"] = {"max_cycles": 2, "eval_budget": 100}
    code, out = run(tmp_path, "synthesize", doc, "--general")
    assert code != 0
    assert out["warnings"]


def test_validate_spin_preset(tmp_path):
    code, doc = run(tmp_path, "validate", spin())
    assert code == 0
    assert doc["checks"]["worst_infidelity"]["value"] <= 1e-10
    assert doc["checks"]["worst_schmidt_residual"]["value"] <= 1e-10


def test_validate_corrupted_coupling(tmp_path):
    H_I = kron(PAULI_X, PAULI_Z) + 1e-3 * kron(PAULI_X, PAULI_X)
    code, doc = run(tmp_path, "validate", explicit_doc(H_I=H_I))
    assert code != 0
    assert doc["checks"]["worst_schmidt_residual"]["value"] > 1e-9
    assert not doc["checks"]["nondemolition_residual"]["passed"]


def test_exit_status_matches_checks(tmp_path):
    for command, doc in [("check", spin()), ("check", spin(g=0.0)), ("validate", spin())]:
        code, out = run(tmp_path, command, doc)
        assert (code == 0) == all(c["passed"] for c in out["checks"].values()) == out["passed"]
