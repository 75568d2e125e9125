import csv
import io
import json

import numpy as np
import pytest

from opfield import cli
from opfield.fieldcore import ParameterSpace, random_operator_field
from opfield.io import (
    ScenarioError,
    bundled_fixtures_path,
    complex_to_json,
    emit_report,
    load_kernel,
    load_scenario,
    parse_complex_array,
)
from opfield.schatten import theta_array
from opfield.verify import (
    CheckRecord,
    VerificationReport,
    run_suite,
    weyl_product_violation,
    weyl_sum_violation,
)

FIXTURES = str(bundled_fixtures_path())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fixture_file_contents():
    sc = load_scenario(FIXTURES)
    np.testing.assert_array_equal(sc.operator("F1").matrices, [np.diag([3, 1]), np.diag([2, 2])])
    np.testing.assert_array_equal(sc.operator("F2").matrices[0], [[0, 3], [0, 4]])
    assert sc.kernel("F4").quad.weights.tolist() == [0.5, 0.5]


def test_complex_round_trip():
    a = np.array([[1 + 2j, -3j], [0.5, 0]])
    np.testing.assert_array_equal(parse_complex_array(complex_to_json(a), (2, 2), "x"), a)
    np.testing.assert_array_equal(parse_complex_array([1, 2], (2,), "x"), [1, 2])
    with pytest.raises(ScenarioError, match="x"):
        parse_complex_array([[1, 2, 3]], (2,), "x")


def test_malformed_scenarios(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError, match="line 1"):
        load_scenario(bad)
    with pytest.raises(ScenarioError, match="fiber_dim"):
        load_scenario({"space": {"points": [0]}})
    with pytest.raises(ScenarioError, match="operators.A"):
        load_scenario({"space": {"points": [0, 1]}, "fiber_dim": 2, "operators": {"A": [[1, 2]]}})
    with pytest.raises(ScenarioError, match="tolerances.identity"):
        load_scenario({"space": {"points": [0]}, "fiber_dim": 1, "tolerances": {"identity": -1}})
    with pytest.raises(ScenarioError, match="kernel"):
        load_kernel({"quadrature": {"nodes": [0], "weights": [1]}, "kernel": [[["a"]]]})


def test_kernel_file_reference(tmp_path):
    kern = {"quadrature": {"nodes": [0, 1], "weights": [0.5, 0.5]},
            "kernel": np.ones((2, 2, 1, 2)).tolist()}
    (tmp_path / "k.json").write_text(json.dumps(kern))
    sc = {"space": {"points": ["a"]}, "fiber_dim": 1, "kernels": {"K": "k.json"}}
    (tmp_path / "s.json").write_text(json.dumps(sc))
    w = load_scenario(tmp_path / "s.json").kernel("K")
    np.testing.assert_array_equal(w.values, np.full((2, 2, 1), 1 + 1j))


def test_norm_command(capsys):
    code, out, _ = run(capsys, "norm", FIXTURES, "F1", "--p", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["norm"] == pytest.approx(np.sqrt(10), rel=1e-15)
    assert all(c["status"] == "pass" for c in rep["checks"])


def test_trace_command(capsys):
    code, out, _ = run(capsys, "trace", FIXTURES, "F2")
    rep = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(rep["trace_field"], [[4, 0], [4, 0]], atol=1e-14)


@pytest.mark.parametrize("argv", [
    ["decompose", FIXTURES, "F1"],
    ["hs", FIXTURES, "F1", "F2"],
    ["kernel", FIXTURES, "F4", "--adjoint"],
    ["kernel", FIXTURES, "F4", "--approx", "2"],
    ["dual", FIXTURES, "F1", "--p", "3"],
    ["dual", FIXTURES, "F2", "--p", "0"],
])
def test_commands_pass(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["command"] == argv[0]


def test_kernel_command_theta(capsys):
    _, out, _ = run(capsys, "kernel", FIXTURES, "F4")
    assert json.loads(out)["theta"][0][0] ** 2 == pytest.approx(2.5, abs=1e-12)


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "norm", str(tmp_path / "missing.json"), "F1")
    assert code == 1 and "missing.json" in err
    code, _, err = run(capsys, "norm", FIXTURES, "NOPE")
    assert code == 1 and "NOPE" in err
    code, _, _ = run(capsys, "dual", FIXTURES, "F1", "--p", "inf")
    assert code == 1


def test_failing_check_exit_code(capsys):
    code, out, _ = run(capsys, "decompose", FIXTURES, "F2", "--tol", "1e-30")
    rep = json.loads(out)
    assert code == 2
    assert any(c["status"] == "fail" for c in rep["checks"])


def test_verify_bundled(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "1", "--trials", "20")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    names = [c["name"] for c in rep["checks"]]
    assert "fixture:F4:kernel" in names and "weyl_sum" in names


def test_verify_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "verify", "--seed", "3", "--trials", "2", "--out", str(a))[0] == 0
    assert run(capsys, "verify", "--seed", "3", "--trials", "2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_outputs(capsys):
    _, out, _ = run(capsys, "trace", FIXTURES, "F2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["point", "trace_re", "trace_im"]
    assert [r[0] for r in rows[1:]] == ["t1", "t2"]
    assert float(rows[1][1]) == pytest.approx(4)
    rep = run_suite(seed=0, trials=1).as_dict()
    rows = list(csv.reader(io.StringIO(emit_report(rep, "csv"))))
    assert rows[0][:3] == ["name", "reference", "status"]
    assert len(rows) == len(rep["checks"]) + 1


def test_empty_and_single_reports():
    assert json.loads(emit_report({}, "json")) == {}
    empty = VerificationReport(0, 0).as_dict()
    assert json.loads(emit_report(empty)) == {"seed": 0, "trials": 0, "status": "pass", "checks": []}
    one = VerificationReport(0, 1, [CheckRecord("c", "x = x", 0.0, 1e-10)]).as_dict()
    assert [c["status"] for c in one["checks"]] == ["pass"]


def test_corrupted_weyl_fails():
    rng = np.random.default_rng(7)
    sp = ParameterSpace.range(3)
    u, v = random_operator_field(sp, 4, rng), random_operator_field(sp, 4, rng)
    tu, tv = theta_array(u), theta_array(v)
    assert weyl_sum_violation(tu, tv, theta_array(u + v)) == 0
    assert weyl_product_violation(tu, tv, theta_array(u @ v)) == 0
    bad = theta_array(u + v).copy()
    bad[0] += 1.0 + tu[0] + tv[0]
    viol = weyl_sum_violation(tu, tv, bad)
    rec = CheckRecord("weyl_sum", "theta_{2n-1}(u+v) <= theta_n(u) + theta_n(v)", viol, 1e-9)
    assert rec.status == "fail" and rec.max_violation > rec.tolerance
