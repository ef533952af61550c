import io
import json
import os
import subprocess
import sys

import pytest
from gmpy2 import mpq

from quantum3d.cli import main
from quantum3d.definition import DefinitionError, parse_definition, parse_params
from quantum3d.kernel import ParamPoly
from quantum3d.quantizer import BialgebraSpec, first_order_constraints

V = ParamPoly.var


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(out):
    lines = [json.loads(line) for line in out.splitlines()]
    return lines[0], lines[1:-1], lines[-1]


def write(tmp_path, text, name="case.json"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# -- definitions -------------------------------------------------------------------------------

def test_preset_reference():
    d = parse_definition('{"preset": "2.1.1", "N": 6}')
    assert d.preset == "2.1.1" and d.order == 6 and d.constants == {}


def test_abelian_definition():
    d = parse_definition('{"N": 2, "rho": "0"}')
    assert d.order == 2 and d.is_concrete()
    assert all(v.is_zero() for v in d.constants.values()) and len(d.constants) == 9


def test_constraint_consistent_definition():
    d = parse_definition('{"c2": "1/3", "b3": "-2/3", "rho": "2", "N": 6}')
    assert d.constants["c2"] == ParamPoly.const(mpq(1, 3))
    spec = BialgebraSpec(d.constants, d.rho)
    assert not first_order_constraints(spec).equations
    # the generic polynomials, evaluated at this point
    env = {k: v.constant_value() for k, v in d.constants.items()} | {"rho": mpq(2)}
    generic = [V("b2") * (1 - V("rho")), V("c3") * (1 - V("rho")), V("b1") + V("rho") * V("a2"),
               V("a3") - V("rho") * V("c1"), V("b3") + V("rho") * V("c2"),
               (1 - V("rho")) * (V("a2") * V("c1") * (1 + V("rho")) - V("a1") * V("c2"))]
    assert all(p.substitute(env).is_zero() for p in generic)


def test_symbolic_values():
    d = parse_definition('{"c2": "c2", "b3": "-1", "rho": "rho", "N": 3}')
    assert d.constants["c2"] == V("c2") and d.rho == V("rho")
    assert not d.is_concrete()


def test_order_override():
    assert parse_definition('{"rho": "1"}', order_override=4).order == 4


@pytest.mark.parametrize("text, fragment", [
    ('{"N": 4,\n "rho": "1",\n "c2": "1/0"}', "field 'c2' (line 3): malformed rational '1/0'"),
    ('{"N": 4, "rho": "1",\n "zeta": 1}', "field 'zeta' (line 2): unknown field"),
    ('{"rho": "1"}', "missing required field 'N'"),
    ('{"N": 1, "rho": "1"}', "field 'N' (line 1): truncation order must be at least 2, got 1"),
    ('{"N": 4}', "missing required field 'rho'"),
    ('{"N": "4", "rho": "1"}', "truncation order must be an integer"),
    ('{"N": 4, "rho": 0.5}', "field 'rho' (line 1): expected a rational string"),
    ('{"N": 4, "rho": "1", "coproduct": "braided"}', "field 'coproduct'"),
    ('{"N": 4, "rho": "1", "r_matrix": {"AA": "1"}}', "field 'r_matrix'"),
    ('{"preset": "2.1.1", "N": 4, "c2": "1"}', "structure constants come from the preset"),
    ('{"N": 4,\n\n "rho": "1" "c2": 1}', "line 3: invalid JSON"),
    ('[1, 2]', "must be a JSON object"),
])
def test_definition_errors_name_the_problem(text, fragment):
    with pytest.raises(DefinitionError) as exc:
        parse_definition(text)
    assert fragment in str(exc.value)


def test_parse_params():
    assert parse_params("rho=2/3, c1=-1") == {"rho": mpq(2, 3), "c1": mpq(-1)}
    assert parse_params(None) == {}
    with pytest.raises(DefinitionError):
        parse_params("rho")
    with pytest.raises(DefinitionError):
        parse_params("rho=x")


# -- dispatch -------------------------------------------------------------------------------------

def test_verify_221(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "2.2.1", "--order", "6")
    assert code == 0
    assert out.splitlines()[0] == "[PASS] verify 2.2.1 (N=6)"
    assert out.rstrip().endswith("verify: 1/1 passed")


def test_verify_abelian(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", write(tmp_path, '{"N": 2, "rho": "2", "name": "abelian"}'),
                       "--format", "machine")
    assert code == 0
    header, records, summary = machine(out)
    assert header == {"command": "verify", "format": "quantum3d-report", "version": 1}
    assert records[0]["name"] == "abelian" and records[0]["status"] == "pass"
    assert summary["exit_code"] == 0


def test_rmatrix_111_expected_infeasible(capsys):
    code, out, _ = run(capsys, "rmatrix", "--preset", "1.1.1")
    assert code == 0
    assert "non-coboundary: infeasible" in out


def test_machine_report_shape(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "2.1.1", "-N", "3", "--format", "machine")
    _, records, summary = machine(out)
    assert [c["name"] for c in records[0]["checks"]] == [
        "coassociativity", "counit", "homomorphism", "sigma_tilde", "antipode"]
    assert summary == {"error": 0, "exit_code": 0, "fail": 0, "kind": "summary", "pass": 1, "status": "pass"}


def test_rationals_travel_as_strings(capsys):
    code, out, _ = run(capsys, "quantize", "--preset", "family.2.1", "--params", "c1=2/3", "-N", "2",
                       "--format", "machine")
    assert code == 0
    rec = machine(out)[1][0]
    assert rec["params"]["c1"] == "2/3"
    assert "." not in json.dumps(rec["params"])


def test_quantize_preset_compares_with_catalog(capsys):
    code, out, _ = run(capsys, "quantize", "--preset", "family.1.1", "-N", "4", "--format", "machine")
    rec = machine(out)[1][0]
    assert code == 0 and rec["catalog_match"] is True
    # the top order lacks the next-order equations that fix the rest
    assert rec["freedom"] == {"2": 3, "4": 6}


def test_quantize_violating_definition_is_a_failure(capsys, tmp_path):
    code, out, _ = run(capsys, "quantize", write(tmp_path, '{"N": 4, "rho": "2", "c1": "1"}'))
    assert code == 1
    assert "a3 - 2*c1 = 0" in out


def test_symbolic_definition_reports_constraints(capsys, tmp_path):
    text = '{"N": 4, "rho": "rho", "c2": "c2", "b3": "b3"}'
    code, out, _ = run(capsys, "quantize", write(tmp_path, text), "--format", "machine")
    rec = machine(out)[1][0]
    assert code == 0
    # only b3 + rho*c2 survives once the other constants vanish
    assert rec["constraints"] == ["c2*rho + b3"]


def test_classify_reports_jacobson_type(capsys):
    code, out, _ = run(capsys, "classify", "--preset", "3.2.1", "--format", "machine")
    rec = machine(out)[1][0]
    assert code == 0 and rec["jacobson"] == "III_nilshift"
    assert rec["cocycle"] is True and rec["coboundary"] == "non-coboundary: infeasible"


def test_transform_cambio11(capsys):
    code, out, _ = run(capsys, "transform", "--preset", "family.1.1", "--params", "c1=2,c2=1,a2=3,rho=2",
                       "--cambio11", "--expect", "1.1.1", "-N", "4", "--format", "machine")
    rec = machine(out)[1][0]
    assert code == 0
    assert rec["expected_match"] is True and rec["coproduct_invariant"] is True


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog", "--format", "machine")
    names = [r["name"] for r in machine(out)[1]]
    assert code == 0 and "2.2.2.4" in names and "family.3.2" in names and names == sorted(names)


# -- exit codes and errors ---------------------------------------------------------------------------

def test_failed_check_exits_one(capsys, tmp_path):
    path = write(tmp_path, '{"preset": "2.1.1", "N": 3, "coproduct": "primitive"}')
    code, out, _ = run(capsys, "verify", path)
    assert code == 1
    assert out.splitlines()[0].startswith("[FAIL]")
    # the table is even in z; the z^2 part of [B,C] is the first non-primitive term
    assert "homomorphism: FAILED from z^2 ([B,C])" in out


def test_unknown_preset_exits_two(capsys):
    code, out, err = run(capsys, "verify", "--preset", "9.9.9")
    assert code == 2 and out == ""
    assert err.startswith("quantum3d: error:") and "9.9.9" in err


def test_unknown_command_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["deform"])
    assert exc.value.code == 2


def test_bad_definition_file_exits_two(capsys, tmp_path):
    code, _, err = run(capsys, "verify", write(tmp_path, '{"N": 4,\n "rho": "1",\n "c2": "x/y"}'))
    assert code == 2
    assert "field 'c2' (line 3)" in err


def test_missing_file_exits_two(capsys, tmp_path):
    code, _, err = run(capsys, "verify", str(tmp_path / "absent.json"))
    assert code == 2 and "cannot read" in err


def test_no_target_exits_two(capsys):
    code, _, err = run(capsys, "verify")
    assert code == 2


def test_stdin_definition(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO('{"preset": "2.1.1", "N": 3}'))
    code, out, _ = run(capsys, "verify", "-")
    assert code == 0 and "[PASS] verify 2.1.1 (N=3)" in out


# -- determinism ---------------------------------------------------------------------------------------

ARGS = ["rmatrix", "--preset", "all", "-N", "2", "--format", "machine"]


def test_machine_output_is_byte_identical(capsys):
    first = run(capsys, *ARGS)
    second = run(capsys, *ARGS)
    assert first == second
    names = [r["name"] for r in machine(first[1])[1]]
    assert names == sorted(names) and len(names) == 16


def test_parallel_batch_matches_sequential(capsys):
    seq = run(capsys, *ARGS)
    par = run(capsys, *ARGS, "--jobs", "3")
    assert seq == par


def test_separate_processes_agree():
    env = dict(os.environ, PYTHONHASHSEED="random")
    cmd = [sys.executable, "-m", "quantum3d", "verify", "--preset", "3.2.4", "--preset", "1.2.1",
           "-N", "3", "--format", "machine"]
    a = subprocess.run(cmd, capture_output=True, env=env, check=False)
    b = subprocess.run(cmd, capture_output=True, env=dict(env, PYTHONHASHSEED="12345"), check=False)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
