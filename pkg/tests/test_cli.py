import json
import subprocess
import sys

import pytest

from moorecalc.cli import SCHEMA, main, run


def _json(capsys, argv):
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


def test_hh_example(capsys):
    code, rep, _ = _json(capsys, ["hh", "--ring", "Q", "--d-parity", "odd", "--w", "t^6", "--order", "8"])
    assert code == 0
    assert rep["result"]["free_rank"] == 2
    assert set(rep) == {"schema", "command", "inputs", "trusted_order", "result"}
    assert rep["schema"] == SCHEMA and rep["command"] == "hh"
    assert rep["inputs"]["w"] == "t^6" and "format" not in rep["inputs"]


def test_normal_form_example(capsys):
    code, rep, _ = _json(capsys, ["normal-form", "--ring", "Q", "--v", "t^2", "--w", "0"])
    assert code == 0
    assert rep["result"]["gauge"] == {"G": "(-1/2)*t", "F": "t"}
    assert rep["result"]["u"] == "(1/4)*t^2"


def test_trivialize_char2_example(capsys):
    code, rep, _ = _json(capsys, ["trivialize", "--ring", "F2", "--even", "--jet", "m2: t^2 dtau",
                                  "--max-order", "4"])
    assert code == 1
    assert rep["result"]["trivial"] is False
    assert rep["result"]["stuck"]["k"] == 2


def test_reports_are_byte_stable(capsys):
    argv = ["classify", "--ring", "Q<e>", "--v", "e t^2", "--w", "e t^2"]
    _, _, a = _json(capsys, argv)
    _, _, b = _json(capsys, argv)
    assert a == b


@pytest.mark.parametrize("argv, code", [
    (["check-structure", "--v", "t^2", "--w", "t^4"], 0),
    (["check-structure", "--odd", "--derivation", "(tau^2 + tau*t)*dtau + (tau*t + t*tau)*dt"], 1),
    (["conjugate", "--v", "t^2", "--w", "t^4", "--G", "t + 2t^3", "--F", "t + t^3"], 0),
    (["conjugate", "--u", "t^3", "--F", "t + t^2"], 0),
    (["hh", "--trivial", "--order", "6"], 0),
    (["hh", "--ring", "Z", "--w", "t^4", "--order", "3"], 1),
    (["hh", "--ring", "Z", "--w", "t^4", "--order", "3", "--no-hypotheses", "--quotient"], 0),
    (["deform-check", "--even", "--jet", "m1: t^2 dt"], 0),
    (["deform-check", "--odd", "--jet", "m1: t dtau"], 1),
    (["obstruction", "--even", "--jet", "m1: t^2 dt"], 1),
    (["obstruction", "--even", "--jet", "m1: t^2 dtau"], 0),
    (["integrate", "--even", "--phi", "t dt", "--jet-order", "3"], 0),
    (["integrate", "--ring", "F2", "--even", "--phi", "t dt"], 1),
    (["classify", "--ring", "Q[x;M=2]", "--u", "x t + x^2 t^2"], 0),
    (["verify-equivalence", "--v", "t^2", "--G=-t/2", "--w2", "t^2/4"], 0),
    (["verify-equivalence", "--v", "t^2", "--w2", "t^2/4"], 1),
    (["hh", "--w", "t^"], 2),
    (["hh", "--ring", "Q[[x]]", "--w", "t^2"], 2),
    (["conjugate", "--even", "--v", "t^2"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, rep, _ = _json(capsys, argv)
    assert got == code, rep["result"]
    if code == 2:
        assert "error" in rep["result"]


def test_argparse_errors(capsys):
    assert main(["hh", "--bogus"]) == 2
    assert main(["hh", "--odd", "--even"]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_text_format(capsys):
    assert main(["normal-form", "--v", "t^2", "--w", "t^4"]) == 0
    out = capsys.readouterr().out
    assert "moorecalc.report/1" in out and "u:" in out


def test_run_returns_report():
    code, report, fmt = run(["hh", "--trivial", "--order", "4", "--format", "json"])
    assert code == 0 and fmt == "json"
    assert report["result"]["free_rank"] == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "moorecalc", "normal-form", "--v", "t^2", "--w", "0",
                           "--format", "json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["u"] == "(1/4)*t^2"
