import json
import subprocess
import sys
from fractions import Fraction

import pytest

from cheapreal.cli import main
from cheapreal.parse import parse_cheap

from conftest import INFINITESIMALS, INFINITELY_LARGE, LIMITED


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return [line.split("\t") for line in text.splitlines() if not line.startswith("#")]


def test_eval_omega(capsys):
    code, out, _ = run(capsys, "eval", "omega", "--ranks", "0..3")
    assert code == 0
    assert rows(out) == [["0", "0"], ["1", "1"], ["2", "2"], ["3", "3"]]


def test_eval_shift(capsys):
    _, out, _ = run(capsys, "eval", "shift(omega,1)", "--ranks", "0..2")
    assert [v for _, v in rows(out)] == ["1", "2", "3"]


def test_eval_single_rank(capsys):
    _, out, _ = run(capsys, "eval", "1/(omega+1)", "--rank", "4")
    assert rows(out) == [["4", "1/5"]]


def test_eval_json_input_and_output(capsys, tmp_path):
    tree = parse_cheap("omega^2 - 3*omega").expr.to_json()
    path = tmp_path / "x.json"
    path.write_text(json.dumps(tree))
    code, out, _ = run(capsys, "eval", str(path), "--ranks", "0..4", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [r["value"] for r in data["rows"]] == ["0", "-2", "-2", "0", "4"]
    code, out, _ = run(capsys, "eval", "@" + str(path), "--rank", "5")
    assert rows(out) == [["5", "10"]]


@pytest.mark.parametrize("text", INFINITESIMALS + INFINITELY_LARGE + LIMITED)
def test_printed_expressions_round_trip(capsys, text):
    _, out, _ = run(capsys, "eval", "--rank", "0", "--", text)
    printed = out.splitlines()[0][2:]
    a, b = parse_cheap(text), parse_cheap(printed)
    assert a.prefix(101) == b.prefix(101)
    _, out, _ = run(capsys, "eval", "--rank", "0", "--format", "json", "--", text)
    again = parse_cheap(json.loads(out)["expr"])
    assert again.prefix(101) == a.prefix(101)


def test_printed_witness_round_trips(capsys):
    _, out, _ = run(capsys, "witness", "1/(omega+1)", "2^-omega", "--format", "json")
    data = json.loads(out)
    idx = parse_cheap(data["index"])
    assert [str(idx.at(n)) for n in range(8)] == data["first_components"]


def test_parse_error_position(capsys):
    code, _, err = run(capsys, "eval", "1/(omega+")
    assert code == 2
    assert "parse error" in err and "position 9" in err


def test_malformed_tree(capsys):
    code, _, err = run(capsys, "eval", '{"op": "omega"}')
    assert code == 2 and "invalid expression tree" in err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "1/(omega+1)")
    assert code == 0 and out.startswith("Infinitesimal")
    _, out, _ = run(capsys, "classify", "omega^2", "--format", "json")
    assert json.loads(out)["kind"] == "InfinitelyLarge"
    _, out, _ = run(capsys, "classify", "(-1)^omega")
    assert out.startswith("Limited")


def test_witness_comp_epsilon(capsys):
    code, out, _ = run(capsys, "witness", "1/(omega+1)", "2^-omega")
    assert code == 0
    assert "construction: compEpsilon" in out
    assert "index at ranks 0..7: 0, 1, 3, 7, 15, 31, 63, 127" in out
    assert "validated" in out


def test_witness_reflexive(capsys):
    _, out, _ = run(capsys, "witness", "1/(omega+2)", "1/(omega+2)")
    assert "construction: reflexive" in out
    assert "index at ranks 0..7: 0, 0, 0, 0, 0, 0, 0, 0" in out


def test_witness_none_found(capsys):
    code, out, _ = run(capsys, "witness", "1/2", "2^-omega")
    assert code == 0 and out.strip() == "none found"


def test_real_digits(capsys):
    code, out, _ = run(capsys, "real", "sqrt(2) + 1/3", "-n", "20")
    assert code == 0
    first = out.splitlines()[0]
    q = Fraction(first.split()[0])
    oracle_lo = Fraction(1414213, 10**6) + Fraction(1, 3)
    assert abs(q - oracle_lo) < Fraction(1, 10**5)
    assert first.endswith("± 2^-20")


def test_root_isolated(capsys):
    code, out, _ = run(capsys, "root", "x^2-2 on [1,2]", "--isolated", "-n", "20")
    assert code == 0
    line = [s for s in out.splitlines() if s.startswith("isolated zero")][0]
    assert "1.414213" in line and "± 2^-20" in line
    z = Fraction(line.split("(")[1].rstrip(")"))
    assert abs(z * z - 2) < Fraction(3, 2**20)


def test_root_linear(capsys):
    _, out, _ = run(capsys, "root", "x-1/2 on [0,1]", "-n", "10", "--format", "json")
    data = json.loads(out)
    for side in ("low", "high"):
        assert abs(Fraction(data[side]["point"]) - Fraction(1, 2)) <= Fraction(1, 2**9)
    assert data["low"]["side"] == "LeftComputable"


def test_root_sign_error(capsys):
    code, _, err = run(capsys, "root", "x+1 on [0,1]")
    assert code == 2
    assert "no sign change" in err and "f(0) in [" in err


def test_max(capsys):
    code, out, _ = run(capsys, "max", "x*(1-x) on [0,1]", "-n", "16", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert abs(Fraction(data["max"]) - Fraction(1, 4)) <= Fraction(1, 2**16)


def test_check_pass(capsys):
    code, out, _ = run(capsys, "check", "rice-mul")
    assert code == 0 and out.startswith("rice-mul: PASS")
    code, out, _ = run(capsys, "check", "join", "--format", "json")
    assert code == 0 and json.loads(out)["failure_count"] == 0


def test_check_unknown_suite(capsys):
    code, _, err = run(capsys, "check", "unknown-name")
    assert code == 2
    assert "available" in err and "shift-laws" in err


def test_budget_env(capsys, monkeypatch):
    monkeypatch.setenv("CHEAPREAL_BUDGET", "64")
    _, out, _ = run(capsys, "classify", "1/(omega+1)", "--format", "json")
    small = json.loads(out)
    _, out, _ = run(capsys, "classify", "1/(omega+1)", "--budget", "1000", "--format", "json")
    assert json.loads(out)["checked_up_to"] > small["checked_up_to"]


def test_rejects_nonpositive_precision(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["real", "1/3", "-n", "0"])
    assert exc.value.code == 2


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "cheapreal", "eval", "omega", "--ranks", "0..2"],
                       capture_output=True, text=True, check=False)
    assert p.returncode == 0
    assert p.stdout.splitlines()[1:] == ["0\t0", "1\t1", "2\t2"]
