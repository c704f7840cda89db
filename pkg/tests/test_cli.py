import json
import shutil
import subprocess

import pytest

from xpd.axioms import BUNDLED_PROOF
from xpd.cli import main
from xpd.semantics import Evaluator, parse_tree
from xpd.ast import parse_node


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sat_writes_verified_model(tmp_path, capsys):
    out_file = tmp_path / "out.tree"
    code, out, _ = run(capsys, "sat", "--fragment", "eq", "--alphabet", "a,b",
                       "--expr", "<down[a]/down[b] = eps>", "--emit-model", str(out_file))
    assert code == 0 and out.startswith("SAT")
    t = parse_tree(out_file.read_text(), ["a", "b"])
    assert Evaluator(t).holds(t.root, parse_node("<down[a]/down[b] = eps>", ["a", "b"]))


def test_equiv_negated_label(capsys):
    code, out, _ = run(capsys, "equiv", "--fragment", "eq", "--alphabet", "a,b,c",
                       "!a", "(b & <eps=eps>) | (c & <eps=eps>)")
    assert code == 0 and out.strip() == "EQUIV"


def test_check_bundled_proof(tmp_path, capsys):
    f = tmp_path / "proof.txt"
    f.write_text(BUNDLED_PROOF)
    code, out, _ = run(capsys, "check-proof", str(f))
    assert code == 0 and out.strip() == "accepted"


def test_rejected_proof(tmp_path, capsys):
    f = tmp_path / "proof.txt"
    f.write_text("alphabet: a,b\nfragment: eq\ngoal: a == b\n1. a == b by IsAx5.1\n")
    code, out, _ = run(capsys, "check-proof", str(f))
    assert code == 1 and "rejected" in out


@pytest.mark.parametrize("argv, code", [
    (["sat", "--alphabet", "a", "a & !a"], 1),
    (["sat", "--alphabet", "a", "a &"], 2),
    (["sat", "a"], 2),
    (["sat", "--fragment", "eq", "--alphabet", "a", "<down != eps>"], 2),
    (["frobnicate"], 2),
    (["model", "--alphabet", "a", "a"], 2),
    (["equiv", "--alphabet", "a,b", "a", "b"], 1),
    (["equiv", "--alphabet", "a,b", "a", "down"], 2),
    (["sat", "--alphabet", "a", "--level-cap", "1", "--max-nodes", "2", "<down/down>"], 3),
    (["oracle-sat", "--alphabet", "a", "--max-nodes", "2", "<down != down>"], 1),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_eval(tmp_path, capsys):
    f = tmp_path / "t.tree"
    f.write_text("(a 0 (a 0 (b 1)) (b 1))")
    code, out, _ = run(capsys, "eval", "--alphabet", "a,b", "--tree", str(f), "<down[a]/down[b] = eps>")
    assert code == 1 and out.strip() == "false"
    code, out, _ = run(capsys, "eval", "--alphabet", "a,b", "--tree", str(f), "--at", "0", "<down[b]>")
    assert code == 0 and out.strip() == "true"
    assert run(capsys, "eval", "--alphabet", "a,b", "--tree", str(f), "--at", "7", "a")[0] == 2


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", "--fragment", "eq", "--alphabet", "a,b",
                       "<[a]/down[a] = down[b]> & !<eps = down[a]>")
    assert code == 0 and out.startswith("2 disjuncts")
    code, out, _ = run(capsys, "normalize", "--alphabet", "a,b", "down")
    assert out.startswith("2 disjuncts")


def test_parse(capsys):
    code, out, _ = run(capsys, "parse", "--alphabet", "a,b", "down[a] + eps")
    assert code == 0 and out.splitlines()[:2] == ["down/[a] + eps", "sort: path"]


@pytest.mark.parametrize("argv", [
    ["sat", "--alphabet", "a,b", "<down != down>"],
    ["equiv", "--alphabet", "a,b", "a", "b"],
    ["equiv", "--alphabet", "a,b", "down/[a]", "down"],
    ["oracle-sat", "--alphabet", "a", "<down != down>"],
])
def test_json_matches_text(capsys, argv):
    code_t, text, _ = run(capsys, *argv)
    code_j, js, _ = run(capsys, *argv, "--json")
    data = json.loads(js)
    assert code_t == code_j
    assert text.splitlines()[0] == data["verdict"]
    for key in ("model", "tree"):
        if key in data:
            assert data[key] in text


def test_fuzz_and_cross_check_are_deterministic(capsys):
    a = run(capsys, "fuzz-axioms", "--alphabet", "a,b", "--trees", "10", "--seed", "3")
    b = run(capsys, "fuzz-axioms", "--alphabet", "a,b", "--trees", "10", "--seed", "3")
    assert a == b and a[0] == 0
    c = run(capsys, "cross-check", "--alphabet", "a,b", "--fragment", "eq", "--fuzzed", "10")
    assert c[0] == 0 and "0 disagreements" in c[1]


@pytest.mark.skipif(shutil.which("xpd") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["xpd", "sat", "--alphabet", "a", "<eps != eps>"], capture_output=True, text=True)
    assert r.returncode == 1 and r.stdout.strip() == "UNSAT"
