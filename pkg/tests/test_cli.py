import contextlib
import io
import json
import os

import pytest

from langchev import ff, liealg, rootdata
from langchev.cli import main

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def run(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_lang_gl1_worked_example():
    code, out = run(["lang", "--group", "GL", "--p", "3", "--e", "1",
                     "--d", "1", "--c", "[[2]]"])
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"]
    assert payload["level"] == "3^(1*2)"
    assert payload["s"] == 2


def test_lang_identity_trivial():
    code, out = run(["lang", "--group", "GL", "--p", "5", "--c",
                     "[[1,0],[0,1]]"])
    assert code == 0
    payload = json.loads(out)
    assert payload["s"] == 1


def test_lang_malformed_matrix():
    code, _ = run(["lang", "--group", "GL", "--p", "3", "--c", "[[bad"])
    assert code == 2


def test_lang_singular_c():
    code, _ = run(["lang", "--group", "GL", "--p", "3", "--c",
                   "[[1,1],[1,1]]"])
    assert code == 2


def test_lang_instance_json_form_group(tmp_path):
    spec = {
        "group": "Sp", "p": 5, "e": 1, "d_or_n": 2, "r": 1,
        "c": [[1, 0], [0, 1]],
    }
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(spec))
    code, out = run(["lang", "--instance", str(path)])
    assert code == 0
    assert json.loads(out)["ok"]


def test_lang_torus():
    code, out = run(["lang", "--group", "Torus", "--p", "3", "--c",
                     "[2, 1]"])
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] and payload["s"] == 2


def test_chevalley_scramble_roundtrip():
    code, out = run(["chevalley", "--type", "A2", "--p", "7", "--scramble",
                     "5", "--seed", "1"])
    assert code == 0
    assert json.loads(out)["verdict"] is True


def test_chevalley_char_guard():
    code, _ = run(["chevalley", "--type", "A2", "--p", "3"])
    assert code == 2


def test_chevalley_unscrambled():
    code, out = run(["chevalley", "--type", "A1", "--p", "5", "--seed",
                     "3"])
    assert code == 0
    assert json.loads(out)["verdict"] is True


def test_chevalley_external_algebra(tmp_path):
    rd = rootdata.build("A2")
    tower = ff.make_tower(7)
    L = liealg.from_root_datum(rd, tower)
    path = tmp_path / "alg.json"
    path.write_text(json.dumps(L.to_json()))
    code, out = run(["chevalley", "--type", "A2", "--algebra", str(path),
                     "--seed", "2"])
    assert code == 0
    assert json.loads(out)["verdict"] is True


def test_chevalley_recognition_failure(tmp_path):
    rd = rootdata.build("A2")
    tower = ff.make_tower(7)
    L = liealg.from_root_datum(rd, tower)
    path = tmp_path / "alg.json"
    path.write_text(json.dumps(L.to_json()))
    code, _ = run(["chevalley", "--type", "B2", "--algebra", str(path),
                   "--seed", "2"])
    assert code == 4


def test_weyl_examples():
    code, out = run(["weyl", "--type", "G2", "--what", "derangements",
                     "--output", "text"])
    assert code == 0 and out.strip() == "1/3"
    code, out = run(["weyl", "--type", "A4", "--what", "qw", "--element",
                     "coxeter", "--output", "text"])
    assert code == 0
    assert [int(c) for c in out.split()] == \
        [1, -1, -1, 0, 0, 2, 0, 0, -1, -1, 1]
    code, out = run(["weyl", "--type", "B2", "--what", "cis", "--element",
                     "subcox", "--output", "text"])
    assert code == 0 and out.strip() == "c=8 c_1=4 c_2=0"


def test_weyl_large_gate():
    code, _ = run(["weyl", "--type", "E7", "--what", "derangements"])
    assert code == 5


def test_weyl_unknown_type():
    code, _ = run(["weyl", "--type", "Z9", "--what", "derangements"])
    assert code == 2


def test_determinism_same_seed():
    a = run(["chevalley", "--type", "A2", "--p", "7", "--scramble", "3",
             "--seed", "11"])
    b = run(["chevalley", "--type", "A2", "--p", "7", "--scramble", "3",
             "--seed", "11"])
    assert a == b
    c = run(["lang", "--group", "GL", "--p", "5", "--c", "[[2]]",
             "--seed", "4"])
    d = run(["lang", "--group", "GL", "--p", "5", "--c", "[[2]]",
             "--seed", "4"])
    assert c == d


def test_env_seed(monkeypatch):
    monkeypatch.setenv("LANGCHEV_SEED", "17")
    a = run(["chevalley", "--type", "A1", "--p", "7"])
    monkeypatch.setenv("LANGCHEV_SEED", "17")
    b = run(["chevalley", "--type", "A1", "--p", "7"])
    assert a == b


@pytest.mark.parametrize("fixture,what,element", [
    ("constants_table.txt", "cis", "subcox"),
    ("qw_coxeter_table.txt", "qw", "coxeter"),
    ("derangements_table.txt", "derangements", None),
])
def test_table_fixtures(fixture, what, element):
    path = os.path.join(FIXTURES, fixture)
    for line in open(path).read().splitlines():
        t, expected = line.split(maxsplit=1)
        argv = ["weyl", "--type", t, "--what", what, "--output", "text"]
        if element:
            argv += ["--element", element]
        code, out = run(argv)
        assert code == 0
        assert out.strip() == expected.strip(), (t, out, expected)


def test_chevalley_bad_algebra_rejected(tmp_path):
    # a Jacobi-violating tensor is an input error, not a recognition one
    data = {"dim": 3, "level": "5^(1*1)",
            "triples": [[0, 1, 0, [1]], [1, 0, 0, [4]],
                        [0, 2, 2, [1]], [2, 0, 2, [4]]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _ = run(["chevalley", "--type", "A1", "--algebra", str(path)])
    assert code == 2


def test_chevalley_budget_flags():
    code, out = run(["chevalley", "--type", "A1", "--p", "5", "--seed",
                     "0", "--toral-factor", "32", "--split-factor", "4"])
    assert code == 0
    assert json.loads(out)["verdict"] is True
