import json

import pytest

from segal_cobar import cli
from segal_cobar.ring_linear import QQ, Complex, FormalSum, Report, to_json


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    return [line for line in out.splitlines() if line and not line.startswith("#")]


@pytest.mark.parametrize("r, n", [(1, 0), (3, 4), (4, 26)])
def test_trees_rows(capsys, r, n):
    code, out, _ = run(capsys, "trees", str(r), "--reduced")
    assert code == 0
    assert len(rows(out)) == n
    code, out, _ = run(capsys, "trees", str(r), "--reduced", "--format", "json")
    assert json.loads(out)["count"] == n


def test_trees_csv_and_bad_arity(capsys):
    code, out, _ = run(capsys, "trees", "3", "--reduced", "--format", "csv")
    assert out.splitlines()[0] == "tree,vertices"
    assert "(1 2 3),1" in out.splitlines()
    code, _, err = run(capsys, "trees", "0", "--reduced")
    assert code == 2 and "arity" in err


def test_usage_errors(capsys):
    assert run(capsys, "verify", "nothing")[0] == 2
    assert run(capsys, "verify", "be", "--arity", "0")[0] == 2
    assert run(capsys, "trees", "3", "--ring", "r7")[0] == 2
    assert run(capsys, "verify", "w", "--example", "solver-f2")[0] == 2
    assert run(capsys)[0] == 2


def test_verify_be(capsys):
    code, out, _ = run(capsys, "verify", "be", "--arity", "3", "--deg", "2", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["ok"]
    names = [c["name"] for c in data["reports"][0]["checks"]]
    assert "diagonal is an operad morphism" in names
    assert all(c["count"] > 0 for c in data["reports"][0]["checks"])


def test_verify_cubical_over_f2(capsys):
    code, out, _ = run(capsys, "verify", "cubical", "--k", "2", "--ring", "f2", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "report,check,passed,count"
    assert all(line.split(",")[-2] == "True" for line in out.splitlines()[1:])


def test_verify_cobar_homology_table(capsys):
    code, out, _ = run(capsys, "verify", "cobar", "--example", "com", "--arity", "4", "--ring", "q", "--homology")
    assert code == 0
    # (n-1)! classes in the top degree of arity n
    assert "arity 3: {-2: 2}" in out
    assert "arity 4: {-3: 6}" in out
    assert out.splitlines()[-1].startswith("PASS")


def test_failure_exits_one_with_witnesses(capsys, monkeypatch):
    def broken(name, args):
        rep = Report("broken")
        rep.add("an identity", 3, ["witness x"])
        return rep
    monkeypatch.setattr(cli, "run_item", broken)
    code, out, _ = run(capsys, "verify", "be")
    assert code == 1
    assert "witness x" in out and out.splitlines()[-1].startswith("FAIL")


def test_homology_examples(capsys):
    assert run(capsys, "homology", "--complex", "cobar", "--arity", "3") == (0, "{-2: 2}\n", "")
    assert run(capsys, "homology", "--complex", "treesq", "--source", "((1 2) (3 4))",
               "--target", "(1 2 3 4)")[1] == "{0: 1}\n"
    assert run(capsys, "homology", "--complex", "zero")[1] == "{}\n"
    code, out, _ = run(capsys, "homology", "--complex", "zero", "--format", "csv")
    assert out == "degree,rank\n"
    code, out, _ = run(capsys, "homology", "--complex", "w", "--arity", "4", "--format", "json")
    assert json.loads(out)["ranks"] == {"0": 1}


def test_homology_rejects_the_integers(capsys):
    code, _, err = run(capsys, "homology", "--ring", "z")
    assert code == 2 and "field" in err


def test_homology_of_a_json_file(capsys, tmp_path):
    c = Complex(QQ, {0: ["a", "b"], 1: ["c"]},
                lambda lab: FormalSum(QQ, {"a": 1, "b": -1}) if lab == "c" else FormalSum(QQ))
    path = tmp_path / "c.json"
    path.write_text(to_json(c))
    assert run(capsys, "homology", str(path))[1] == "{0: 1}\n"
    assert run(capsys, "homology", str(path), "--range", "1:3")[1] == "{}\n"
    assert run(capsys, "homology", str(tmp_path / "missing.json"))[0] == 2


def test_out_and_determinism(capsys, tmp_path, monkeypatch):
    target = tmp_path / "report.json"
    argv = ["verify", "segal", "--example", "as-operad", "--format", "json", "--seed", "7"]
    assert run(capsys, *argv, "--out", str(target)) == (0, "", "")
    first = target.read_text()
    assert json.loads(first)["seed"] == 7
    monkeypatch.setenv("SEGAL_COBAR_THREADS", "3")
    assert run(capsys, *argv)[1] == first
    monkeypatch.setenv("SEGAL_COBAR_THREADS", "0")
    assert run(capsys, *argv)[0] == 2
