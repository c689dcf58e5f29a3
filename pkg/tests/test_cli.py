import json

import pytest

from curvgraph.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--degree", "1")
    assert code == 0 and len(out.splitlines()) == 2
    _, out, _ = run(capsys, "enumerate", "--degree", "3", "--connected-black")
    assert len(out.splitlines()) == 5
    _, out, _ = run(capsys, "enumerate", "--degree", "2", "--format", "json")
    rows = json.loads(out)
    assert len(rows) == 8 and {"graph", "e", "g", "autBar"} <= set(rows[0])


def test_degree_cap(capsys, monkeypatch):
    code, _, err = run(capsys, "enumerate", "--degree", "5")
    assert code == 2 and "--allow-large" in err
    monkeypatch.setenv("CURVGRAPH_MAX_DEGREE", "1")
    code, _, _ = run(capsys, "enumerate", "--degree", "2")
    assert code == 2


def test_dims(capsys):
    code, out, _ = run(capsys, "dims", "--format", "json")
    rows = json.loads(out)
    assert [r["stableDim"] for r in rows] == [1, 1, 3, 8, 26]
    assert [r["generators"] for r in rows] == [None, 1, 2, 5, 15]
    assert rows[1]["classes"] == 2


def test_eval_builtins(capsys):
    code, out, _ = run(capsys, "eval", "--poly", "pf:2", "--model", "constant m=4 c=1", "--format", "json")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(3)
    model = '{"type":"nk_random","m":5,"terms":3,"seed":42}'
    _, out, _ = run(capsys, "eval", "--poly", "theta", "--model", model, "--format", "json",
                    "--strategy", "naive")
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(-2 * rep["kappa"])


def test_eval_poly_file(capsys, tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("# theta squared minus twice the square\n1 * c=[[0,1],[2,3]];r=[[0,1],[2,3]]\n"
                 "-2 * c=[[0,1,2,3]];r=[[0,1],[2,3]]\n")
    m = tmp_path / "m.json"
    m.write_text('{"type":"constant","m":4,"c":1}')
    code, out, _ = run(capsys, "eval", "--poly", str(f), "--model", str(m), "--format", "json")
    # theta = -24, Q_par = 8 |Ric|^2 = 8*18
    assert json.loads(out)["value"] == pytest.approx(576 - 2 * 144)


def test_eval_parse_error(capsys):
    code, _, err = run(capsys, "eval", "--poly", "1 * c=[[0,1]];r=[[0,0]]", "--model", "constant m=3")
    assert code == 2 and "line 1" in err


def test_delta_and_show(capsys):
    code, out, _ = run(capsys, "delta", "--poly", "sq-cross")
    assert code == 0 and "(12) * c=[[0,1]];r=[[0,1]]" in out
    _, out, _ = run(capsys, "show", "--poly", "psi0:2", "--reduce")
    assert "-1/4 * c=[[0,1,2,3]];r=[[0,2],[1,3]]" in out
    _, out, _ = run(capsys, "show", "--poly", "g3.5", "--format", "json")
    assert json.loads(out)[0]["graph"] == "c=[[0,1,2,3,4,5]];r=[[0,3],[1,4],[2,5]]"


def test_ihx_dump(capsys):
    code, out, _ = run(capsys, "ihx", "dump", "--degree", "1")
    assert code == 0 and "2 * c=[[0,1]];r=[[0,1]]" in out


def test_verify(capsys):
    code, out, err = run(capsys, "verify", "gauss-bonnet", "--stable")
    rep = json.loads(out)
    assert code == 0 and rep["overall"] and "wallTime" not in rep
    assert "gauss-bonnet: 4/4 passed" in err
    code2, out2, _ = run(capsys, "verify", "gauss-bonnet", "--stable")
    assert out2 == out


def test_verify_tolerance_override(capsys):
    code, out, _ = run(capsys, "verify", "cubic-lemma", "--tolerance", "1e-30")
    assert code == 1
    assert not json.loads(out)["overall"]


def test_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "everything")
    assert code == 2 and "unknown suite" in err
