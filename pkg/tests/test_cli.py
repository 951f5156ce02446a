import json
import math
import subprocess
import sys

import pytest

from teexplain import fixtures, synth
from teexplain.cli import main
from teexplain.model import dump_model
from teexplain.wcnf import maxsat_brute, read_wcnf, solve_maxsat

from lp_reader import solve_lp


@pytest.fixture
def disease_path(tmp_path):
    path = tmp_path / "disease.json"
    path.write_text(json.dumps(fixtures.DISEASE_DOC))
    return str(path)


@pytest.fixture
def iris_path(tmp_path):
    path = tmp_path / "iris.json"
    path.write_text(json.dumps(fixtures.IRIS_DOC))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def _strip_time(obj):
    if isinstance(obj, dict):
        return {k: _strip_time(v) for k, v in obj.items() if k != "time"}
    return obj


def test_predict(capsys, disease_path):
    rep = report(capsys, "predict", "--model", disease_path, "--instance", "1,65,85")
    assert rep["predicted"] == "high"
    assert rep["weights"] == {"high": 1.0, "low": 0.0}
    # closed domain: boundary values are accepted
    report(capsys, "predict", "--model", disease_path, "--instance", "3,80,150")


def test_arity_mismatch_is_usage_error(capsys, disease_path):
    code, _, err = run(capsys, "predict", "--model", disease_path, "--instance", "65,85")
    assert code == 1 and "3 features" in err


def test_bad_model_is_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "predict", "--model", str(bad), "--instance", "1")[0] == 2
    assert run(capsys, "predict", "--model", str(tmp_path / "none.json"), "--instance", "1")[0] == 2


def test_explain_kinds(capsys, disease_path):
    axp = report(capsys, "explain", "--model", disease_path, "--instance", "1,65,85",
                 "--kind", "axp", "--verify")
    assert [f["name"] for f in axp["features"]] == ["age", "weight"] and axp["length"] == 2
    assert axp["verification"] == "valid, minimal"
    cxp = report(capsys, "explain", "--model", disease_path, "--instance", "1,65,85",
                 "--kind", "cxp", "--verify")
    assert cxp["length"] == 1 and cxp["verification"] == "valid, minimal"
    iaxp = report(capsys, "explain", "--model", disease_path, "--instance", "1,65,85",
                  "--kind", "iaxp")
    assert [f["bounds"] for f in iaxp["features"]] == [[60.0, 80.0], [80.0, 150.0]]
    assert iaxp["coverage_percent"] == pytest.approx(100 * (1 / 3) * (7 / 10))


def test_max_iaxp_and_determinism(capsys, disease_path):
    args = ("max-iaxp", "--model", disease_path, "--instance", "1,65,85", "--verify")
    a, b = report(capsys, *args), report(capsys, *args)
    assert a["maximum"] and a["kind"] == "MaxiAXp"
    assert a["verification"] == "valid, maximum"
    assert a["fsc"] == pytest.approx(math.log(1 / 3) + math.log(7 / 10), abs=1e-9)
    assert _strip_time(a) == _strip_time(b)
    assert json.loads(json.dumps(a)) == a


def test_encodings_agree(capsys, tmp_path):
    for j, (te, point) in enumerate(synth.suite(21, 6)):
        path = tmp_path / f"m{j}.json"
        path.write_text(json.dumps(dump_model(te)))
        inst = ",".join(map(repr, point))
        covs = [report(capsys, "max-iaxp", "--model", str(path), "--instance", inst,
                       "--encoding", enc, "--verify")
                for enc in ("naive", "bounds")]
        assert covs[0]["coverage_percent"] == pytest.approx(covs[1]["coverage_percent"])
        assert covs[0]["verification"] == covs[1]["verification"] == "valid, maximum"


def test_budget_exit_code(capsys, iris_path):
    code, out, _ = run(capsys, "max-iaxp", "--model", iris_path, "--instance",
                       "6,3.5,1.4,0.2", "--max-iter", "1")
    assert code == 3
    assert json.loads(out)["maximum"] is False


def test_data_measure_and_rows(capsys, tmp_path, disease_path):
    data = tmp_path / "train.csv"
    data.write_text("blood,age,weight,risk\n0,30,60,low\n1,65,85,high\n2,70,120,high\n")
    rep = report(capsys, "max-iaxp", "--model", disease_path, "--row", "1", "--data", str(data),
                 "--measure", "data")
    assert rep["query"]["instance"] == [1.0, 65.0, 85.0]
    # age: 2 of 3 rows above 60 -> (2+1)/(3+2)
    assert rep["fsc"] == pytest.approx(math.log(3 / 5) + math.log(3 / 5), abs=1e-9)
    code, _, _ = run(capsys, "max-iaxp", "--model", disease_path, "--instance", "1,65,85",
                     "--measure", "data")
    assert code == 1


def test_export_lp(capsys, disease_path, tmp_path):
    out = tmp_path / "cand.lp"
    code, _, _ = run(capsys, "export", "--model", disease_path, "--instance", "1,65,85",
                     "--what", "lp", "--output", str(out))
    text = out.read_text()
    assert code == 0 and "Maximize" in text and "Binaries" in text
    assert solve_lp(text)[0] == pytest.approx(0.0)


def test_export_wcnf_roundtrip(capsys, disease_path):
    _, text, _ = run(capsys, "export", "--model", disease_path, "--instance", "1,65,85",
                     "--what", "wcnf-candidates", "--seed-singletons", "--scale", "1000000000")
    f = read_wcnf(text, scale=10**9)
    assert float(solve_maxsat(f).cost) == pytest.approx(-(math.log(1 / 3) + math.log(7 / 10)),
                                                       abs=1e-8)
    _, text, _ = run(capsys, "export", "--model", disease_path, "--instance", "1,65,85",
                     "--what", "wcnf-te")
    assert text.startswith("c weighted CNF") and "var 1 = [age < 60.0]" in text
    # one path per tree fires: best score difference is 2 - 1
    assert maxsat_brute(read_wcnf(text, scale=10**6)) == 1


def test_unknown_export_is_usage_error(capsys, disease_path):
    with pytest.raises(SystemExit) as exc:
        main(["export", "--model", disease_path, "--instance", "1,65,85", "--what", "pdf"])
    assert exc.value.code == 1


def test_console_entry_point(disease_path):
    res = subprocess.run([sys.executable, "-m", "teexplain.cli", "predict", "--model",
                          disease_path, "--instance", "1,65,85"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["predicted"] == "high"
