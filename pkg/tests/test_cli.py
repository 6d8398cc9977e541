import csv
import json

import numpy as np
import pytest

from absrank.cdf import cdf_uniform, load_cdf, save_cdf
from absrank.cli import main
from absrank.core import PerformanceMatrix, load_matrix, project, save_matrix


@pytest.fixture
def datasets(tmp_path):
    assert main(["gen-niia", "--out", str(tmp_path)]) == 0
    return tmp_path


def test_gen_niia_writes_csvs_and_manifest(datasets):
    assert load_matrix(datasets / "dataset1.csv").n == 3
    assert load_matrix(datasets / "dataset2.csv").n == 100
    manifest = json.loads((datasets / "manifest.json").read_text())
    assert manifest["command"] == "gen-niia"
    assert manifest["outputs"] == ["dataset1.csv", "dataset2.csv"]


def test_gen_niia_is_byte_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["gen-niia", "--out", str(a)])
    main(["gen-niia", "--out", str(b)])
    for name in ("dataset1.csv", "dataset2.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_npht_table(datasets, capsys):
    assert main(["npht", str(datasets / "dataset1.csv"), "--pairs", "A,B"]) == 0
    out = capsys.readouterr().out
    assert "chi2 = 840" in out and "1.8" in out and "1.2" in out and "B≻A" in out


def test_npht_json_dataset2(datasets, capsys):
    assert main(["npht", str(datasets / "dataset2.csv"), "--pairs", "A,B", "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["friedman_p"] == 0.0 and d["friedman_log10_p"] < -300
    assert d["pairs"][0]["result"] == "A≻B"


def test_bayes_table(datasets, capsys):
    assert main(["bayes", str(datasets / "dataset1.csv"), "--pairs", "A,B"]) == 0
    out = capsys.readouterr().out
    assert "P(A > B) = 0.2 " in out and "B≻A" in out


def test_keep_equals_pre_projected_csv(datasets, tmp_path, capsys):
    full = load_matrix(datasets / "dataset2.csv")
    pre = tmp_path / "pre.csv"
    save_matrix(project(full, ["A", "B", "C1"]), pre)
    for cmd in ("npht", "bayes"):
        main([cmd, str(datasets / "dataset2.csv"), "--keep", "A,B,C1", "--pairs", "A,B", "--json"])
        a = capsys.readouterr().out
        main([cmd, str(pre), "--pairs", "A,B", "--json"])
        assert capsys.readouterr().out == a


def test_niia_check_flags_flip(datasets, capsys):
    rc = main(["niia-check", str(datasets / "dataset2.csv"), "--pair", "A,B", "--subset", "A,B,C1"])
    assert rc == 0
    assert "1 flip(s)" in capsys.readouterr().out


def _problem(tmp_path, name, **kw):
    d = {"label": name, "kind": "sphere", "d": 2, "lo": -1, "hi": 1, "params": {}, "c": 1, "r": 1} | kw
    f = tmp_path / f"{name}.json"
    f.write_text(json.dumps(d))
    return f


def test_sample_then_curve(tmp_path, capsys):
    f = _problem(tmp_path, "sph")
    out = tmp_path / "cdfs"
    assert main(["sample", str(f), "--log2n", "10", "--out", str(out)]) == 0
    samples = json.loads((out / "sph.samples.json").read_text())
    assert set(samples) == {"problem", "region", "cfg", "values"}
    assert len(samples["values"]) == 1024
    v = load_cdf(out / "sph.absrank.json")
    assert v.kind == "empirical"
    capsys.readouterr()
    assert main(["cdf-curve", str(out / "sph.absrank.json"), "--points", "9"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["t", "v"] and len(rows) == 10
    ys = [float(r[1]) for r in rows[1:]]
    assert ys == sorted(ys)


def test_absrank_identity(tmp_path, capsys):
    vals = np.array([[0.1, 0.9], [0.4, 0.2], [0.3, 0.3]])
    M = PerformanceMatrix(("x", "y", "z"), ("p", "q"), vals)
    save_matrix(M, tmp_path / "m.csv")
    cdir = tmp_path / "cdfs"
    cdir.mkdir()
    for p in M.problems:
        save_cdf(cdf_uniform(0.0, 1.0), cdir / f"{p}.absrank.json")
    res = tmp_path / "res"
    rc = main(["absrank", str(tmp_path / "m.csv"), "--cdf-dir", str(cdir), "--out", str(res), "--display", "fraction"])
    assert rc == 0
    assert load_matrix(res / "absrank.csv") == M
    aar = dict(csv.reader((res / "aar.csv").read_text().splitlines()[1:]))
    assert float(aar["z"]) == pytest.approx(0.3)


def test_exit_codes(tmp_path, datasets, capsys):
    assert main(["npht", str(tmp_path / "missing.csv")]) == 3
    assert main(["frobnicate"]) == 2
    assert main(["npht", str(datasets / "dataset1.csv"), "--pairs", "A"]) == 2
    assert main(["npht", str(datasets / "dataset1.csv"), "--pairs", "A,Z"]) == 3
    assert main(["niia-check", str(datasets / "dataset2.csv"), "--pair", "A,B", "--exhaustive"]) == 4
    assert main(["niia-check", str(datasets / "dataset1.csv"), "--pair", "A,B", "--method", "absolute"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("algorithm,p\nA,1\nB,x\n")
    assert main(["npht", str(bad)]) == 3
    err = capsys.readouterr().err
    assert "error" in err


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ABSRANK_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["gen-niia"]) == 0
    assert (tmp_path / "env" / "dataset1.csv").exists()
