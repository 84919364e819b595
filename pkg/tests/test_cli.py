import hashlib
import json

import numpy as np
import pytest

from kntest.cli import main, read_csv
from kntest.errors import InvalidDataError


def write(path, X, header=None):
    with open(path, "w") as fh:
        if header:
            fh.write(header + "\n")
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return str(path)


def test_read_csv_header_detection(tmp_path):
    X = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(read_csv(write(tmp_path / "a.csv", X, "x,y")), X)
    np.testing.assert_array_equal(read_csv(write(tmp_path / "b.csv", X)), X)
    (tmp_path / "c.csv").write_text("1,2\n3\n")
    with pytest.raises(InvalidDataError, match="row 2"):
        read_csv(str(tmp_path / "c.csv"))


def test_test_exit_codes_and_report(tmp_path, capsys):
    X = np.random.default_rng(0).standard_normal((80, 2))
    path = write(tmp_path / "x.csv", X)
    before = hashlib.sha256(open(path, "rb").read()).hexdigest()
    code = main(["test", path, "--B", "30", "--seed", "3", "--emit-replications"])
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert code == (1 if doc["reject"] else 0)
    assert len(doc["replications"]) == 30
    assert json.dumps(doc, indent=2, sort_keys=True) + "\n" == out
    assert hashlib.sha256(open(path, "rb").read()).hexdigest() == before
    # deterministic apart from timings
    main(["test", path, "--B", "30", "--seed", "3", "--emit-replications"])
    doc2 = json.loads(capsys.readouterr().out)
    doc.pop("timing_ms"), doc2.pop("timing_ms")
    assert doc == doc2


def test_reject_exit_code(tmp_path, capsys):
    from kntest.synth import gen_mixture

    path = write(tmp_path / "m.csv", gen_mixture("HA1", 2, 300, seed=1))
    assert main(["test", path, "--B", "50"]) == 1


def test_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path / "g.csv", np.ones((3, 2)))
    assert main(["test", bad, "--mode", "gram"]) == 2
    assert "gram matrix must be square" in capsys.readouterr().err
    ok = write(tmp_path / "x.csv", np.random.default_rng(0).standard_normal((20, 2)))
    assert main(["test", ok, "--null-model", "known"]) == 2
    assert main(["test", ok, "--alpha", "1.5"]) == 2
    assert main(["test", ok, "--kernel", "exponential", "--sigma", "1"]) == 2
    assert main(["test", str(tmp_path / "missing.csv")]) == 2
    assert main(["test", ok, "--null-model", "rank:zz"]) == 2
    assert main(["nonsense"]) == 2


def test_known_params(tmp_path, capsys):
    ok = write(tmp_path / "x.csv", np.random.default_rng(0).standard_normal((40, 2)))
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"mean": [0, 0], "covariance": [[1, 0], [0, 1]]}))
    code = main(["test", ok, "--null-model", "known", "--params", str(params), "--B", "20"])
    assert code in (0, 1)
    assert json.loads(capsys.readouterr().out)["model"] == "known"


def test_simulate_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--scenario", "HA1", "--d", "2", "--n", "100", "--seed", "5", "-o", str(a)]) == 0
    main(["simulate", "--scenario", "HA1", "--d", "2", "--n", "100", "--seed", "5", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert read_csv(str(a)).shape == (100, 2)


def test_rank_and_baseline(tmp_path, capsys):
    X = np.outer(np.random.default_rng(1).standard_normal(120), [1.0, -1.0, 0.5])
    path = write(tmp_path / "r.csv", X)
    assert main(["rank", path, "--r-max", "2", "--B", "50", "--alpha", "0.05"]) == 0
    assert json.loads(capsys.readouterr().out)["r_hat"] == 1
    Y = write(tmp_path / "y.csv", np.random.default_rng(2).standard_normal((50, 2)))
    for method in ("hz", "ed", "rp"):
        assert main(["baseline", Y, "--method", method, "--B", "20"]) == 0
        assert json.loads(capsys.readouterr().out)["method"] == method
    assert main(["baseline", Y, "--method", "hz", "--projections", "3"]) == 2


def test_bench_single_replication(capsys):
    assert main(["bench", "--sizes", "30,40", "--B", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["fast_count"] for r in doc["results"]] == [1, 1]
    assert [r["slow_count"] for r in doc["results"]] == [1, 1]


def test_gram_mode_input(tmp_path, capsys):
    X = np.random.default_rng(3).standard_normal((30, 4))
    path = write(tmp_path / "k.csv", X @ X.T)
    assert main(["test", path, "--mode", "gram", "--B", "20"]) in (0, 1)
    assert json.loads(capsys.readouterr().out)["B"] == 20
