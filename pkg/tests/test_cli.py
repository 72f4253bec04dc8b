import json
import math

import numpy as np
import pytest

from ranlat.cli import (
    EXIT_CAPACITY,
    EXIT_OK,
    EXIT_USAGE,
    closest_prime,
    main,
    parse_gamma_spec,
    parse_k_range,
    read_vector_file,
)
from ranlat.kernels import zeta
from ranlat.primes import crt_reconstruct


def test_parse_gamma_spec():
    assert parse_gamma_spec("poly:2", 3) == pytest.approx((1.0, 0.25, 1 / 9))
    assert parse_gamma_spec("1.0,0.5", 2) == pytest.approx([1.0, 0.5])
    with pytest.raises(ValueError):
        parse_gamma_spec("1.0,0.5", 3)
    with pytest.raises(ValueError):
        parse_gamma_spec("poly:x", 2)


def test_parse_k_range():
    assert list(parse_k_range("15..17")) == [15, 16, 17]
    with pytest.raises(ValueError):
        parse_k_range("17-15")


def test_closest_prime():
    assert closest_prime(10.0) == 11  # |11-10| = |?|: 7 is 3 away, 11 is 1
    assert closest_prime(6.0) == 5  # tie between 5 and 7 -> smaller
    assert closest_prime(1.2 ** 26) == 113


def test_construct_writes_valid_vector_file(tmp_path):
    out = tmp_path / "v.json"
    rc = main([
        "construct", "--n", "12", "--d", "2", "--alpha", "2",
        "--gamma-spec", "poly:2", "--tau", "0.5", "--out", str(out),
    ])
    assert rc == EXIT_OK
    v, params, data = read_vector_file(str(out))
    assert data["primes"] == [7, 11]
    assert all(row[0] == 1 for row in data["residues"])
    # round trip is bit-exact
    assert [list(r) for r in v.residues] == data["residues"]
    x = crt_reconstruct(v, 1)
    assert x % 7 == v.residues[0][1] and x % 11 == v.residues[1][1]


def test_construct_d1_closed_form(tmp_path, capsys):
    rc = main([
        "construct", "--n", "12", "--d", "1", "--alpha", "2",
        "--gamma-spec", "1.0", "--tau", "0.5",
    ])
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    e_ran = float([l for l in printed.splitlines() if l.startswith("e_ran")][0]
                  .split("=")[1])
    # all residues 1: every E(m) is the 1-D dual sum 2 zeta(2 alpha)/m^{2 alpha}
    z4 = 2 * zeta(4.0)
    expect2 = (z4 / 7 ** 4 + z4 / 11 ** 4 + 2 * z4 / 77 ** 4) / 4.0
    assert e_ran == pytest.approx(math.sqrt(expect2), rel=1e-12)


def test_construct_tau_one_rejected():
    assert main(["construct", "--n", "12", "--d", "2", "--tau", "1.0"]) == EXIT_USAGE


def test_construct_capacity_exit(tmp_path):
    rc = main([
        "construct", "--n", "40", "--d", "2", "--mode", "cached",
        "--out", str(tmp_path / "v.json"),
    ])
    assert rc == EXIT_OK  # well within any realistic budget


def test_integrate_reproducible_and_dim_checked(tmp_path, capsys):
    out = tmp_path / "v.json"
    main(["construct", "--n", "12", "--d", "2", "--out", str(out)])
    capsys.readouterr()

    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for path in (a, b):
        rc = main([
            "integrate", "--vector-file", str(out), "--integrand",
            "product-cosine", "--seed", "9", "--reps", "200",
            "--out", str(path),
        ])
        assert rc == EXIT_OK
    assert a.read_bytes() == b.read_bytes()

    lines = a.read_text().splitlines()
    assert len(lines) == 201
    summary = json.loads(lines[-1])["summary"]
    assert summary["reps"] == 200

    rc = main([
        "integrate", "--vector-file", str(out),
        "--integrand", "product-cosine:3", "--seed", "9", "--reps", "10",
    ])
    assert rc == EXIT_USAGE


def test_verify_suites_pass(capsys):
    assert main(["verify", "--suite", "all"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "lemma-averaging: ok" in out
    assert "fft-oracle: ok" in out
    assert "eran-oracle: ok" in out


def test_study_small_range(tmp_path):
    out = tmp_path / "study.csv"
    rc = main([
        "study", "--alpha", "2", "--d", "2", "--gamma-spec", "poly:2",
        "--k-range", "13..15", "--out", str(out),
    ])
    assert rc == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "n,e_det_cbc,e_ran_rpfv,ref_det,ref_ran,construct_seconds"
    body = [l for l in lines[1:] if not l.startswith("#")]
    ns = [int(l.split(",")[0]) for l in body]
    assert ns == sorted(ns) and len(set(ns)) == len(ns)
    for l in body:
        fields = [float(t) for t in l.split(",")[1:]]
        assert all(f > 0 for f in fields[:4])
    # 17 significant digits round-trip
    e_det = body[0].split(",")[1]
    assert float(e_det) == float(f"{float(e_det):.17g}")
    slopes = [l for l in lines if l.startswith("# slope_")]
    assert len(slopes) == 2


def test_study_single_row_has_absent_slopes(tmp_path):
    out = tmp_path / "study.csv"
    rc = main([
        "study", "--alpha", "1", "--d", "2", "--gamma-spec", "poly:2",
        "--k-range", "13..13", "--out", str(out),
    ])
    assert rc == EXIT_OK
    text = out.read_text()
    assert "absent" in text


def test_thread_env_var_validated(monkeypatch):
    monkeypatch.setenv("RANLAT_THREADS", "zero")
    assert main(["verify", "--suite", "lemma-averaging"]) == EXIT_USAGE
    monkeypatch.setenv("RANLAT_THREADS", "2")
    assert main(["verify", "--suite", "lemma-averaging"]) == EXIT_OK
