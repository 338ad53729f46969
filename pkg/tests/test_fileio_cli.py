import io
import json

import numpy as np
import pytest

from exactspmv.cli import EXIT_ERROR, EXIT_OK, EXIT_USAGE, main
from exactspmv.errors import IndexOutOfBounds, MissingTerminator, ParseError, UnsupportedVariant
from exactspmv.fileio import (detect_format, read_matrix, read_matrix_market, read_sms,
                              write_matrix)
from exactspmv.matstore import from_dense
from exactspmv.modring import RingSpec

from oracles import random_dense

R27 = RingSpec(27)


def put(tmp_path, name, text):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def run_cli(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, (json.loads(buf.getvalue()) if code == EXIT_OK else None)


def test_sms_example(tmp_path):
    mf = read_sms(put(tmp_path, "a.sms", "2 2 M\n1 1 2\n1 2 1\n2 2 3\n0 0 0\n"))
    assert mf.shape == (2, 2) and mf.nbnz == 3 and mf.format == "sms"
    assert mf.matrix(R27).to_dense().tolist() == [[2, 1], [0, 3]]


def test_sms_empty_and_numeric_header(tmp_path):
    mf = read_sms(put(tmp_path, "a.sms", "1 1 M\n0 0 0\n"))
    assert mf.matrix(R27).to_dense().tolist() == [[0]]
    mf = read_sms(put(tmp_path, "b.sms", "2 3 65521\n2 3 -1\n0 0 0\n"))
    assert mf.matrix(R27).to_dense().tolist() == [[0, 0, 0], [0, 0, 26]]


def test_sms_errors(tmp_path):
    with pytest.raises(IndexOutOfBounds):
        read_sms(put(tmp_path, "a.sms", "2 2 M\n3 1 5\n0 0 0\n"))
    with pytest.raises(MissingTerminator):
        read_sms(put(tmp_path, "b.sms", "2 2 M\n1 1 5\n"))
    with pytest.raises(ParseError) as exc:
        read_sms(put(tmp_path, "c.sms", "2 2 M\n1 1 5\n1 x 2\n0 0 0\n"))
    assert "3" in str(exc.value)
    with pytest.raises(ParseError):
        read_sms(put(tmp_path, "d.sms", "2 2\n0 0 0\n"))
    with pytest.raises(ParseError):
        read_sms(put(tmp_path, "e.sms", ""))


def test_matrix_market_variants(tmp_path):
    gen = put(tmp_path, "g.mtx", "%%MatrixMarket matrix coordinate integer general\n"
              "% comment\n2 2 3\n1 1 2\n1 2 1\n2 2 3\n")
    assert read_matrix_market(gen).matrix(R27).to_dense().tolist() == [[2, 1], [0, 3]]
    sym = put(tmp_path, "s.mtx", "%%MatrixMarket matrix coordinate real symmetric\n"
              "2 2 2\n1 1 4.0\n2 1 5\n")
    assert read_matrix_market(sym).matrix(R27).to_dense().tolist() == [[4, 5], [5, 0]]
    pat = put(tmp_path, "p.mtx", "%%MatrixMarket matrix coordinate pattern general\n"
              "2 3 2\n1 3\n2 1\n")
    assert read_matrix_market(pat).matrix(R27).to_dense().tolist() == [[0, 0, 1], [1, 0, 0]]
    skew = put(tmp_path, "k.mtx", "%%MatrixMarket matrix coordinate integer skew-symmetric\n"
               "2 2 1\n2 1 3\n")
    assert read_matrix_market(skew).matrix(R27).to_dense().tolist() == [[0, 24], [3, 0]]


def test_matrix_market_errors(tmp_path):
    with pytest.raises(UnsupportedVariant):
        read_matrix_market(put(tmp_path, "a.mtx", "%%MatrixMarket matrix array real general\n"))
    with pytest.raises(UnsupportedVariant):
        read_matrix_market(put(tmp_path, "b.mtx",
                               "%%MatrixMarket matrix coordinate complex general\n1 1 0\n"))
    with pytest.raises(ParseError):
        read_matrix_market(put(tmp_path, "c.mtx", "%%MatrixMarket matrix coordinate integer "
                                                   "general\n2 2 2\n1 1 1\n"))
    with pytest.raises(ParseError):
        read_matrix_market(put(tmp_path, "d.mtx", "%%MatrixMarket matrix coordinate real "
                                                   "general\n1 1 1\n1 1 0.5\n"))
    with pytest.raises(IndexOutOfBounds):
        read_matrix_market(put(tmp_path, "e.mtx", "%%MatrixMarket matrix coordinate integer "
                                                   "general\n1 1 1\n2 1 1\n"))


@pytest.mark.parametrize("suffix", [".sms", ".mtx"])
def test_write_read_round_trip(tmp_path, suffix):
    ring = RingSpec(65521)
    rng = np.random.default_rng(len(suffix))
    a = from_dense(random_dense(rng, 13, 9, 0.3, 65521), ring)
    path = str(tmp_path / ("m" + suffix))
    fmt = write_matrix(path, a)
    assert detect_format(path) == fmt
    b = read_matrix(path).matrix(ring)
    assert b == a
    text = open(path).read()
    write_matrix(path, b)
    assert open(path).read() == text


def test_cli_info_and_convert(tmp_path):
    path = put(tmp_path, "a.sms", "2 2 M\n1 1 2\n1 2 1\n2 2 3\n0 0 0\n")
    code, doc = run_cli(["info", path, "--modulus", "27"])
    assert code == 0 and doc["schema"] == "exactspmv.info/1"
    assert doc["stats"]["nnz"] == 3 and "ell_width" in doc["plan"]
    empty = put(tmp_path, "z.sms", "3 3 M\n0 0 0\n")
    code, doc = run_cli(["info", empty])
    assert code == 0 and doc["stats"]["nnz"] == 0
    out = str(tmp_path / "a.mtx")
    code, doc = run_cli(["convert", path, out])
    assert code == 0 and doc["format"] == "mm"
    back = str(tmp_path / "b.sms")
    assert run_cli(["convert", out, back, "--to", "sms"])[0] == 0
    assert open(back).read() == open(path).read()


def test_cli_bench(tmp_path):
    ring = RingSpec(65521)
    rng = np.random.default_rng(0)
    a = from_dense(random_dense(rng, 40, 40, 0.2, 65521), ring)
    path = str(tmp_path / "m.sms")
    write_matrix(path, a)
    code, doc = run_cli(["bench", path, "--format", "csr,coo,ell,hybrid,jit,auto", "--iters", "2"])
    assert code == 0 and doc["iters"] == 2 and doc["schema"] == "exactspmv.bench/1"
    sums = {r["checksum"] for r in doc["results"] if "checksum" in r}
    assert len(sums) == 1
    r = doc["results"][0]
    assert r["mflops"] == pytest.approx(2 * a.nnz * 2 / r["seconds"] / 1e6)
    code, doc = run_cli(["bench", path, "--iters", "1", "--block-size", "3", "--threads", "2"])
    assert code == 0 and doc["threads"] == 2 and doc["block_size"] == 3
    assert run_cli(["bench", path, "--format", "dia"])[0] == EXIT_USAGE
    plan = put(tmp_path, "plan.txt", "segregate_pm1 = true\nell_width = 2\n")
    code, doc = run_cli(["bench", path, "--format", "hybrid", "--plan", plan, "--iters", "1"])
    assert code == 0


def test_cli_seq(tmp_path):
    path = put(tmp_path, "a.sms", "2 2 M\n1 1 2\n1 2 1\n2 2 3\n0 0 0\n")
    code, doc = run_cli(["seq", path, "--modulus", "27", "--length", "1", "--seed", "5"])
    x = np.random.default_rng(5).integers(0, 27, size=2).tolist()
    assert code == 0 and doc["terms"] == [x]
    out = str(tmp_path / "s.json")
    code, doc = run_cli(["seq", path, "--length", "3", "--block-size", "2", "--output", out])
    assert code == 0 and doc["kind"] == "block"
    saved = json.load(open(out))
    assert len(saved["terms"]) == 3 and len(saved["terms"][0]) == 2


def test_cli_rank(tmp_path, monkeypatch):
    n = 8
    text = f"{n} {n} M\n" + "".join(f"{i} {i} 1\n" for i in range(1, n + 1)) + "0 0 0\n"
    path = put(tmp_path, "eye.sms", text)
    code, doc = run_cli(["rank", path, "--seed", "3"])
    assert code == 0 and doc["rank"] == n and doc["schema"] == "exactspmv.rank/1"
    again = run_cli(["rank", path, "--seed", "3"])[1]
    assert again == doc
    monkeypatch.setenv("EXACT_SPMV_THREADS", "3")
    assert run_cli(["rank", path])[1]["threads"] == 3
    assert run_cli(["rank", path, "--threads", "2"])[1]["threads"] == 2
    assert run_cli(["rank", path, "--modulus", "1"])[0] == EXIT_USAGE
    assert run_cli(["rank", path, "--modulus", "27"])[0] == EXIT_ERROR


def test_cli_errors(tmp_path):
    assert run_cli([])[0] == EXIT_USAGE
    assert run_cli(["info", str(tmp_path / "missing.sms")])[0] == EXIT_ERROR
    bad = put(tmp_path, "bad.sms", "2 2 M\n3 1 5\n0 0 0\n")
    assert run_cli(["info", bad])[0] == EXIT_ERROR
    assert run_cli(["rank", bad, "--threads", "0"])[0] in (EXIT_ERROR, EXIT_USAGE)


def test_module_entry_point(tmp_path):
    import subprocess
    import sys
    path = put(tmp_path, "a.sms", "2 2 M\n1 1 2\n1 2 1\n2 2 3\n0 0 0\n")
    out = subprocess.run([sys.executable, "-m", "exactspmv", "rank", path, "--block-size", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["rank"] == 2
