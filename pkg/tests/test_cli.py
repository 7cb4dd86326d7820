import io
import json

from tautring.cli import main


def run(capsys, argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


# -- enumerate -----------------------------------------------------------------


def test_enumerate_text(capsys):
    rc, out, _ = run(capsys, ["enumerate", "--g", "2", "--n", "2", "--k", "1"])
    assert rc == 0
    assert out.splitlines() == ["K1", "K2", "d(1,2)"]


def test_enumerate_json(capsys):
    rc, out, _ = run(capsys, ["enumerate", "--g", "2", "--n", "3", "--k", "1",
                              "--format", "json"])
    assert rc == 0
    data = json.loads(out)
    assert data["count"] == 7 and len(data["monomials"]) == 7
    assert data["g"] == 2 and data["n"] == 3 and data["k"] == 1
    entry = data["monomials"][-1]
    assert set(entry) == {"S", "dpart", "monomial", "p"}


def test_enumerate_csv(capsys):
    rc, out, _ = run(capsys, ["enumerate", "--g", "2", "--n", "2", "--k", "2",
                              "--format", "csv"])
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "monomial,dpart,p,S"
    assert len(lines) == 1 + 4


def test_enumerate_dpart_filter(capsys):
    rc, out, _ = run(capsys, ["enumerate", "--g", "2", "--n", "3", "--k", "1",
                              "--dpart", "D(1,2,3)"])
    assert rc == 0
    assert out.splitlines() == ["D(1,2,3)"]


def test_enumerate_dpart_rejects_free_factors(capsys):
    rc, _, err = run(capsys, ["enumerate", "--g", "2", "--n", "3", "--k", "1",
                              "--dpart", "K1"])
    assert rc == 2
    assert "dpart" in err


def test_enumerate_literal_mode_runs(capsys):
    rc, out, _ = run(capsys, ["enumerate", "--g", "2", "--n", "3", "--k", "1",
                              "--set-s-mode", "literal"])
    assert rc == 0 and out


# -- pairing -------------------------------------------------------------------


def test_pairing_json_matches_library(capsys):
    rc, out, _ = run(capsys, ["pairing", "--g", "2", "--n", "2", "--k", "1",
                              "--format", "json"])
    assert rc == 0
    data = json.loads(out)
    assert data["rank"] == 3
    assert data["rows"] == ["K1", "K2", "d(1,2)"]
    assert data["entries"] == [
        ["0", "1/2", "1/4"],
        ["1/2", "0", "1/4"],
        ["1/4", "1/4", "-1/4"],
    ]
    assert any(b["label"] == "1" for b in data["blocks"])


def test_pairing_csv(capsys):
    rc, out, _ = run(capsys, ["pairing", "--g", "2", "--n", "2", "--k", "1",
                              "--format", "csv"])
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == ',K1,K2,"d(1,2)"'   # csv quotes the comma in d(1,2)
    assert lines[1] == "K1,0,1/2,1/4"


def test_pairing_text_has_rank(capsys):
    rc, out, _ = run(capsys, ["pairing", "--g", "3", "--n", "1", "--k", "1"])
    assert rc == 0
    assert "rank=2" in out.splitlines()[0]


# -- verify --------------------------------------------------------------------


def test_verify_single_degree(capsys):
    rc, out, _ = run(capsys, ["verify", "--g", "2", "--n", "2", "--k", "1",
                              "--format", "json"])
    assert rc == 0
    data = json.loads(out)
    assert data["ok"] is True
    assert data["dims"] is None
    assert len(data["checks"]) == 1
    assert data["checks"][0]["triangle_violations"] == 0


def test_verify_all_degrees(capsys):
    rc, out, _ = run(capsys, ["verify", "--g", "2", "--n", "2", "--format", "json"])
    assert rc == 0
    data = json.loads(out)
    assert data["dims"] == [1, 3, 1]
    assert data["dims_palindromic"] is True
    assert data["ok"] is True


def test_verify_text_ends_with_ok(capsys):
    rc, out, _ = run(capsys, ["verify", "--g", "3", "--n", "1"])
    assert rc == 0
    assert out.rstrip().endswith("OK")
    assert "dims=1,2,1 palindromic=yes" in out


def test_verify_rejects_csv(capsys):
    rc, _, err = run(capsys, ["verify", "--g", "2", "--n", "2", "--format", "csv"])
    assert rc == 2


def test_verify_deterministic_across_parallelism(capsys):
    argv = ["verify", "--g", "2", "--n", "2", "--format", "json"]
    rc1, out1, _ = run(capsys, argv + ["--parallelism", "1"])
    rc2, out2, _ = run(capsys, argv + ["--parallelism", "2"])
    assert rc1 == rc2 == 0
    assert out1 == out2


# -- normalize -----------------------------------------------------------------


def test_normalize_text(capsys, monkeypatch):
    rc, out, _ = run(capsys, ["normalize", "--g", "2", "--n", "3"],
                     stdin="D(1,2,3)^2", monkeypatch=monkeypatch)
    assert rc == 0
    assert out.strip() == "-2 K1*D(1,2,3) - d(1,2)*d(1,3)"


def test_normalize_json_with_certificate(capsys, monkeypatch):
    rc, out, _ = run(capsys, ["normalize", "--g", "2", "--n", "3",
                              "--format", "json", "--emit-certificate"],
                     stdin="D(1,2,3)^2 + K1", monkeypatch=monkeypatch)
    assert rc == 0
    data = json.loads(out)
    assert data["verified"] is True
    assert data["steps"]
    assert data["normal_form"] == "K1 - 2 K1*D(1,2,3) - d(1,2)*d(1,3)"


def test_normalize_zero(capsys, monkeypatch):
    rc, out, _ = run(capsys, ["normalize", "--g", "2", "--n", "4"],
                     stdin="D(1,2,3)*D(2,3,4)", monkeypatch=monkeypatch)
    assert rc == 0
    assert out.strip() == "0"


def test_normalize_parse_error(capsys, monkeypatch):
    rc, _, err = run(capsys, ["normalize", "--g", "2", "--n", "2"],
                     stdin="K1 + + K2", monkeypatch=monkeypatch)
    assert rc == 2
    assert err


def test_normalize_budget_exhaustion(capsys, monkeypatch):
    rc, _, err = run(capsys, ["normalize", "--g", "2", "--n", "3",
                              "--max-rewrite-steps", "1"],
                     stdin="D(1,2,3)^2", monkeypatch=monkeypatch)
    assert rc == 3
    assert err


# -- configuration errors --------------------------------------------------------


def test_bad_genus(capsys):
    rc, _, err = run(capsys, ["enumerate", "--g", "1", "--n", "2", "--k", "0"])
    assert rc == 2


def test_genus4_requires_table(capsys):
    rc, _, err = run(capsys, ["verify", "--g", "4", "--n", "1", "--k", "0"])
    assert rc == 2
    assert "kappa" in err


def test_genus4_with_table(capsys, tmp_path):
    tbl = tmp_path / "g4.tbl"
    tbl.write_text("2=1\n1,1=7/5\n")
    rc, out, _ = run(capsys, ["verify", "--g", "4", "--n", "1", "--k", "0",
                              "--kappa-table", str(tbl), "--format", "json"])
    assert rc == 0
    assert json.loads(out)["ok"] is True


def test_bad_parallelism(capsys):
    rc, _, err = run(capsys, ["pairing", "--g", "2", "--n", "2", "--k", "1",
                              "--parallelism", "0"])
    assert rc == 2


def test_bad_max_steps(capsys):
    rc, _, err = run(capsys, ["enumerate", "--g", "2", "--n", "2", "--k", "1",
                              "--max-rewrite-steps", "0"])
    assert rc == 2


def test_usage_error(capsys):
    rc, _, err = run(capsys, ["enumerate", "--g", "2", "--n", "2"])  # missing --k
    assert rc == 2


def test_version(capsys):
    # argparse raises SystemExit; main converts it into a return code
    assert main(["--version"]) == 0
    assert "tautring" in capsys.readouterr().out


# -- caching ---------------------------------------------------------------------


def test_cache_roundtrip(capsys, tmp_path):
    cache = tmp_path / "cache"
    argv = ["pairing", "--g", "2", "--n", "2", "--k", "1", "--format", "json",
            "--cache-dir", str(cache)]
    rc1, out1, _ = run(capsys, argv)
    assert rc1 == 0
    files = list(cache.glob("*.out"))
    assert len(files) == 1
    # prove the second run is served from the cache
    files[0].write_text("SENTINEL\n")
    rc2, out2, _ = run(capsys, argv)
    assert rc2 == 0 and out2 == "SENTINEL\n"


def test_cache_key_distinguishes_parameters(capsys, tmp_path):
    cache = tmp_path / "cache"
    base = ["pairing", "--g", "2", "--n", "2", "--format", "json",
            "--cache-dir", str(cache)]
    run(capsys, base + ["--k", "1"])
    run(capsys, base + ["--k", "2"])
    assert len(list(cache.glob("*.out"))) == 2


def test_cache_env_var(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TAUTRING_CACHE_DIR", str(tmp_path / "envcache"))
    rc, out, _ = run(capsys, ["verify", "--g", "2", "--n", "1", "--format", "json"])
    assert rc == 0
    assert list((tmp_path / "envcache").glob("*.out"))


def test_cached_verify_preserves_exit_code(capsys, tmp_path):
    cache = tmp_path / "cache"
    argv = ["verify", "--g", "2", "--n", "1", "--format", "json",
            "--cache-dir", str(cache)]
    rc1, out1, _ = run(capsys, argv)
    rc2, out2, _ = run(capsys, argv)
    assert (rc1, out1) == (rc2, out2) == (0, out1)
