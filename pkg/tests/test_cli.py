import json
import subprocess
import sys

import numpy as np
import pytest

from qmsearch.cli import main, parse_points, parse_values, InputError


@pytest.fixture
def worked(tmp_path):
    p = tmp_path / "vals.txt"
    p.write_text("5\n4\n12\n10\n8\n")
    return p


@pytest.fixture
def blobs(tmp_path):
    rng = np.random.default_rng(0)
    pts = np.concatenate([c + rng.normal(scale=0.3, size=(3, 2)) for c in [(0, 0), (10, 0), (0, 10), (10, 10)]])
    p = tmp_path / "pts.csv"
    p.write_text("".join(f"{x:.6f},{y:.6f}\n" for x, y in pts))
    return p, pts


def run(argv, capsys):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


# -- parsing ----------------------------------------------------------------

def test_parse_values_formats():
    assert parse_values("5\n\n# note\n4\n") == [5, 4]
    assert parse_values("[5, 4, 12]") == [5, 4, 12]


@pytest.mark.parametrize("text,where", [
    ("5\n-4\n", "line 2"),
    ("1\n2\nx\n", "line 3"),
    ("[1, -1]", "element 1"),
    ("[1, 2.5]", "element 1"),
    ("", "no values"),
    (str(1 << 64), "64 bits"),
])
def test_parse_values_errors(text, where):
    with pytest.raises(InputError, match=where):
        parse_values(text)


def test_parse_points_errors():
    np.testing.assert_array_equal(parse_points("1,2\n3,4\n"), [[1, 2], [3, 4]])
    with pytest.raises(InputError, match="row 2"):
        parse_points("1,2\n3,abc\n")
    with pytest.raises(InputError, match="row 3"):
        parse_points("1,2\n3,4\n5\n")


# -- min --------------------------------------------------------------------

def test_min_worked_example(worked, capsys):
    rc, out, _ = run(["min", "--input", worked, "--seed", 1, "--mode", "optimal"], capsys)
    assert rc == 0
    assert "minimum: 4" in out and "addresses: 1" in out and "seed: 1" in out


def test_min_single_value(tmp_path, capsys):
    p = tmp_path / "one.txt"
    p.write_text("9\n")
    rc, out, _ = run(["min", "--input", p, "--seed", 0], capsys)
    assert rc == 0 and "minimum: 9" in out


def test_min_negative_is_input_error(tmp_path, capsys):
    p = tmp_path / "neg.txt"
    p.write_text("3\n-1\n")
    rc, _, err = run(["min", "--input", p], capsys)
    assert rc == 2 and "line 2" in err


def test_min_missing_file(tmp_path, capsys):
    rc, _, err = run(["min", "--input", tmp_path / "nope.txt"], capsys)
    assert rc == 2


def test_min_too_wide_is_resource_error(tmp_path, capsys):
    p = tmp_path / "wide.txt"
    p.write_text("\n".join(str(v) for v in [1 << 40, 1, 2]))
    rc, _, err = run(["min", "--input", p, "--seed", 0], capsys)
    assert rc == 3


def test_min_trace_json(worked, tmp_path, capsys):
    out = tmp_path / "trace.json"
    rc, _, _ = run(["min", "--input", worked, "--seed", 3, "--mode", "optimal", "--trace", "--output", out], capsys)
    doc = json.loads(out.read_text())
    assert rc == 0
    assert doc["result_value"] == 4 and doc["seed"] == 3
    assert [s["prefix"] for s in doc["steps"]] == ["0", "00", "010", "0100"]
    assert doc["config"]["mode"] == "optimal" and doc["config"]["retries"] == 3


def test_seed_is_reported_when_absent(worked, capsys):
    rc, out, _ = run(["min", "--input", worked], capsys)
    assert rc == 0
    assert int(out.split("seed: ")[1].split()[0]) >= 0


def test_bad_flags_exit_2(worked, capsys):
    with pytest.raises(SystemExit) as e:
        main(["min", "--input", str(worked), "--mode", "fast"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["min", "--input", str(worked), "--retries", "0"])
    assert e.value.code == 2


# -- verify -----------------------------------------------------------------

def test_verify(worked, tmp_path, capsys):
    out = tmp_path / "v.json"
    rc, text, _ = run(["verify", "--input", worked, "--seed", 0, "--mode", "optimal", "--output", out, 4, 6, 15], capsys)
    assert rc == 0
    assert "qram_roundtrip: ok" in text
    assert json.loads(out.read_text())["membership"] == {"4": True, "6": False, "15": True}


def test_verify_value_too_wide(worked, capsys):
    rc, _, _ = run(["verify", "--input", worked, "--seed", 0, 99], capsys)
    assert rc == 2


# -- kmeans -----------------------------------------------------------------

def test_kmeans_four_clusters(blobs, tmp_path, capsys):
    path, pts = blobs
    out = tmp_path / "k.json"
    rc, text, _ = run(["kmeans", "--input", path, "--k", 4, "--seed", 4, "--mode", "optimal", "--output", out], capsys)
    doc = json.loads(out.read_text())
    assert rc == 0 and "objective:" in text
    assert len(doc["centroids"]) == 4 and len(doc["labels"]) == 12
    assert {"objective_history", "iterations", "seed", "config"} <= doc.keys()
    assert doc["seed"] == 4 and doc["config"]["k"] == 4


def test_kmeans_k1_centroid_is_mean(blobs, tmp_path, capsys):
    path, pts = blobs
    out = tmp_path / "k.json"
    rc, _, _ = run(["kmeans", "--input", path, "--k", 1, "--seed", 0, "--output", out], capsys)
    assert rc == 0
    np.testing.assert_allclose(json.loads(out.read_text())["centroids"][0], pts.mean(axis=0), atol=1e-6)


def test_kmeans_k_too_large(blobs, capsys):
    rc, _, err = run(["kmeans", "--input", blobs[0], "--k", 13, "--seed", 0], capsys)
    assert rc == 2


def test_kmeans_malformed_row(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,4\n5,oops\n")
    rc, _, err = run(["kmeans", "--input", p, "--k", 1], capsys)
    assert rc == 2 and "row 3" in err


def test_kmeans_trace(blobs, tmp_path, capsys):
    out = tmp_path / "k.json"
    run(["kmeans", "--input", blobs[0], "--k", 2, "--seed", 1, "--max-iters", 1, "--trace", "--output", out], capsys)
    assert len(json.loads(out.read_text())["traces"]) == 12


# -- bench ------------------------------------------------------------------

def test_bench_rows(tmp_path, capsys):
    out = tmp_path / "b.csv"
    rc, _, _ = run(["bench", "--n-min", 2, "--n-max", 6, "--bits", 6, "--trials", 20, "--seed", 0, "--output", out], capsys)
    lines = out.read_text().splitlines()
    assert rc == 0
    assert lines[0].startswith("# seed=0")
    assert lines[1] == "N,m,classical_lo,classical_hi,quantum_queries,c_q"
    assert len(lines) == 2 + 5


def test_bench_stdout(capsys):
    rc, out, _ = run(["bench", "--n-min", 1, "--n-max", 2, "--trials", 2, "--seed", 0], capsys)
    assert rc == 0 and len(out.splitlines()) == 4


def test_bench_infeasible(capsys):
    rc, _, err = run(["bench", "--n-max", 30, "--seed", 0], capsys)
    assert rc == 3 and "n=" in err


def test_bench_bad_range(capsys):
    rc, _, _ = run(["bench", "--n-min", 5, "--n-max", 3], capsys)
    assert rc == 2


def test_module_entry_point(worked):
    proc = subprocess.run([sys.executable, "-m", "qmsearch", "min", "--input", str(worked), "--seed", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "minimum: 4" in proc.stdout
