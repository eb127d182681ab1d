import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from ordidx.cli import load_schema, main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def run_json(capsys, *argv):
    rc, out, err = run(capsys, *argv, "--format", "json")
    return rc, json.loads(out), err


def test_density_examples(capsys):
    rc, rec, _ = run_json(capsys, "density", "--kind", "rho", "--g", "2", "--a", "0", "--d", "2")
    assert rc == 0 and rec["value"] == 0.5
    jsonschema.validate(rec, load_schema("density.v1"))
    rc, rec, _ = run_json(capsys, "density", "--kind", "rho-avg", "--a", "0", "--d", "4")
    assert abs(rec["value"] - 0.125) < 1e-12
    rc, rec, _ = run_json(capsys, "density", "--kind", "delta", "--g", "2", "--a", "0", "--d", "2")
    assert abs(rec["value"] - 0.70833) < 1e-4
    jsonschema.validate(rec, load_schema("density.v1"))


def test_density_reports_reduction(capsys):
    rc, rec, _ = run_json(capsys, "density", "--kind", "delta", "--g", "3", "--a", "4", "--d", "9")
    assert rec["reduction"]["d"] == 3
    rc, rec2, _ = run_json(capsys, "density", "--kind", "delta", "--g", "3", "--a", "4", "--d", "9",
                           "--no-reduce")
    assert "reduction" not in rec2 or rec2["reduction"] is None
    assert abs(rec["value"] - rec2["value"]) <= rec["tail_bound"] + rec2["tail_bound"]
    jsonschema.validate(rec, load_schema("density.v1"))


def test_density_character_method(capsys):
    rc, rec, _ = run_json(capsys, "density", "--kind", "delta0", "--g", "2", "--a", "1", "--d", "3",
                          "--method", "character", "--v-max", "2**12")
    rc, ref, _ = run_json(capsys, "density", "--kind", "delta0", "--g", "2", "--a", "1", "--d", "3",
                          "--v-max", "2**12", "--no-reduce")
    assert abs(rec["value"] - ref["value"]) < 1e-12
    jsonschema.validate(rec, load_schema("density.v1"))
    with pytest.raises(SystemExit):
        main(["density", "--kind", "rho", "--g", "2", "--d", "3", "--method", "character"])


def test_density_text_and_csv(capsys):
    rc, out, _ = run(capsys, "density", "--kind", "rho", "--g", "2", "--a", "0", "--d", "2")
    assert rc == 0 and "0.500000000000" in out
    rc, out, _ = run(capsys, "density", "--kind", "rho", "--g", "2", "--a", "0", "--d", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["kind", "g", "a", "d", "value", "tail_bound", "method"]
    assert float(rows[0]["value"]) == 0.5


@pytest.mark.parametrize("g", ["0", "1", "-1", "abc"])
def test_invalid_base_rejected(capsys, g):
    with pytest.raises(SystemExit) as exc:
        main(["density", "--kind", "delta", "--g", g, "--d", "3"])
    assert "invalid base" in str(exc.value)


def test_a_normalized_with_warning(capsys):
    rc, rec, err = run_json(capsys, "density", "--kind", "rho", "--g", "2", "--a", "5", "--d", "3")
    assert rec["a"] == 2 and "normalized" in err


def test_census_example(capsys):
    rc, rec, _ = run_json(capsys, "census", "--g", "2", "--d", "1", "--x", "100")
    assert rc == 0 and rec["total"] == 24
    jsonschema.validate(rec, load_schema("census.v1"))
    rc, out, _ = run(capsys, "census", "--g", "2", "--d", "3", "--x", "1000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["a"] for r in rows] == ["0", "1", "2"]


def test_census_rejects_large_x(capsys):
    rc, out, err = run(capsys, "census", "--g", "2", "--d", "3", "--x", "2e9")
    assert rc == 2 and "exceeds" in err


def test_cache_roundtrip_and_no_sieve(capsys, tmp_path):
    rc, out, err = run(capsys, "census", "--g", "3", "--d", "4", "--x", "50000", "--cache-dir", str(tmp_path),
                       "--cache-residues", "--no-sieve")
    assert rc == 2 and "sieving disabled" in err
    rc, first, _ = run_json(capsys, "census", "--g", "3", "--d", "4", "--x", "50000",
                            "--cache-dir", str(tmp_path), "--cache-residues")
    assert list(tmp_path.glob("*.oidx"))
    rc, second, _ = run_json(capsys, "census", "--g", "3", "--d", "4", "--x", "50000",
                             "--cache-dir", str(tmp_path), "--cache-residues", "--no-sieve")
    assert rc == 0 and first == second


def test_compare_passes_and_fails(capsys):
    rc, rec, _ = run_json(capsys, "compare", "--g", "2", "--d", "3", "--x", "1e6", "--mode", "order")
    assert rc == 0 and rec["all_pass"]
    jsonschema.validate(rec, load_schema("compare.v1"))
    rc, rec, _ = run_json(capsys, "compare", "--g", "2", "--d", "3", "--x", "1000", "--tol", "1e-9")
    assert rc == 1 and not rec["all_pass"]
    jsonschema.validate(rec, load_schema("compare.v1"))


def test_compare_index_mode(capsys):
    rc, rec, _ = run_json(capsys, "compare", "--g", "-3", "--d", "4", "--x", "1e6", "--mode", "index")
    assert rc == 0 and rec["kind"] == "rho" and len(rec["rows"]) == 4


def test_compare_deterministic_across_workers(capsys):
    args = ("compare", "--g", "5", "--d", "4", "--x", "3e6")
    _, one, _ = run_json(capsys, *args, "--workers", "1")
    _, two, _ = run_json(capsys, *args, "--workers", "2")
    assert one == two


def test_table(capsys):
    rc, rec, _ = run_json(capsys, "table", "--g", "2", "--d", "4", "--kinds", "delta,rho,rho-avg",
                          "--v-max", "4096", "--w-max", "65536")
    assert rc == 0 and len(rec["rows"]) == 4
    assert abs(rec["sums"]["delta"] - 1) < 1e-9
    assert abs(rec["sums"]["rho"] - 1) <= 4 * rec["tail_bounds"]["rho"]
    rc, rec, _ = run_json(capsys, "table", "--d", "3", "--kinds", "rho-avg,delta-avg", "--v-max", "4096",
                          "--w-max", "65536")
    assert rec["g"] is None


def test_constants(capsys):
    rc, rec, _ = run_json(capsys, "constants", "--d", "1", "--prime-bound", "1e7")
    assert abs(rec["artin_constant"] - 0.37396) < 1e-5
    rc, rec, _ = run_json(capsys, "constants", "--d", "5", "--prime-bound", "1e5")
    assert len(rec["characters"]) == 4
    assert sum(abs(r["im"]) > 1e-3 for r in rec["characters"]) == 2


def test_environment_precedence(capsys, monkeypatch):
    monkeypatch.setenv("ORDIDX_FORMAT", "json")
    monkeypatch.setenv("ORDIDX_G", "2")
    monkeypatch.setenv("ORDIDX_D", "2")
    rc, out, _ = run(capsys, "density", "--kind", "rho")
    assert json.loads(out)["d"] == 2
    rc, out, _ = run(capsys, "density", "--kind", "rho", "--d", "4")
    assert json.loads(out)["d"] == 4
    rc, out, _ = run(capsys, "density", "--kind", "rho", "--format", "text")
    assert out.startswith("rho(")


def test_selfcheck(capsys):
    rc, rec, _ = run_json(capsys, "selfcheck")
    assert rc == 0 and rec["all_pass"] and len(rec["checks"]) >= 6


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ordidx", "density", "--kind", "rho-avg", "--a", "0",
                           "--d", "4", "--format", "json"], capture_output=True, text=True, check=True)
    assert abs(json.loads(proc.stdout)["value"] - 0.125) < 1e-12
