import csv
import io
import json

import pytest

from ellsum.cli import main, parse_config
from ellsum.errors import ConfigError
from ellsum.suite import DEFAULT_TOLERANCES, SuiteConfig, grid, run_cell, run_suite, worker_count


def small(**kw):
    kw.setdefault("draws", 1)
    return SuiteConfig(**kw)


def test_single_base_case_record():
    rep = run_suite(small(mode="summation", n_range=(1,), N_range=(0,)))
    assert len(rep.records) == 1
    rec = rep.records[0]
    assert rec["check"] == "summation.base_case" and rec["status"] == "pass"
    assert rec["residual"] == 0


def test_two_term_record_count():
    rep = run_suite(SuiteConfig(mode="two-term", n_range=(2,), N_range=(1, 2), draws=5))
    assert len(rep.records) == 20
    assert sorted({rec["r"] for rec in rep.records}) == [1, 2]
    assert all(rec["check"] == "two_term.relation" for rec in rep.records)


def test_summary_tallies_records():
    rep = run_suite(small(mode="kernel", draws=3))
    s = rep.summary
    assert s["records"] == len(rep.records) == s["passed"] + s["failed"] + s["skipped"]
    assert s["seed"] == 42
    assert s["max_residual"] == max(r["residual"] for r in rep.records)


def test_grid_skips_recursion_at_N0():
    cells = grid(small(mode="recursion", n_range=(1,), N_range=(0, 1)))
    assert cells == [("recursion", 1, 1, 0)]


def test_reports_are_byte_identical():
    cfg = small(mode="all", n_range=(1, 2), N_range=(0, 1), seed=9)
    first = run_suite(cfg, workers=1).render()
    assert run_suite(cfg, workers=1).render() == first
    assert run_suite(cfg, workers=2).render() == first


def test_cells_do_not_depend_on_grid():
    big = small(mode="summation", n_range=(1, 2), N_range=(0, 1, 2), draws=2)
    alone = run_cell(big, "summation", 2, 1, 1)
    rep = run_suite(big)
    assert [r for r in rep.records if (r["n"], r["N"], r["draw"]) == (2, 1, 1)] == alone


def test_json_schema_and_encoding():
    rep = run_suite(small(mode="summation", n_range=(1,), N_range=(1,)))
    doc = json.loads(rep.to_json())
    assert doc["schema"] == 1
    assert doc["config"]["seed"] == 42
    rec = doc["records"][0]
    assert isinstance(rec["residual"], str) and "e" in rec["residual"]
    assert float(rec["residual"]) == rep.records[0]["residual"]
    t = rec["params"]["t"]
    assert t == [rep.records[0]["params"]["t"].real, rep.records[0]["params"]["t"].imag]


def test_csv_report():
    rep = run_suite(small(mode="kernel", format="csv", n_range=(1,), N_range=(0,)))
    rows = list(csv.DictReader(io.StringIO(rep.render())))
    assert len(rows) == 3 and {r["check"] for r in rows} == {"kernel.ladder", "kernel.quasi_period",
                                                             "kernel.riemann"}
    assert "wall_time" not in rows[0]


def test_timing_is_opt_in():
    rep = run_suite(small(mode="kernel", timing=True))
    assert all(rec["wall_time"] >= 0 for rec in rep.records)


def test_failing_tolerance_marks_fail():
    rep = run_suite(small(mode="kernel", tolerances={"kernel.riemann": 1e-300}))
    status = {r["check"]: r["status"] for r in rep.records}
    assert status["kernel.riemann"] == "fail" and not rep.ok


def test_parse_defaults():
    cfg = parse_config([])
    assert cfg.mode == "all" and cfg.n_range == (1, 2, 3) and cfg.N_range == (0, 1, 2, 3, 4)
    assert cfg.draws == 20 and cfg.seed == 42 and cfg.format == "json"
    assert cfg.tolerances == DEFAULT_TOLERANCES
    assert not cfg.precision.compensated


def test_parse_overrides():
    cfg = parse_config(["--mode", "summation", "--n", "2", "--N", "3", "--seed", "7",
                        "--tol", "summation.identity=1e-8", "--deterministic-sum", "off", "--eps-trunc", "1e-15"])
    assert (cfg.mode, cfg.n_range, cfg.N_range, cfg.seed) == ("summation", (2,), (3,), 7)
    assert cfg.tolerance("summation.identity") == 1e-8
    assert cfg.precision.compensated and cfg.precision.eps_trunc == 1e-15


def test_csv_with_json_extension_is_accepted(tmp_path):
    cfg = parse_config(["--format", "csv", "--out", str(tmp_path / "report.json")])
    assert cfg.format == "csv"


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"mode": "kernel", "draws": 4, "seed": 3, "tolerances": {"kernel.ladder": 1e-10}}))
    cfg = parse_config(["--config", str(path), "--seed", "5"])
    assert (cfg.mode, cfg.draws, cfg.seed) == ("kernel", 4, 5)
    assert cfg.tolerance("kernel.ladder") == 1e-10


@pytest.mark.parametrize("argv,key", [
    (["--draws", "0"], "draws"),
    (["--n", "0"], "n"),
    (["--N", "x"], "N"),
    (["--tol", "bogus.check=1e-3"], "bogus.check"),
    (["--tol", "kernel.ladder=-1"], "kernel.ladder"),
    (["--tol", "kernel.ladder"], "tol"),
    (["--mode", "nope"], "argv"),
    (["--seed", "-1"], "seed"),
    (["--eps-trunc", "0"], "eps_trunc"),
])
def test_config_errors_name_the_key(argv, key):
    with pytest.raises(ConfigError) as info:
        parse_config(argv)
    assert info.value.key == key


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"colour": 1}')
    with pytest.raises(ConfigError) as info:
        parse_config(["--config", str(path)])
    assert info.value.key == "colour"


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("ELLSUM_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("ELLSUM_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["--mode", "summation", "--n", "1", "--N", "0", "--draws", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["summary"]["passed"] == 1
    assert main(["--mode", "kernel", "--draws", "1", "--tol", "kernel.riemann=1e-300"]) == 1
    assert main(["--draws", "-3"]) == 2
    assert "draws" in capsys.readouterr().err
