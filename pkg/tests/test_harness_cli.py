import json

import numpy as np
import pytest

from rsvdreg import harness
from rsvdreg.cli import main


class TestTableRun:
    def test_records_and_aggregation(self):
        recs = harness.table_run(["shaw"], [0.01], n=32, k=4, repeats=2,
                                 k_select=8, grid_count=30)
        assert len(recs) == 2
        assert recs[0].repeat == 0 and recs[1].repeat == 1
        assert recs[0].noise_seed != recs[1].noise_seed
        rows = harness.aggregate_table(recs)
        assert len(rows) == 1
        med = np.median([r.e for r in recs])
        assert rows[0]["e"] == pytest.approx(med)

    def test_penalty_cells(self):
        recs = harness.table_run(["deriv2"], [0.01], penalty="d1", n=32, k=4,
                                 repeats=1, k_select=8, grid_count=30)
        assert len(recs) == 1
        assert np.isfinite(recs[0].e_ij) and recs[0].alpha_star > 0

    def test_worker_count_does_not_change_results(self):
        kw = dict(n=32, k=4, repeats=2, k_select=8, grid_count=20)
        serial = harness.table_run(["shaw"], [0.01], workers=1, **kw)
        threaded = harness.table_run(["shaw"], [0.01], workers=4, **kw)
        for a, b in zip(serial, threaded):
            assert a.e == b.e and a.alpha_star == b.alpha_star

    def test_failed_cell_carries_diagnostic(self):
        # phillips needs n divisible by 4: the cell fails but the run and
        # the remaining rows survive, with the reason in the note column
        recs = harness.table_run(["phillips", "shaw"], [0.01], n=30, k=4,
                                 repeats=1, k_select=8, grid_count=20)
        notes = {r.example: r.note for r in recs}
        assert "divisible by 4" in notes["phillips"]
        assert notes["shaw"] == ""
        rows = harness.aggregate_table(recs)
        bad = next(r for r in rows if r["example"] == "phillips")
        assert np.isnan(bad["e"]) and "divisible by 4" in bad["note"]


class TestSweepHelpers:
    def test_median_curve(self):
        rows = harness.rank_sweep("shaw", 0.01, [2, 4], n=32, repeats=2,
                                  k_select=8, grid_count=20)
        ks, errs = harness.median_curve(rows, "alpha_star")
        assert list(ks) == [2, 4]
        assert np.all(np.isfinite(errs))

    def test_plateau_detector(self):
        assert harness.nonincreasing_to_plateau([5.0, 3.0, 1.1, 1.0, 1.05, 1.0])
        assert not harness.nonincreasing_to_plateau([5.0, 3.0, 9.0, 1.0, 1.0, 1.0])

    def test_dip_rise_plateau_detector(self):
        assert harness.dip_rise_plateau([5.0, 2.0, 1.0, 2.5, 3.0, 3.1, 3.0])
        assert not harness.dip_rise_plateau([5.0, 4.0, 3.0, 2.0, 1.5, 1.4, 1.4])

    def test_optimal_rank(self):
        assert harness.optimal_rank([2, 4, 8], [3.0, 1.0, 2.0]) == 4


class TestBench:
    def test_rows_and_slope(self):
        rows = harness.bench_run(ns=(32, 64), ks=(4,), repeats=1,
                                 methods=("direct", "range"))
        assert len(rows) == 4
        slope = harness.loglog_slope(rows, "direct")
        assert np.isfinite(slope)
        with pytest.raises(ValueError, match="at least two"):
            harness.loglog_slope(rows, "projected")

    def test_rank_increase_adds_little_overhead(self):
        # The factorization dominated by the n^2 k probe products: growing
        # the rank from 20 to 30 changes the wall time by well under 50%.
        rows = harness.bench_run(ns=(2000,), ks=(20, 30), repeats=3,
                                 methods=("range",))
        t = {r["k"]: r["seconds"] for r in rows}
        assert t[30] / t[20] < 1.5


class TestRankSweepPlateau:
    def test_severely_ill_posed_plateau(self):
        # Exponential spectra are exhausted long before k=20: the error at
        # k=20 sits within 10% of the error at k=40.
        rows = harness.rank_sweep("shaw", 0.01, [20, 40], n=200, repeats=3,
                                  base_seed=0)
        ks, errs = harness.median_curve(rows, "alpha_star")
        assert abs(errs[0] - errs[1]) <= 0.10 * errs[1]


class TestVerifyRun:
    def test_report_shape(self):
        rep = harness.verify_run(["weyl"], seeds=3)
        r = rep["weyl"]
        assert r["trials"] == 3 and r["hypotheses_met"] == 3
        assert r["passed"] == 3 and r["pass_rate"] == 1.0
        assert r["worst_slack"] < 0


class TestCsv:
    def test_rfc4180_and_six_significant_digits(self):
        text = harness.rows_to_csv([{"a": 1, "b": 0.000123456789}])
        lines = text.split("\r\n")
        assert lines[0] == "a,b"
        assert lines[1] == "1,1.23457e-04"


class TestCli:
    def test_gen_writes_four_files(self, tmp_path, capsys):
        out = tmp_path / "prob"
        rc = main(["gen", "--problem", "shaw", "--n", "16", "--delta", "0.01",
                   "--seed", "7", "--out", str(out)])
        assert rc == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["A.mtx", "b.mtx", "meta.json", "x_true.mtx"]
        meta = json.loads((out / "meta.json").read_text())
        assert meta["name"] == "shaw" and meta["n"] == 16
        assert meta["delta_rel"] == 0.01 and meta["seed"] == 7

    def test_gen_delta_omitted_is_noise_free(self, tmp_path):
        out = tmp_path / "prob"
        assert main(["gen", "--problem", "shaw", "--n", "16",
                     "--out", str(out)]) == 0
        from rsvdreg.mmio import load_problem

        prob = load_problem(out)
        assert np.array_equal(prob.b, prob.b_exact)

    def test_gen_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["gen", "--problem", "shaw", "--n", "16", "--delta", "0.01",
                "--seed", "3"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("A.mtx", "b.mtx", "x_true.mtx", "meta.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_solve_json(self, tmp_path):
        out = tmp_path / "run.json"
        rc = main(["solve", "--problem", "shaw", "--n", "16", "--delta",
                   "0.01", "--method", "tikh_range", "--k", "4", "--alpha",
                   "1e-4", "--out", str(out), "--format", "json"])
        assert rc == 0
        row = json.loads(out.read_text())
        assert row["method"] == "tikh_range"
        assert row["error"] > 0 and row["wall_time_seconds"] > 0

    def test_table_csv(self, tmp_path):
        out = tmp_path / "table.csv"
        rc = main(["table", "--problems", "shaw", "--n", "32", "--deltas",
                   "0.01", "--k", "4", "--repeats", "1", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].rstrip("\r") == ",".join(harness.TABLE_COLUMNS)
        assert len(lines) == 2

    def test_sweep_alpha_csv(self, tmp_path):
        out = tmp_path / "curve.csv"
        rc = main(["sweep-alpha", "--problem", "shaw", "--n", "16", "--delta",
                   "0.01", "--k", "4", "--alpha-grid", "1e-8,1.0,11",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 12
        assert sum("1" == line.rstrip("\r").split(",")[2] for line in lines[1:]) == 1

    def test_sweep_rank_csv(self, tmp_path):
        out = tmp_path / "ranks.csv"
        rc = main(["sweep-rank", "--problem", "shaw", "--n", "32", "--delta",
                   "0.01", "--ks", "2,4", "--repeats", "1", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 2 * 3  # header + ks x policies

    def test_verify_json_and_exit_code(self, tmp_path):
        out = tmp_path / "verify.json"
        rc = main(["verify", "--theorem", "weyl", "--seeds", "3",
                   "--out", str(out)])
        assert rc == 0
        rep = json.loads(out.read_text())
        assert rep["weyl"]["passed"] == 3

    def test_error_is_machine_readable(self, capsys):
        rc = main(["verify", "--theorem", "nosuch", "--seeds", "1"])
        assert rc == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert "nosuch" in err["error"] and err["type"] == "ValueError"

    def test_table_with_failed_row_exits_nonzero(self, tmp_path):
        out = tmp_path / "table.csv"
        rc = main(["table", "--problems", "phillips", "--n", "30", "--deltas",
                   "0.01", "--k", "4", "--repeats", "1", "--out", str(out)])
        assert rc == 1
        assert "divisible by 4" in out.read_text()

    def test_bench_small(self, tmp_path):
        out = tmp_path / "bench.csv"
        rc = main(["bench", "--ns", "32,64", "--ks", "4", "--methods",
                   "direct,range", "--repeats", "1", "--out", str(out)])
        assert rc == 0
        assert len(out.read_text().strip().splitlines()) == 5
