import csv
import json
from fractions import Fraction

import numpy as np
import pytest

from datl_gdp.metrics import r_squared, rmse, rrmse
from datl_gdp.regressors import RegressorSpec
from datl_gdp.reporting import (
    RunManifest,
    file_digest,
    make_manifest,
    read_eval_reports,
    read_missing_report,
    read_td_sweep,
    rerender,
    write_eval_reports,
    write_missing_report,
    write_td_sweep,
)
from datl_gdp.synthetic import SYNTHETIC_CODES, make_missing_country, make_transfer_corpus
from datl_gdp.transfer import (
    MissingEstimateReport,
    estimate_missing,
    pairwise_matrix,
    reference_baseline,
    td_sweep,
)

SPECS = [RegressorSpec("grnn", sigmas=(0.3,)), RegressorSpec("elm", Cs=(100.0,), gammas=(0.25,)),
         RegressorSpec("svr", Cs=(100.0,), gammas=(0.25,), epsilons=(50.0,))]


@pytest.fixture(scope="module")
def matrix_reports():
    return pairwise_matrix(make_transfer_corpus(0), SYNTHETIC_CODES, SPECS)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_summary_has_one_row_per_report(tmp_path, matrix_reports):
    write_eval_reports(matrix_reports, tmp_path)
    rows = read_rows(tmp_path / "summary.csv")
    assert rows[0] == ["source", "target", "regressor", "td_fraction", "rmse", "r2", "rrmse"]
    assert len(rows) == 37
    assert len(list((tmp_path / "pairs").iterdir())) == 36


def test_plot_csv_rows_and_recomputed_metrics(tmp_path, matrix_reports):
    write_eval_reports(matrix_reports, tmp_path)
    for row in read_rows(tmp_path / "summary.csv")[1:]:
        src, tgt, reg, _, e, r2, rel = row
        plot = read_rows(tmp_path / "pairs" / f"{src}-to-{tgt}-{reg}.csv")
        assert plot[0] == ["year", "actual", "predicted"] and len(plot) == 55
        a = np.array([float(r[1]) for r in plot[1:]])
        p = np.array([float(r[2]) for r in plot[1:]])
        assert abs(rmse(a, p) - float(e)) <= 1e-9 * max(1.0, float(e))
        assert abs(r_squared(a, p) - float(r2)) <= 1e-9
        assert abs(rrmse(a, p) - float(rel)) <= 1e-9


def test_eval_json_round_trip(tmp_path, matrix_reports):
    m = make_manifest({"k": 1}, 42, notes={"x": "y"})
    write_eval_reports(matrix_reports, tmp_path, m)
    back, manifest = read_eval_reports(tmp_path / "report.json")
    assert back == list(matrix_reports)
    assert manifest == m and manifest.timestamp is None


def test_empty_report_list_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_eval_reports([], tmp_path)


def test_fraction_suffix_when_names_collide(tmp_path):
    corpus = make_transfer_corpus(0)
    reps = [r for f in ("1/3", "1/2") for r in pairwise_matrix(corpus, ["XAA", "XBB"], SPECS[:1], f)]
    write_eval_reports(reps, tmp_path)
    names = sorted(p.name for p in (tmp_path / "pairs").iterdir())
    assert "XAA-to-XBB-grnn-td1_3.csv" in names and "XAA-to-XBB-grnn-td1_2.csv" in names


def test_td_sweep_files(tmp_path):
    t = td_sweep(make_transfer_corpus(0), SYNTHETIC_CODES[:2], SPECS)
    write_td_sweep(t, tmp_path)
    grid = read_rows(tmp_path / "td_sweep.csv")
    assert grid[0] == ["regressor", "No_TD", "1/18*TD", "1/9*TD", "1/6*TD", "1/3*TD", "1/2*TD"]
    assert [r[0] for r in grid[1:]] == ["grnn", "elm", "svr"] and all(len(r) == 7 for r in grid)
    imp = read_rows(tmp_path / "td_improvement.csv")
    assert imp[0][-1] == "No_TD→1/2*TD"
    assert all(float(r[1]) == 0.0 for r in imp[1:])
    back, _ = read_td_sweep(tmp_path / "sweep.json")
    assert back.to_dict() == t.to_dict()


@pytest.fixture(scope="module")
def iraq_like():
    corpus = make_transfer_corpus(0)
    country = make_missing_country("IRQ", seed=4, windows=((1965, 1967), (1991, 2003)))
    return estimate_missing(country, {"XAA": corpus["XAA"], "XBB": corpus["XBB"]}, SPECS[:2])


def test_missing_report_files(tmp_path, iraq_like):
    write_missing_report(iraq_like, tmp_path)
    assert read_rows(tmp_path / "windows.csv") == [["country", "start_year", "end_year"],
                                                  ["IRQ", "1965", "1967"], ["IRQ", "1991", "2003"]]
    cands = read_rows(tmp_path / "candidates.csv")
    assert len(cands) == 5 and sum(r[5] == "yes" for r in cands[1:]) == 1
    est = read_rows(tmp_path / "estimates.csv")
    assert est[0] == ["year", "predicted_gdp"] and len(est) == 17
    assert read_missing_report(tmp_path / "report.json") == iraq_like


def test_reference_baseline_carried():
    b = reference_baseline("CHE")
    assert (b["model"], b["source"], b["rmse"], b["r2"], b["rrmse"]) == ("elm", "EU", 9462.41, 0.94, 0.38)
    assert reference_baseline("AFG")["rmse"] == 49.21 and reference_baseline("XAA") is None


def test_nothing_to_do_estimates_header_only(tmp_path):
    r = MissingEstimateReport("ZZN", (), None, (), (), nothing_to_do=True)
    write_missing_report(r, tmp_path)
    assert read_rows(tmp_path / "estimates.csv") == [["year", "predicted_gdp"]]
    assert read_rows(tmp_path / "windows.csv") == [["country", "start_year", "end_year"]]


def test_rerender_reproduces_csvs(tmp_path, matrix_reports, iraq_like):
    write_eval_reports(matrix_reports, tmp_path / "e")
    write_missing_report(iraq_like, tmp_path / "m")
    for sub, doc in (("e", "report.json"), ("m", "report.json")):
        before = {p.name: p.read_bytes() for p in (tmp_path / sub).rglob("*.csv")}
        for p in (tmp_path / sub).rglob("*.csv"):
            p.unlink()
        rerender(tmp_path / sub / doc)
        assert {p.name: p.read_bytes() for p in (tmp_path / sub).rglob("*.csv")} == before


def test_writers_are_byte_deterministic(tmp_path, matrix_reports):
    write_eval_reports(matrix_reports, tmp_path / "a")
    write_eval_reports(matrix_reports, tmp_path / "b")
    for p in (tmp_path / "a").rglob("*"):
        if p.is_file():
            assert p.read_bytes() == (tmp_path / "b" / p.relative_to(tmp_path / "a")).read_bytes()


def test_floats_written_at_full_precision(tmp_path, matrix_reports):
    write_eval_reports(matrix_reports[:1], tmp_path)
    row = read_rows(tmp_path / "summary.csv")[1]
    assert float(row[4]) == matrix_reports[0].rmse


def test_manifest_digest_recomputable(tmp_path):
    f = tmp_path / "input.csv"
    f.write_text("a,b\n1,2\n")
    m = make_manifest({}, 1, inputs=[f])
    assert m.input_digests[str(f)] == file_digest(f)
    assert RunManifest.from_dict(json.loads(json.dumps(m.to_dict()))) == m
