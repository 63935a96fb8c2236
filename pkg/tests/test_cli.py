import csv
import datetime as dt
import json

import numpy as np
import pytest

from bubbledates import simulate
from bubbledates.cli import main
from conftest import case1_spec


def write_price_csv(path, y, start=dt.date(2012, 9, 3)):
    day = start
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "price"])
        for v in y:
            w.writerow([day.isoformat(), f"{np.exp(v / 100.0):.10f}"])
            day += dt.timedelta(days=1 if day.weekday() < 4 else 3)
    return str(path)


@pytest.fixture(scope="module")
def bubble_csv(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("data")
    spec = case1_spec(a=6.0, sample_size=245)
    series = simulate(spec, np.random.default_rng(12))
    return write_price_csv(tmp / "prices.csv", series.y), spec


@pytest.fixture(scope="module")
def zero_noise_csv(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("zn")
    spec = case1_spec(a=4.0, sample_size=200)
    series = simulate(spec, innovations=np.zeros(200))
    return write_price_csv(tmp / "prices.csv", series.y), spec


def read_noncomment(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


class TestDetect:
    def test_explosive_series_detected(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        rc = main(["detect", "--input", path, "--out-dir", str(tmp_path),
                   "--cv-reps", "400", "--seed", "7"])
        assert rc == 0
        payload = json.loads((tmp_path / "detect.json").read_text())
        assert payload["explosive"] is True
        assert payload["sadf"] > payload["critical_value"]
        assert payload["config"]["seed"] == 7

    def test_random_walk_usually_retained(self, tmp_path):
        rejections = 0
        for rep in range(12):
            rng = np.random.default_rng([55, rep])
            y = np.concatenate([[0.0], np.cumsum(rng.normal(0, 1, 160))])
            path = write_price_csv(tmp_path / f"rw{rep}.csv", y * 10)
            rc = main(["detect", "--input", path, "--out-dir", str(tmp_path),
                       "--cv-reps", "400"])
            assert rc == 0
            rejections += json.loads((tmp_path / "detect.json").read_text())["explosive"]
        assert rejections <= 3

    def test_constant_series_degenerate_exit(self, tmp_path):
        path = write_price_csv(tmp_path / "c.csv", np.zeros(150))
        rc = main(["detect", "--input", path, "--out-dir", str(tmp_path)])
        assert rc == 4


class TestEstimate:
    def test_zero_noise_recovers_truth(self, zero_noise_csv, tmp_path):
        path, spec = zero_noise_csv
        rc = main(["estimate", "--input", path, "--out-dir", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "estimate.json").read_text())
        bk = spec.break_dates()
        assert payload["emergence"]["index"] == bk.t_e
        assert payload["collapse"]["index"] == bk.t_c
        assert payload["recovery"]["index"] == bk.t_r


class TestCi:
    def test_zero_noise_sets_contain_truth(self, zero_noise_csv, tmp_path):
        path, spec = zero_noise_csv
        rc = main(["ci", "--input", path, "--out-dir", str(tmp_path), "--no-plot"])
        assert rc == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        bk = spec.break_dates()
        bands = read_noncomment(tmp_path / "bands.csv")[1:]
        member = {
            int(r.split(",")[0]): tuple(int(x) for x in r.split(",")[3:6]) for r in bands
        }
        assert member[bk.t_e][0] == 1
        assert member[bk.t_c][1] == 1
        assert member[bk.t_r][2] == 1
        assert summary["estimates"]["emergence"]["index"] == bk.t_e

    def test_band_csv_consistent_with_set_csvs(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        rc = main(["ci", "--input", path, "--out-dir", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "bands.png").exists()
        bands = read_noncomment(tmp_path / "bands.csv")[1:]
        for col, name in ((3, "emergence"), (4, "collapse"), (5, "recovery")):
            in_band = {
                int(r.split(",")[0]) for r in bands if r.split(",")[col] == "1"
            }
            rows = read_noncomment(tmp_path / f"confidence_set_{name}.csv")[1:]
            retained = {int(r.split(",")[0]) for r in rows if r.split(",")[1] == "1"}
            assert in_band == retained

    def test_artifacts_embed_config(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        rc = main(["ci", "--input", path, "--out-dir", str(tmp_path),
                   "--no-plot", "--seed", "99", "--delta", "0.1"])
        assert rc == 0
        head = (tmp_path / "confidence_set_emergence.csv").read_text()
        assert "# seed=99" in head
        assert "# variant=LE" in head


class TestMcAndTabulate:
    def test_mc_artifacts(self, tmp_path):
        rc = main(["mc", "--case", "1", "--a", "6", "--reps", "12",
                   "--out-dir", str(tmp_path), "--date-types", "emergence"])
        assert rc == 0
        assert (tmp_path / "mc_report.csv").exists()
        assert (tmp_path / "mc_report.md").exists()
        assert (tmp_path / "mc_report.png").exists()
        text = (tmp_path / "mc_report.csv").read_text()
        assert "# reps=12" in text and "emergence,LE,coverage," in text

    def test_tabulate_with_fit(self, tmp_path):
        rc = main(["tabulate", "--functional", "EMa21e", "--grid", "0.3:0.1:0.7",
                   "--reps", "2000", "--steps", "200", "--out-dir", str(tmp_path),
                   "--no-plot"])
        assert rc == 0
        rows = read_noncomment(tmp_path / "cv_table.csv")[1:]
        assert len(rows) == 5
        lam, cv = rows[2].split(",")[:2]
        assert float(lam) == 0.5
        assert abs(float(cv) - 0.5078) < 0.08

    def test_config_file_merge_and_override(self, tmp_path):
        cfg = tmp_path / "mc.cfg"
        cfg.write_text("reps=12\na=6.0\ndate-types=emergence\nno-plot=true\n")
        rc = main(["mc", "--config", str(cfg), "--reps", "8", "--out-dir", str(tmp_path)])
        assert rc == 0
        text = (tmp_path / "mc_report.csv").read_text()
        assert "# reps=8" in text  # flag wins over config
        assert "# a=6.0" in text

    def test_bad_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("replications=10\n")
        assert main(["mc", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2


class TestExitCodes:
    def test_missing_input_is_data_error(self, tmp_path):
        assert main(["detect", "--input", str(tmp_path / "nope.csv"),
                     "--out-dir", str(tmp_path)]) == 3

    def test_bad_price_is_data_error(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text("date,price\n2020-01-01,10\n2020-01-02,-3\n")
        assert main(["estimate", "--input", str(p), "--out-dir", str(tmp_path)]) == 3

    def test_short_series_is_config_error(self, tmp_path):
        p = tmp_path / "p.csv"
        rows = "\n".join(f"2020-01-{d:02d},{100+d}" for d in range(1, 29))
        p.write_text("date,price\n" + rows + "\n")
        assert main(["estimate", "--input", str(p), "--out-dir", str(tmp_path)]) == 2
