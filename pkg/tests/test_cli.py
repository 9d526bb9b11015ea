import csv
import io
import json
from pathlib import Path

import pytest

from histosan.cli import main
from histosan.ingest import save_dataset, HistogramDataset

from conftest import BASE_COUNTS, BASE_TARGET, LOCS

ROOT = Path(__file__).resolve().parent.parent


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "h": write(tmp_path / "h.json", {"vocabulary": list(LOCS), "counts": list(BASE_COUNTS)}),
        "t": write(tmp_path / "t.json", {"vocabulary": list(LOCS), "counts": list(BASE_TARGET)}),
        "s": write(tmp_path / "s.json", ["g", "h"]),
        "small": write(tmp_path / "small.json", {"vocabulary": ["a", "b", "c"], "counts": [3, 1, 2]}),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_slh_golden(files, capsys):
    code, out, _ = run(capsys, "slh", "--input", files["h"], "--sensitive", files["s"])
    assert code == 0
    rep = json.loads(out)
    assert rep["output"]["counts"] == [9, 3, 4, 3, 16, 15, 0, 0]
    assert rep["solver"] == "lho" and rep["feasible_vs_c"] == "not-checked"
    assert "wall_time_ms" in rep["telemetry"]


def test_slh_with_taxonomy(files, capsys):
    tax = write(files["dir"] / "tax.json", {"name": "root", "children": [
        {"name": "private", "children": [{"name": "g", "location_id": "g"},
                                         {"name": "h", "location_id": "h"}]},
        *({"name": v, "location_id": v} for v in "abcdef")]})
    code, out, _ = run(capsys, "slh", "--input", files["h"], "--taxonomy", tax, "--select", "private")
    assert code == 0 and json.loads(out)["output"]["counts"][6:] == [0, 0]


def test_proportional_infeasible_is_an_error(files, capsys):
    code, _, err = run(capsys, "slh", "--input", files["h"], "--sensitive", files["s"],
                       "--solver", "proportional")
    assert code == 1 and "error" in err


def test_tr_golden_and_report_determinism(files, capsys):
    argv = ("tr", "--input", files["h"], "--target", files["t"], "--epsilon", "0.05", "--no-timing")
    code, out1, _ = run(capsys, *argv)
    _, out2, _ = run(capsys, *argv)
    assert code == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert rep["output"]["counts"] == [10, 6, 5, 2, 14, 5, 5, 3]
    assert "wall_time_ms" not in rep["telemetry"]
    assert rep["parameters"]["seed"] == 0


def test_reports_differ_only_in_timing(files, capsys):
    argv = ("slh", "--input", files["h"], "--sensitive", files["s"])
    a = json.loads(run(capsys, *argv)[1])
    b = json.loads(run(capsys, *argv)[1])
    a["telemetry"].pop("wall_time_ms")
    b["telemetry"].pop("wall_time_ms")
    assert a == b


def test_tr_missing_c_exits_two(files, capsys):
    # zero budget keeps H, which is far from the uniform target
    code, out, _ = run(capsys, "tr", "--input", files["h"], "--epsilon", "0", "--c", "0.001")
    assert code == 2
    assert json.loads(out)["feasible_vs_c"] == "no"


def test_tr_meeting_c_exits_zero(files, capsys):
    code, out, _ = run(capsys, "tr", "--input", files["h"], "--target", files["t"],
                       "--epsilon", "0.05", "--c", "0.5")
    assert code == 0 and json.loads(out)["feasible_vs_c"] == "yes"


def test_ta_heuristic(files, capsys):
    code, out, _ = run(capsys, "ta", "--input", files["h"], "--target", files["t"],
                       "--epsilon", "0.05", "--solver", "heuristic")
    assert code == 0 and json.loads(out)["solver"] == "ah"


def test_target_distribution_profiles(files, capsys):
    dist = write(files["dir"] / "d.json", [
        {"profile": "flat", "distribution": {v: 1 / 8 for v in LOCS}},
        {"profile": "skew", "distribution": {"a": 0.5, "b": 0.5}},
    ])
    code, out, _ = run(capsys, "tr", "--input", files["h"], "--target-dist", dist,
                       "--profile", "skew", "--epsilon", "0.01")
    assert code == 0
    assert json.loads(out)["d_q"] <= 0.01
    code, _, err = run(capsys, "tr", "--input", files["h"], "--target-dist", dist, "--epsilon", "0.01")
    assert code == 1 and "--profile" in err


def test_output_file(files, capsys):
    dest = files["dir"] / "rep.json"
    code, out, _ = run(capsys, "slh", "--input", files["h"], "--sensitive", files["s"], "--output", dest)
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["solver"] == "lho"


def test_bad_arguments_exit_one(files, capsys):
    assert run(capsys, "tr", "--input", files["h"])[0] == 1           # no epsilon
    assert run(capsys, "slh", "--input", "/no/such/file.json")[0] == 1
    assert run(capsys, "tr", "--input", files["h"], "--epsilon", "-1")[0] == 1
    assert run(capsys, "bogus")[0] == 1


def test_oracle(files, capsys):
    code, out, _ = run(capsys, "oracle", "slh", "--input", files["h"], "--sensitive", files["s"])
    res = json.loads(out)
    assert code == 0
    assert res["tie_set_size"] == 1 and res["tie_set"] == [[9, 3, 4, 3, 16, 15, 0, 0]]
    assert res["scanned"] == 4368


def test_oracle_cap(files, capsys):
    code, _, err = run(capsys, "oracle", "tr", "--input", files["h"], "--epsilon", "0.05", "--cap", "100")
    assert code == 1 and "exceed" in err


def test_oracle_tr_small(files, capsys):
    code, out, _ = run(capsys, "oracle", "tr", "--input", files["small"], "--epsilon", "0")
    assert code == 0 and json.loads(out)["tie_set"] == [[3, 1, 2]]


def test_eval_nce(files, capsys):
    code, out, _ = run(capsys, "eval", "nce", "--before", files["h"], "--after", files["h"])
    assert code == 0 and json.loads(out)["nce"] == 0.0


def test_eval_cf_seed(capsys):
    code, out, err = run(capsys, "--seed", "3", "eval", "cf", "--dataset", ROOT / "data" / "sample")
    assert code == 0 and "seed 3" in err
    res = json.loads(out)
    assert res["seed"] == 3 and res["rmse"] >= res["mae"]
    code, out2, _ = run(capsys, "eval", "cf", "--dataset", ROOT / "data" / "sample", "--seed", "3")
    assert json.loads(out2) == res


def test_ingest(files, capsys):
    tsv = files["dir"] / "c.tsv"
    tsv.write_text("u1\tv\tA\tCafe\t0\t0\t0\tt\nbroken\nu1\tv\tB\tBar\t0\t0\t0\tt\n")
    out_dir = files["dir"] / "ds"
    code, out, _ = run(capsys, "ingest", "--checkins", tsv, "--output", out_dir)
    assert code == 0
    stats = json.loads(out)
    assert stats["histograms"] == 1 and stats["malformed_lines"] == 1
    assert (out_dir / "manifest.json").exists()
    assert run(capsys, "ingest", "--checkins", tsv, "--output", out_dir, "--strict")[0] == 1


def test_gen_synthetic(files, capsys):
    code, out, _ = run(capsys, "gen-synthetic", "--input", files["h"], "--length", "12")
    h = json.loads(out)
    assert code == 0 and len(h["counts"]) == 12 and sum(h["counts"]) == 50


# --- sweep ------------------------------------------------------------------------


@pytest.fixture
def sweep_dir(tmp_path):
    from histosan import Histogram
    ds = HistogramDataset({
        "u1": Histogram((7, 2, 3, 2, 13, 12, 8, 3), LOCS),
        "u2": Histogram((4, 4, 1, 1), ("a", "b", "c", "d")),
    })
    save_dataset(ds, tmp_path / "ds")
    return tmp_path


def sweep_config(root, grid, solvers=("ro", "rh")):
    text = (f'seed = 1\nsolvers = {json.dumps(list(solvers))}\n'
            f'[[datasets]]\nname = "toy"\npath = "ds"\n[grid]\n' + grid)
    path = root / "sweep.toml"
    path.write_text(text)
    return path


def test_sweep_empty_grid_is_header_only(sweep_dir, capsys):
    cfg = sweep_config(sweep_dir, "epsilon = []\n")
    code, out, _ = run(capsys, "sweep", "--config", cfg)
    assert code == 0
    assert out.strip().splitlines() == [
        "dataset,user_id,solver,n,N,K,sensitive_count,epsilon,d_q,d_p,nce,runtime_ms"]


def test_sweep_two_epsilons(sweep_dir, capsys):
    cfg = sweep_config(sweep_dir, "epsilon = [0.01, 0.05]\nn = [8]\n")
    code, out, err = run(capsys, "sweep", "--config", cfg)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and "seed 1" in err
    for solver in ("ro", "rh"):
        mine = [r for r in rows if r["solver"] == solver]
        assert len(mine) == 2 and {r["epsilon"] for r in mine} == {"0.01", "0.05"}


def test_sweep_deterministic_apart_from_runtime(sweep_dir, capsys):
    cfg = sweep_config(sweep_dir, "epsilon = [0.05]\nsensitive_count = [2]\n", ("lho", "rh"))

    def rows():
        out = run(capsys, "--seed", "4", "sweep", "--config", cfg)[1]
        return [{k: v for k, v in r.items() if k != "runtime_ms"}
                for r in csv.DictReader(io.StringIO(out))]

    first = rows()
    assert first == rows() and len(first) == 4


def test_sweep_unknown_grid_key(sweep_dir, capsys):
    cfg = sweep_config(sweep_dir, "beta = [1]\n")
    assert run(capsys, "sweep", "--config", cfg)[0] == 1


def test_bundled_config_runs(tmp_path, capsys):
    dest = tmp_path / "out.csv"
    code, _, _ = run(capsys, "sweep", "--config", ROOT / "configs" / "defaults.toml", "--output", dest)
    rows = list(csv.DictReader(dest.open()))
    assert code == 0 and rows
    assert {r["solver"] for r in rows} >= {"lho", "ro", "rh"}
