import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from discdyn import schemas
from discdyn.cli import main
from discdyn.response_models import parse_transfer_function


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def archive(tmp_path):
    path = tmp_path / "sim.csv"
    assert main(["simulate", "--K", "23", "--T", "5.5", "--L", "0.5", "--seed", "7",
                 "--horizon", "200", "--n-threads", "60", "--out", str(path)]) == 0
    return path


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        code, _, err = run(["simulate", "--K", 27, "--T", 5, "--L", 1, "--seed", 7, "--horizon", 50, "--out", p], capsys)
        assert code == 0
        assert "archive_end=2011-07-24T19:23:00Z" in err
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("thread_id,timestamp,author\n")


def test_fit_archive(archive, tmp_path, capsys):
    plots = tmp_path / "plots"
    code, out, _ = run(["fit", archive, "--archive-end", "2011-07-31T01:23:00Z", "--plot-dir", plots], capsys)
    assert code == 0
    records = jsonl(out)
    assert [r["thread_id"] for r in records] == sorted(r["thread_id"] for r in records)
    for r in records:
        jsonschema.validate(r, schemas.FIT_RECORD)
    ok = [r for r in records if "error" not in r]
    params = np.array([[r["K"], r["T"], r["L"]] for r in ok])
    med = np.median(params, axis=0)
    assert med[1] == pytest.approx(5.5, rel=0.25)
    assert med[1] + med[2] == pytest.approx(6.0, rel=0.25)
    for r in ok:
        tf = parse_transfer_function(r["transfer_function"])
        assert (tf.K, tf.T, tf.L) == pytest.approx((r["K"], r["T"], r["L"]), abs=0.05 + 1e-9)
    assert len(list(plots.glob("*.least_squares.tsv"))) == len(ok)


def test_fit_reports_single_post_inline(tmp_path, capsys):
    path = tmp_path / "mixed.csv"
    rows = ["thread_id,timestamp", "lonely,2011-01-01T00:00:00Z"]
    rows += [f"busy,2011-01-01T{h:02d}:00:00Z" for h in range(0, 12)]
    rows += ["end,2011-01-10T00:00:00Z"]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run(["fit", path, "--method", "two_point"], capsys)
    assert code == 0
    by_id = {r["thread_id"]: r for r in jsonl(out)}
    assert by_id["lonely"]["error"] == "insufficient_data"
    assert by_id["busy"]["K"] == 11
    for r in by_id.values():
        jsonschema.validate(r, schemas.FIT_RECORD)


def test_fit_in_days(archive, capsys):
    code, out, _ = run(["fit", archive, "--time-unit", "day", "--archive-end", "2011-07-31T01:23:00Z",
                        "--method", "area"], capsys)
    assert code == 0
    ok = [r for r in jsonl(out) if "error" not in r]
    assert all(r["time_unit"] == "day" for r in ok)
    assert np.median([r["T"] for r in ok]) == pytest.approx(5.5 / 24, rel=0.25)


def test_fit_tsv_and_all_methods(archive, capsys):
    code, out, _ = run(["fit", archive, "--method", "all", "--format", "tsv", "--jobs", 4], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split("\t")[:3] == ["thread_id", "method", "K"]
    assert {line.split("\t")[1] for line in lines[1:]} == {"two_point", "area", "least_squares", "logistic"}


def test_fit_empty_input(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("thread_id,timestamp\n")
    assert run(["fit", path], capsys)[0] == 1


def test_fit_missing_file(tmp_path, capsys):
    assert run(["fit", tmp_path / "nope.csv"], capsys)[0] == 1


def test_fit_usage_errors(tmp_path, capsys):
    assert run(["fit", tmp_path / "nope.csv", "--quiet-window", "-1"], capsys)[0] == 2
    assert run(["fit", tmp_path / "nope.csv", "--archive-end", "yesterday"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["fit", "x.csv", "--method", "magic"])
    assert exc.value.code == 2


def test_predict_values(capsys):
    code, out, _ = run(["predict", "--K", 27, "--T", 5, "--L", 1, "--t", 6, 0, 1000], capsys)
    assert code == 0
    assert out.splitlines()[1:] == ["6\t17.07\t17", "0\t0.00\t0", "1000\t27.00\t27"]


def test_predict_from_report_and_tf(tmp_path, capsys):
    report = tmp_path / "model.json"
    report.write_text(json.dumps({"method": "area", "K": 27, "T": 5, "L": 1, "time_unit": "hour"}) + "\n")
    code, out, _ = run(["predict", "--model", report, "--t", 6, "--format", "json"], capsys)
    assert code == 0
    (doc,) = jsonl(out)
    jsonschema.validate(doc, schemas.PREDICTION)
    assert doc["rounded"] == 17
    code, out, _ = run(["predict", "--transfer-function", "27.0·e^{-1.0s}/(5.0s+1)", "--t", 6], capsys)
    assert out.splitlines()[1] == "6\t17.07\t17"


@pytest.mark.parametrize("argv", [["--K", -1, "--T", 1], ["--K", 1, "--T", 0], ["--K", 1], ["--K", 1, "--T", 1, "--L", -2]])
def test_predict_invalid_model(argv, capsys):
    assert run(["predict", *argv, "--t", 1], capsys)[0] == 2


def test_predict_invalid_model_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"K": 3}\n')
    assert run(["predict", "--model", bad, "--t", 1], capsys)[0] == 2


def test_response_tsv(capsys):
    code, out, _ = run(["response", "--K", 16, "--T", 1.5, "--L", 0.3, "--grid", 0.1, "--horizon", 5], capsys)
    assert code == 0
    rows = dict(line.split("\t") for line in out.splitlines()[1:])
    assert float(rows["1.8"]) == pytest.approx(0.632 * 16, abs=0.01)
    assert float(rows["0.3"]) == 0.0


def test_response_logistic_json(capsys):
    code, out, _ = run(["response", "--logistic", "--K", 1, "--b", 1, "--n0", 0.1, "--grid", 0.5, "--horizon", 20,
                        "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["y"][0] == pytest.approx(0.1)
    assert doc["y"][-1] == pytest.approx(1.0, abs=1e-7)


def test_response_usage(capsys):
    assert run(["response", "--K", 16, "--T", 1.5, "--grid", 0], capsys)[0] == 2
    assert run(["response", "--logistic", "--K", 1, "--b", 1], capsys)[0] == 2


def test_zipf_on_synthetic_corpus(tmp_path, capsys):
    corpus = tmp_path / "corpus.csv"
    assert run(["simulate", "--zipf-corpus", 3000, "--k-max", 50, "--seed", 3, "--out", corpus], capsys)[0] == 0
    plot = tmp_path / "zipf.tsv"
    code, out, _ = run(["zipf", corpus, "--prior-k", 1, 15, "--plot", plot], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.ZIPF_REPORT)
    assert doc["histogram"]["total"] == 3000
    assert doc["fit"]["exponent"] == pytest.approx(-1, abs=0.15)
    assert doc["gain_prior"]["1"] == 1.0
    assert plot.read_text().startswith("k\tfrequency\tfitted\n")


def test_zipf_insufficient_support(tmp_path, capsys):
    path = tmp_path / "tiny.csv"
    path.write_text("thread_id,timestamp\na,2011-01-01T00:00:00Z\nb,2011-01-01T00:00:00Z\n")
    code, out, _ = run(["zipf", path], capsys)
    assert code == 1
    assert json.loads(out)["fit"] is None


def test_jsonl_input(tmp_path, capsys):
    path = tmp_path / "posts.jsonl"
    lines = [{"thread_id": "x", "timestamp": f"2011-01-01T{h:02d}:00:00Z"} for h in range(6)]
    path.write_text("\n".join(json.dumps(d) for d in lines) + "\n")
    code, out, _ = run(["fit", path, "--method", "least_squares"], capsys)
    assert code == 0
    (record,) = jsonl(out)
    assert record["gain_source"] == "fitted"  # archive ends at the last reply: no steady state


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "discdyn.cli", "predict", "--K", "27", "--T", "5", "--L", "1", "--t", "6"],
        capture_output=True, text=True, check=True,
    )
    assert result.stdout.splitlines()[1] == "6\t17.07\t17"
