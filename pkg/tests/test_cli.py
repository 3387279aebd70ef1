"""End-to-end command-line behavior: payloads, files, exit codes."""

import json
import math

import numpy as np
import pytest

from frame_extract.cli import EXIT_BUDGET, EXIT_INVALID_FRAME, EXIT_OK, EXIT_USAGE, main
from frame_extract.frame_core import Frame
from frame_extract.frameio import read_frame, write_frame
from frame_extract.instances import random_tight_frame


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("FRAME_EXTRACT_TOL", raising=False)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_analyze_tight_frame(tmp_path, capsys):
    path = str(tmp_path / "f.json")
    write_frame(random_tight_frame(4, 12, seed=0), path)
    code, payload = run_json(capsys, ["analyze", path])
    assert code == EXIT_OK
    assert payload["schema"] == "frame-extract/1"
    assert payload["command"] == "analyze"
    assert (payload["n"], payload["m"]) == (4, 12)
    assert abs(payload["A"] - 1.0) < 1e-8
    assert abs(payload["B"] - 1.0) < 1e-8
    assert payload["valid"] and payload["tight"] and payload["tight_unit"]
    assert abs(payload["dimension_identity"] - 4.0) < 1e-8
    assert abs(payload["sum_sq_norms"] - 4.0) < 1e-8


def test_analyze_accepts_csv_and_output_file(tmp_path, capsys):
    path = str(tmp_path / "f.csv")
    write_frame(random_tight_frame(3, 8, seed=1), path)
    out = str(tmp_path / "report.json")
    assert main(["analyze", path, "-o", out]) == EXIT_OK
    assert capsys.readouterr().out == ""
    payload = json.loads(open(out).read())
    assert payload["tight_unit"] is True


def test_analyze_reports_degenerate_frames_without_failing(tmp_path, capsys):
    path = str(tmp_path / "flat.json")
    write_frame(Frame(2, np.array([[1.0, 0.0], [2.0, 0.0]])), path)
    code, payload = run_json(capsys, ["analyze", path])
    assert code == EXIT_OK
    assert payload["valid"] is False
    assert payload["tight"] is False
    assert payload["frame_constant"] == "inf"
    assert payload["dimension_identity"] is None


def test_analyze_tolerance_env_widens_tight_flag(tmp_path, capsys, monkeypatch):
    path = str(tmp_path / "near.json")
    write_frame(
        Frame(2, np.array([[math.sqrt(1.5), 0.0], [0.0, math.sqrt(1.515)]])), path
    )
    code, payload = run_json(capsys, ["analyze", path])
    assert code == EXIT_OK
    assert payload["tight"] is False
    monkeypatch.setenv("FRAME_EXTRACT_TOL", "0.05")
    code, payload = run_json(capsys, ["analyze", path])
    assert code == EXIT_OK
    assert payload["tight"] is True
    assert payload["tight_unit"] is False  # bounds are near 1.5, not 1


def test_bad_tolerance_env_is_a_usage_error(tmp_path, monkeypatch, capsys):
    path = str(tmp_path / "f.json")
    write_frame(random_tight_frame(2, 5, seed=0), path)
    monkeypatch.setenv("FRAME_EXTRACT_TOL", "not-a-number")
    assert main(["analyze", path]) == EXIT_USAGE
    monkeypatch.setenv("FRAME_EXTRACT_TOL", "-2")
    assert main(["analyze", path]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_extract_random_reaches_target(capsys):
    code, payload = run_json(
        capsys, ["extract", "--random", "--n", "8", "--m", "24", "--epsilon", "0.5"]
    )
    assert code == EXIT_OK
    assert payload["command"] == "extract"
    assert payload["target_count"] == 5
    assert payload["selected_count"] == 5
    rep = payload["report"]
    assert rep["stopped_reason"] == "target_reached"
    assert len(rep["final_sigma"]) == 5
    assert rep["certificate"]["constant"] < 100.0
    assert "wall_time_s" not in rep


def test_extract_timing_flag_adds_wall_time(capsys):
    code, payload = run_json(
        capsys,
        ["extract", "--random", "--n", "6", "--m", "18", "--epsilon", "0.5", "--timing"],
    )
    assert code == EXIT_OK
    assert payload["report"]["wall_time_s"] >= 0.0


def test_extract_is_byte_identical_across_runs(tmp_path):
    argv = ["extract", "--random", "--n", "8", "--m", "24", "--epsilon", "0.5", "--seed", "3"]
    p1, p2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
    assert main(argv + ["-o", p1]) == EXIT_OK
    assert main(argv + ["-o", p2]) == EXIT_OK
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_extract_renders_figure_next_to_output(tmp_path, capsys):
    out = str(tmp_path / "run.json")
    code = main(
        [
            "extract",
            "--random",
            "--n",
            "6",
            "--m",
            "18",
            "--epsilon",
            "0.5",
            "-o",
            out,
            "--figures",
        ]
    )
    assert code == EXIT_OK
    png = tmp_path / "run.png"
    assert png.exists()
    assert png.stat().st_size > 0


def test_extract_budget_exit_code(capsys):
    code = main(
        [
            "extract",
            "--random",
            "--n",
            "8",
            "--m",
            "24",
            "--epsilon",
            "0.25",
            "--c2",
            "20.0",
        ]
    )
    assert code == EXIT_BUDGET
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["stopped_reason"] == "step_budget_exhausted"
    assert payload["selected_count"] == 0


def test_extract_file_input(tmp_path, capsys):
    path = str(tmp_path / "f.json")
    write_frame(random_tight_frame(6, 20, seed=2), path)
    code, payload = run_json(capsys, ["extract", path, "--epsilon", "0.5"])
    assert code == EXIT_OK
    assert payload["input"] == path


def test_extract_invalid_frame_exit_code(tmp_path, capsys):
    path = str(tmp_path / "flat.json")
    write_frame(Frame(3, np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]])), path)
    assert main(["extract", path, "--epsilon", "0.5"]) == EXIT_INVALID_FRAME
    assert "error:" in capsys.readouterr().err


def test_extract_usage_errors(tmp_path, capsys):
    assert main(["extract", "--epsilon", "0.5"]) == EXIT_USAGE  # no input at all
    assert main(["extract", "--random", "--epsilon", "0.5"]) == EXIT_USAGE  # no --n/--m
    assert main(["extract", str(tmp_path / "none.json"), "--epsilon", "0.5"]) == EXIT_USAGE
    assert (
        main(["extract", "--random", "--n", "4", "--m", "8", "--epsilon", "1.5"])
        == EXIT_USAGE
    )
    bad = str(tmp_path / "bad.json")
    with open(bad, "w") as fh:
        fh.write("{not json")
    assert main(["extract", bad, "--epsilon", "0.5"]) == EXIT_USAGE
    capsys.readouterr()


def test_greedy_projected_basis(capsys):
    code, payload = run_json(
        capsys,
        [
            "greedy",
            "--generator",
            "projected-basis",
            "--ambient",
            "200",
            "--rank",
            "40",
            "--terms",
            "6",
        ],
    )
    assert code == EXIT_OK
    sel = payload["selection"]
    assert len(sel["indices"]) == 6
    assert sel["status"] == "complete"
    for pos, d in enumerate(sel["distances"], start=1):
        assert d > 1.0 - 2.0 ** (-2 * pos)
    assert payload["tail_certificate_from_5"] is not None
    assert set(payload["stability"]) == {"ok", "violations", "certificate"}


def test_greedy_file_stream(tmp_path, capsys):
    rows = []
    for j in range(4):
        rows.append(np.eye(4)[j])
        rows.append(np.eye(4)[j])
    path = str(tmp_path / "dup.json")
    write_frame(Frame(4, np.array(rows)), path)
    code, payload = run_json(
        capsys,
        ["greedy", "--generator", "file", "--frame-file", path, "--terms", "4"],
    )
    assert code == EXIT_OK
    assert payload["selection"]["indices"] == [0, 2, 4, 6]
    assert payload["stability"]["ok"] is True
    assert abs(payload["stability"]["certificate"]["constant"] - 1.0) < 1e-12
    assert payload["tail_index_half"] == 0
    assert payload["tail_product_half"] == 1.0
    assert payload["tail_certificate_from_5"] is None


def test_greedy_figure_and_cyclic(tmp_path, capsys):
    path = str(tmp_path / "two.json")
    write_frame(Frame(2, np.eye(2)), path)
    out = str(tmp_path / "greedy.json")
    code = main(
        [
            "greedy",
            "--generator",
            "file",
            "--frame-file",
            path,
            "--cyclic",
            "--terms",
            "3",
            "--scan-limit",
            "30",
            "--figures",
            "-o",
            out,
        ]
    )
    assert code == EXIT_OK
    payload = json.loads(open(out).read())
    assert payload["selection"]["status"] == "threshold_unattainable"
    assert payload["selection"]["scanned"] == 30
    assert (tmp_path / "greedy.png").exists()


def test_greedy_zero_stream_is_invalid(tmp_path, capsys):
    path = str(tmp_path / "zero.json")
    write_frame(Frame(2, np.zeros((3, 2))), path)
    code = main(["greedy", "--generator", "file", "--frame-file", path, "--terms", "2"])
    assert code == EXIT_INVALID_FRAME
    capsys.readouterr()


def test_greedy_usage_errors(capsys):
    assert main(["greedy", "--generator", "file", "--terms", "2"]) == EXIT_USAGE
    assert (
        main(["greedy", "--generator", "projected-basis", "--terms", "0"]) == EXIT_USAGE
    )
    assert main(["greedy", "--generator", "nope", "--terms", "2"]) == EXIT_USAGE
    capsys.readouterr()


def test_counterexample_bracketless_files(tmp_path, capsys):
    prefix = str(tmp_path / "bl")
    code, payload = run_json(
        capsys,
        ["counterexample", "--kind", "bracketless", "--blocks", "6", "--diagnose", "--out-prefix", prefix],
    )
    assert code == EXIT_OK
    assert payload["kind"] == "bracketless"
    assert payload["ambient_dim"] == 16
    assert payload["vectors"] == 21
    assert payload["max_projection_norm_lb"] >= 1.0
    frame = read_frame(prefix + ".frame.json")
    op = frame.frame_operator()
    assert np.max(np.abs(op - np.diag(np.diag(op)))) < 1e-12
    for ext in (".diagnostics.json", ".diagnostics.csv", ".diagnostics.png"):
        assert (tmp_path / ("bl" + ext)).exists()
    diag = json.loads(open(prefix + ".diagnostics.json").read())
    assert [r["block"] for r in diag["rows"]] == [2, 3, 4]


def test_counterexample_cc_files(tmp_path, capsys):
    prefix = str(tmp_path / "cc")
    code, payload = run_json(
        capsys,
        ["counterexample", "--kind", "cc", "--n", "12", "--diagnose", "--out-prefix", prefix],
    )
    assert code == EXIT_OK
    assert payload["kind"] == "cc"
    assert payload["vectors"] == 13
    assert payload["head_constant"] >= 1.0
    frame = read_frame(prefix + ".frame.json")
    assert np.max(np.abs(frame.frame_operator() - np.eye(12))) < 1e-12
    for ext in (".partial_sums.json", ".partial_sums.csv", ".partial_sums.png"):
        assert (tmp_path / ("cc" + ext)).exists()
    diag = json.loads(open(prefix + ".partial_sums.json").read())
    assert diag["marked_k"] == 8  # ceil(0.75 * 12) - 1 at the default epsilon
    sums = [r["partial_sum_sq"] for r in diag["rows"]]
    assert sums[0] == pytest.approx(11.0 / 12.0)
    assert max(sums) == pytest.approx(3.0)  # k = 6: 6 * 6 / 12


def test_counterexample_usage_errors(capsys):
    assert main(["counterexample", "--kind", "bracketless"]) == EXIT_USAGE
    assert main(["counterexample", "--kind", "cc"]) == EXIT_USAGE
    assert main(["counterexample", "--kind", "other"]) == EXIT_USAGE
    capsys.readouterr()


def test_selftest_reports_pass_lines(tmp_path, capsys):
    out = str(tmp_path / "self.json")
    code = main(["selftest", "--seeds", "3", "-o", out])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert all(line.startswith("PASS") for line in lines)
    payload = json.loads(open(out).read())
    assert payload["ok"] is True
    assert set(payload["suites"]) == {
        "lunin_vs_oracle",
        "bt_vs_oracle",
        "scaled_h_calibration",
    }


def test_selftest_stdout_mode(capsys):
    code = main(["selftest", "--seeds", "2"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    pass_lines, json_part = out.split("{", 1)
    assert pass_lines.count("PASS") == 3
    payload = json.loads("{" + json_part)
    assert payload["command"] == "selftest"


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "frame-extract" in capsys.readouterr().out
