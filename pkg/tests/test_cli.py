"""CLI surface: flag parsing, outputs, and exit codes."""

import json

import pytest

from concentrate.cli import main, _parse_n_list, _parse_r_grid


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_n_list_forms():
    assert _parse_n_list("100,200,500") == (100, 200, 500)
    assert _parse_n_list("10..50..20") == (10, 30, 50)
    with pytest.raises(ValueError):
        _parse_n_list("10..50")


def test_parse_r_grid():
    grid = _parse_r_grid("0.1:0.5:5")
    assert len(grid) == 5
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(0.5)


def test_info_command(capsys):
    code, out, _ = run_cli(capsys, "info", "--spectrum", "0.75,0.25")
    assert code == 0
    header, row = out.strip().split("\n")
    cells = dict(zip(header.split(","), row.split(",")))
    assert cells["dim"] == "2"
    assert float(cells["entropy_bits"]) == pytest.approx(0.8112781244591328)
    assert float(cells["deterministic_exponent_bits"]) == pytest.approx(
        0.4150374992788438
    )
    assert float(cells["uniform_divergence_bits"]) == pytest.approx(
        0.2075187496394219
    )
    assert cells["deterministic_size"] == "1"


def test_finite_command(capsys):
    code, out, _ = run_cli(
        capsys, "finite", "--spectrum", "0.5,0.3,0.2", "--size", "3"
    )
    assert code == 0
    header, row = out.strip().split("\n")
    cells = dict(zip(header.split(","), row.split(",")))
    assert float(cells["success_prob"]) == pytest.approx(0.6)
    assert float(cells["threshold"]) == pytest.approx(0.2)
    assert cells["cut_index"] == "3"


def test_yield_command_saturated(capsys):
    code, out, _ = run_cli(
        capsys,
        "yield", "--spectrum", "0.75,0.25", "--r", "1.0", "--kind", "direct",
        "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    row = payload["rows"][0]
    assert row["yield_bits"] == pytest.approx(0.4150374992788438)
    assert row["regime"] == "saturated-high"


def test_yield_all_kinds(capsys):
    for kind in ("direct", "converse", "fidelity-direct", "fidelity-converse"):
        code, out, _ = run_cli(
            capsys,
            "yield", "--spectrum", "0.75,0.25", "--r", "0.1", "--kind", kind,
        )
        assert code == 0 and "yield_bits" in out


def test_spectrum_file_input(tmp_path, capsys):
    path = tmp_path / "spec.txt"
    path.write_text("# test spectrum\n0.75\n0.25  # tail\n\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "info", "--spectrum-file", str(path))
    assert code == 0 and "0.81127812" in out


def test_renormalize_flag(capsys):
    code, _, err = run_cli(capsys, "info", "--spectrum", "3,1")
    assert code == 1 and "error" in err
    code, out, _ = run_cli(capsys, "info", "--spectrum", "3,1", "--renormalize")
    assert code == 0 and "0.81127812" in out


def test_domain_error_json_payload(capsys):
    code, out, err = run_cli(
        capsys,
        "yield", "--spectrum", "0.75,0.25", "--r", "-1", "--format", "json",
    )
    assert code == 1
    assert "error" in err
    payload = json.loads(out)
    assert payload["error"]["type"] == "NonPositiveExponentError"


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["yield", "--spectrum", "0.75,0.25"])  # missing --r
    assert exc.value.code == 2


def test_malformed_values_exit_2(capsys):
    for argv in (
        ["converge", "--spectrum", "0.75,0.25", "--rate", "0.6", "--n-list", "10..50"],
        ["info", "--spectrum", "zero,one"],
        ["info", "--spectrum-file", "/nonexistent/spec.txt"],
        ["sweep", "--spectrum", "0.75,0.25", "--r-grid", "0.1-0.5-5"],
    ):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_converge_type_guard_flag(capsys):
    code, _, err = run_cli(
        capsys,
        "converge", "--spectrum", "0.5,0.3,0.2", "--rate", "1.2",
        "--n-list", "200", "--max-types", "100",
    )
    assert code == 1 and "guard" in err


def test_converge_out_of_regime_rate(capsys):
    code, _, err = run_cli(
        capsys,
        "converge", "--spectrum", "0.75,0.25", "--rate", "0.3",
        "--n-list", "10,20",
    )
    assert code == 1 and "error" in err


def test_sweep_to_file(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, out, _ = run_cli(
        capsys,
        "sweep", "--spectrum", "0.75,0.25", "--r-grid", "0.01:0.5:20",
        "--out", str(out_path),
    )
    assert code == 0 and out == ""
    lines = out_path.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0].startswith("r,direct,converse")
    assert len(lines) == 21


def test_nonadd_command(capsys):
    code, out, _ = run_cli(
        capsys,
        "nonadd", "--spectrum", "0.75,0.25", "--sigma", "0.6,0.4", "--r", "0.2",
        "--format", "json",
    )
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["superadditive_ok"] and row["half_identity_ok"]


def test_fidelity_modes(capsys):
    code, out, _ = run_cli(
        capsys,
        "fidelity", "--prob", "0.5", "--size", "2", "--target-size", "4",
    )
    assert code == 0 and "0.25" in out
    code, out, _ = run_cli(
        capsys, "fidelity", "--eps", "0.01", "--target-size", "100",
        "--format", "json",
    )
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["output_size"] == 15 and row["output_quality_bound"] == 0.94
    code, out, _ = run_cli(
        capsys, "fidelity", "--fid", "1.0", "--target-size", "100",
    )
    assert code == 0 and "1.95" in out
    code, out, _ = run_cli(
        capsys,
        "fidelity", "--verify", "construction", "--spectrum", "0.3,0.25,0.25,0.2",
        "--target-size", "4", "--format", "json",
    )
    assert code == 0 and json.loads(out)["rows"][0]["passed"]
    code, out, _ = run_cli(
        capsys,
        "fidelity", "--verify", "bound", "--spectrum", "0.5,0.3,0.2",
        "--target-size", "3", "--format", "json",
    )
    assert code == 0 and json.loads(out)["rows"][0]["passed"]


def test_check_command_and_corrupted_tolerance(tmp_path, capsys):
    out_path = tmp_path / "check.csv"
    code, _, _ = run_cli(
        capsys, "check", "--seed", "7", "--out", str(out_path)
    )
    assert code == 0
    text = out_path.read_text(encoding="utf-8")
    assert text.startswith("check,worst_residual,tolerance,passed")
    assert "false" not in text
    # corrupting the tolerance must flip rows to failure and the exit to 1
    code, out, _ = run_cli(capsys, "check", "--seed", "7", "--tolerance", "-1")
    assert code == 1 and "false" in out
