from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from dualdec.cli import ANALYZE_COLUMNS, WTABLE_COLUMNS, main
from dualdec.code_model import load_code
from dualdec.dual_sampler import load_dual_set
from dualdec.harness import BENCH_COLUMNS, RESULT_COLUMNS


def _write_config(path: Path, **overrides: Any) -> Path:
    data: dict[str, Any] = {
        "experiment_id": "cli",
        "code_source": {"n": 15, "k": 5, "seed": 2},
        "dual_counts": {"count_a": 60, "count_b": 60, "seed": 0},
        "channel": {"kind": "bsc", "values": [0.03, 0.08]},
        "decoders": ["ierd", "pad", "minsum"],
        "trials": 40,
        "master_seed": 5,
        "stop_rule": {"chunk_size": 16},
    }
    data.update(overrides)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_wtable_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["wtable", "--n", "4", "--tau-max", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(WTABLE_COLUMNS)
    assert len(lines) == 1 + 5 * 2
    # 重み 1 の双対語と重み 1 の誤りが重なる確率は 1/4
    assert "1,1,1,4,0.25" in lines


def test_gen_code_and_gen_duals(tmp_path: Path) -> None:
    code_path = tmp_path / "code.txt"
    duals_path = tmp_path / "duals.txt"
    assert main(["gen-code", "--n", "24", "--k", "12", "--seed", "4", "--out", str(code_path)]) == 0
    code = load_code(code_path)
    assert (code.n, code.k) == (24, 12)

    args = ["gen-duals", "--code", str(code_path), "--count-a", "40", "--count-b", "40"]
    assert main([*args, "--design-tau", "1", "--out", str(duals_path)]) == 0
    duals = load_dual_set(duals_path)
    assert duals.n == 24
    assert duals.design_tau == 1
    assert 0 < len(duals.set_a) <= 40


def test_analyze_writes_wer_curve(tmp_path: Path) -> None:
    out = tmp_path / "wer.csv"
    table = tmp_path / "success.csv"
    argv = [
        "analyze",
        "--n", "15", "--k", "5", "--seed", "1",
        "--count-a", "50", "--count-b", "50",
        "--p", "0.01,0.05",
        "--success-table", str(table),
        "--out", str(out),
    ]  # fmt: skip
    assert main(argv) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ANALYZE_COLUMNS
    assert frame["p"].tolist() == [0.01, 0.05]
    assert frame["tau_max"].tolist() == [15, 15]
    assert frame["wer_analytical"].between(0.0, 1.0).all()
    assert frame["wer_analytical"].is_monotonic_increasing
    success = pd.read_csv(table)
    assert success["tau"].tolist() == list(range(16))
    assert success["success"].iloc[0] == 1.0


def test_analyze_needs_a_code_source() -> None:
    assert main(["analyze", "--p", "0.01"]) == 2


def test_bad_crossover_exits_with_config_code() -> None:
    argv = ["analyze", "--n", "15", "--k", "5", "--count-a", "20", "--count-b", "20"]
    assert main([*argv, "--p", "0.7"]) == 2


def test_usage_error_exits_2() -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["simulate"])
    assert excinfo.value.code == 2


def test_invalid_config_exits_2(tmp_path: Path) -> None:
    config = _write_config(tmp_path / "exp.json", trials=0)
    assert main(["simulate", "--config", str(config)]) == 2


def test_ml_on_large_k_exits_3(tmp_path: Path) -> None:
    config = _write_config(
        tmp_path / "exp.json", code_source={"n": 30, "k": 21, "seed": 0}, decoders=["ml"]
    )
    assert main(["simulate", "--config", str(config), "--trials", "1"]) == 3


def test_io_errors_exit_4(tmp_path: Path) -> None:
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 4
    bad = tmp_path / "bad_code.txt"
    bad.write_text("4 2\n10x1\n0101\n", encoding="utf-8")
    assert main(["gen-duals", "--code", str(bad), "--out", str(tmp_path / "d.txt")]) == 4


def test_simulate_overrides(tmp_path: Path) -> None:
    config = _write_config(tmp_path / "exp.json")
    out = tmp_path / "results.csv"
    argv = ["simulate", "--config", str(config), "--out", str(out)]
    assert main([*argv, "--trials", "10", "--decoders", "bp,ml", "--threads", "2"]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == RESULT_COLUMNS
    assert frame["decoder"].tolist() == ["bp", "ml", "bp", "ml"]
    assert (frame["trials"] == 10).all()
    assert (frame["master_seed"] == 5).all()


def test_bench_schema(tmp_path: Path) -> None:
    config = _write_config(tmp_path / "exp.json")
    out = tmp_path / "bench.csv"
    assert main(["bench", "--config", str(config), "--blocks", "25", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == BENCH_COLUMNS
    assert frame["decoder"].tolist() == ["ierd", "pad", "minsum"]
    assert (frame["blocks"] == 25).all()


def test_check_theory(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["check-theory"]) == 0
    out = capsys.readouterr().out
    assert "### Reliability Theory Report ✅" in out
    assert "complement identity N=32: **0 violations**" in out


def _simulate_subprocess(config: Path, out: Path, threads: int) -> None:
    subprocess.run(
        [
            sys.executable, "-m", "dualdec.cli", "simulate",
            "--config", str(config),
            "--out", str(out),
            "--threads", str(threads),
        ],  # fmt: skip
        check=True,
        capture_output=True,
        text=True,
    )


def test_simulate_is_deterministic_across_threads(tmp_path: Path) -> None:
    """スレッド数が違っても CSV はバイト単位で一致する。"""
    config = _write_config(tmp_path / "exp.json")
    one = tmp_path / "one.csv"
    four = tmp_path / "four.csv"
    _simulate_subprocess(config, one, threads=1)
    _simulate_subprocess(config, four, threads=4)
    assert one.read_bytes() == four.read_bytes()
    assert one.read_text(encoding="utf-8").splitlines()[0] == ",".join(RESULT_COLUMNS)
