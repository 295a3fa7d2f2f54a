from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from dualdec import analysis, harness
from dualdec.code_model import (
    LinearCode,
    ensure_min_distance,
    load_code,
    random_systematic_code,
    save_code,
)
from dualdec.config import ExperimentConfig, apply_overrides, load_config
from dualdec.dual_sampler import (
    DualSet,
    load_dual_set,
    sample_dual_sets,
    save_dual_set,
    verify_dual_set,
)
from dualdec.errors import CapabilityError, CodeFormatError, ConfigError, DualdecError
from dualdec.observability import configure_logging, log_event
from dualdec.reliability import wtable_rows
from dualdec.settings import get_settings
from dualdec.theory_check import TheoryRules, run_check

WTABLE_COLUMNS = ["delta", "tau", "w_exact_num", "w_exact_den", "w_float"]
ANALYZE_COLUMNS = ["p", "tau_max", "wer_analytical"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_CAPABILITY = 3
EXIT_IO = 4


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _name_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _emit(frame: pd.DataFrame, out: Path | None) -> None:
    if out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out, index=False, lineterminator="\n")
        print(f"[OK] wrote {out}", file=sys.stderr)


def _generate(n: int, k: int, seed: int) -> LinearCode:
    return ensure_min_distance(random_systematic_code(n, k, np.random.default_rng(seed)))


def _load_or_generate_code(args: argparse.Namespace) -> LinearCode:
    if args.code is not None:
        return ensure_min_distance(load_code(args.code))
    if args.n is None or args.k is None:
        raise ConfigError("give either --code PATH or both --n and --k")
    return _generate(args.n, args.k, args.seed)


# --- サブコマンド ----------------------------------------------------------------------


def _cmd_gen_code(args: argparse.Namespace) -> int:
    """(n, k) の組織符号を生成して保存する。"""
    code = _generate(args.n, args.k, args.seed)
    save_code(code, args.out)
    print(
        f"[OK] code n={code.n} k={code.k} d={code.min_distance} seed={args.seed} -> {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_gen_duals(args: argparse.Namespace) -> int:
    """
    双対集合をサンプリングして保存する。

    - 要求数に届かなくても 1 本以上あれば警告（stderr のログ）を出して書き出す
    - 書き出す前に verify_dual_set で不変条件を確認する
    """
    code = ensure_min_distance(load_code(args.code))
    duals = sample_dual_sets(
        code,
        args.count_a,
        args.count_b,
        rng=np.random.default_rng(args.seed),
        design_tau=args.design_tau,
    )
    report = verify_dual_set(code, duals)
    if not report.ok:
        raise DualdecError(f"sampled dual set failed verification: {report}")
    save_dual_set(duals, args.out)
    print(
        f"[OK] |A|={len(duals.set_a)} |B|={len(duals.set_b)} "
        f"d_a={duals.d_a} d_b={duals.d_b} -> {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_wtable(args: argparse.Namespace) -> int:
    taus = None if args.tau_max is None else range(min(args.tau_max, args.n) + 1)
    frame = pd.DataFrame(list(wtable_rows(args.n, taus=taus)), columns=WTABLE_COLUMNS)
    _emit(frame, args.out)
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    code = _load_or_generate_code(args)
    duals: DualSet
    if args.duals is not None:
        duals = load_dual_set(args.duals)
    else:
        duals = sample_dual_sets(
            code,
            args.count_a,
            args.count_b,
            rng=np.random.default_rng(args.dual_seed),
            design_tau=args.design_tau,
        )
    profile = analysis.profile_from_duals(duals)
    tau_max = code.n if args.tau_max is None else min(args.tau_max, code.n)
    success = analysis.success_recursion(profile, tau_max, fold=args.fold)
    rows = [
        (p, tau_max, analysis.wer_from_success(success, code.n, p, not args.literal))
        for p in args.p
    ]
    _emit(pd.DataFrame(rows, columns=ANALYZE_COLUMNS), args.out)
    if args.success_table is not None:
        table = pd.DataFrame(
            {"tau": range(len(success)), "success": [float(s) for s in success]}
        )
        _emit(table, args.success_table)
    return EXIT_OK


def _load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    return apply_overrides(
        config,
        trials=args.trials,
        master_seed=args.master_seed,
        decoders=args.decoders,
        t_max=args.t_max,
        alpha=args.alpha,
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_experiment(args)
    rows = harness.run_experiment(config, threads=args.threads)
    harness.write_results_csv(rows, args.out)
    if args.out is not None:
        print(f"[OK] {len(rows)} rows -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _load_experiment(args)
    rows = harness.measure_latency(config, blocks=args.blocks)
    harness.write_bench_csv(rows, args.out)
    return EXIT_OK


def _cmd_check_theory(args: argparse.Namespace) -> int:
    rules = TheoryRules(dead_band_n=args.n, design_tau=args.design_tau, tol=args.tol)
    ok, md = run_check(rules)
    print(md)
    return EXIT_OK if ok else EXIT_FAILURE


# --- パーサ ----------------------------------------------------------------------------


def _add_code_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", type=Path, help="Code file (header 'n k', G rows, optional H).")
    p.add_argument("--n", type=int, help="Block length when generating a code.")
    p.add_argument("--k", type=int, help="Dimension when generating a code.")
    p.add_argument("--seed", type=int, default=0, help="Seed for code generation.")


def _add_experiment_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, required=True, help="Experiment config (JSON).")
    p.add_argument("--out", type=Path, help="Output CSV path (default: stdout).")
    p.add_argument("--trials", type=int, help="Override trials per point.")
    p.add_argument("--master-seed", type=int, help="Override master_seed.")
    p.add_argument("--decoders", type=_name_list, help="Override decoders, e.g. ierd,pad.")
    p.add_argument("--t-max", type=int, help="Override the iteration cap.")
    p.add_argument("--alpha", type=float, help="Override the PAD scaling factor.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualdec",
        description="Decoding short linear block codes with weight-unconstrained dual codewords.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # A: gen-code
    p = sub.add_parser("gen-code", help="Generate a random systematic (n, k) code.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_gen_code)

    # B: gen-duals
    p = sub.add_parser("gen-duals", help="Sample the low/high-weight dual sets A and B.")
    p.add_argument("--code", type=Path, required=True)
    p.add_argument("--count-a", type=int, default=2500)
    p.add_argument("--count-b", type=int, default=2500)
    p.add_argument("--design-tau", type=int, help="Assumed error weight for the thresholds.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_gen_duals)

    # C: wtable
    p = sub.add_parser("wtable", help="Emit the exact W(delta, tau) grid as CSV.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau-max", type=int, help="Largest tau to include (default: n).")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_wtable)

    # D: analyze
    p = sub.add_parser("analyze", help="Analytical WER curve over a BSC.")
    _add_code_source(p)
    p.add_argument("--duals", type=Path, help="Dual set file (default: sample one).")
    p.add_argument("--count-a", type=int, default=2500)
    p.add_argument("--count-b", type=int, default=2500)
    p.add_argument("--design-tau", type=int)
    p.add_argument("--dual-seed", type=int, default=0)
    p.add_argument("--p", type=_float_list, required=True, help="Crossover list, e.g. 0.01,0.02")
    p.add_argument("--tau-max", type=int)
    p.add_argument("--fold", choices=["parity", "symmetric"], default="parity")
    p.add_argument(
        "--literal",
        action="store_true",
        help="Sum tau=1..n only (count error-free words as failures).",
    )
    p.add_argument("--success-table", type=Path, help="Also write tau,success to this path.")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_analyze)

    # E: simulate
    p = sub.add_parser("simulate", help="Run a Monte Carlo BER/BLER sweep.")
    _add_experiment_overrides(p)
    p.add_argument("--threads", type=int, help="Worker threads (default: DUALDEC_THREADS).")
    p.set_defaults(func=_cmd_simulate)

    # F: bench
    p = sub.add_parser("bench", help="Measure per-decoder decoding latency.")
    _add_experiment_overrides(p)
    p.add_argument("--blocks", type=int, help="Blocks per decoder (default: trials).")
    p.set_defaults(func=_cmd_bench)

    # G: check-theory
    p = sub.add_parser("check-theory", help="Verify W(delta, tau) properties exactly.")
    p.add_argument("--n", type=int, default=64, help="Block length for the dead-band check.")
    p.add_argument("--design-tau", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=_cmd_check_theory)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging(get_settings().log_level)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except ConfigError as e:
        return _abort(args, e, EXIT_CONFIG)
    except CapabilityError as e:
        return _abort(args, e, EXIT_CAPABILITY)
    except (OSError, CodeFormatError) as e:
        return _abort(args, e, EXIT_IO)
    except DualdecError as e:
        return _abort(args, e, EXIT_FAILURE)
    except ValueError as e:
        # コマンドライン引数の範囲外（p や n, k など）
        return _abort(args, e, EXIT_CONFIG)


def _abort(args: argparse.Namespace, exc: Exception, code: int) -> int:
    print(f"[ERR] {exc}", file=sys.stderr)
    log_event("cli_abort", command=args.command, error=str(exc), exit_code=code)
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
