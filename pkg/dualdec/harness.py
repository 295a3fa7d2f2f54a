"""
Monte Carlo experiment driver: simulation sweeps, latency bench, separation statistics.

試行 t の乱数列は (master_seed, チャネル番号, デコーダ番号, t) だけで決まるので、
ワーカー数や実行順が変わっても結果は同じになる。
"""

from __future__ import annotations

import sys
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from dualdec.channels import (
    awgn_transmit,
    bsc_transmit,
    hard_decision,
    snr_to_sigma2,
    trial_rng,
)
from dualdec.code_model import (
    CODEBOOK_MAX_K,
    LinearCode,
    encode,
    ensure_min_distance,
    load_code,
    random_systematic_code,
)
from dualdec.config import ChannelSpec, ExperimentConfig
from dualdec.decoders import (
    DECODER_NAMES,
    DECODERS,
    DUAL_DECODERS,
    DecoderParams,
    estimated_gf2_mults,
)
from dualdec.dual_sampler import DualSet, load_dual_set, sample_dual_sets
from dualdec.errors import CapabilityError
from dualdec.gf2 import BitVector
from dualdec.observability import log_event, time_block
from dualdec.reliability import wt_profile
from dualdec.settings import get_settings

RESULT_COLUMNS = [
    "experiment_id",
    "code_n",
    "code_k",
    "channel_kind",
    "channel_param",
    "decoder",
    "trials",
    "bit_errors",
    "block_errors",
    "ber",
    "bler",
    "avg_iterations",
    "elapsed_ms_total",
    "master_seed",
]

BENCH_COLUMNS = [
    "decoder",
    "blocks",
    "block_errors",
    "elapsed_ms_total",
    "per_block_us",
    "avg_iterations",
    "est_gf2_mults",
]


@dataclass(frozen=True)
class ResultRow:
    experiment_id: str
    code_n: int
    code_k: int
    channel_kind: str
    channel_param: float
    decoder: str
    trials: int
    bit_errors: int
    block_errors: int
    ber: float
    bler: float
    avg_iterations: float
    elapsed_ms_total: float
    master_seed: int


@dataclass(frozen=True)
class BenchRow:
    decoder: str
    blocks: int
    block_errors: int
    elapsed_ms_total: float
    per_block_us: float
    avg_iterations: float
    est_gf2_mults: int


@dataclass(frozen=True)
class Prepared:
    """符号と双対集合（IERD/PAD を使わない設定では duals は None）。"""

    code: LinearCode
    duals: DualSet | None


def prepare_experiment(config: ExperimentConfig) -> Prepared:
    """符号の生成/読み込みと双対集合のサンプリング。ここは計時の対象外。"""
    src = config.code_source
    with time_block("prepare_experiment", experiment_id=config.experiment_id):
        if src.path is not None:
            code = load_code(src.path)
        else:
            assert src.n is not None and src.k is not None
            code = random_systematic_code(src.n, src.k, np.random.default_rng(src.seed))
        code = ensure_min_distance(code)

        duals: DualSet | None = None
        if DUAL_DECODERS & set(config.decoders):
            counts = config.dual_counts
            if counts.path is not None:
                duals = load_dual_set(counts.path)
            else:
                duals = sample_dual_sets(
                    code,
                    counts.count_a,
                    counts.count_b,
                    rng=np.random.default_rng(counts.seed),
                    design_tau=counts.design_tau,
                )
    return Prepared(code=code, duals=duals)


def _check_capability(config: ExperimentConfig, code: LinearCode) -> None:
    if "ml" in config.decoders and code.k > CODEBOOK_MAX_K:
        raise CapabilityError(
            f"ml decoder supports k <= {CODEBOOK_MAX_K}, got k={code.k}"
        )


def _channel_value(spec: ChannelSpec, value: float, code: LinearCode) -> float:
    """BSC は p をそのまま、AWGN は SNR [dB] を雑音分散に直す。"""
    if spec.kind == "bsc":
        return value
    return snr_to_sigma2(value, code.rate, spec.axis)


@dataclass(frozen=True)
class _TrialResult:
    bit_errors: int
    block_error: int
    iterations: int


def _run_trial(
    prepared: Prepared,
    kind: str,
    channel_value: float,
    decoder: str,
    params: DecoderParams,
    seed_key: tuple[int, int, int, int],
) -> _TrialResult:
    code = prepared.code
    rng = trial_rng(*seed_key)
    message = BitVector.from_bits(rng.integers(0, 2, size=code.k, dtype=np.uint8))
    sent = encode(code, message)
    if kind == "bsc":
        hard, obs = bsc_transmit(sent, channel_value, rng)
    else:
        obs = awgn_transmit(sent, channel_value, rng)
        hard = hard_decision(obs)
    outcome = DECODERS[decoder](obs, hard, code, prepared.duals, params)
    # 送信符号語と違えば誤り（検出できたかどうかは問わない）
    wrong = (outcome.estimate ^ sent).weight
    return _TrialResult(wrong, int(wrong > 0), outcome.iterations_used)


def _simulate_point(
    config: ExperimentConfig,
    prepared: Prepared,
    channel_index: int,
    decoder: str,
    threads: int,
) -> ResultRow:
    code = prepared.code
    spec = config.channel
    param = spec.values[channel_index]
    value = _channel_value(spec, param, code)
    params = DecoderParams(t_max=config.t_max, alpha=config.alpha, epsilon=config.epsilon)
    decoder_index = DECODER_NAMES.index(decoder)
    rule = config.stop_rule
    target = config.trials if rule.kind == "fixed" else rule.trial_cap

    trials = bit_errors = block_errors = iterations = 0
    start = time.perf_counter()
    with Parallel(n_jobs=threads, prefer="threads") as pool:
        while trials < target:
            size = min(rule.chunk_size, target - trials)
            results = pool(
                delayed(_run_trial)(
                    prepared,
                    spec.kind,
                    value,
                    decoder,
                    params,
                    (config.master_seed, channel_index, decoder_index, t),
                )
                for t in range(trials, trials + size)
            )
            trials += size
            bit_errors += sum(r.bit_errors for r in results)
            block_errors += sum(r.block_error for r in results)
            iterations += sum(r.iterations for r in results)
            # 停止判定はチャンク単位（途中で打ち切らないので試行数がスケジューリングに依存しない）
            if rule.kind == "min_block_errors" and block_errors >= rule.min_block_errors:
                break
    elapsed_ms = (time.perf_counter() - start) * 1000

    row = ResultRow(
        experiment_id=config.experiment_id,
        code_n=code.n,
        code_k=code.k,
        channel_kind=spec.kind,
        channel_param=param,
        decoder=decoder,
        trials=trials,
        bit_errors=bit_errors,
        block_errors=block_errors,
        ber=bit_errors / (trials * code.n),
        bler=block_errors / trials,
        avg_iterations=iterations / trials,
        elapsed_ms_total=round(elapsed_ms, 3) if config.record_timing else 0.0,
        master_seed=config.master_seed,
    )
    log_event(
        "simulate_point",
        decoder=decoder,
        channel_kind=spec.kind,
        channel_param=param,
        trials=trials,
        block_errors=block_errors,
        bler=row.bler,
        duration_ms=round(elapsed_ms, 3),
    )
    return row


def run_experiment(
    config: ExperimentConfig,
    threads: int | None = None,
    prepared: Prepared | None = None,
) -> list[ResultRow]:
    """チャネル値ごと・デコーダごとに 1 行。並び順は設定の順序で固定。"""
    threads = get_settings().threads if threads is None else threads
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    prepared = prepare_experiment(config) if prepared is None else prepared
    _check_capability(config, prepared.code)
    rows: list[ResultRow] = []
    for channel_index in range(len(config.channel.values)):
        for decoder in config.decoders:
            rows.append(_simulate_point(config, prepared, channel_index, decoder, threads))
    return rows


def measure_latency(
    config: ExperimentConfig,
    blocks: int | None = None,
    prepared: Prepared | None = None,
) -> list[BenchRow]:
    """
    各デコーダで同じ受信ブロック列を復号し、復号部分だけの時間を測る（1 スレッド）。

    ブロックは最初のチャネル値で作る。blocks を省略すると config.trials。
    """
    blocks = config.trials if blocks is None else blocks
    if blocks < 0:
        raise ValueError(f"blocks must be >= 0, got {blocks}")
    prepared = prepare_experiment(config) if prepared is None else prepared
    code = prepared.code
    spec = config.channel
    _check_capability(config, code)
    value = _channel_value(spec, spec.values[0], code)
    params = DecoderParams(t_max=config.t_max, alpha=config.alpha, epsilon=config.epsilon)
    dual_count = prepared.duals.size if prepared.duals is not None else 0

    received = []
    for t in range(blocks):
        rng = trial_rng(config.master_seed, 0, 0, t)
        sent = encode(code, BitVector.from_bits(rng.integers(0, 2, size=code.k, dtype=np.uint8)))
        if spec.kind == "bsc":
            hard, obs = bsc_transmit(sent, value, rng)
        else:
            obs = awgn_transmit(sent, value, rng)
            hard = hard_decision(obs)
        received.append((sent, hard, obs))

    rows: list[BenchRow] = []
    for decoder in config.decoders:
        decode = DECODERS[decoder]
        errors = iterations = mults = 0
        start = time.perf_counter()
        for sent, hard, obs in received:
            outcome = decode(obs, hard, code, prepared.duals, params)
            errors += int(outcome.estimate != sent)
            iterations += outcome.iterations_used
            mults += estimated_gf2_mults(decoder, outcome.iterations_used, code.n, dual_count)
        elapsed_ms = (time.perf_counter() - start) * 1000
        rows.append(
            BenchRow(
                decoder=decoder,
                blocks=blocks,
                block_errors=errors,
                elapsed_ms_total=round(elapsed_ms, 3),
                per_block_us=round(elapsed_ms * 1000 / blocks, 3) if blocks else 0.0,
                avg_iterations=iterations / blocks if blocks else 0.0,
                est_gf2_mults=mults,
            )
        )
        log_event("bench_decoder", decoder=decoder, blocks=blocks, elapsed_ms=round(elapsed_ms, 3))
    return rows


@dataclass(frozen=True)
class SeparationStats:
    tau: int
    trials: int
    mean_at_errors: float
    mean_at_correct: float


def measure_separation(
    code: LinearCode,
    duals: DualSet,
    tau_values: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> list[SeparationStats]:
    """
    ランダムな符号語 c と重み τ の誤り f について、w = c + f の WT プロファイルを
    誤り位置と正しい位置に分けて平均する（誤り位置の方が小さいはず）。
    """
    stats: list[SeparationStats] = []
    for tau in tau_values:
        if not 0 < tau < code.n:
            raise ValueError(f"tau must be in [1, {code.n - 1}], got {tau}")
        at_errors: list[float] = []
        at_correct: list[float] = []
        for _ in range(trials):
            sent = encode(code, BitVector.from_bits(rng.integers(0, 2, code.k, dtype=np.uint8)))
            error = np.zeros(code.n, dtype=np.uint8)
            error[rng.choice(code.n, size=tau, replace=False)] = 1
            word = sent ^ BitVector.from_bits(error)
            values = wt_profile(word, duals).values
            mask = error.astype(bool)
            at_errors.append(float(values[mask].mean()))
            at_correct.append(float(values[~mask].mean()))
        stats.append(
            SeparationStats(
                tau=tau,
                trials=trials,
                mean_at_errors=float(np.mean(at_errors)) if trials else 0.0,
                mean_at_correct=float(np.mean(at_correct)) if trials else 0.0,
            )
        )
    return stats


# --- CSV ------------------------------------------------------------------------------


def _write_frame(frame: pd.DataFrame, out: Path | None) -> None:
    if out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, lineterminator="\n")


def results_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=RESULT_COLUMNS)


def write_results_csv(rows: Sequence[ResultRow], out: Path | None = None) -> None:
    _write_frame(results_frame(rows), out)


def write_bench_csv(rows: Sequence[BenchRow], out: Path | None = None) -> None:
    _write_frame(pd.DataFrame([asdict(r) for r in rows], columns=BENCH_COLUMNS), out)
