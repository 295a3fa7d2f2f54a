"""
Decoders: IERD / PAD over selected dual words, plus BP, min-sum and an ML oracle.

IERD / PAD はどちらも「全位置を 1 ビットずつ反転したときの WT」を見て
誤り位置を推定する。BP / min-sum / ML は比較用のベースライン。
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from dualdec.channels import LR_MAX, LR_MIN, SoftObservation, hard_decision, prior_lr
from dualdec.code_model import LinearCode, codebook, is_codeword
from dualdec.dual_sampler import DualSet
from dualdec.errors import DimensionError
from dualdec.gf2 import BitVector
from dualdec.reliability import wt_profile, wt_total
from dualdec.settings import get_settings

Status = Literal["decoded", "exhausted"]

# |LLR| の上限（LR のクリップ範囲 [1e-30, 1e30] に合わせる）
LLR_MAX = math.log(LR_MAX)


@dataclass(frozen=True)
class DecodeOutcome:
    """
    復号結果。

    converged は各デコーダ自身の停止条件（IERD/PAD なら WT = 0、BP 系ならシンドローム 0）
    に達したかどうか。syndrome_clean は H による検査結果で、converged とは別に持つ。
    flips は IERD では反転位置の履歴、PAD では各反復で反転したビット数。
    """

    estimate: BitVector
    iterations_used: int
    converged: bool
    syndrome_clean: bool
    status: Status
    flips: tuple[int, ...] = field(default=())


def _finish(
    code: LinearCode,
    estimate: BitVector,
    iterations: int,
    converged: bool,
    flips: list[int] | tuple[int, ...] = (),
) -> DecodeOutcome:
    return DecodeOutcome(
        estimate=estimate,
        iterations_used=iterations,
        converged=converged,
        syndrome_clean=is_codeword(code, estimate),
        status="decoded" if converged else "exhausted",
        flips=tuple(flips),
    )


def _check_inputs(length: int, code: LinearCode, duals: DualSet | None, t_max: int) -> None:
    if length != code.n:
        raise DimensionError(f"received length {length} != n={code.n}")
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    if duals is not None:
        if duals.n != code.n:
            raise DimensionError(f"dual set length {duals.n} != n={code.n}")
        if duals.size == 0:
            raise ValueError("dual set is empty")


# --- IERD ---------------------------------------------------------------------------


def ierd_decode(
    r: BitVector,
    duals: DualSet,
    code: LinearCode,
    t_max: int | None = None,
) -> DecodeOutcome:
    """
    硬判定の反復誤り削減復号。

    毎反復で WT プロファイルの最小位置 j（同値なら最小インデックス）を反転し、
    反転後の WT が 0 なら収束。受信語自体の WT が 0 なら反転せずにそのまま返す。
    """
    t_max = get_settings().t_max if t_max is None else t_max
    _check_inputs(r.length, code, duals, t_max)

    if wt_total(r, duals) == 0:
        return _finish(code, r, 0, True)

    current = r
    flips: list[int] = []
    for iteration in range(1, t_max + 1):
        profile = wt_profile(current, duals)
        j = profile.argmin_index
        current = current.flip(j)
        flips.append(j)
        if profile.min_value == 0:
            return _finish(code, current, iteration, True, flips)
    return _finish(code, current, t_max, False, flips)


# --- PAD ----------------------------------------------------------------------------


@dataclass
class PadState:
    """PAD の反復中の状態（呼び出しごとに作る作業領域）。"""

    lr: np.ndarray
    hard: np.ndarray
    alpha: float
    epsilon: float

    def combine(self, values: np.ndarray, min_value: int, max_value: int) -> np.ndarray:
        """
        事前情報 LR_i と内在情報を組み合わせた E_i。

        現在の硬判定が 1 の位置は LR (max - WT) / (WT - min)、
        0 の位置は LR (WT - min) / (max - WT)。分母は epsilon 以上に切り上げる。
        """
        wt = values.astype(np.float64)
        above_min = np.maximum(wt - min_value, self.epsilon)
        below_max = np.maximum(max_value - wt, self.epsilon)
        one = self.hard.astype(bool)
        return np.where(
            one,
            self.lr * (max_value - wt) / above_min,
            self.lr * (wt - min_value) / below_max,
        )


def pad_decode(
    obs: SoftObservation,
    duals: DualSet,
    code: LinearCode,
    t_max: int | None = None,
    alpha: float | None = None,
    epsilon: float | None = None,
) -> DecodeOutcome:
    """
    事前情報つき復号。E_i > 1 の位置を 0、それ以外を 1 として全ビットを同時に更新し、
    次の反復の事前情報を LR_i = α E_i とする。

    E_i の式は受信時の符号ではなく、その反復での硬判定ビットで選ぶ。
    WT プロファイルが平坦（min = max）な反復では反転も LR の更新もしない。状態が変わらないので
    残りの反復もすべて 0 フリップになり、t_max で exhausted になる。
    打ち切り時は、途中の硬判定のうち WT の合計が最も小さいもの（同値なら早いもの）を返す。
    """
    settings = get_settings()
    t_max = settings.t_max if t_max is None else t_max
    alpha = settings.alpha if alpha is None else alpha
    epsilon = settings.epsilon if epsilon is None else epsilon
    _check_inputs(len(obs), code, duals, t_max)
    if alpha <= 0 or epsilon <= 0:
        raise ValueError(f"alpha and epsilon must be > 0, got alpha={alpha}, epsilon={epsilon}")

    state = PadState(
        lr=prior_lr(obs).lr.copy(),
        hard=hard_decision(obs).to_array().copy(),
        alpha=alpha,
        epsilon=epsilon,
    )
    word = BitVector.from_bits(state.hard)
    best, best_wt = word, wt_total(word, duals)
    if best_wt == 0:
        return _finish(code, word, 0, True)

    flip_counts: list[int] = []
    for iteration in range(1, t_max + 1):
        profile = wt_profile(word, duals)
        if profile.min_value == profile.max_value:
            flip_counts.extend([0] * (t_max - iteration + 1))
            break
        e = state.combine(profile.values, profile.min_value, profile.max_value)
        new_hard = (e <= 1.0).astype(np.uint8)
        flip_counts.append(int((new_hard != state.hard).sum()))
        state.hard = new_hard
        state.lr = np.clip(alpha * e, LR_MIN, LR_MAX)

        word = BitVector.from_bits(state.hard)
        wt = wt_total(word, duals)
        if wt == 0:
            return _finish(code, word, iteration, True, flip_counts)
        if wt < best_wt:
            best, best_wt = word, wt

    return _finish(code, best, t_max, False, flip_counts)


# --- BP / min-sum -------------------------------------------------------------------


def llr_from_observation(obs: SoftObservation) -> np.ndarray:
    """log LR_i（正なら 0 寄り）。AWGN では -2 r_i / σ² をクリップしたものと同じ。"""
    return np.log(prior_lr(obs).lr)


def _leave_one_out_product(t: np.ndarray) -> np.ndarray:
    """各行について自分以外の列の積（割り算を使わないので 0 が混じっても正しい）。"""
    ones = np.ones((t.shape[0], 1))
    prefix = np.cumprod(t, axis=1)
    suffix = np.cumprod(t[:, ::-1], axis=1)[:, ::-1]
    before = np.hstack([ones, prefix[:, :-1]])
    after = np.hstack([suffix[:, 1:], ones])
    return before * after


def _check_to_var_sum_product(v2c: np.ndarray, edges: np.ndarray) -> np.ndarray:
    t = np.where(edges, np.tanh(v2c / 2.0), 1.0)
    ext = np.clip(_leave_one_out_product(t), -1 + 1e-15, 1 - 1e-15)
    return np.where(edges, np.clip(2.0 * np.arctanh(ext), -LLR_MAX, LLR_MAX), 0.0)


def _check_to_var_min_sum(v2c: np.ndarray, edges: np.ndarray) -> np.ndarray:
    mag = np.where(edges, np.abs(v2c), np.inf)
    sign = np.where(edges & (v2c < 0), -1.0, 1.0)
    order = np.argsort(mag, axis=1, kind="stable")
    rows = np.arange(mag.shape[0])
    first = order[:, 0]
    min1 = mag[rows, first]
    min2 = mag[rows, order[:, 1]] if mag.shape[1] > 1 else np.full(mag.shape[0], np.inf)
    is_first = np.arange(mag.shape[1])[None, :] == first[:, None]
    ext_mag = np.where(is_first, min2[:, None], min1[:, None])
    ext_sign = np.prod(sign, axis=1, keepdims=True) * sign
    ext = np.clip(ext_sign * ext_mag, -LLR_MAX, LLR_MAX)
    return np.where(edges, ext, 0.0)


CheckUpdate = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _flooding(
    llr: np.ndarray,
    edges: np.ndarray,
    iterations: int,
    update: CheckUpdate,
    stop: Callable[[np.ndarray], bool] | None = None,
) -> tuple[np.ndarray, int, bool]:
    """フラッディングスケジュール。(事後 LLR, 使った反復数, 停止条件に達したか) を返す。"""
    c2v = np.zeros(edges.shape)
    posterior = llr.copy()
    if stop is not None and stop(posterior):
        return posterior, 0, True
    for iteration in range(1, iterations + 1):
        v2c = np.where(edges, posterior[None, :] - c2v, 0.0)
        c2v = update(v2c, edges)
        posterior = llr + c2v.sum(axis=0)
        if stop is not None and stop(posterior):
            return posterior, iteration, True
    return posterior, iterations, False


def sum_product_posterior(
    llr: np.ndarray, parity_check: np.ndarray, iterations: int
) -> np.ndarray:
    """早期停止なしで iterations 回まわした sum-product の事後 LLR。"""
    edges = np.asarray(parity_check).astype(bool)
    if edges.shape[1] != llr.shape[0]:
        raise DimensionError(f"H has {edges.shape[1]} columns but llr has length {llr.shape[0]}")
    llr = np.asarray(llr, dtype=np.float64)
    posterior, _, _ = _flooding(llr, edges, iterations, _check_to_var_sum_product)
    return posterior


def _message_passing(
    obs: SoftObservation, code: LinearCode, t_max: int | None, update: CheckUpdate
) -> DecodeOutcome:
    t_max = get_settings().t_max if t_max is None else t_max
    _check_inputs(len(obs), code, None, t_max)
    edges = code.parity_check.to_array().astype(bool)
    h = edges.astype(np.int64)

    def syndrome_zero(posterior: np.ndarray) -> bool:
        return not ((h @ (posterior < 0).astype(np.int64)) & 1).any()

    posterior, used, converged = _flooding(
        llr_from_observation(obs), edges, t_max, update, syndrome_zero
    )
    estimate = BitVector.from_bits((posterior < 0).astype(np.uint8))
    return _finish(code, estimate, used, converged)


def bp_decode(obs: SoftObservation, code: LinearCode, t_max: int | None = None) -> DecodeOutcome:
    """H のタナーグラフ上の sum-product（フラッディング）。"""
    return _message_passing(obs, code, t_max, _check_to_var_sum_product)


def min_sum_decode(
    obs: SoftObservation, code: LinearCode, t_max: int | None = None
) -> DecodeOutcome:
    return _message_passing(obs, code, t_max, _check_to_var_min_sum)


# --- ML oracle ----------------------------------------------------------------------


@lru_cache(maxsize=8)
def _book(code: LinearCode) -> np.ndarray:
    return codebook(code)


def ml_oracle_decode(received: BitVector | SoftObservation, code: LinearCode) -> BitVector:
    """
    全 2^k 符号語から最尤の 1 つを選ぶ（k <= 20）。

    硬判定入力はハミング距離最小、軟判定入力は相関最大（= ユークリッド距離最小）。
    同点はメッセージ番号の小さい方。
    """
    book = _book(code)
    if isinstance(received, BitVector):
        if received.length != code.n:
            raise DimensionError(f"received length {received.length} != n={code.n}")
        distance = (book ^ received.to_array()).sum(axis=1)
        index = int(np.argmin(distance))
    else:
        if len(received) != code.n:
            raise DimensionError(f"received length {len(received)} != n={code.n}")
        correlation = (2.0 * book - 1.0) @ received.samples
        index = int(np.argmax(correlation))
    return BitVector.from_bits(book[index])


# --- レジストリ -------------------------------------------------------------------------

DECODER_NAMES = ("ierd", "pad", "bp", "minsum", "ml")
DUAL_DECODERS = frozenset({"ierd", "pad"})


@dataclass(frozen=True)
class DecoderParams:
    t_max: int
    alpha: float
    epsilon: float


DecoderFn = Callable[
    [SoftObservation, BitVector, LinearCode, DualSet | None, DecoderParams], DecodeOutcome
]


def _need_duals(duals: DualSet | None) -> DualSet:
    if duals is None:
        raise ValueError("this decoder needs a dual set")
    return duals


def _run_ierd(
    obs: SoftObservation,
    hard: BitVector,
    code: LinearCode,
    duals: DualSet | None,
    params: DecoderParams,
) -> DecodeOutcome:
    return ierd_decode(hard, _need_duals(duals), code, params.t_max)


def _run_pad(
    obs: SoftObservation,
    hard: BitVector,
    code: LinearCode,
    duals: DualSet | None,
    params: DecoderParams,
) -> DecodeOutcome:
    return pad_decode(obs, _need_duals(duals), code, params.t_max, params.alpha, params.epsilon)


def _run_bp(
    obs: SoftObservation,
    hard: BitVector,
    code: LinearCode,
    duals: DualSet | None,
    params: DecoderParams,
) -> DecodeOutcome:
    return bp_decode(obs, code, params.t_max)


def _run_min_sum(
    obs: SoftObservation,
    hard: BitVector,
    code: LinearCode,
    duals: DualSet | None,
    params: DecoderParams,
) -> DecodeOutcome:
    return min_sum_decode(obs, code, params.t_max)


def _run_ml(
    obs: SoftObservation,
    hard: BitVector,
    code: LinearCode,
    duals: DualSet | None,
    params: DecoderParams,
) -> DecodeOutcome:
    # BSC は硬判定（ハミング距離）、AWGN は軟判定（相関）で比べる
    received: BitVector | SoftObservation = hard if obs.kind == "bsc" else obs
    return _finish(code, ml_oracle_decode(received, code), 0, True)


DECODERS: dict[str, DecoderFn] = {
    "ierd": _run_ierd,
    "pad": _run_pad,
    "bp": _run_bp,
    "minsum": _run_min_sum,
    "ml": _run_ml,
}


def estimated_gf2_mults(decoder: str, iterations: int, n: int, dual_count: int) -> int:
    """
    GF(2) 乗算回数の見積もり。

    IERD は 1 反復あたり (|A|+|B|) n^2、PAD は ((|A|+|B|) n + 1) n。
    BP / min-sum / ML は実数演算なので 0 とする。
    """
    if decoder == "ierd":
        return dual_count * n * n * iterations
    if decoder == "pad":
        return (dual_count * n + 1) * n * iterations
    return 0
