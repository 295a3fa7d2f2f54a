"""
Reliability scores built from selected dual words.

W(δ,τ) は「重み δ の双対語と重み τ の誤りベクトルの重なりが奇数になる確率」。
WT は選んだ双対検査のうち満たされないものの数（B 側は折り返し補正つき）で、
小さいほど符号語に近い。
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.special import gammaln

from dualdec.dual_sampler import DualSet, threshold_bound
from dualdec.errors import DimensionError
from dualdec.gf2 import WORD_DTYPE, BitVector, n_words

# W(δ,τ) の厳密値は既約分数で持つ（Fraction は常に約分済み）
ExactProbability = Fraction

Fold = Literal["parity", "symmetric"]


def _comb(a: int, b: int) -> int:
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


def _check_range(n: int, delta: int, tau: int) -> None:
    if n < 1 or not 0 <= delta <= n or not 0 <= tau <= n:
        raise ValueError(
            f"need 0 <= delta, tau <= N with N >= 1, got N={n}, delta={delta}, tau={tau}"
        )


@lru_cache(maxsize=65536)
def expected_prob(n: int, delta: int, tau: int) -> ExactProbability:
    """sum_{k odd} C(τ,k) C(N-τ, δ-k) / C(N,δ) を厳密な有理数で返す。"""
    _check_range(n, delta, tau)
    odd = sum(_comb(tau, k) * _comb(n - tau, delta - k) for k in range(1, tau + 1, 2))
    return Fraction(odd, math.comb(n, delta))


def _log_comb(a: int, b: int) -> float:
    return float(gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1))


def expected_prob_float(n: int, delta: int, tau: int) -> float:
    """expected_prob の浮動小数点版（対数領域で項を作り、fsum で足す）。大きな N 向け。"""
    _check_range(n, delta, tau)
    log_total = _log_comb(n, delta)
    terms = [
        math.exp(_log_comb(tau, k) + _log_comb(n - tau, delta - k) - log_total)
        for k in range(1, tau + 1, 2)
        if 0 <= delta - k <= n - tau
    ]
    return math.fsum(terms)


def complement_identity_check(n: int, delta: int, tau: int) -> bool:
    """W(N-δ,τ) = 1 - W(δ,τ)（τ 奇数）/ W(δ,τ)（τ 偶数）が厳密に成り立つか。"""
    w = expected_prob(n, delta, tau)
    expected = 1 - w if tau % 2 == 1 else w
    return expected_prob(n, n - delta, tau) == expected


def monotonicity_condition(n: int, delta: int, tau: int) -> bool:
    """
    2τ + 2 + (√τ + 1)(δ - 3) <= N を整数演算で判定する。

    両辺を整理すると L = N - 2τ - δ + 1 >= √τ (δ - 3)。
    δ >= 3 では右辺が非負なので L >= 0 かつ L^2 >= τ (δ - 3)^2。
    δ < 3 では右辺が 0 以下なので L >= 0、または L < 0 でも L^2 <= τ (3 - δ)^2 なら成り立つ。
    """
    lhs = n - 2 * tau - delta + 1
    if delta < 3:
        return lhs >= 0 or lhs * lhs <= tau * (3 - delta) ** 2
    return lhs >= 0 and lhs * lhs >= tau * (delta - 3) ** 2


def effective_prob(n: int, delta: int, tau: int, fold: Fold = "parity") -> ExactProbability:
    """
    重み δ の検査 1 本が WT に 1 を足す確率。

    δ <= N/2 は W(δ,τ) そのもの。δ > N/2（B 側）は折り返し補正後の確率で、
    fold="parity" は τ の偶奇で場合分けする式（結果は常に W(N-δ,τ)）、
    fold="symmetric" は τ を知らない前提の min(W, 1 - W)。
    """
    w = expected_prob(n, delta, tau)
    if 2 * delta <= n:
        return w
    if fold == "parity":
        return 1 - w if tau % 2 == 1 else w
    if fold == "symmetric":
        return min(w, 1 - w)
    raise ValueError(f"unknown fold {fold!r}")


# --- 定理の網羅チェック -----------------------------------------------------------


def complement_violations(n: int) -> list[tuple[int, int]]:
    """0 <= δ, τ <= N で補数恒等式が成り立たない (δ, τ) の一覧。"""
    return [
        (delta, tau)
        for delta in range(n + 1)
        for tau in range(n + 1)
        if not complement_identity_check(n, delta, tau)
    ]


def monotonicity_violations(n: int) -> list[tuple[int, int]]:
    """条件を満たすのに W(δ,τ+1) > W(δ,τ) とならない (δ, τ) の一覧（δ >= 1）。"""
    found: list[tuple[int, int]] = []
    for delta in range(1, n + 1):
        for tau in range(n):
            if not monotonicity_condition(n, delta, tau):
                continue
            if expected_prob(n, delta, tau + 1) <= expected_prob(n, delta, tau):
                found.append((delta, tau))
    return found


@dataclass(frozen=True)
class DeadBandReport:
    """d_a < δ < d_b の帯で |W(δ,τ) - 1/2| <= tol かどうかの検査結果。"""

    n: int
    design_tau: int
    d_a: int
    d_b: int
    tol: float
    tau_values: tuple[int, ...]
    checked: int
    violations: tuple[tuple[int, int, float], ...]
    shrunk_band: tuple[int, int] | None

    @property
    def ok(self) -> bool:
        return not self.violations


def dead_band_report(
    n: int,
    design_tau: int,
    tau_values: Iterable[int],
    tol: float = 1e-3,
) -> DeadBandReport:
    """
    閾値の間（使わない重み帯）で W が 1/2 に張り付いているかを数値で確かめる。

    違反は (δ, τ, |W - 1/2|) として列挙する。shrunk_band は N/2 に最も近い δ を含む
    違反なしの最大連続区間 [lo, hi]（その δ 自体が違反なら None）。
    """
    taus = tuple(tau_values)
    d_a = math.floor(threshold_bound(n, design_tau))
    d_b = n - d_a
    deltas = [d for d in range(d_a + 1, d_b) if 0 <= d <= n]
    half = Fraction(1, 2)
    violations: list[tuple[int, int, float]] = []
    dirty: set[int] = set()
    for delta in deltas:
        for tau in taus:
            deviation = float(abs(expected_prob(n, delta, tau) - half))
            if deviation > tol:
                violations.append((delta, tau, deviation))
                dirty.add(delta)

    shrunk: tuple[int, int] | None = None
    if deltas:
        center = min(deltas, key=lambda d: (abs(2 * d - n), d))
        if center not in dirty:
            lo = hi = center
            while lo - 1 in deltas and lo - 1 not in dirty:
                lo -= 1
            while hi + 1 in deltas and hi + 1 not in dirty:
                hi += 1
            shrunk = (lo, hi)

    return DeadBandReport(
        n=n,
        design_tau=design_tau,
        d_a=d_a,
        d_b=d_b,
        tol=tol,
        tau_values=taus,
        checked=len(deltas) * len(taus),
        violations=tuple(violations),
        shrunk_band=shrunk,
    )


def wtable_rows(
    n: int, deltas: Iterable[int] | None = None, taus: Iterable[int] | None = None
) -> Iterator[tuple[int, int, int, int, float]]:
    """wtable 用に (δ, τ, 分子, 分母, float) を δ→τ の順で返す。"""
    delta_list = list(range(n + 1) if deltas is None else deltas)
    tau_list = list(range(n + 1) if taus is None else taus)
    for delta in delta_list:
        for tau in tau_list:
            w = expected_prob(n, delta, tau)
            yield delta, tau, w.numerator, w.denominator, float(w)


# --- 内在情報 WT -----------------------------------------------------------------


def _stack(vectors: Sequence[BitVector], length: int) -> np.ndarray:
    for v in vectors:
        if v.length != length:
            raise DimensionError(f"dual vector length {v.length} != word length {length}")
    if not vectors:
        return np.zeros((0, n_words(length)), dtype=WORD_DTYPE)
    return np.stack([v.words for v in vectors])


def _parities(words: np.ndarray, w: BitVector) -> np.ndarray:
    """各双対語 v について <v, w> mod 2 を並べた int32 配列。"""
    if words.shape[0] == 0:
        return np.zeros(0, dtype=np.int32)
    return (np.bitwise_count(words & w.words).sum(axis=1) & 1).astype(np.int32)


def fold_b(s: int, size: int) -> int:
    """B 側の補正: s > |B|/2 なら |B| - s。ちょうど半分のときは s のまま。"""
    return size - s if 2 * s > size else s


def wt_a(w: BitVector, set_a: Sequence[BitVector]) -> int:
    """A の検査のうち満たされないものの数。"""
    return int(_parities(_stack(set_a, w.length), w).sum())


def wt_b_adjusted(w: BitVector, set_b: Sequence[BitVector]) -> int:
    s = int(_parities(_stack(set_b, w.length), w).sum())
    return fold_b(s, len(set_b))


def wt_b_parity(w: BitVector, set_b: Sequence[BitVector], error_parity: int) -> int:
    """誤り重みの偶奇が分かっている場合の補正（奇数なら |B| - s）。解析側の照合用。"""
    s = int(_parities(_stack(set_b, w.length), w).sum())
    return len(set_b) - s if error_parity % 2 == 1 else s


def _check_word(w: BitVector, duals: DualSet) -> None:
    if w.length != duals.n:
        raise DimensionError(f"word length {w.length} != dual set length {duals.n}")


def wt_total(w: BitVector, duals: DualSet) -> int:
    _check_word(w, duals)
    s_a = int(_parities(duals.a_words, w).sum())
    s_b = int(_parities(duals.b_words, w).sum())
    return s_a + fold_b(s_b, len(duals.set_b))


@dataclass(frozen=True, eq=False)
class WtProfile:
    """各位置 i を反転したときの WT_i と、その最小・最大・最初の最小位置。"""

    values: np.ndarray
    min_value: int
    max_value: int
    argmin_index: int

    @classmethod
    def from_values(cls, values: np.ndarray) -> WtProfile:
        v = np.array(values, dtype=np.int64)
        v.setflags(write=False)
        idx = int(np.argmin(v))  # 同値なら最小インデックス
        return cls(values=v, min_value=int(v[idx]), max_value=int(v.max()), argmin_index=idx)

    def __len__(self) -> int:
        return int(self.values.shape[0])


def wt_profile(w: BitVector, duals: DualSet) -> WtProfile:
    """
    全位置の WT(w + e_i) をまとめて計算する。

    s_v = <v, w> を 1 回だけ求め、<v, w + e_i> = s_v xor v_i を使う。
    位置 i で満たされない A の検査数は |s| + colsum_i - 2 (s . A[:, i])。
    """
    _check_word(w, duals)
    if w.length == 0:
        raise DimensionError("cannot profile an empty word")
    s_a = _parities(duals.a_words, w)
    s_b = _parities(duals.b_words, w)
    a = duals.a_matrix
    b = duals.b_matrix
    count_a = s_a.sum() + a.sum(axis=0) - 2 * (s_a @ a)
    count_b = s_b.sum() + b.sum(axis=0) - 2 * (s_b @ b)
    size_b = len(duals.set_b)
    folded_b = np.where(2 * count_b > size_b, size_b - count_b, count_b)
    return WtProfile.from_values(count_a + folded_b)


def wt_profile_naive(w: BitVector, duals: DualSet) -> WtProfile:
    """位置ごとに w + e_i を作って数え直す版（照合用）。"""
    _check_word(w, duals)
    values = [
        wt_a(w.flip(i), duals.set_a) + wt_b_adjusted(w.flip(i), duals.set_b)
        for i in range(w.length)
    ]
    return WtProfile.from_values(np.asarray(values, dtype=np.int64))
