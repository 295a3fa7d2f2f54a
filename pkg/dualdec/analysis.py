"""
Analytical WER model for IERD over a BSC.

検査ごとの失敗を独立とみなし、WT(τ) の分布を重みクラスごとの二項分布の畳み込みで作る。
そこから「誤り位置を正しく反転できる確率」と成功確率の漸化式、WER(p) を求める。
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from dualdec.dual_sampler import DualSet
from dualdec.reliability import Fold, effective_prob, expected_prob_float

# これ以下の N では W(δ,τ) を厳密計算してから float にする
EXACT_MAX_N = 128

Probability = float | Fraction


@dataclass(frozen=True)
class WeightClassProfile:
    """双対語の重みクラス (d_i, cw_i) の一覧。"""

    n: int
    classes: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        weights = [d for d, _ in self.classes]
        if len(set(weights)) != len(weights):
            raise ValueError(f"class weights must be distinct: {weights}")
        for d, cw in self.classes:
            if not 1 <= d <= self.n or cw < 1:
                raise ValueError(f"invalid weight class (d={d}, cw={cw}) for n={self.n}")

    @property
    def total(self) -> int:
        return sum(cw for _, cw in self.classes)


def profile_from_duals(duals: DualSet) -> WeightClassProfile:
    counts = Counter(duals.weights())
    return WeightClassProfile(n=duals.n, classes=tuple(sorted(counts.items())))


@dataclass(frozen=True)
class WtDistribution:
    """Pr(WT(τ) = k), k = 0..total。exact=True のときは Fraction。"""

    tau: int
    pmf: tuple[Probability, ...]


def _class_prob(n: int, d: int, tau: int, fold: Fold, exact: bool) -> Probability:
    if exact or n <= EXACT_MAX_N:
        p = effective_prob(n, d, tau, fold)
        return p if exact else float(p)
    w = expected_prob_float(n, d, tau)
    if 2 * d <= n:
        return w
    if fold == "parity":
        return 1.0 - w if tau % 2 == 1 else w
    return min(w, 1.0 - w)


def _binomial_exact(cw: int, p: Fraction) -> list[Fraction]:
    return [math.comb(cw, j) * p**j * (1 - p) ** (cw - j) for j in range(cw + 1)]


def _convolve_exact(x: Sequence[Fraction], y: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(x) + len(y) - 1)
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                out[i + j] += a * b
    return out


def wt_pmf(
    profile: WeightClassProfile,
    tau: int,
    fold: Fold = "parity",
    exact: bool = False,
) -> WtDistribution:
    """
    クラスごとの Binomial(cw_i, p_τ(i)) を畳み込んで WT(τ) の分布を作る。

    p_τ(i) は重み d_i の検査 1 本が失敗する確率（B 側は折り返し補正後）。
    """
    if not 0 <= tau <= profile.n:
        raise ValueError(f"tau must be in [0, {profile.n}], got {tau}")
    return _wt_pmf(profile, tau, fold, exact)


@lru_cache(maxsize=4096)
def _wt_pmf(profile: WeightClassProfile, tau: int, fold: Fold, exact: bool) -> WtDistribution:
    if exact:
        pmf_exact: list[Fraction] = [Fraction(1)]
        for d, cw in profile.classes:
            p = _class_prob(profile.n, d, tau, fold, exact=True)
            assert isinstance(p, Fraction)
            pmf_exact = _convolve_exact(pmf_exact, _binomial_exact(cw, p))
        return WtDistribution(tau=tau, pmf=tuple(pmf_exact))

    pmf = np.ones(1)
    for d, cw in profile.classes:
        p = float(_class_prob(profile.n, d, tau, fold, exact=False))
        pmf = np.convolve(pmf, binom.pmf(np.arange(cw + 1), cw, p))
    return WtDistribution(tau=tau, pmf=tuple(float(x) for x in pmf))


def prob_greater(x: WtDistribution, y: WtDistribution) -> Probability:
    """独立とみなした Pr(X > Y) = sum_k Pr(X = k) Pr(Y < k)。"""
    if isinstance(x.pmf[0], Fraction):
        below = Fraction(0)
        total = Fraction(0)
        for k, px in enumerate(x.pmf):
            total += px * below
            if k < len(y.pmf):
                below += y.pmf[k]
        return total
    y_cdf = np.concatenate([[0.0], np.cumsum(np.asarray(y.pmf, dtype=np.float64))])
    idx = np.minimum(np.arange(len(x.pmf)), len(y.pmf))
    terms = np.asarray(x.pmf, dtype=np.float64) * y_cdf[idx]
    return float(min(1.0, math.fsum(terms)))


def flip_success_prob(
    profile: WeightClassProfile,
    tau: int,
    fold: Fold = "parity",
    exact: bool = False,
) -> Probability:
    """
    誤り位置を反転した語（重み τ-1）の WT が、正しい位置を反転した語（重み τ+1）の WT
    より小さくなる確率 Pr(WT(τ+1) > WT(τ-1))。τ >= N では τ+1 の語が無いので 0。
    """
    if tau < 1:
        raise ValueError(f"flip success needs tau >= 1, got {tau}")
    if tau >= profile.n:
        return Fraction(0) if exact else 0.0
    upper = wt_pmf(profile, tau + 1, fold, exact)
    lower = wt_pmf(profile, tau - 1, fold, exact)
    return prob_greater(upper, lower)


FlipFn = Callable[[int], Probability]


def success_recursion(
    profile: WeightClassProfile,
    tau_max: int,
    flip: FlipFn | None = None,
    fold: Fold = "parity",
    exact: bool = False,
) -> list[Probability]:
    """S(0) = 1、S(τ) = P_flip(τ) S(τ-1)。"""
    if not 0 <= tau_max <= profile.n:
        raise ValueError(f"tau_max must be in [0, {profile.n}], got {tau_max}")
    flip_fn: FlipFn = flip or (lambda t: flip_success_prob(profile, t, fold, exact))
    success: list[Probability] = [Fraction(1) if exact else 1.0]
    for tau in range(1, tau_max + 1):
        success.append(flip_fn(tau) * success[-1])
    return success


def wer_from_success(
    success: Sequence[Probability],
    n: int,
    p: float,
    include_error_free: bool = True,
) -> float:
    """
    WER = 1 - sum_τ C(n,τ) p^τ (1-p)^(n-τ) S(τ)。

    success に無い τ は S = 0 とみなす。include_error_free=False だと τ = 0 を和から外す
    （誤りなしの受信も失敗として数える書き方との比較用）。
    """
    if not 0 < p < 0.5:
        raise ValueError(f"crossover probability must be in (0, 0.5), got {p}")
    start = 0 if include_error_free else 1
    taus = np.arange(start, min(len(success), n + 1))
    weights = binom.pmf(taus, n, p)
    terms = [float(w) * float(success[t]) for w, t in zip(weights, taus, strict=True)]
    return max(0.0, 1.0 - math.fsum(terms))


def wer_bsc(
    profile: WeightClassProfile,
    n: int,
    p: float,
    tau_max: int | None = None,
    literal: bool = False,
    fold: Fold = "parity",
) -> float:
    if n != profile.n:
        raise ValueError(f"profile is for n={profile.n}, got n={n}")
    if not 0 < p < 0.5:
        raise ValueError(f"crossover probability must be in (0, 0.5), got {p}")
    success = success_recursion(profile, n if tau_max is None else tau_max, fold=fold)
    return wer_from_success(success, n, p, include_error_free=not literal)
