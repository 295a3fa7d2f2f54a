"""BSC / BPSK-AWGN channel simulation and channel likelihood ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from dualdec.gf2 import BitVector

ChannelKind = Literal["bsc", "awgn"]
SnrAxis = Literal["ebn0", "esn0"]

# 尤度比は PAD で掛け算・割り算に使うのでこの範囲に収める
LR_MIN = 1e-30
LR_MAX = 1e30


def _frozen(values: np.ndarray) -> np.ndarray:
    a = np.array(values, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SoftObservation:
    """
    受信系列 r_i（ビットごと）。

    BPSK の対応は 0 -> -1, 1 -> +1。BSC でも硬判定ビットを同じ ±1 で表すので、
    PAD の r_i > 0 の分岐をそのまま使える。
    """

    samples: np.ndarray
    kind: ChannelKind
    noise_variance: float | None = None
    crossover: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _frozen(self.samples))
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if self.kind == "awgn":
            if self.noise_variance is None or self.noise_variance <= 0:
                raise ValueError(f"AWGN observation needs sigma2 > 0, got {self.noise_variance}")
        elif self.kind == "bsc":
            if self.crossover is None or not 0 < self.crossover < 0.5:
                raise ValueError(f"BSC observation needs 0 < p < 0.5, got {self.crossover}")
            if not np.isin(self.samples, (-1.0, 1.0)).all():
                raise ValueError("BSC samples must be -1 or +1")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    def __len__(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True, eq=False)
class PriorVector:
    """LR_i = p(c_i = 0 | r_i) / p(c_i = 1 | r_i)。"""

    lr: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "lr", _frozen(self.lr))
        if not (np.isfinite(self.lr).all() and (self.lr > 0).all()):
            raise ValueError("likelihood ratios must be positive and finite")

    def __len__(self) -> int:
        return int(self.lr.shape[0])


def _bpsk(c: BitVector) -> np.ndarray:
    return 2.0 * c.to_array().astype(np.float64) - 1.0


def bsc_transmit(
    c: BitVector, p: float, rng: np.random.Generator
) -> tuple[BitVector, SoftObservation]:
    """各ビットを確率 p で独立に反転する。"""
    if not 0 < p < 0.5:
        raise ValueError(f"crossover probability must be in (0, 0.5), got {p}")
    flips = (rng.random(c.length) < p).astype(np.uint8)
    hard = BitVector.from_bits(c.to_array() ^ flips)
    obs = SoftObservation(samples=_bpsk(hard), kind="bsc", crossover=p)
    return hard, obs


def awgn_transmit(c: BitVector, sigma2: float, rng: np.random.Generator) -> SoftObservation:
    if sigma2 <= 0:
        raise ValueError(f"noise variance must be > 0, got {sigma2}")
    noise = rng.normal(0.0, math.sqrt(sigma2), size=c.length)
    return SoftObservation(samples=_bpsk(c) + noise, kind="awgn", noise_variance=sigma2)


def hard_decision(obs: SoftObservation) -> BitVector:
    """r_i > 0 なら 1。"""
    return BitVector.from_bits((obs.samples > 0).astype(np.uint8))


def prior_lr(obs: SoftObservation) -> PriorVector:
    """
    AWGN: LR_i = exp(-2 r_i / σ²)
    BSC:  硬判定 0 なら (1-p)/p、1 なら p/(1-p)
    """
    if obs.kind == "awgn":
        assert obs.noise_variance is not None
        exponent = -2.0 * obs.samples / obs.noise_variance
        lr = np.exp(np.clip(exponent, math.log(LR_MIN), math.log(LR_MAX)))
    else:
        assert obs.crossover is not None
        p = obs.crossover
        lr = np.where(obs.samples < 0, (1 - p) / p, p / (1 - p))
    return PriorVector(lr=np.clip(lr, LR_MIN, LR_MAX))


def snr_to_sigma2(value_db: float, rate: float, axis: SnrAxis = "ebn0") -> float:
    """
    単位エネルギー BPSK の雑音分散。

    axis="ebn0" なら σ² = 1 / (2 R 10^(dB/10))、"esn0" なら符号化率を掛けない。
    """
    if not 0 < rate <= 1:
        raise ValueError(f"code rate must be in (0, 1], got {rate}")
    linear = 10 ** (value_db / 10)
    if axis == "ebn0":
        return 1.0 / (2 * rate * linear)
    if axis == "esn0":
        return 1.0 / (2 * linear)
    raise ValueError(f"unknown SNR axis {axis!r}")


def ebn0_to_sigma2(ebn0_db: float, rate: float) -> float:
    return snr_to_sigma2(ebn0_db, rate, "ebn0")


def trial_rng(master_seed: int, *indices: int) -> np.random.Generator:
    """(master_seed, 添字...) から独立な乱数列を作る。ワーカーの実行順に依存しない。"""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=indices))
