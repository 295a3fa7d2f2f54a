"""Sampling of the low-weight (A) and high-weight (B) decoding-vector sets from the dual code."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from dualdec.code_model import LinearCode, parse_bit_row, parse_header
from dualdec.errors import CodeFormatError, DimensionError, SamplingError
from dualdec.gf2 import WORD_DTYPE, BitVector, n_words, pack_bits, unpack_bits
from dualdec.observability import log_event
from dualdec.settings import get_settings

SAMPLE_BATCH = 4096
ATTEMPTS_PER_VECTOR = 200


@dataclass(frozen=True, eq=False)
class DualSet:
    """双対符号から選んだ復号ベクトル集合 A（低重み）と B（高重み）。"""

    n: int
    set_a: tuple[BitVector, ...]
    set_b: tuple[BitVector, ...]
    d_a: int
    d_b: int
    design_tau: int

    def __post_init__(self) -> None:
        for v in (*self.set_a, *self.set_b):
            if v.length != self.n:
                raise DimensionError(f"dual vector length {v.length} != n={self.n}")

    @property
    def size(self) -> int:
        return len(self.set_a) + len(self.set_b)

    def weights(self) -> list[int]:
        return [v.weight for v in (*self.set_a, *self.set_b)]

    # 信頼度計算用のキャッシュ（詰めたワード列と展開済み 0/1 行列）

    @cached_property
    def a_words(self) -> np.ndarray:
        return _stack_words(self.set_a, self.n)

    @cached_property
    def b_words(self) -> np.ndarray:
        return _stack_words(self.set_b, self.n)

    @cached_property
    def a_matrix(self) -> np.ndarray:
        return unpack_bits(self.a_words, self.n).astype(np.int32)

    @cached_property
    def b_matrix(self) -> np.ndarray:
        return unpack_bits(self.b_words, self.n).astype(np.int32)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DualSet):
            return NotImplemented
        return (
            self.n == other.n
            and self.set_a == other.set_a
            and self.set_b == other.set_b
            and (self.d_a, self.d_b, self.design_tau)
            == (other.d_a, other.d_b, other.design_tau)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.set_a, self.set_b, self.d_a, self.d_b, self.design_tau))


def _stack_words(vectors: tuple[BitVector, ...], n: int) -> np.ndarray:
    if not vectors:
        return np.zeros((0, n_words(n)), dtype=WORD_DTYPE)
    return np.stack([v.words for v in vectors])


def threshold_bound(n: int, tau: int) -> float:
    """(N - 2τ + 3√τ + 1) / (√τ + 1)。τ = 0 では N + 1。"""
    if n < 1 or tau < 0:
        raise ValueError(f"need N >= 1 and tau >= 0, got N={n}, tau={tau}")
    if tau == 0:
        return float(n + 1)
    root = math.sqrt(tau)
    return (n - 2 * tau + 3 * root + 1) / (root + 1)


def default_design_tau(code: LinearCode) -> int:
    """最小距離が分かっていれば floor((d-1)/2)、なければ設定値。"""
    if code.min_distance is not None:
        return (code.min_distance - 1) // 2
    return get_settings().design_tau


def sample_dual_sets(
    code: LinearCode,
    count_a: int,
    count_b: int,
    design_tau: int | None = None,
    max_attempts: int | None = None,
    *,
    rng: np.random.Generator,
    d_a: int | None = None,
) -> DualSet:
    """
    双対基底（H の行）の一様ランダムな線形結合を引き、重み条件で棄却サンプリングする。

    - 重み < d_a なら A、重み > d_b なら B（両方満たすときは A を優先）
    - 全ゼロベクトルと、A/B 全体での重複は棄却
    - d_a は floor(threshold_bound) が既定。明示する場合もその値以下でなければならない
    """
    if count_a < 0 or count_b < 0 or count_a + count_b < 1:
        raise ValueError(f"need count_a + count_b >= 1, got {count_a} + {count_b}")
    n = code.n
    tau = default_design_tau(code) if design_tau is None else design_tau
    bound_floor = math.floor(threshold_bound(n, tau))
    if d_a is None:
        d_a = bound_floor
    elif d_a > bound_floor:
        raise ValueError(f"d_a={d_a} exceeds the feasibility bound {bound_floor} for tau={tau}")
    d_b = n - d_a
    if max_attempts is None:
        max_attempts = ATTEMPTS_PER_VECTOR * (count_a + count_b)

    basis = code.parity_check.to_array().astype(np.int32)
    set_a: list[BitVector] = []
    set_b: list[BitVector] = []
    seen: set[bytes] = set()
    attempts = 0

    while (len(set_a) < count_a or len(set_b) < count_b) and attempts < max_attempts:
        batch = min(SAMPLE_BATCH, max_attempts - attempts)
        attempts += batch
        coeffs = rng.integers(0, 2, size=(batch, basis.shape[0]), dtype=np.int32)
        words = ((coeffs @ basis) & 1).astype(np.uint8)
        weights = words.sum(axis=1)
        packed = pack_bits(words)
        admissible = np.flatnonzero((weights > 0) & ((weights < d_a) | (weights > d_b)))
        for idx in admissible:
            w = int(weights[idx])
            to_a = len(set_a) < count_a and w < d_a
            to_b = len(set_b) < count_b and w > d_b
            if not (to_a or to_b):
                continue
            key = packed[idx].tobytes()
            if key in seen:
                continue
            seen.add(key)
            vec = BitVector(n, packed[idx])
            (set_a if to_a else set_b).append(vec)
            if len(set_a) >= count_a and len(set_b) >= count_b:
                break

    if not set_a and not set_b:
        raise SamplingError(
            f"no admissible dual vector found in {attempts} attempts (d_a={d_a}, d_b={d_b})"
        )
    if len(set_a) < count_a or len(set_b) < count_b:
        log_event(
            "dual_sampling_shortfall",
            level=logging.WARNING,
            requested_a=count_a,
            requested_b=count_b,
            found_a=len(set_a),
            found_b=len(set_b),
            attempts=attempts,
        )
    log_event(
        "duals_sampled",
        n=n,
        count_a=len(set_a),
        count_b=len(set_b),
        d_a=d_a,
        d_b=d_b,
        design_tau=tau,
        attempts=attempts,
    )
    return DualSet(
        n=n,
        set_a=tuple(set_a),
        set_b=tuple(set_b),
        d_a=d_a,
        d_b=d_b,
        design_tau=tau,
    )


@dataclass(frozen=True)
class DualSetReport:
    """verify_dual_set の結果（不変条件ごとの違反数）。"""

    checked: int
    non_dual: int
    a_weight_violations: int
    b_weight_violations: int
    duplicates: int
    zero_vectors: int
    thresholds_ok: bool

    @property
    def ok(self) -> bool:
        return (
            self.non_dual == 0
            and self.a_weight_violations == 0
            and self.b_weight_violations == 0
            and self.duplicates == 0
            and self.zero_vectors == 0
            and self.thresholds_ok
        )


def verify_dual_set(code: LinearCode, duals: DualSet) -> DualSetReport:
    """双対性・重み条件・重複・閾値を監査する。"""
    vectors = (*duals.set_a, *duals.set_b)
    if duals.n != code.n:
        raise DimensionError(f"dual set length {duals.n} != code length {code.n}")
    g_words = code.generator.words
    non_dual = 0
    for v in vectors:
        if (np.bitwise_count(g_words & v.words).sum(axis=1) & 1).any():
            non_dual += 1
    counts = Counter(vectors)
    bound = threshold_bound(code.n, duals.design_tau)
    return DualSetReport(
        checked=len(vectors),
        non_dual=non_dual,
        a_weight_violations=sum(1 for a in duals.set_a if a.weight >= duals.d_a),
        b_weight_violations=sum(1 for b in duals.set_b if b.weight <= duals.d_b),
        duplicates=sum(c - 1 for c in counts.values()),
        zero_vectors=sum(1 for v in vectors if v.weight == 0),
        thresholds_ok=duals.d_a <= bound and duals.d_b >= code.n - bound,
    )


# --- ファイル入出力 -------------------------------------------------------------


def save_dual_set(duals: DualSet, path: Path) -> Path:
    """1 行目 "n |A| |B| d_a d_b design_tau"、続いて A の行、B の行。"""
    header = (
        f"{duals.n} {len(duals.set_a)} {len(duals.set_b)} "
        f"{duals.d_a} {duals.d_b} {duals.design_tau}"
    )
    lines = [header, *(str(v) for v in duals.set_a), *(str(v) for v in duals.set_b)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_dual_set(path: Path) -> DualSet:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CodeFormatError("empty dual set file", 1)
    n, size_a, size_b, d_a, d_b, design_tau = parse_header(lines[0], 6)
    if n < 1 or size_a < 0 or size_b < 0:
        raise CodeFormatError(f"invalid dual set header: {lines[0]!r}", 1)
    body = lines[1:]
    while body and body[-1] == "":
        body.pop()
    if len(body) != size_a + size_b:
        raise CodeFormatError(
            f"expected {size_a + size_b} dual rows, got {len(body)}", len(body) + 2
        )
    vectors = [BitVector.from_bits(parse_bit_row(t, n, i + 2)) for i, t in enumerate(body)]
    return DualSet(
        n=n,
        set_a=tuple(vectors[:size_a]),
        set_b=tuple(vectors[size_a:]),
        d_a=d_a,
        d_b=d_b,
        design_tau=design_tau,
    )
