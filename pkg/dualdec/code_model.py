"""Binary linear block codes C(n, k): generation, encoding, syndromes, file I/O."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from dualdec.errors import CapabilityError, CodeFormatError, DimensionError, RankError
from dualdec.gf2 import (
    WORD_DTYPE,
    BinaryMatrix,
    BitVector,
    gf2_rank,
    mat_mul_gf2,
    mat_vec_mul_gf2,
    null_space_basis,
    unpack_bits,
)
from dualdec.observability import log_event

MIN_DISTANCE_MAX_K = 24
CODEBOOK_MAX_K = 20


@dataclass(frozen=True, eq=False)
class LinearCode:
    """生成行列 G (k x n) と検査行列 H ((n-k) x n) を持つ二元線形符号。"""

    n: int
    k: int
    generator: BinaryMatrix
    parity_check: BinaryMatrix
    min_distance: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.k < self.n:
            raise DimensionError(f"need 0 < k < n, got n={self.n}, k={self.k}")
        if (self.generator.rows, self.generator.cols) != (self.k, self.n):
            raise DimensionError(
                f"generator is {self.generator.rows}x{self.generator.cols}, "
                f"expected {self.k}x{self.n}"
            )
        if (self.parity_check.rows, self.parity_check.cols) != (self.n - self.k, self.n):
            raise DimensionError(
                f"parity_check is {self.parity_check.rows}x{self.parity_check.cols}, "
                f"expected {self.n - self.k}x{self.n}"
            )

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def _codeword_words(self) -> np.ndarray:
        return _span_table(self.generator.words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearCode):
            return NotImplemented
        return self.generator == other.generator and self.parity_check == other.parity_check

    def __hash__(self) -> int:
        return hash((self.generator, self.parity_check))


def _span_table(rows: np.ndarray) -> np.ndarray:
    """行の全 GF(2) 線形結合。インデックス t のビット j が行 j の選択に対応する。"""
    table = np.zeros((1, rows.shape[1]), dtype=WORD_DTYPE)
    for row in rows:
        table = np.concatenate([table, table ^ row])
    return table


def validate_code(code: LinearCode) -> None:
    """rank(G)=k, rank(H)=n-k, G H^T = 0 を確認する。"""
    if gf2_rank(code.generator) != code.k:
        raise RankError(f"generator does not have rank k={code.k}")
    if gf2_rank(code.parity_check) != code.n - code.k:
        raise RankError(f"parity_check does not have rank n-k={code.n - code.k}")
    product = mat_mul_gf2(code.generator, code.parity_check.T)
    if product.to_array().any():
        raise ValueError("generator and parity_check are not orthogonal (G H^T != 0)")


def random_systematic_code(n: int, k: int, rng: np.random.Generator) -> LinearCode:
    """G = [I_k | P]（P は一様乱数）、H = [P^T | I_{n-k}] の組織符号を作る。"""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n}, k={k}")
    p = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    g = np.hstack([np.eye(k, dtype=np.uint8), p])
    h = np.hstack([p.T, np.eye(n - k, dtype=np.uint8)])
    code = LinearCode(
        n=n,
        k=k,
        generator=BinaryMatrix.from_array(g),
        parity_check=BinaryMatrix.from_array(h),
    )
    log_event("code_generated", n=n, k=k)
    return code


def code_from_generator(generator: BinaryMatrix) -> LinearCode:
    """任意のフルランク G から符号を作る。組織形なら H = [P^T | I]、それ以外は零空間から。"""
    k, n = generator.rows, generator.cols
    if gf2_rank(generator) != k:
        raise RankError(f"generator does not have full row rank {k}")
    g = generator.to_array()
    if k < n and np.array_equal(g[:, :k], np.eye(k, dtype=np.uint8)):
        h = BinaryMatrix.from_array(np.hstack([g[:, k:].T, np.eye(n - k, dtype=np.uint8)]))
    else:
        h = null_space_basis(generator)
    return LinearCode(n=n, k=k, generator=generator, parity_check=h)


def encode(code: LinearCode, message: BitVector) -> BitVector:
    """message . G を返す。"""
    if message.length != code.k:
        raise DimensionError(f"message length {message.length} != k={code.k}")
    selected = code.generator.words[message.to_array().astype(bool)]
    if selected.shape[0] == 0:
        return BitVector.zeros(code.n)
    return BitVector(code.n, np.bitwise_xor.reduce(selected, axis=0))


def syndrome_check(code: LinearCode, word: BitVector) -> BitVector:
    """H . word^T。符号語のときに限り全ゼロ。"""
    if word.length != code.n:
        raise DimensionError(f"word length {word.length} != n={code.n}")
    return mat_vec_mul_gf2(code.parity_check, word)


def is_codeword(code: LinearCode, word: BitVector) -> bool:
    return syndrome_check(code, word).weight == 0


def brute_force_min_distance(code: LinearCode) -> int:
    """非零符号語 2^k - 1 個の最小重み（= 最小距離）。k <= 24 まで。"""
    if code.k > MIN_DISTANCE_MAX_K:
        raise CapabilityError(
            f"brute-force minimum distance supports k <= {MIN_DISTANCE_MAX_K}, got k={code.k}"
        )
    rows = code.generator.words
    low = min(code.k, 12)
    low_table = _span_table(rows[:low])
    high_table = _span_table(rows[low:])
    best = code.n
    for h, offset in enumerate(high_table):
        weights = np.bitwise_count(low_table ^ offset).sum(axis=1)
        if h == 0:
            weights = weights[1:]
        if weights.size:
            best = min(best, int(weights.min()))
    return best


def ensure_min_distance(code: LinearCode) -> LinearCode:
    """最小距離が未計算なら全探索で埋める（k が大きい場合はそのまま返す）。"""
    if code.min_distance is not None or code.k > MIN_DISTANCE_MAX_K:
        return code
    return replace(code, min_distance=brute_force_min_distance(code))


def codebook(code: LinearCode) -> np.ndarray:
    """全 2^k 符号語を (2^k, n) の 0/1 配列で返す。行 t はメッセージ sum_j m_j 2^j に対応。"""
    if code.k > CODEBOOK_MAX_K:
        raise CapabilityError(
            f"codebook enumeration supports k <= {CODEBOOK_MAX_K}, got k={code.k}"
        )
    return unpack_bits(code._codeword_words, code.n)


# --- ファイル入出力 -------------------------------------------------------------


def _format_rows(m: BinaryMatrix) -> list[str]:
    return [str(r) for r in m.row_data]


def save_code(code: LinearCode, path: Path) -> Path:
    """1 行目 "n k"、続いて G の k 行、空行、H の n-k 行。"""
    lines = [
        f"{code.n} {code.k}",
        *_format_rows(code.generator),
        "",
        *_format_rows(code.parity_check),
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def parse_bit_row(text: str, width: int, line_no: int) -> np.ndarray:
    """width 文字の 0/1 行をパースする。位置付きの CodeFormatError を送出。"""
    for col, ch in enumerate(text, start=1):
        if ch not in "01":
            raise CodeFormatError(f"unexpected character {ch!r} in bit row", line_no, col)
    if len(text) != width:
        raise CodeFormatError(
            f"bit row has {len(text)} characters, expected {width}", line_no, len(text) + 1
        )
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def parse_header(text: str, fields: int, line_no: int = 1) -> list[int]:
    parts = text.split()
    if len(parts) != fields or not all(p.lstrip("-").isdigit() for p in parts):
        raise CodeFormatError(f"header must be {fields} integers: {text!r}", line_no)
    return [int(p) for p in parts]


def load_code(path: Path) -> LinearCode:
    """save_code 形式のファイルを読み込んで検証する（H が無ければ再計算）。"""
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CodeFormatError("empty code file", 1)
    n, k = parse_header(lines[0], 2)
    if not 0 < k < n:
        raise CodeFormatError(f"need 0 < k < n, got n={n}, k={k}", 1)
    if len(lines) < 1 + k:
        raise CodeFormatError(f"expected {k} generator rows", len(lines) + 1)
    g = np.stack([parse_bit_row(lines[i], n, i + 1) for i in range(1, 1 + k)])

    rest = lines[1 + k :]
    while rest and rest[-1] == "":
        rest.pop()
    h: np.ndarray | None = None
    if rest:
        if rest[0] != "":
            raise CodeFormatError("expected a blank line before the parity-check rows", k + 2)
        h_lines = rest[1:]
        if len(h_lines) != n - k:
            raise CodeFormatError(
                f"expected {n - k} parity-check rows, got {len(h_lines)}", k + 3
            )
        h = np.stack([parse_bit_row(t, n, k + 3 + i) for i, t in enumerate(h_lines)])

    try:
        generator = BinaryMatrix.from_array(g)
        if h is None:
            code = code_from_generator(generator)
        else:
            parity_check = BinaryMatrix.from_array(h)
            code = LinearCode(n=n, k=k, generator=generator, parity_check=parity_check)
        validate_code(code)
    except (RankError, DimensionError, ValueError) as exc:
        if isinstance(exc, CodeFormatError):
            raise
        raise CodeFormatError(f"invalid code in {path}: {exc}") from exc
    return code
