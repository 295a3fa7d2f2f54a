"""Bit-packed linear algebra over GF(2)."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from dualdec.errors import DimensionError, RankError

WORD_BITS = 64
# ビット i はワード i // 64 の下位から i % 64 番目（リトルエンディアン固定）
WORD_DTYPE = np.dtype("<u8")


def n_words(length: int) -> int:
    return max(1, (length + WORD_BITS - 1) // WORD_BITS)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """(..., n) の 0/1 配列を (..., n_words) の uint64 ワード列に詰める。"""
    arr = np.asarray(bits, dtype=np.uint8) & 1
    n = arr.shape[-1]
    pad = n_words(n) * WORD_BITS - n
    if pad:
        widths = [(0, 0)] * (arr.ndim - 1) + [(0, pad)]
        arr = np.pad(arr, widths)
    packed = np.packbits(arr, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(WORD_DTYPE)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    """pack_bits の逆変換。"""
    raw = np.ascontiguousarray(words, dtype=WORD_DTYPE).view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder="little")[..., :length]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BitVector:
    """GF(2) 上の長さ length のベクトル（64bit ワードに詰めて保持）。"""

    length: int
    words: np.ndarray

    def __post_init__(self) -> None:
        if self.length < 0:
            raise DimensionError(f"length must be >= 0, got {self.length}")
        if self.words.shape != (n_words(self.length),):
            raise DimensionError(
                f"expected {n_words(self.length)} words for length {self.length}, "
                f"got shape {self.words.shape}"
            )
        object.__setattr__(self, "words", _frozen(self.words.astype(WORD_DTYPE, copy=False)))

    @classmethod
    def from_bits(cls, bits: str | Iterable[int] | np.ndarray) -> BitVector:
        if isinstance(bits, str):
            if set(bits) - {"0", "1"}:
                raise ValueError(f"bit string may contain only 0/1: {bits!r}")
            arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
            if arr.ndim != 1:
                raise DimensionError(f"expected a 1-D bit sequence, got shape {arr.shape}")
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("bit sequence may contain only 0/1")
        return cls(length=int(arr.shape[0]), words=pack_bits(arr))

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length=length, words=np.zeros(n_words(length), dtype=WORD_DTYPE))

    @classmethod
    def unit(cls, length: int, index: int) -> BitVector:
        return cls.zeros(length).flip(index)

    def to_array(self) -> np.ndarray:
        """0/1 の uint8 配列に展開する。"""
        return unpack_bits(self.words, self.length)

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.length:
            raise IndexError(f"bit index {index} out of range for length {self.length}")

    def __getitem__(self, index: int) -> int:
        self._check_index(index)
        word, bit = divmod(index, WORD_BITS)
        return int((int(self.words[word]) >> bit) & 1)

    def flip(self, index: int) -> BitVector:
        """index ビットを反転したベクトル（w + e_i）を返す。"""
        self._check_index(index)
        word, bit = divmod(index, WORD_BITS)
        words = self.words.copy()
        words[word] ^= np.uint64(1 << bit)
        return BitVector(self.length, words)

    @property
    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __xor__(self, other: BitVector) -> BitVector:
        _same_length(self, other)
        return BitVector(self.length, self.words ^ other.words)

    __add__ = __xor__

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())

    def __repr__(self) -> str:
        return f"BitVector({str(self)!r})"


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """GF(2) 上の rows x cols 行列。各行を BitVector と同じ詰め方で保持する。"""

    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols <= 0:
            raise DimensionError(f"invalid matrix shape {self.rows}x{self.cols}")
        if self.words.shape != (self.rows, n_words(self.cols)):
            raise DimensionError(
                f"word array shape {self.words.shape} does not match {self.rows}x{self.cols}"
            )
        object.__setattr__(self, "words", _frozen(self.words.astype(WORD_DTYPE, copy=False)))

    @classmethod
    def from_array(
        cls, array: np.ndarray | Sequence[Sequence[int]], cols: int | None = None
    ) -> BinaryMatrix:
        arr = np.asarray(array, dtype=np.uint8)
        if arr.size == 0 and not (arr.ndim == 2 and arr.shape[1] > 0):
            if cols is None:
                raise DimensionError("cols must be given for an empty matrix")
            arr = np.zeros((0, cols), dtype=np.uint8)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("matrix entries may contain only 0/1")
        return cls(rows=arr.shape[0], cols=arr.shape[1], words=pack_bits(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], cols: int | None = None) -> BinaryMatrix:
        if not rows:
            if cols is None:
                raise DimensionError("cols must be given for an empty matrix")
            return cls.from_array(np.zeros((0, cols), dtype=np.uint8))
        width = rows[0].length
        for r in rows:
            if r.length != width:
                raise DimensionError(f"row lengths differ: {r.length} != {width}")
        return cls(rows=len(rows), cols=width, words=np.stack([r.words for r in rows]))

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BinaryMatrix:
        return cls.from_array(np.zeros((rows, cols), dtype=np.uint8), cols=cols)

    @cached_property
    def _array(self) -> np.ndarray:
        return _frozen(unpack_bits(self.words, self.cols))

    def to_array(self) -> np.ndarray:
        """0/1 の uint8 配列 (rows, cols) を返す（読み取り専用）。"""
        return self._array

    def row(self, index: int) -> BitVector:
        return BitVector(self.cols, self.words[index])

    @property
    def row_data(self) -> tuple[BitVector, ...]:
        return tuple(self.row(i) for i in range(self.rows))

    @property
    def T(self) -> BinaryMatrix:  # noqa: N802
        if self.rows == 0:
            raise DimensionError("cannot transpose a matrix without rows")
        return BinaryMatrix.from_array(self.to_array().T)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.row_data)


def _same_length(x: BitVector, y: BitVector) -> None:
    if x.length != y.length:
        raise DimensionError(f"length mismatch: {x.length} != {y.length}")


def inner_product_gf2(x: BitVector, y: BitVector) -> int:
    """<x, y> mod 2。"""
    _same_length(x, y)
    return int(np.bitwise_count(x.words & y.words).sum()) & 1


def mat_vec_mul_gf2(m: BinaryMatrix, x: BitVector) -> BitVector:
    """各行との内積 mod 2 を並べたベクトル M x^T を返す。"""
    if m.cols != x.length:
        raise DimensionError(f"matrix has {m.cols} columns but vector has length {x.length}")
    parity = np.bitwise_count(m.words & x.words).sum(axis=1) & 1
    return BitVector.from_bits(parity.astype(np.uint8))


def mat_mul_gf2(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    prod = (a.to_array().astype(np.int64) @ b.to_array().astype(np.int64)) & 1
    return BinaryMatrix.from_array(prod.astype(np.uint8), cols=b.cols)


def rref(array: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """GF(2) 上の既約行階段形とピボット列を返す（行交換のみ）。"""
    a = (np.asarray(array, dtype=np.uint8) & 1).copy()
    n_rows, n_cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r >= n_rows:
            break
        candidates = np.flatnonzero(a[r:, c])
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if others.size:
            a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(m: BinaryMatrix) -> int:
    if m.rows == 0:
        return 0
    return len(rref(m.to_array())[1])


def null_space_basis(m: BinaryMatrix) -> BinaryMatrix:
    """{x : M x^T = 0} の基底を行に並べた (cols - rank) x cols 行列。"""
    if m.rows == 0:
        return BinaryMatrix.identity(m.cols)
    reduced, pivots = rref(m.to_array())
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = np.zeros((len(free), m.cols), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, p in enumerate(pivots):
            basis[t, p] = reduced[r, f]
    return BinaryMatrix.from_array(basis, cols=m.cols)


def row_reduce_systematic(m: BinaryMatrix) -> tuple[BinaryMatrix, tuple[int, ...]]:
    """
    行基本変形と列交換で [I | P] に変形する。

    戻り値の perm は「出力の列 j = 入力の列 perm[j]」。
    行 r を上から順に処理し、列 r 以降で最初に 1 が立つ列を r 列目に持ってくる。
    途中で行が 0 になったらランク落ち。
    """
    a = m.to_array().copy()
    n_rows, n_cols = a.shape
    if n_rows > n_cols:
        raise RankError(f"{n_rows}x{n_cols} matrix cannot have full row rank")
    perm = list(range(n_cols))
    for r in range(n_rows):
        ones = np.flatnonzero(a[r, r:])
        if ones.size == 0:
            raise RankError(f"matrix is rank deficient (row {r} is dependent)")
        c = r + int(ones[0])
        if c != r:
            a[:, [r, c]] = a[:, [c, r]]
            perm[r], perm[c] = perm[c], perm[r]
        others = np.flatnonzero(a[:, r])
        others = others[others != r]
        if others.size:
            a[others] ^= a[r]
    return BinaryMatrix.from_array(a), tuple(perm)
