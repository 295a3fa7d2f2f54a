from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from dualdec.code_model import (
    LinearCode,
    brute_force_min_distance,
    code_from_generator,
    codebook,
    encode,
    ensure_min_distance,
    is_codeword,
    load_code,
    random_systematic_code,
    save_code,
    syndrome_check,
    validate_code,
)
from dualdec.errors import CapabilityError, CodeFormatError, DimensionError
from dualdec.gf2 import BinaryMatrix, BitVector

HAMMING_G = ["1000110", "0100011", "0010111", "0001101"]
HAMMING_H = ["1011100", "1110010", "0111001"]


def test_hamming_encode_and_syndrome(hamming74: LinearCode) -> None:
    """全メッセージの符号語はシンドローム 0、1 ビット誤りは H の列になる。"""
    validate_code(hamming74)
    assert hamming74.min_distance == 3
    h = hamming74.parity_check.to_array()
    for m in range(16):
        msg = BitVector.from_bits([(m >> j) & 1 for j in range(4)])
        c = encode(hamming74, msg)
        assert is_codeword(hamming74, c)
        # 組織符号なので先頭 k ビットがメッセージ
        assert np.array_equal(c.to_array()[:4], msg.to_array())
        for i in range(7):
            s = syndrome_check(hamming74, c.flip(i))
            assert np.array_equal(s.to_array(), h[:, i])


def test_encode_rejects_wrong_length(hamming74: LinearCode) -> None:
    with pytest.raises(DimensionError):
        encode(hamming74, BitVector.zeros(5))
    with pytest.raises(DimensionError):
        syndrome_check(hamming74, BitVector.zeros(8))


def test_random_systematic_code_is_valid() -> None:
    rng = np.random.default_rng(11)
    for n, k in [(10, 4), (32, 16), (63, 30), (130, 64)]:
        code = random_systematic_code(n, k, rng)
        validate_code(code)
        g = code.generator.to_array()
        assert np.array_equal(g[:, :k], np.eye(k, dtype=np.uint8))
        assert code.rate == pytest.approx(k / n)


def test_random_systematic_code_is_reproducible() -> None:
    a = random_systematic_code(24, 12, np.random.default_rng(5))
    b = random_systematic_code(24, 12, np.random.default_rng(5))
    assert a == b


def test_random_systematic_code_rejects_bad_dimensions() -> None:
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        random_systematic_code(8, 8, rng)
    with pytest.raises(ValueError):
        random_systematic_code(8, 0, rng)


def test_code_from_non_systematic_generator() -> None:
    """組織形でない G でも零空間から H を作り、G H^T = 0 になる。"""
    g = BinaryMatrix.from_array([[1, 1, 0, 1, 0, 0], [0, 1, 1, 0, 1, 0], [1, 0, 1, 0, 0, 1]])
    code = code_from_generator(g)
    validate_code(code)
    assert code.parity_check.rows == 3


def test_min_distance_matches_codebook(hamming74: LinearCode) -> None:
    rng = np.random.default_rng(7)
    for _ in range(10):
        code = random_systematic_code(15, 6, rng)
        book = codebook(code)
        expected = int(book[1:].sum(axis=1).min())
        assert brute_force_min_distance(code) == expected
    assert brute_force_min_distance(hamming74) == 3


def test_codebook_order_and_capability(hamming74: LinearCode) -> None:
    """codebook の行 t はメッセージ sum_j m_j 2^j の符号語。"""
    book = codebook(hamming74)
    assert book.shape == (16, 7)
    for t in range(16):
        msg = BitVector.from_bits([(t >> j) & 1 for j in range(4)])
        assert np.array_equal(book[t], encode(hamming74, msg).to_array())

    big = random_systematic_code(30, 21, np.random.default_rng(0))
    with pytest.raises(CapabilityError):
        codebook(big)
    # k が大きいと最小距離は計算せずにそのまま返す
    huge = random_systematic_code(60, 30, np.random.default_rng(0))
    assert ensure_min_distance(huge).min_distance is None
    with pytest.raises(CapabilityError):
        brute_force_min_distance(huge)


def test_save_and_load_code(tmp_path: Path, hamming74: LinearCode) -> None:
    path = save_code(hamming74, tmp_path / "codes" / "hamming.txt")
    text = path.read_text(encoding="utf-8").splitlines()
    assert text[0] == "7 4"
    assert text[1:5] == HAMMING_G
    assert text[5] == ""
    assert text[6:] == HAMMING_H
    assert load_code(path) == hamming74


def test_load_code_without_parity_check(tmp_path: Path, hamming74: LinearCode) -> None:
    """H が無いファイルは G から H を作り直す。"""
    path = tmp_path / "g_only.txt"
    path.write_text("7 4\n" + "\n".join(HAMMING_G) + "\n", encoding="utf-8")
    code = load_code(path)
    assert code.generator == hamming74.generator
    validate_code(code)


def test_load_code_reports_position(tmp_path: Path) -> None:
    path = tmp_path / "bad.txt"
    rows = list(HAMMING_G)
    rows[1] = "01x0011"
    path.write_text("7 4\n" + "\n".join(rows) + "\n", encoding="utf-8")
    with pytest.raises(CodeFormatError) as excinfo:
        load_code(path)
    assert excinfo.value.line == 3
    assert excinfo.value.column == 3


def test_load_code_rejects_non_orthogonal_h(tmp_path: Path) -> None:
    path = tmp_path / "bad_h.txt"
    h = ["1011000", *HAMMING_H[1:]]
    path.write_text("7 4\n" + "\n".join(HAMMING_G) + "\n\n" + "\n".join(h) + "\n")
    with pytest.raises(CodeFormatError, match="orthogonal"):
        load_code(path)


@pytest.mark.parametrize(
    "content",
    [
        "",
        "7\n",
        "7 4\n1000110\n",
        "7 4\n" + "\n".join(HAMMING_G) + "\n1011100\n",
        "7 4\n" + "\n".join(HAMMING_G) + "\n\n1011100\n",
        "7 4\n100011\n0100011\n0010111\n0001101\n",
    ],
)
def test_load_code_rejects_malformed_files(tmp_path: Path, content: str) -> None:
    path = tmp_path / "code.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(CodeFormatError):
        load_code(path)


def test_load_code_missing_file(tmp_path: Path) -> None:
    with pytest.raises(OSError):
        load_code(tmp_path / "missing.txt")


def test_linear_code_checks_shapes(hamming74: LinearCode) -> None:
    with pytest.raises(DimensionError):
        LinearCode(
            n=7,
            k=3,
            generator=hamming74.generator,
            parity_check=hamming74.parity_check,
        )


@pytest.mark.parametrize(("n", "k"), [(7, 1), (10, 4), (16, 8), (20, 12)])
def test_encode_is_injective(n: int, k: int) -> None:
    """全 2^k メッセージの符号語が互いに異なる。"""
    code = random_systematic_code(n, k, np.random.default_rng(n + k))
    book = codebook(code)
    assert book.shape == (2**k, n)
    assert len(np.unique(book, axis=0)) == 2**k
    if k <= 8:
        words = {
            encode(code, BitVector.from_bits([(t >> j) & 1 for j in range(k)]))
            for t in range(2**k)
        }
        assert len(words) == 2**k
