from __future__ import annotations

import os
from collections.abc import Iterator

import numpy as np
import pytest

from dualdec.code_model import LinearCode, ensure_min_distance
from dualdec.gf2 import BinaryMatrix
from dualdec.settings import get_settings

HAMMING_G = ["1000110", "0100011", "0010111", "0001101"]
HAMMING_H = ["1011100", "1110010", "0111001"]


def rows_to_matrix(rows: list[str]) -> BinaryMatrix:
    return BinaryMatrix.from_array(np.array([[int(c) for c in r] for r in rows], dtype=np.uint8))


@pytest.fixture
def hamming74() -> LinearCode:
    """(7,4) ハミング符号（最小距離 3）。"""
    code = LinearCode(
        n=7,
        k=4,
        generator=rows_to_matrix(HAMMING_G),
        parity_check=rows_to_matrix(HAMMING_H),
    )
    return ensure_min_distance(code)


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    # 手元の DUALDEC_* 環境変数に左右されないようにする
    for key in list(os.environ):
        if key.upper().startswith("DUALDEC_"):
            monkeypatch.delenv(key)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
