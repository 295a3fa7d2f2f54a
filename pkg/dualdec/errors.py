from __future__ import annotations


class DualdecError(Exception):
    """dualdec が送出する例外の基底クラス。"""


class DimensionError(DualdecError, ValueError):
    """ベクトル長・行列サイズが合わない。"""


class RankError(DualdecError, ValueError):
    """フルランクを要求する操作にランク落ちの行列が渡された。"""


class CapabilityError(DualdecError, RuntimeError):
    """全探索の上限 (k など) を超えた。"""


class SamplingError(DualdecError, RuntimeError):
    """棄却サンプリングで 1 本も双対語が得られなかった。"""


class ConfigError(DualdecError, ValueError):
    """実験設定が不正。"""


class CodeFormatError(DualdecError, ValueError):
    """符号ファイル / 双対集合ファイルのパース・検証エラー。"""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
