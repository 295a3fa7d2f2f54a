from __future__ import annotations

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class DualdecSettings(BaseSettings):
    # ワーカー数（--threads で上書き）
    threads: int = 1
    log_level: str = "INFO"

    # デコーダ既定値（T_max = 15 は比較実験の設定に合わせる）
    t_max: int = 15
    alpha: float = 1.0
    epsilon: float = 1e-9

    # 最小距離が不明なときの設計用誤り重み
    design_tau: int = 2

    # 停止規則の既定値
    trial_cap: int = 1_000_000
    min_block_errors: int = 100

    model_config = SettingsConfigDict(
        env_prefix="DUALDEC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # ← .envに知らないキーがあっても落ちないようにする
        case_sensitive=False,
    )


@lru_cache(maxsize=1)
def get_settings() -> DualdecSettings:
    """環境変数 / .env から設定を読み込む（テストでは cache_clear() で再読込）。"""
    return DualdecSettings()
