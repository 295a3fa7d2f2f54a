"""Experiment configuration (JSON file + CLI overrides), validated with pydantic."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from dualdec.errors import ConfigError
from dualdec.settings import get_settings

DecoderName = Literal["ierd", "pad", "bp", "minsum", "ml"]


class _Strict(BaseModel):
    # 設定ファイルのタイプミスは黙って無視しない
    model_config = ConfigDict(extra="forbid")


class CodeSource(_Strict):
    """符号はファイルから読むか、(n, k, seed) で組織符号を生成する。"""

    path: Path | None = None
    n: int | None = Field(default=None, ge=2)
    k: int | None = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _one_source(self) -> CodeSource:
        if self.path is None:
            if self.n is None or self.k is None:
                raise ValueError("code_source needs either path or both n and k")
            if not 0 < self.k < self.n:
                raise ValueError(f"need 0 < k < n, got n={self.n}, k={self.k}")
        elif self.n is not None or self.k is not None:
            raise ValueError("code_source takes either path or n/k, not both")
        return self


class DualCounts(_Strict):
    count_a: int = Field(default=2500, ge=0)
    count_b: int = Field(default=2500, ge=0)
    design_tau: int | None = Field(default=None, ge=0)
    seed: int = Field(default=0, ge=0)
    path: Path | None = None

    @model_validator(mode="after")
    def _nonempty(self) -> DualCounts:
        if self.path is None and self.count_a + self.count_b < 1:
            raise ValueError("dual_counts needs count_a + count_b >= 1")
        return self


class ChannelSpec(_Strict):
    """BSC なら values はクロスオーバー確率、AWGN なら SNR [dB]。"""

    kind: Literal["bsc", "awgn"]
    values: list[float] = Field(min_length=1)
    axis: Literal["ebn0", "esn0"] = "ebn0"

    @model_validator(mode="after")
    def _check_values(self) -> ChannelSpec:
        if self.kind == "bsc":
            bad = [p for p in self.values if not 0 < p < 0.5]
            if bad:
                raise ValueError(f"BSC crossover probabilities must be in (0, 0.5): {bad}")
        return self


class StopRule(_Strict):
    kind: Literal["fixed", "min_block_errors"] = "fixed"
    min_block_errors: int = Field(default_factory=lambda: get_settings().min_block_errors, ge=1)
    trial_cap: int = Field(default_factory=lambda: get_settings().trial_cap, ge=1)
    chunk_size: int = Field(default=500, ge=1)


class ExperimentConfig(_Strict):
    experiment_id: str = "exp"
    code_source: CodeSource
    dual_counts: DualCounts = Field(default_factory=DualCounts)
    channel: ChannelSpec
    decoders: list[DecoderName] = Field(min_length=1)
    t_max: int = Field(default_factory=lambda: get_settings().t_max, ge=1)
    alpha: float = Field(default_factory=lambda: get_settings().alpha, gt=0)
    epsilon: float = Field(default_factory=lambda: get_settings().epsilon, gt=0)
    trials: int = Field(default=1000, ge=1)
    stop_rule: StopRule = Field(default_factory=StopRule)
    master_seed: int = Field(default=0, ge=0)
    # 経過時間を CSV に入れると同じ設定でも出力が変わるので既定では記録しない
    record_timing: bool = False

    @model_validator(mode="after")
    def _unique_decoders(self) -> ExperimentConfig:
        if len(set(self.decoders)) != len(self.decoders):
            raise ValueError(f"decoders must not repeat: {self.decoders}")
        return self


def _summarize(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment config: {_summarize(exc)}") from exc


def load_config(path: Path) -> ExperimentConfig:
    """JSON ファイルを読み込んで検証する。ファイルが読めない場合の OSError はそのまま上げる。"""
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)


def apply_overrides(config: ExperimentConfig, **updates: Any) -> ExperimentConfig:
    """None 以外の値で上書きし、全体を検証し直す。"""
    changes = {k: v for k, v in updates.items() if v is not None}
    if not changes:
        return config
    data = config.model_dump(mode="json")
    data.update(changes)
    return parse_config(data)
