from __future__ import annotations

import json
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

LOGGER_NAME = "dualdec"

logger = logging.getLogger(LOGGER_NAME)
logger.setLevel(logging.INFO)

# stdout は CSV 出力に使うので、ログは stderr に出す
handler = logging.StreamHandler()
handler.setFormatter(logging.Formatter("%(message)s"))
logger.handlers.clear()
logger.addHandler(handler)
logger.propagate = False


def configure_logging(level: str | int) -> None:
    """ログレベルを設定し直す（settings.log_level から呼ばれる）。"""
    logger.setLevel(level.upper() if isinstance(level, str) else level)


def log_event(event: str, *, level: int = logging.INFO, **fields: Any) -> None:
    """
    構造化ログを1行JSONで出すためのヘルパー。

    例:
        log_event("duals_sampled", count_a=2500, count_b=2500)
    """
    record: dict[str, Any] = {
        "event": event,
        "ts": time.time(),
        **fields,
    }
    logger.log(level, json.dumps(record, ensure_ascii=False, default=str))


@contextmanager
def time_block(event: str, **fields: Any) -> Iterator[None]:
    """
    処理時間を計測しつつ、成功/失敗も含めてログに出すコンテキストマネージャ。

    例:
        with time_block("simulate_point", decoder="ierd"):
            run_trials()
    """
    start = time.perf_counter()
    try:
        yield
        duration = time.perf_counter() - start
        log_event(
            event,
            duration_ms=round(duration * 1000, 3),
            success=True,
            **fields,
        )
    except Exception as exc:  # noqa: BLE001
        duration = time.perf_counter() - start
        log_event(
            event,
            level=logging.ERROR,
            duration_ms=round(duration * 1000, 3),
            success=False,
            error=str(exc),
            **fields,
        )
        raise
