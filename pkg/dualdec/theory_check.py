from __future__ import annotations

import textwrap
from collections.abc import Sequence
from dataclasses import dataclass, field

from dualdec.reliability import (
    complement_violations,
    dead_band_report,
    monotonicity_violations,
)

# 一覧に載せる違反の最大件数（残りは件数だけ出す）
MAX_LISTED = 10


@dataclass(frozen=True)
class TheoryRules:
    complement_n: tuple[int, ...] = (8, 16, 32)
    monotonicity_n: tuple[int, ...] = (64,)
    dead_band_n: int = 64
    design_tau: int = 2
    dead_band_taus: tuple[int, ...] = field(default=tuple(range(1, 9)))
    tol: float = 1e-3


def _listed(items: Sequence[object]) -> str:
    head = ", ".join(str(x) for x in items[:MAX_LISTED])
    rest = len(items) - MAX_LISTED
    return head + (f" ... (+{rest})" if rest > 0 else "")


def run_check(rules: TheoryRules) -> tuple[bool, str]:
    """
    W(δ,τ) の性質を厳密な有理数で確かめて Markdown にまとめる。

    補数恒等式の違反だけを失敗扱いにする。単調性と不感帯は結果を載せるだけ。
    """
    lines: list[str] = []
    complement_total = 0
    for n in rules.complement_n:
        bad = complement_violations(n)
        complement_total += len(bad)
        lines.append(f"- complement identity N={n}: **{len(bad)} violations**")
        if bad:
            lines.append(f"  - (δ, τ): {_listed(bad)}")

    for n in rules.monotonicity_n:
        bad_mono = monotonicity_violations(n)
        lines.append(
            f"- monotonicity under the sufficient condition N={n}: **{len(bad_mono)} violations**"
        )
        if bad_mono:
            lines.append(f"  - (δ, τ): {_listed(bad_mono)}")

    band = dead_band_report(rules.dead_band_n, rules.design_tau, rules.dead_band_taus, rules.tol)
    shrunk = "none"
    if band.shrunk_band is not None:
        shrunk = f"[{band.shrunk_band[0]}, {band.shrunk_band[1]}]"
    lines.append(
        f"- dead band N={band.n} (d_a={band.d_a}, d_b={band.d_b}, τ ∈ {list(band.tau_values)}): "
        f"**{len(band.violations)} / {band.checked} cells outside ±{band.tol}**, "
        f"violation-free band around N/2: {shrunk}"
    )
    if band.violations:
        cells = [f"({d}, {t}, {dev:.2e})" for d, t, dev in band.violations]
        lines.append(f"  - (δ, τ, |W-1/2|): {_listed(cells)}")

    ok = complement_total == 0
    badge = "✅" if ok else "❌"
    body = "\n".join(lines)
    md = textwrap.dedent(
        f"""
        ### Reliability Theory Report {badge}
        {{body}}

        **Rules**
        - complement_n: {list(rules.complement_n)}
        - monotonicity_n: {list(rules.monotonicity_n)}
        - design_tau: {rules.design_tau}
        - tol: {rules.tol}
        """
    ).strip()
    return ok, md.replace("{body}", body)
