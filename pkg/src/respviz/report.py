"""Combined loss report for one source -> target view pair."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .measures import PerceptualKernel, comparison_loss, default_kernel, identification_loss
from .render import RenderedView
from .trend import trend_loss


@dataclass(frozen=True)
class LossComponent:
    per: dict  # channel (identification/comparison) or model (trend) -> value
    total: float

    def __post_init__(self):
        for value in self.per.values():
            if value < 0:
                raise ValueError("loss components must be non-negative")


@dataclass(frozen=True)
class LossReport:
    identification: LossComponent
    comparison: LossComponent
    trend: LossComponent
    flags: tuple = ()

    @property
    def totals(self) -> tuple[float, float, float]:
        return (self.identification.total, self.comparison.total, self.trend.total)


def compute_loss_report(
    source: RenderedView, target: RenderedView, kernel: PerceptualKernel | None = None
) -> LossReport:
    """All three insight-preservation losses for a source -> target pair."""
    kernel = kernel or default_kernel()
    ident_per, ident_total = identification_loss(source, target)
    comp_per, comp_total = comparison_loss(source, target, kernel)
    trend_per, trend_total, flags = trend_loss(source, target)
    return LossReport(
        identification=LossComponent(per=ident_per, total=ident_total),
        comparison=LossComponent(per=comp_per, total=comp_total),
        trend=LossComponent(per=trend_per, total=trend_total),
        flags=tuple(flags),
    )


def _jsonable_value(value: float):
    # JSON has no Infinity literal; flagged no-overlap components carry
    # the flag in `flags`, the numeric slot becomes null.
    if value is None or not math.isfinite(value):
        return None
    return value


def report_to_jsonable(report: LossReport) -> dict:
    out = {}
    for name, component in (
        ("identification", report.identification),
        ("comparison", report.comparison),
        ("trend", report.trend),
    ):
        out[name] = {
            "perChannel": {k: _jsonable_value(v) for k, v in sorted(component.per.items())},
            "total": _jsonable_value(component.total),
        }
    if report.flags:
        out["flags"] = list(report.flags)
    return out
