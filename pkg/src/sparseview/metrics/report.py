"""Metric report records and their JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class MetricReport:
    """One measured metric with its units and sampling parameters.

    Infinite values (PSNR on identical images) serialize as a null value
    with an explicit ``infinite`` flag so the JSON stays standard.
    """

    metric: str
    value: float
    units: str
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        finite = math.isfinite(self.value)
        return {
            "metric": self.metric,
            "value": self.value if finite else None,
            "infinite": not finite,
            "units": self.units,
            "parameters": self.parameters,
        }


def write_reports(path, reports: list[MetricReport]) -> None:
    with open(path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")
