from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class MeasureResult:
    """Value of a correlation measure plus the optimizer argument attaining it."""

    value: float
    argument: Any = None
    certificate: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)
