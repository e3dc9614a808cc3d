from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Report:
    verdict: str
    witness: dict[str, Any] | None = None
    bounds: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "none")

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"verdict": self.verdict, "bounds": self.bounds}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.notes:
            d["notes"] = self.notes
        return d
