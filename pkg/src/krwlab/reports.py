from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"
INFEASIBLE = "infeasible"
SKIPPED = "skipped"

STATUSES = (PASS, FAIL, VACUOUS, INFEASIBLE, SKIPPED)


@dataclass
class CheckReport:
    name: str
    status: str
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "status": self.status, "details": _plain(self.details)}


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((_plain(v) for v in value), key=repr)
    if isinstance(value, float) and value == float("-inf"):
        return "-inf"
    if hasattr(value, "item"):
        return value.item()
    return value


def status_of(ok: bool) -> str:
    return PASS if ok else FAIL
