"""Rule-application trace shared by catalog builders and pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .bracket_core import FreshIndices


def to_jsonable(value: Any):
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(getattr(k, "name", k)): to_jsonable(v) for k, v in value.items()}
    if hasattr(value, "name") and hasattr(value, "kind"):
        return value.name
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


@dataclass
class Context:
    """Fresh-index supply plus the list of rule applications of one run."""

    fresh: FreshIndices = field(default_factory=FreshIndices)
    records: list = field(default_factory=list)

    def apply(self, rule: str, fn: Callable, *args, note: str | None = None, **kwargs):
        result = fn(*args, **kwargs)
        record = {
            "rule": rule,
            "inputs": [to_jsonable(a) for a in args],
            "output": to_jsonable(result),
        }
        extra = _details(result)
        if extra:
            record["details"] = extra
        if note:
            record["note"] = note
        self.records.append(record)
        return result


def _details(result) -> dict | None:
    solution = getattr(result, "solution", None)
    if solution is None or not hasattr(solution, "bindings"):
        return None
    out = solution.to_json()
    out["abs_determinant"] = str(abs(solution.determinant))
    out["starred"] = {s.name: str(f) for s, f in solution.bindings.items()}
    return out
