"""Typed failures shared by every stage of the pipeline."""

from __future__ import annotations

from collections.abc import Mapping, Set
from typing import Any


def _jsonable(value: Any) -> Any:
    if isinstance(value, (Set, frozenset)):
        return sorted(_jsonable(item) for item in value)
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if hasattr(value, "vertices"):
        return list(value.vertices)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class ResilientHamError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "internal"

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    def payload_context(self) -> dict[str, Any]:
        return _jsonable(self.context)


class InvalidVertex(ResilientHamError):
    code = "invalid_vertex"


class InvalidParam(ResilientHamError):
    code = "invalid_param"


class EmptyPattern(ResilientHamError):
    code = "empty_pattern"


class EdgeListError(ResilientHamError):
    code = "edge_list"

    def __init__(self, message: str, *, line: int) -> None:
        super().__init__(f"line {line}: {message}", line=line)
        self.line = line


class ArcNotPresent(ResilientHamError):
    code = "arc_not_present"


class TooLargeForExact(ResilientHamError):
    code = "too_large_for_exact"


class GraphTooLarge(ResilientHamError):
    code = "graph_too_large"


class NotAPartition(ResilientHamError):
    code = "not_a_partition"


class HypothesisViolated(ResilientHamError):
    code = "hypothesis_violated"

    def __init__(self, message: str, *, witness: Any = None, **context: Any) -> None:
        super().__init__(message, witness=witness, **context)
        self.witness = witness


class BudgetExhausted(ResilientHamError):
    code = "budget_exhausted"

    def __init__(self, message: str, *, best: Any = None, **context: Any) -> None:
        super().__init__(message, best=best, **context)
        self.best = best


class HallViolation(ResilientHamError):
    """A left-side set X with fewer than `demand * |X|` neighbours on the right."""

    code = "hall_violation"

    def __init__(
        self,
        message: str,
        *,
        witness: frozenset[int],
        neighborhood: frozenset[int],
        demand: int = 1,
    ) -> None:
        super().__init__(message, witness=witness, neighborhood=neighborhood, demand=demand)
        self.witness = witness
        self.neighborhood = neighborhood
        self.demand = demand


class ExpansionFailed(ResilientHamError):
    code = "expansion_failed"

    def __init__(self, message: str, *, level: int, sizes: tuple[int, ...] = ()) -> None:
        super().__init__(message, level=level, sizes=sizes)
        self.level = level
        self.sizes = sizes


class NoBridge(ResilientHamError):
    code = "no_bridge"


class PartialResult(ResilientHamError):
    """Fewer pairs connected than requested. The carried walks stay reserved."""

    code = "partial_result"

    def __init__(self, message: str, *, connected: list[int], walks: list[Any]) -> None:
        super().__init__(message, connected=connected, walks=len(walks))
        self.connected = connected
        self.walks = walks


class NotAbsorbable(ResilientHamError):
    code = "not_absorbable"


class InternalError(ResilientHamError):
    """An invariant that must never fail did fail."""

    code = "internal"
