"""D(n, p) generation and adversaries bounded by a per-vertex deletion budget."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from resilient_ham.digraph import Digraph
from resilient_ham.errors import ArcNotPresent, InvalidParam
from resilient_ham.rng import make_rng

logger = logging.getLogger(__name__)

_ROW_BLOCK = 256
# Float slack for floor(r * d) so that e.g. 0.29 * 100 floors to 29.
_BUDGET_EPS = 1e-9


def gen_dnp(n: int, p: float, seed: int) -> Digraph:
    """Each ordered pair (u, v), u != v, is an arc independently with probability p."""
    if n < 1:
        raise InvalidParam(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParam(f"p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    matrix = np.empty((n, n), dtype=bool)
    for start in range(0, n, _ROW_BLOCK):
        stop = min(n, start + _ROW_BLOCK)
        matrix[start:stop] = rng.random((stop - start, n)) < p
    np.fill_diagonal(matrix, False)
    return Digraph.from_adjacency(matrix)


class AdversarySpec(BaseModel):
    """Which arcs an adversary deletes, committed up front."""

    kind: Literal["random-budgeted", "oneway-cut", "custom-arc-list"]
    r: float = Field(default=0.0, ge=0.0, le=1.0)
    cut_set: list[int] | None = None
    arcs: list[tuple[int, int]] | None = None
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _kind_fields(self) -> AdversarySpec:
        if (self.cut_set is not None) != (self.kind == "oneway-cut"):
            raise ValueError("cut_set is required for, and only for, kind 'oneway-cut'")
        if self.kind == "custom-arc-list" and self.arcs is None:
            raise ValueError("kind 'custom-arc-list' requires an arc list")
        return self


class DeletionReport(BaseModel):
    """What an adversary removed."""

    kind: str
    r: float
    deleted: list[tuple[int, int]]
    per_vertex_out_frac: float
    per_vertex_in_frac: float


def _budget(r: float, degrees: np.ndarray) -> np.ndarray:
    return np.floor(r * degrees + _BUDGET_EPS).astype(np.int64)


def _max_fractions(g: Digraph, deleted: Iterable[tuple[int, int]]) -> tuple[float, float]:
    out_removed = np.zeros(g.n, dtype=np.int64)
    in_removed = np.zeros(g.n, dtype=np.int64)
    for u, v in deleted:
        out_removed[u] += 1
        in_removed[v] += 1
    out_deg = g.out_degrees()
    in_deg = g.in_degrees()
    with np.errstate(divide="ignore", invalid="ignore"):
        out_frac = np.where(out_deg > 0, out_removed / np.maximum(out_deg, 1), 0.0)
        in_frac = np.where(in_deg > 0, in_removed / np.maximum(in_deg, 1), 0.0)
    return float(out_frac.max(initial=0.0)), float(in_frac.max(initial=0.0))


def _random_budgeted(g: Digraph, spec: AdversarySpec) -> list[tuple[int, int]]:
    arcs = g.arcs()
    if spec.r == 0.0 or not arcs:
        return []
    out_left = _budget(spec.r, g.out_degrees())
    in_left = _budget(spec.r, g.in_degrees())
    order = make_rng(spec.seed).permutation(len(arcs))
    deleted: list[tuple[int, int]] = []
    for index in order.tolist():
        u, v = arcs[index]
        if out_left[u] > 0 and in_left[v] > 0:
            out_left[u] -= 1
            in_left[v] -= 1
            deleted.append((u, v))
    return sorted(deleted)


def _oneway_cut(g: Digraph, spec: AdversarySpec) -> list[tuple[int, int]]:
    assert spec.cut_set is not None
    for v in spec.cut_set:
        if not 0 <= v < g.n:
            raise InvalidParam(f"cut vertex {v} outside [0, {g.n})")
    inside = g.mask(spec.cut_set)
    return [(u, v) for u, v in g.arcs() if inside[v] and not inside[u]]


def _custom(g: Digraph, spec: AdversarySpec) -> list[tuple[int, int]]:
    assert spec.arcs is not None
    requested = [(int(u), int(v)) for u, v in spec.arcs]
    if len(set(requested)) != len(requested):
        raise InvalidParam("custom arc list contains duplicates")
    for u, v in requested:
        if not g.has_arc(u, v):
            raise ArcNotPresent(f"arc ({u}, {v}) is not in the digraph", arc=(u, v))
    return sorted(requested)


def apply_adversary(g: Digraph, spec: AdversarySpec) -> tuple[Digraph, DeletionReport]:
    """Delete arcs per `spec`; returns the attacked digraph and a report."""
    if spec.kind == "random-budgeted":
        deleted = _random_budgeted(g, spec)
    elif spec.kind == "oneway-cut":
        deleted = _oneway_cut(g, spec)
    else:
        deleted = _custom(g, spec)

    out_frac, in_frac = _max_fractions(g, deleted)
    logger.debug("adversary %s removed %d of %d arcs", spec.kind, len(deleted), g.m)
    report = DeletionReport(
        kind=spec.kind,
        r=spec.r,
        deleted=deleted,
        per_vertex_out_frac=out_frac,
        per_vertex_in_frac=in_frac,
    )
    return g.without(deleted), report


def verify_budget(g: Digraph, h_arcs: Iterable[tuple[int, int]], r: float) -> bool:
    """True iff no vertex loses more than floor(r * d) arcs in either direction."""
    removed = list(h_arcs)
    for u, v in removed:
        if not g.has_arc(u, v):
            raise ArcNotPresent(f"arc ({u}, {v}) is not in the digraph", arc=(u, v))
    out_removed = np.zeros(g.n, dtype=np.int64)
    in_removed = np.zeros(g.n, dtype=np.int64)
    for u, v in removed:
        out_removed[u] += 1
        in_removed[v] += 1
    return bool(
        (out_removed <= _budget(r, g.out_degrees())).all()
        and (in_removed <= _budget(r, g.in_degrees())).all()
    )


def default_cut_set(n: int, size: int | None = None) -> list[int]:
    """The first floor(n/2) vertices, or the first `size`."""
    count = n // 2 if size is None else size
    if not 0 <= count <= n:
        raise InvalidParam(f"cut size {count} outside [0, {n}]")
    return list(range(count))


def budget_for_beta(beta: float) -> float:
    """Deletion fraction r = 1/2 - beta used for resilience experiments."""
    if not 0.0 < beta < 0.5:
        raise InvalidParam(f"beta must lie in (0, 1/2), got {beta}")
    return 0.5 - beta
