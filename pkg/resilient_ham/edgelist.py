"""Edge-list text format: header "n m", then m lines "u v" (arc u -> v, 0-indexed)."""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

from resilient_ham.digraph import Digraph
from resilient_ham.errors import EdgeListError


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            yield number, stripped.split()


def _parse_arc(fields: list[str], number: int, n: int | None) -> tuple[int, int]:
    if len(fields) != 2:
        raise EdgeListError(f"expected 'u v', got {' '.join(fields)!r}", line=number)
    try:
        u, v = int(fields[0]), int(fields[1])
    except ValueError:
        raise EdgeListError(f"non-integer vertex in {' '.join(fields)!r}", line=number) from None
    if u < 0 or v < 0 or (n is not None and (u >= n or v >= n)):
        raise EdgeListError(f"vertex out of range in arc ({u}, {v})", line=number)
    if u == v:
        raise EdgeListError(f"self-loop at vertex {u}", line=number)
    return u, v


def parse_arc_list(text: str, n: int | None = None) -> list[tuple[int, int]]:
    """Arc lines without the header, as used for custom adversary deletions."""
    arcs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for number, fields in _content_lines(text):
        arc = _parse_arc(fields, number, n)
        if arc in seen:
            raise EdgeListError(f"duplicate arc {arc} (first on line {seen[arc]})", line=number)
        seen[arc] = number
        arcs.append(arc)
    return arcs


def parse_edge_list(text: str) -> Digraph:
    lines = iter(_content_lines(text))
    try:
        number, header = next(lines)
    except StopIteration:
        raise EdgeListError("missing 'n m' header", line=1) from None
    if len(header) != 2:
        raise EdgeListError("header must be 'n m'", line=number)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise EdgeListError("header must hold two integers", line=number) from None
    if n < 0 or m < 0:
        raise EdgeListError("header values must be non-negative", line=number)

    arcs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    last = number
    for number, fields in lines:
        arc = _parse_arc(fields, number, n)
        if arc in seen:
            raise EdgeListError(f"duplicate arc {arc} (first on line {seen[arc]})", line=number)
        seen[arc] = number
        arcs.append(arc)
        last = number
    if len(arcs) != m:
        raise EdgeListError(f"header declares {m} arcs, found {len(arcs)}", line=last)
    return Digraph(n, arcs)


def format_edge_list(g: Digraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.arcs())
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | Path) -> Digraph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def write_edge_list(g: Digraph, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(format_edge_list(g), encoding="utf-8")
