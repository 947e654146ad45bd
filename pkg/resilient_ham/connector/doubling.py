"""Tree-doubling connection.

Every unconnected pair grows a sigma-tree at each end. Round s connects
leaf pairs of same-index trees by kappa-walks, kappa = sigma(s+1..l-s),
keeps at most one walk per tree, and doubles the surviving trees through
a 2-matching into the next level set.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from resilient_ham.connector.base import ConnectRequest, ReservationLedger
from resilient_ham.connector.walks import connect_half_pairs
from resilient_ham.digraph import Digraph, Sign, SignPattern, VertexSet, Walk
from resilient_ham.errors import (
    BudgetExhausted,
    HallViolation,
    HypothesisViolated,
    InternalError,
    PartialResult,
)
from resilient_ham.matcher import two_matching
from resilient_ham.partitioner import PartitionRequest, random_partition_with_degrees

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class SigmaTree:
    """Rooted tree whose root-to-leaf paths are sigma^depth-walks (A side) or reversed-pattern walks (B side)."""

    root: int
    side: str
    parent: dict[int, int] = field(default_factory=dict)
    leaves: list[int] = field(default_factory=list)
    depth: int = 0

    def __post_init__(self) -> None:
        if not self.leaves:
            self.leaves = [self.root]

    def path_to(self, leaf: int) -> list[int]:
        path = [leaf]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return list(reversed(path))

    def vertices(self) -> VertexSet:
        return frozenset(self.parent) | {self.root}

    def extend(self, children: dict[int, list[int]]) -> None:
        grown: list[int] = []
        for leaf in self.leaves:
            for child in children[leaf]:
                self.parent[child] = leaf
                grown.append(child)
        self.leaves = sorted(grown)
        self.depth += 1


@dataclass(frozen=True, slots=True)
class RoundTrace:
    round: int
    connected: int
    walks: int
    reservoir_free: int

    def line(self) -> str:
        return f"round={self.round} connected={self.connected} walks={self.walks} reservoir={self.reservoir_free}"


@dataclass(slots=True)
class DoublingState:
    """Per-attempt bookkeeping for one connect call."""

    request: ConnectRequest
    rounds: int
    level_size: int
    reservoir_a: np.ndarray
    reservoir_b: np.ndarray
    levels_a: list[VertexSet]
    levels_b: list[VertexSet]
    trees_a: dict[int, SigmaTree]
    trees_b: dict[int, SigmaTree]
    walks: dict[int, Walk] = field(default_factory=dict)

    @property
    def unconnected(self) -> list[int]:
        return sorted(self.trees_a)


def round_count(t: int) -> int:
    """m = ceil(log2 t) + 1."""
    return (t - 1).bit_length() + 1 if t > 0 else 0


def expected_connected(t: int, s: int, rounds: int) -> int:
    """|I_s| = t - ceil(t / 2^s) before the last round, t after it."""
    if s >= rounds:
        return t
    return t - math.ceil(t / 2**s)


class DoublingStrategy:
    name = "doubling"

    def __init__(
        self,
        *,
        retries: int = 2,
        level_size: int | None = None,
        level_factor: float = 1.0,
        gamma: float = 0.1,
        threshold: int = 1,
        budget: int = 20_000,
        bridge_attempts: int = 64,
        debug_invariants: bool = True,
    ) -> None:
        self.retries = retries
        self.level_size = level_size
        self.level_factor = level_factor
        self.gamma = gamma
        self.threshold = threshold
        self.budget = budget
        self.bridge_attempts = bridge_attempts
        self.debug_invariants = debug_invariants
        self.traces: list[RoundTrace] = []

    def level_size_for(self, t: int) -> int:
        if self.level_size is not None:
            return self.level_size
        return max(2, math.ceil(self.level_factor * 2 * t))

    def connect(
        self,
        g: Digraph,
        request: ConnectRequest,
        ledger: ReservationLedger,
        rng: np.random.Generator,
        *,
        tag: str,
    ) -> list[Walk]:
        if request.t == 0:
            return []
        rounds = round_count(request.t)
        core = len(request.sigma) - 2 * (rounds - 1)
        if core < 1:
            raise HypothesisViolated(
                f"pattern of length {len(request.sigma)} is too short for {rounds} doubling rounds",
                witness=[len(request.sigma), rounds],
            )
        failures: list[str] = []
        for attempt in range(self.retries):
            self.traces = []
            state = self._setup(g, request, ledger, rng)
            try:
                for s in range(rounds):
                    self._round(g, state, s, ledger, rng, tag)
            except (PartialResult, HallViolation) as exc:
                failures.append(f"{exc.code}: {exc.message}")
                logger.debug("doubling attempt %d failed: %s", attempt, exc.message)
                for walk in state.walks.values():
                    ledger.release(walk.interior)
                continue
            return [state.walks[index] for index in range(request.t)]
        raise BudgetExhausted(
            f"tree doubling failed after {self.retries} attempts",
            failures=failures,
            traces=[trace.line() for trace in self.traces],
        )

    def _setup(
        self,
        g: Digraph,
        request: ConnectRequest,
        ledger: ReservationLedger,
        rng: np.random.Generator,
    ) -> DoublingState:
        rounds = round_count(request.t)
        free = ledger.free_mask(g.mask(request.reservoir))
        universe = frozenset(np.nonzero(free)[0].tolist())
        h = self.level_size_for(request.t)
        levels = 2 * (rounds - 1)
        rest = len(universe) - levels * h
        if rest < 2:
            raise HypothesisViolated(
                f"reservoir of {len(universe)} cannot hold {levels} level sets of {h}",
                witness=[len(universe), levels, h],
            )
        side = rest // 2
        # no degree constraint on the level split
        split = PartitionRequest(
            universe=universe,
            sizes=(side, side) + (h,) * levels,
            c=0.5,
            eps=0.0,
            p=1.0,
        )
        parts = random_partition_with_degrees(g, split, int(rng.integers(2**63)))
        half = rounds - 1
        trees_a = {i: SigmaTree(root=a, side="A") for i, (a, _) in enumerate(request.pairs)}
        trees_b = {i: SigmaTree(root=b, side="B") for i, (_, b) in enumerate(request.pairs)}
        return DoublingState(
            request=request,
            rounds=rounds,
            level_size=h,
            reservoir_a=g.mask(parts[0]),
            reservoir_b=g.mask(parts[1]),
            levels_a=list(parts[2 : 2 + half]),
            levels_b=list(parts[2 + half :]),
            trees_a=trees_a,
            trees_b=trees_b,
        )

    def _round(
        self,
        g: Digraph,
        state: DoublingState,
        s: int,
        ledger: ReservationLedger,
        rng: np.random.Generator,
        tag: str,
    ) -> None:
        sigma = state.request.sigma
        length = len(sigma)
        kappa = sigma.slice(s, length - s)
        last = s == state.rounds - 1
        open_indices = state.unconnected

        leaf_pairs: list[tuple[int, int]] = []
        owner: list[int] = []
        for index in open_indices:
            for a_leaf, b_leaf in zip(state.trees_a[index].leaves, state.trees_b[index].leaves):
                leaf_pairs.append((a_leaf, b_leaf))
                owner.append(index)

        need = len(open_indices) if last else len(open_indices) // 2
        target = max(len(leaf_pairs) // 2, need)
        try:
            connected, walks = connect_half_pairs(
                g,
                leaf_pairs,
                state.reservoir_a,
                state.reservoir_b,
                kappa,
                ledger,
                rng,
                target=target,
                gamma=self.gamma,
                threshold=self.threshold,
                tag=tag,
                budget=self.budget,
                bridge_attempts=self.bridge_attempts,
            )
        except PartialResult as exc:
            connected, walks = exc.connected, exc.walks

        chosen: dict[int, tuple[int, Walk]] = {}
        for pair_index, walk in sorted(zip(connected, walks), key=lambda item: leaf_pairs[item[0]][0]):
            index = owner[pair_index]
            if index not in chosen and len(chosen) < need:
                chosen[index] = (pair_index, walk)
        kept = {id(walk) for _, walk in chosen.values()}
        for walk in walks:
            if id(walk) not in kept:
                ledger.release(walk.interior)
        if len(chosen) < need:
            for _, walk in chosen.values():
                ledger.release(walk.interior)
            raise PartialResult(
                f"round {s} joined {len(chosen)} of the {need} trees it needs",
                connected=sorted(chosen),
                walks=[],
            )

        for index, (pair_index, walk) in chosen.items():
            a_leaf, b_leaf = leaf_pairs[pair_index]
            path_a = state.trees_a[index].path_to(a_leaf)
            path_b = state.trees_b[index].path_to(b_leaf)
            ledger.reserve(path_a[1:] + path_b[1:], tag)
            vertices = tuple(path_a) + walk.vertices[1:] + tuple(reversed(path_b))[1:]
            state.walks[index] = Walk(vertices, sigma)
            del state.trees_a[index]
            del state.trees_b[index]

        if not last:
            self._grow(g, state, s, sigma)

        free = int(ledger.free_mask(state.reservoir_a | state.reservoir_b).sum())
        trace = RoundTrace(round=s, connected=len(state.walks), walks=len(state.walks), reservoir_free=free)
        self.traces.append(trace)
        logger.debug("doubling %s", trace.line())
        if self.debug_invariants:
            check_invariants(state, s + 1, g)

    def _grow(self, g: Digraph, state: DoublingState, s: int, sigma: SignPattern) -> None:
        length = len(sigma)
        for trees, level, sign in (
            (state.trees_a, state.levels_a[s], sigma[s]),
            (state.trees_b, state.levels_b[s], sigma[length - 1 - s].complement()),
        ):
            leaves = frozenset(leaf for tree in trees.values() for leaf in tree.leaves)
            if not leaves:
                continue
            matching = two_matching(leaves, level, sign, g)
            children: dict[int, list[int]] = {}
            for leaf, child in matching.pairs:
                children.setdefault(leaf, []).append(child)
            for tree in trees.values():
                tree.extend(children)


def _walk_conforms_tree(g: Digraph, tree: SigmaTree, pattern: Sequence[Sign]) -> bool:
    for leaf in tree.leaves:
        path = tree.path_to(leaf)
        for step, (u, v) in enumerate(zip(path, path[1:])):
            ok = g.has_arc(u, v) if pattern[step] is Sign.PLUS else g.has_arc(v, u)
            if not ok:
                return False
    return True


def check_invariants(state: DoublingState, s: int, g: Digraph | None = None) -> None:
    """Round-boundary invariants; raises InternalError on the first broken one."""
    t = state.request.t
    expected = expected_connected(t, s, state.rounds)
    if len(state.walks) != expected:
        raise InternalError(f"after {s} rounds {len(state.walks)} pairs are connected, expected {expected}")
    if s >= state.rounds:
        return

    sigma = state.request.sigma
    walk_vertices: set[int] = set()
    for walk in state.walks.values():
        walk_vertices.update(walk.vertices)
    seen: set[int] = set()
    for trees, levels, pattern in (
        (state.trees_a, state.levels_a, list(sigma)),
        (state.trees_b, state.levels_b, list(sigma.reverse_complement())),
    ):
        for tree in trees.values():
            if tree.depth != s or len(tree.leaves) != 2**s:
                raise InternalError(f"tree at {tree.root} has {len(tree.leaves)} leaves at depth {tree.depth}")
            if s and not set(tree.leaves) <= levels[s - 1]:
                raise InternalError(f"tree at {tree.root} has leaves outside level {s}")
            inner = tree.vertices() - {tree.root}
            if inner & seen:
                raise InternalError(f"tree at {tree.root} shares vertices with another tree")
            seen.update(inner)
            if inner & walk_vertices:
                raise InternalError(f"tree at {tree.root} meets a finished walk")
            if g is not None and not _walk_conforms_tree(g, tree, pattern):
                raise InternalError(f"tree at {tree.root} does not follow the pattern")
