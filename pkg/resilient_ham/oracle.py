"""Exhaustive ground truth for small instances."""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations

import numpy as np

from resilient_ham.config import OracleLimit
from resilient_ham.digraph import Digraph, SignPattern, Walk
from resilient_ham.errors import GraphTooLarge
from resilient_ham.matcher import BipartiteInstance


def _limits(limit: OracleLimit | None) -> OracleLimit:
    return limit if limit is not None else OracleLimit()


def held_karp_hamiltonian(g: Digraph, limit: OracleLimit | None = None) -> tuple[bool, list[int] | None]:
    """Subset DP anchored at vertex 0.

    reach[S] holds, as a bitmask, every v such that some path from 0 visits
    exactly S and ends at v. Levels of equal popcount are filled with numpy.
    """
    n = g.n
    cap = _limits(limit).max_n_heldkarp
    if n > cap:
        raise GraphTooLarge(f"Held-Karp is limited to n <= {cap}, got {n}", n=n)
    if n < 2:
        return False, None

    _, in_masks = g.bitmasks()
    full = (1 << n) - 1
    masks = np.arange(1, full + 1, 2, dtype=np.int64)
    popcount = np.zeros(masks.size, dtype=np.int64)
    for bit in range(n):
        popcount += (masks >> bit) & 1
    reach = np.zeros(full + 1, dtype=np.int64)
    reach[1] = 1
    for size in range(2, n + 1):
        level = masks[popcount == size]
        for v in range(1, n):
            members = level[((level >> v) & 1) == 1]
            if members.size == 0:
                continue
            hit = (reach[members ^ (1 << v)] & in_masks[v]) != 0
            reach[members[hit]] |= 1 << v

    closing = int(reach[full]) & in_masks[0]
    if not closing:
        return False, None

    v = (closing & -closing).bit_length() - 1
    mask = full
    backwards = [v]
    while mask != 1:
        previous = mask ^ (1 << v)
        options = int(reach[previous]) & in_masks[v]
        v = (options & -options).bit_length() - 1
        backwards.append(v)
        mask = previous
    return True, list(reversed(backwards))


def permutation_hamiltonian(g: Digraph, limit: OracleLimit | None = None) -> bool:
    """Try every ordering of 1..n-1 after vertex 0."""
    n = g.n
    cap = _limits(limit).max_n_permutation
    if n > cap:
        raise GraphTooLarge(f"permutation search is limited to n <= {cap}, got {n}", n=n)
    if n < 2:
        return False
    for rest in permutations(range(1, n)):
        order = (0, *rest)
        if all(g.has_arc(order[i], order[(i + 1) % n]) for i in range(n)):
            return True
    return False


def enumerate_sigma_walks(
    g: Digraph,
    a: int,
    b: int,
    sigma: SignPattern,
    limit: OracleLimit | None = None,
) -> list[Walk]:
    """Every sigma-walk a -> b with distinct vertices apart from a possibly closing repeat of a."""
    limits = _limits(limit)
    if g.n > limits.max_sigma_n or len(sigma) > limits.max_sigma_length:
        raise GraphTooLarge(
            f"walk enumeration is limited to n <= {limits.max_sigma_n} and length <= {limits.max_sigma_length}",
            n=g.n,
            length=len(sigma),
        )
    g.check_vertex(a)
    g.check_vertex(b)
    found: list[Walk] = []
    path = [a]

    def extend(depth: int) -> None:
        if depth == len(sigma):
            if path[-1] == b:
                found.append(Walk(tuple(path), sigma))
            return
        last_step = depth == len(sigma) - 1
        for v in g.neighbors_by_sign(path[-1], sigma[depth]).tolist():
            if v in path and not (last_step and v == a and v == b):
                continue
            path.append(v)
            extend(depth + 1)
            path.pop()

    extend(0)
    return sorted(found, key=lambda walk: walk.vertices)


def brute_matching(inst: BipartiteInstance) -> int:
    """Maximum matching size by exhaustive search over right-side subsets."""
    left = sorted(inst.left)
    right = sorted(inst.right)
    if len(left) > 10 or len(right) > 10:
        raise GraphTooLarge("brute matching is limited to 10 vertices per side", left=len(left), right=len(right))
    slot = {v: i for i, v in enumerate(right)}
    options = [[slot[v] for v in inst.host.neighbors_by_sign(u, inst.direction).tolist() if v in slot] for u in left]

    @lru_cache(maxsize=None)
    def best(index: int, used: int) -> int:
        if index == len(left):
            return 0
        top = best(index + 1, used)
        for j in options[index]:
            if not used & (1 << j):
                top = max(top, 1 + best(index + 1, used | (1 << j)))
        return top

    return best(0, 0)
