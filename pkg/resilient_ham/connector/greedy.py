"""Greedy connection: connect pairs one at a time in random order, restart on failure."""

from __future__ import annotations

import logging

import numpy as np

from resilient_ham.connector.base import ConnectRequest, ReservationLedger
from resilient_ham.connector.walks import connect_pair
from resilient_ham.digraph import Digraph, Walk
from resilient_ham.errors import BudgetExhausted, ExpansionFailed, NoBridge

logger = logging.getLogger(__name__)


class GreedyStrategy:
    """Both halves of every walk draw on the whole reservoir."""

    name = "greedy"

    def __init__(self, *, restarts: int = 3, budget: int = 20_000, bridge_attempts: int = 64) -> None:
        self.restarts = restarts
        self.budget = budget
        self.bridge_attempts = bridge_attempts

    def connect(
        self,
        g: Digraph,
        request: ConnectRequest,
        ledger: ReservationLedger,
        rng: np.random.Generator,
        *,
        tag: str,
    ) -> list[Walk]:
        reservoir = g.mask(request.reservoir)
        best = 0
        for attempt in range(self.restarts):
            order = rng.permutation(request.t).tolist()
            found: dict[int, Walk] = {}
            try:
                for index in order:
                    a, b = request.pairs[index]
                    found[index] = connect_pair(
                        g,
                        a,
                        b,
                        request.sigma,
                        reservoir,
                        reservoir,
                        ledger,
                        rng,
                        tag=tag,
                        budget=self.budget,
                        bridge_attempts=self.bridge_attempts,
                    )
            except (NoBridge, ExpansionFailed) as exc:
                best = max(best, len(found))
                logger.debug("greedy attempt %d stopped after %d of %d pairs: %s", attempt, len(found), request.t, exc)
                for walk in found.values():
                    ledger.release(walk.interior)
                continue
            return [found[index] for index in range(request.t)]
        raise BudgetExhausted(
            f"greedy connection failed after {self.restarts} restarts",
            best=best,
            pairs=request.t,
        )
