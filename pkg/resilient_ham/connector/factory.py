"""Connect strategy factory and the connect_all entry point."""

from __future__ import annotations

import logging
from functools import partial

import numpy as np

from resilient_ham.config import ScaleConfig
from resilient_ham.connector.base import (
    ConnectRequest,
    ConnectStrategy,
    ReservationLedger,
    audit_walks,
    check_reservoir_floor,
    validate_request,
)
from resilient_ham.connector.doubling import DoublingStrategy
from resilient_ham.connector.greedy import GreedyStrategy
from resilient_ham.digraph import Digraph, Walk
from resilient_ham.errors import BudgetExhausted, HypothesisViolated, InvalidParam
from resilient_ham.pseudorandom import PseudoParams
from resilient_ham.rng import make_rng

logger = logging.getLogger(__name__)


def expansion_threshold(params: PseudoParams | None, scale: ScaleConfig) -> int:
    """2 T2 scaled by threshold_mult; 1 without pseudorandomness parameters."""
    if params is None:
        return 1
    return max(1, round(scale.threshold_mult * 2 * params.t2))


def create_connect_strategy(
    name: str,
    scale: ScaleConfig,
    params: PseudoParams | None = None,
) -> ConnectStrategy:
    """Build one strategy from scale settings."""
    if name == "greedy":
        return GreedyStrategy(
            restarts=scale.connect_restarts,
            budget=scale.extraction_budget,
            bridge_attempts=scale.bridge_attempts,
        )
    if name == "doubling":
        return DoublingStrategy(
            retries=scale.doubling_retries,
            level_size=scale.level_size,
            level_factor=scale.level_factor,
            gamma=scale.gamma,
            threshold=expansion_threshold(params, scale),
            budget=scale.extraction_budget,
            bridge_attempts=scale.bridge_attempts,
            debug_invariants=scale.debug_invariants,
        )
    raise InvalidParam(f"unknown connect strategy {name!r}")


def check_endpoint_degrees(g: Digraph, request: ConnectRequest, params: PseudoParams) -> None:
    """Every endpoint has semi-degree >= (1/2 + alpha) p |K| into the reservoir."""
    endpoints = np.array(sorted(request.endpoints()), dtype=np.int64)
    if endpoints.size == 0:
        return
    out_deg, in_deg = g.degrees_into(g.mask(request.reservoir))
    semi = np.minimum(out_deg, in_deg)[endpoints]
    bound = (0.5 + params.alpha) * params.p * len(request.reservoir)
    below = semi < bound
    if below.any():
        witness = int(endpoints[int(np.argmax(below))])
        raise HypothesisViolated(
            f"endpoint {witness} has semi-degree below {bound:.1f} into the reservoir",
            witness=witness,
        )


def connect_all(
    g: Digraph,
    request: ConnectRequest,
    scale: ScaleConfig,
    seed: int,
    *,
    ledger: ReservationLedger | None = None,
    tag: str = "connector",
    params: PseudoParams | None = None,
    strategy: str | None = None,
    check_reservoir: bool = True,
    notes: list[str] | None = None,
) -> list[Walk]:
    """t internally disjoint sigma-walks, walk i from a_i to b_i, interiors inside the reservoir.

    The reservoir floor and the endpoint degree bound are checked first. They raise
    HypothesisViolated unless a `notes` list is given, in which case a violation is
    appended to it and the connection is still attempted.
    """
    validate_request(g, request)
    hypotheses = []
    if check_reservoir:
        hypotheses.append(partial(check_reservoir_floor, request, scale.reservoir_factor))
    if params is not None:
        hypotheses.append(partial(check_endpoint_degrees, g, request, params))
    for check in hypotheses:
        try:
            check()
        except HypothesisViolated as exc:
            if notes is None:
                raise
            note = f"{tag}: {exc.message}"
            if note not in notes:
                logger.warning("proceeding past violated hypothesis: %s", note)
                notes.append(note)
    ledger = ledger if ledger is not None else ReservationLedger(g.n)
    rng = make_rng(seed)
    chosen = strategy or scale.strategy

    if chosen == "greedy-then-doubling":
        try:
            walks = create_connect_strategy("greedy", scale, params).connect(g, request, ledger, rng, tag=tag)
        except BudgetExhausted as exc:
            logger.info("greedy connection gave up on %d pairs, falling back to doubling: %s", request.t, exc.message)
            walks = create_connect_strategy("doubling", scale, params).connect(g, request, ledger, rng, tag=tag)
    else:
        walks = create_connect_strategy(chosen, scale, params).connect(g, request, ledger, rng, tag=tag)

    audit_walks(g, request, walks)
    return walks
