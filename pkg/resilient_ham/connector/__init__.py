"""Sigma-walk connection through a reservoir."""

from resilient_ham.connector.base import ConnectRequest, ConnectStrategy, ReservationLedger, audit_walks
from resilient_ham.connector.doubling import DoublingStrategy, SigmaTree
from resilient_ham.connector.factory import connect_all, create_connect_strategy
from resilient_ham.connector.greedy import GreedyStrategy
from resilient_ham.connector.walks import (
    big_expansion_holds,
    connect_half_pairs,
    connect_pair,
    expand_to_majority,
    sample_expansion,
)

__all__ = [
    "ConnectRequest",
    "ConnectStrategy",
    "DoublingStrategy",
    "GreedyStrategy",
    "ReservationLedger",
    "SigmaTree",
    "audit_walks",
    "big_expansion_holds",
    "connect_all",
    "connect_half_pairs",
    "connect_pair",
    "expand_to_majority",
    "sample_expansion",
]
