"""Discrete martingale Schroedinger bridge solver."""

from ._core import (
    DomainError,
    InfeasibleError,
    NumericalError,
    convex_order_leq,
    duality_gap,
    implied_marginal,
    oracle_bridge,
    selftest,
    solve_bridge,
)

__all__ = [
    "DomainError",
    "InfeasibleError",
    "NumericalError",
    "convex_order_leq",
    "duality_gap",
    "implied_marginal",
    "oracle_bridge",
    "selftest",
    "solve_bridge",
]
