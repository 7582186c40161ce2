from __future__ import annotations

import pytest

from bifair.valuation import BivaluedValuation, Instance, MarkedMatroid, UniformMatroid


def two_agent_instance(c: int, m: int = 6) -> Instance:
    """The running two-agent example: agent 1 values every good at 1,
    agent 2 values every good at c."""
    goods = tuple(f"g{i}" for i in range(1, m + 1))
    low = BivaluedValuation(c, MarkedMatroid(m, frozenset()))
    high = BivaluedValuation(c, MarkedMatroid(m, frozenset(range(m))))
    return Instance(goods, c, (low, high))


def capped_vs_additive_instance(c: int) -> Instance:
    """Six goods; agent 1 values the first two picked at c and the rest at 1,
    agent 2 values everything at c. The Nash-welfare output here envies
    beyond one good."""
    goods = tuple(f"g{i}" for i in range(1, 7))
    capped = BivaluedValuation(c, UniformMatroid(6, 2))
    additive = BivaluedValuation(c, MarkedMatroid(6, frozenset(range(6))))
    return Instance(goods, c, (capped, additive))


@pytest.fixture
def worked_example() -> Instance:
    return two_agent_instance(5)
