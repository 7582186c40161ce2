"""Exhaustive ground-truth engines for small instances.

These enumerate every possible allocation to compute exact optima and to
certify solver outputs, independently of the solver's own machinery. They
are deliberately brute force; the size caps keep them honest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .allocation import (
    DOMINATES,
    Allocation,
    Decomposition,
    compare_domination,
    utility_vector,
)
from .errors import SizeLimitError
from .solver import Criterion, SolveResult
from .valuation import Instance, bundle_value_table

ENUMERATION_CAP = 10**7
CERTIFY_MAX_GOODS = 6


def _assignment_count(instance: Instance) -> int:
    return (instance.n + 1) ** instance.m


def _check_cap(instance: Instance) -> None:
    total = _assignment_count(instance)
    if total > ENUMERATION_CAP:
        raise SizeLimitError(
            f"{total} assignments exceed the {ENUMERATION_CAP} enumeration cap"
        )


def enumerate_allocations(instance: Instance) -> Iterator[Allocation]:
    """Every assignment of goods to the pool or an agent, in mixed-radix order.

    Good g is the g-th digit, base n+1, least significant last; digit value
    is the receiving bundle index.
    """
    _check_cap(instance)
    n, m = instance.n, instance.m
    for digits in itertools.product(range(n + 1), repeat=m):
        bundles: list[set[int]] = [set() for _ in range(n + 1)]
        for g, owner in enumerate(digits):
            bundles[owner].add(g)
        yield Allocation(tuple(frozenset(b) for b in bundles))


def _all_utility_vectors(instance: Instance) -> set[tuple[int, ...]]:
    """Distinct utility vectors over all allocations, via bitmask tables."""
    _check_cap(instance)
    n, m = instance.n, instance.m
    tables = [bundle_value_table(instance.valuation(i), m) for i in instance.agents]
    seen: set[tuple[int, ...]] = set()
    masks = [0] * (n + 1)
    owners = range(n + 1)

    def rec(g: int) -> None:
        if g == m:
            seen.add(tuple(tables[i][masks[i + 1]] for i in range(n)))
            return
        bit = 1 << g
        for owner in owners:
            masks[owner] |= bit
            rec(g + 1)
            masks[owner] &= ~bit

    rec(0)
    return seen


@dataclass(frozen=True)
class BruteForceResult:
    """All criterion-optimal utility vectors of an instance."""

    optimal_vectors: frozenset[tuple[int, ...]]

    @property
    def sorted_optima(self) -> frozenset[tuple[int, ...]]:
        return frozenset(tuple(sorted(v)) for v in self.optimal_vectors)

    @property
    def best_sorted(self) -> tuple[int, ...]:
        """Lexicographically largest sorted optimum (the leximin one)."""
        return max(self.sorted_optima)

    def matches(self, sorted_utilities: Sequence[int]) -> bool:
        return tuple(sorted_utilities) in self.sorted_optima


def brute_force_optimum(instance: Instance, criterion: Criterion) -> BruteForceResult:
    """Criterion optimum over every allocation, by full enumeration."""
    return _optimum_of(instance, criterion, _all_utility_vectors(instance))


def _optimum_of(
    instance: Instance,
    criterion: Criterion,
    vectors: set[tuple[int, ...]],
) -> BruteForceResult:
    best: tuple[int, ...] | None = None
    ties: set[tuple[int, ...]] = set()
    for vec in sorted(vectors):
        if best is None:
            best, ties = vec, {vec}
            continue
        order = criterion.compare(vec, best)
        if order > 0:
            best, ties = vec, {vec}
        elif order == 0:
            ties.add(vec)
    return BruteForceResult(frozenset(ties))


def brute_force_optima(
    instance: Instance, criteria: Sequence[Criterion]
) -> list[BruteForceResult]:
    """One enumeration pass shared across several criteria."""
    vectors = _all_utility_vectors(instance)
    return [_optimum_of(instance, criterion, vectors) for criterion in criteria]


def enumerate_decompositions(
    instance: Instance, allocation: Allocation
) -> Iterator[Decomposition]:
    """Every valid clean/supplementary split of an allocation.

    Per agent, every maximum-size clean subset of the bundle is a valid
    clean part; the decompositions are their cartesian product.
    """
    per_agent: list[list[frozenset[int]]] = []
    for i in instance.agents:
        bundle = sorted(allocation.bundle(i))
        valuation = instance.valuation(i)
        target = valuation.rank(frozenset(bundle))
        options = [
            frozenset(combo)
            for combo in itertools.combinations(bundle, target)
            if valuation.is_clean(frozenset(combo))
        ]
        per_agent.append(options)
    everything = frozenset(range(instance.m))
    for choice in itertools.product(*per_agent):
        clean = (everything.difference(*choice),) + choice
        supplementary = (frozenset(),) + tuple(
            allocation.bundle(i) - choice[i - 1] for i in instance.agents
        )
        yield Decomposition(clean, supplementary)


@dataclass(frozen=True)
class CertificationVerdict:
    ok: bool
    reason: str


def certify_dominating(
    instance: Instance,
    result: SolveResult,
    criterion: Criterion,
) -> CertificationVerdict:
    """Certify a solver output as an undominated criterion optimum.

    Confirms the output's utility vector is criterion-optimal, then checks
    that no other optimal allocation, under any of its valid decompositions,
    beats the output under the three-stage domination order. Exhaustive in
    both allocations and decompositions, hence the tight size cap.
    """
    if instance.m > CERTIFY_MAX_GOODS:
        raise SizeLimitError(
            f"certification enumerates decompositions and is limited to "
            f"m <= {CERTIFY_MAX_GOODS} goods"
        )
    _check_cap(instance)
    criterion = criterion.bind(instance)
    own_utilities = utility_vector(instance, result.allocation)
    own = (result.allocation, result.decomposition)
    for other in enumerate_allocations(instance):
        other_utilities = utility_vector(instance, other)
        order = criterion.compare(other_utilities, own_utilities)
        if order > 0:
            return CertificationVerdict(
                False,
                f"allocation with utilities {other_utilities} beats the "
                f"output's {own_utilities}",
            )
        if order < 0 or other.bundles == result.allocation.bundles:
            continue
        for decomposition in enumerate_decompositions(instance, other):
            verdict = compare_domination(instance, (other, decomposition), own)
            if verdict == DOMINATES:
                return CertificationVerdict(
                    False,
                    f"optimal allocation {sorted(map(sorted, other.bundles))} "
                    f"dominates the output",
                )
    return CertificationVerdict(True, "optimal and undominated")
