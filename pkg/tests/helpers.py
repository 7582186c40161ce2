"""Independent oracles for the test suite.

Everything here recomputes quantities from first principles (subset
enumeration, explicit independence predicates, exhaustive path search) so
the library's own rank/graph machinery is never used to check itself.
"""

from __future__ import annotations

import itertools
import random

from bifair.valuation import (
    BivaluedValuation,
    ExplicitMatroid,
    Instance,
    MarkedMatroid,
    Matroid,
    PartitionMatroid,
    TransversalMatroid,
    UniformMatroid,
)


def is_independent(matroid: Matroid, subset: frozenset[int]) -> bool:
    """Independence decided from each family's definition, not from rank()."""
    if isinstance(matroid, UniformMatroid):
        return len(subset) <= matroid.cap
    if isinstance(matroid, MarkedMatroid):
        return subset <= matroid.marked
    if isinstance(matroid, PartitionMatroid):
        if any(
            all(g not in part for part in matroid.parts) for g in subset
        ):
            return False
        return all(
            len(subset & part) <= cap
            for part, cap in zip(matroid.parts, matroid.caps)
        )
    if isinstance(matroid, TransversalMatroid):
        goods = sorted(subset)
        if len(goods) > matroid.slots:
            return False
        for slots in itertools.permutations(range(matroid.slots), len(goods)):
            if all(s in matroid.adjacency[g] for g, s in zip(goods, slots)):
                return True
        return not goods
    if isinstance(matroid, ExplicitMatroid):
        return matroid.table[subset] == len(subset)
    raise TypeError(type(matroid))


def brute_rank(matroid: Matroid, subset: frozenset[int]) -> int:
    """Largest independent subset, by trying every subset."""
    best = 0
    goods = sorted(subset)
    for size in range(len(goods), 0, -1):
        if size <= best:
            break
        for combo in itertools.combinations(goods, size):
            if is_independent(matroid, frozenset(combo)):
                best = size
                break
    return best


def brute_value(valuation: BivaluedValuation, subset: frozenset[int]) -> int:
    return len(subset) + (valuation.c - 1) * brute_rank(valuation.matroid, subset)


def brute_max_clean_subset(valuation: BivaluedValuation, bundle: frozenset[int]) -> int:
    """Size of the largest subset worth c per good, by direct enumeration."""
    best = 0
    goods = sorted(bundle)
    for size in range(len(goods), 0, -1):
        if size <= best:
            break
        for combo in itertools.combinations(goods, size):
            if brute_value(valuation, frozenset(combo)) == valuation.c * size:
                best = size
                break
    return best


def all_shortest_paths(
    edges: set[tuple[int, int]],
    nodes: range,
    sources: frozenset[int],
    targets: frozenset[int],
) -> list[tuple[int, ...]]:
    """Every shortest simple path from a source to a target, via DFS."""
    adjacency: dict[int, list[int]] = {g: [] for g in nodes}
    for g, h in edges:
        adjacency[g].append(h)
    found: list[tuple[int, ...]] = []
    best_len = [len(nodes) + 1]

    def extend(path: list[int]) -> None:
        if len(path) > best_len[0]:
            return
        tail = path[-1]
        if tail in targets:
            if len(path) < best_len[0]:
                best_len[0] = len(path)
                found.clear()
            if len(path) == best_len[0]:
                found.append(tuple(path))
            return
        for succ in adjacency[tail]:
            if succ not in path:
                path.append(succ)
                extend(path)
                path.pop()

    for src in sorted(sources):
        extend([src])
    return [p for p in found if len(p) == best_len[0]]


def random_clean_allocation(
    instance: Instance, rng: random.Random
) -> tuple[frozenset[int], ...]:
    """A random clean allocation: offer each good to a random eligible agent."""
    bundles: list[set[int]] = [set() for _ in range(instance.n + 1)]
    order = list(range(instance.m))
    rng.shuffle(order)
    for g in order:
        agents = list(instance.agents)
        rng.shuffle(agents)
        placed = False
        for i in agents:
            if rng.random() < 0.35:
                continue
            if instance.valuation(i).matroid.can_extend(frozenset(bundles[i]), g):
                bundles[i].add(g)
                placed = True
                break
        if not placed:
            bundles[0].add(g)
    return tuple(frozenset(b) for b in bundles)


def random_allocation(
    instance: Instance, rng: random.Random
) -> tuple[frozenset[int], ...]:
    bundles: list[set[int]] = [set() for _ in range(instance.n + 1)]
    for g in range(instance.m):
        bundles[rng.randint(0, instance.n)].add(g)
    return tuple(frozenset(b) for b in bundles)
