"""Exchange graph over a clean allocation and transfer-path machinery.

The exchange graph has one node per good. An edge g -> g' means the owner of
g can hand g away and take g' instead without losing any high-value good:
``rank_j(X_j - g + g') = rank_j(X_j)`` for the owning agent j. The
unallocated pool (bundle 0) acts as an owner that values everything highly,
so pool goods have edges to every allocated good.

Shifting goods along a shortest path from an agent's frontier to another
bundle gives that agent one more high-value good, keeps every intermediate
owner whole, and shrinks the path's final bundle by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InternalInvariantError, PreconditionError
from .valuation import GoodSet, Instance

CleanBundles = tuple[GoodSet, ...]


def _check_clean(instance: Instance, clean: CleanBundles) -> None:
    if len(clean) != instance.n + 1:
        raise PreconditionError(f"expected {instance.n + 1} clean bundles")
    for i in instance.agents:
        if not instance.valuation(i).is_clean(clean[i]):
            raise PreconditionError(f"bundle of agent {i} is not clean")


def f_set(instance: Instance, clean: CleanBundles, i: int) -> GoodSet:
    """Goods (allocated anywhere or free) that extend agent i's clean bundle.

    These are exactly the goods worth the high value c to agent i on top of
    what they already hold; the agent's transfer paths start here.
    """
    matroid = instance.valuation(i).matroid
    bundle = clean[i]
    return frozenset(
        g for g in range(instance.m) if matroid.can_extend(bundle, g)
    )


@dataclass
class ExchangeGraph:
    """Exchange graph over a clean allocation, with lazily computed edges."""

    instance: Instance
    clean: CleanBundles
    owner: dict[int, int] = field(init=False)

    def __post_init__(self) -> None:
        self.owner = {}
        for idx, bundle in enumerate(self.clean):
            for g in bundle:
                self.owner[g] = idx

    def out_neighbors(self, g: int) -> list[int]:
        """Goods the owner of ``g`` would accept in exchange, ascending."""
        j = self.owner[g]
        bundle = self.clean[j]
        if j == 0:
            # The pool owner counts every good as high value, so it accepts
            # any good in exchange. Pool-to-pool edges never shorten a path
            # (the pool is either the search target or skippable), so this
            # matches the rank-preservation rule wherever paths matter.
            return [h for h in range(self.instance.m) if h != g]
        remainder = bundle - {g}
        matroid = self.instance.valuation(j).matroid
        return [
            h for h in range(self.instance.m)
            if h not in bundle and matroid.can_extend(remainder, h)
        ]

    def edges(self) -> list[tuple[int, int]]:
        """Materialize every edge; intended for dumps and small instances."""
        return [
            (g, h) for g in range(self.instance.m) for h in self.out_neighbors(g)
        ]

    def to_dot(self) -> str:
        """DOT rendering with goods labelled by name and owner."""
        lines = ["digraph exchange {"]
        for g in range(self.instance.m):
            lines.append(
                f'  g{g} [label="{self.instance.goods[g]}\\nowner {self.owner[g]}"];'
            )
        for g, h in self.edges():
            lines.append(f"  g{g} -> g{h};")
        lines.append("}")
        return "\n".join(lines)


def build(instance: Instance, clean: CleanBundles) -> ExchangeGraph:
    """Exchange graph for a clean allocation; rejects non-clean input."""
    _check_clean(instance, clean)
    return ExchangeGraph(instance, clean)


def shortest_path(
    graph: ExchangeGraph, sources: Iterable[int], targets: Iterable[int]
) -> tuple[int, ...] | None:
    """Breadth-first shortest path from any source good to any target good.

    Among equal-length paths the lexicographically smallest good-id sequence
    wins: each BFS layer is processed in path order and neighbors are
    explored in ascending id, so the first path that reaches a target is the
    canonical one. Returns ``None`` when no target is reachable.
    """
    target_set = frozenset(targets)
    frontier = sorted(set(sources))
    if not frontier:
        return None
    parent: dict[int, int | None] = {g: None for g in frontier}

    def path_to(g: int) -> tuple[int, ...]:
        path: list[int] = []
        node: int | None = g
        while node is not None:
            path.append(node)
            node = parent[node]
        return tuple(reversed(path))

    while frontier:
        for g in frontier:
            if g in target_set:
                return path_to(g)
        next_frontier: list[int] = []
        for g in frontier:
            for h in graph.out_neighbors(g):
                if h not in parent:
                    parent[h] = g
                    next_frontier.append(h)
        frontier = next_frontier
    return None


def augment(
    instance: Instance,
    clean: CleanBundles,
    path: Sequence[int],
    receiver: int,
) -> CleanBundles:
    """Shift goods along ``path`` and give its first good to ``receiver``.

    Every owner of a path good swaps it for the next good on the path; the
    final good leaves its bundle entirely and the first good goes to the
    receiver. On a shortest path this preserves cleanness, grows the
    receiver's bundle by one and shrinks the last owner's by one; those
    postconditions are verified and any breach raises
    ``InternalInvariantError`` since it means the path was invalid.
    """
    if not path:
        raise PreconditionError("empty transfer path")
    last = path[-1]
    shifted: list[set[int]] = [set(b) for b in clean]
    for idx, bundle in enumerate(shifted):
        if last in bundle:
            bundle.discard(last)
        for g, succ in zip(path, path[1:]):
            if g in clean[idx]:
                bundle.discard(g)
                bundle.add(succ)
    shifted[receiver].add(path[0])
    result = tuple(frozenset(b) for b in shifted)

    loser = None
    for idx, bundle in enumerate(clean):
        if last in bundle:
            loser = idx
    for i in instance.agents:
        expected = len(clean[i])
        if i == receiver:
            expected += 1
        if i == loser:
            expected -= 1
        if len(result[i]) != expected:
            raise InternalInvariantError(
                f"transfer path changed bundle {i} from {len(clean[i])} "
                f"to {len(result[i])} goods"
            )
        if not instance.valuation(i).is_clean(result[i]):
            raise InternalInvariantError(f"transfer path left bundle {i} unclean")
    return result
