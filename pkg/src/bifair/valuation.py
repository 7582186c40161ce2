"""Matroid rank functions and bivalued submodular valuations.

Every valuation here has the form ``v(S) = |S| + (c - 1) * rank(S)`` for an
integer ``c >= 2`` and a matroid rank function over the goods: each good adds
marginal value ``c`` while it can extend an independent set and ``1``
otherwise. The rank function counts the high-value goods in a bundle, which
is exactly the structure the transfer-path solver manipulates.

Goods are dense integer ids ``0..m-1``; display names live on the
:class:`Instance`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import MalformedMatroidError, SizeLimitError, ValidationError

GoodSet = frozenset[int]

EXPLICIT_TABLE_MAX_GOODS = 20


def _as_goodset(goods: Iterable[int]) -> GoodSet:
    return goods if isinstance(goods, frozenset) else frozenset(goods)


class Matroid:
    """A matroid over goods ``0..m-1``, exposed through its rank function."""

    m: int

    def rank(self, goods: Iterable[int]) -> int:
        raise NotImplementedError

    def can_extend(self, goods: GoodSet, g: int) -> bool:
        """Whether adding ``g`` raises the rank of ``goods`` by one.

        Returns False when ``g`` is already in the set. Subclasses override
        this with a direct test; the default recomputes two ranks.
        """
        if g in goods:
            return False
        return self.rank(goods | {g}) > self.rank(goods)

    def _check_ground(self, m: int) -> None:
        if self.m != m:
            raise ValidationError(
                f"matroid is defined over {self.m} goods, instance has {m}"
            )


@dataclass(frozen=True)
class UniformMatroid(Matroid):
    """Any set of at most ``cap`` goods is independent."""

    m: int
    cap: int

    def __post_init__(self) -> None:
        if self.cap < 0:
            raise ValidationError("uniform matroid cap must be non-negative")

    def rank(self, goods: Iterable[int]) -> int:
        return min(len(_as_goodset(goods)), self.cap)

    def can_extend(self, goods: GoodSet, g: int) -> bool:
        return g not in goods and len(goods) < self.cap


@dataclass(frozen=True)
class PartitionMatroid(Matroid):
    """Disjoint parts with per-part capacities; uncovered goods never add rank."""

    m: int
    parts: tuple[GoodSet, ...]
    caps: tuple[int, ...]
    _part_of: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.parts) != len(self.caps):
            raise ValidationError("partition matroid needs one cap per part")
        if any(cap < 0 for cap in self.caps):
            raise ValidationError("partition matroid caps must be non-negative")
        part_of: dict[int, int] = {}
        for idx, part in enumerate(self.parts):
            for g in part:
                if not 0 <= g < self.m:
                    raise ValidationError(f"good {g} outside ground set")
                if g in part_of:
                    raise ValidationError(f"good {g} appears in two parts")
                part_of[g] = idx
        object.__setattr__(self, "_part_of", part_of)

    def rank(self, goods: Iterable[int]) -> int:
        goods = _as_goodset(goods)
        return sum(min(len(goods & part), cap)
                   for part, cap in zip(self.parts, self.caps))

    def can_extend(self, goods: GoodSet, g: int) -> bool:
        if g in goods:
            return False
        idx = self._part_of.get(g)
        if idx is None:
            return False
        return len(goods & self.parts[idx]) < self.caps[idx]


@dataclass(frozen=True)
class MarkedMatroid(Matroid):
    """Rank counts goods in a fixed marked set; the additive case."""

    m: int
    marked: GoodSet

    def __post_init__(self) -> None:
        if any(not 0 <= g < self.m for g in self.marked):
            raise ValidationError("marked good outside ground set")

    def rank(self, goods: Iterable[int]) -> int:
        return len(_as_goodset(goods) & self.marked)

    def can_extend(self, goods: GoodSet, g: int) -> bool:
        return g not in goods and g in self.marked


@dataclass(frozen=True)
class TransversalMatroid(Matroid):
    """Rank of S is the maximum matching size between S and a slot set.

    ``adjacency[g]`` lists the slots good ``g`` may occupy. Rank queries run
    an augmenting-path matching and are memoized per bundle; the cache is only
    ever extended with recomputable values, so concurrent readers are safe.
    """

    m: int
    slots: int
    adjacency: tuple[GoodSet, ...]
    _cache: dict[GoodSet, int] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        if len(self.adjacency) != self.m:
            raise ValidationError("transversal adjacency must cover every good")
        if self.slots < 0:
            raise ValidationError("slot count must be non-negative")
        for g, slots in enumerate(self.adjacency):
            if any(not 0 <= s < self.slots for s in slots):
                raise ValidationError(f"good {g} adjacent to unknown slot")

    def _matching(self, goods: Sequence[int]) -> dict[int, int]:
        """Greedy augmenting-path matching; returns slot -> good."""
        match: dict[int, int] = {}

        def try_place(g: int, seen: set[int]) -> bool:
            for s in self.adjacency[g]:
                if s in seen:
                    continue
                seen.add(s)
                if s not in match or try_place(match[s], seen):
                    match[s] = g
                    return True
            return False

        for g in goods:
            try_place(g, set())
        return match

    def rank(self, goods: Iterable[int]) -> int:
        goods = _as_goodset(goods)
        cached = self._cache.get(goods)
        if cached is None:
            cached = len(self._matching(sorted(goods)))
            self._cache[goods] = cached
        return cached


@dataclass(frozen=True)
class ExplicitMatroid(Matroid):
    """Rank given by a complete table over all subsets of the ground set.

    The table is not trusted: use :func:`validate_explicit` to audit it
    against the rank-function axioms before relying on it.
    """

    m: int
    table: dict[GoodSet, int]

    def __post_init__(self) -> None:
        if self.m > EXPLICIT_TABLE_MAX_GOODS:
            raise SizeLimitError(
                f"explicit rank tables support at most "
                f"{EXPLICIT_TABLE_MAX_GOODS} goods, got {self.m}"
            )

    def rank(self, goods: Iterable[int]) -> int:
        goods = _as_goodset(goods)
        try:
            return self.table[goods]
        except KeyError:
            raise MalformedMatroidError(
                f"rank table has no entry for {sorted(goods)}"
            ) from None


@dataclass(frozen=True)
class BivaluedValuation:
    """Bundle valuation ``v(S) = |S| + (c - 1) * rank(S)`` with integer c >= 2."""

    c: int
    matroid: Matroid

    def __post_init__(self) -> None:
        if not isinstance(self.c, int) or self.c < 2:
            raise ValidationError(f"c must be an integer >= 2, got {self.c!r}")

    def rank(self, goods: Iterable[int]) -> int:
        return self.matroid.rank(goods)

    def value(self, goods: Iterable[int]) -> int:
        goods = _as_goodset(goods)
        return len(goods) + (self.c - 1) * self.matroid.rank(goods)

    def marginal(self, goods: Iterable[int], g: int) -> int:
        """Marginal value of adding ``g``; always 1 or c."""
        goods = _as_goodset(goods)
        if g in goods:
            raise ValidationError(f"good {g} already in the bundle")
        return 1 + (self.c - 1) * (1 if self.matroid.can_extend(goods, g) else 0)

    def is_clean(self, goods: Iterable[int]) -> bool:
        """Whether every good in the bundle contributes the high value c."""
        goods = _as_goodset(goods)
        return self.matroid.rank(goods) == len(goods)


@dataclass(frozen=True)
class Instance:
    """An allocation problem: named goods and one valuation per agent.

    All agents share the same ``c``. Agent indices are 1-based in bundle
    tuples; index 0 is the pool of unallocated goods, behaving like a dummy
    owner that values every bundle at ``c`` per good. When the instance was
    stated with an original value pair ``(a, b)`` with ``a | b``, the
    valuations here are the rescaled ``(1, c=b//a)`` ones and ``scale``
    records ``a`` so reported utilities can be mapped back.
    """

    goods: tuple[str, ...]
    c: int
    valuations: tuple[BivaluedValuation, ...]
    agent_names: tuple[str, ...] = ()
    scale: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.c, int) or self.c < 2:
            raise ValidationError(
                f"c must be an integer >= 2 (non-integer ratios are rejected "
                f"as computationally intractable), got {self.c!r}"
            )
        if len(set(self.goods)) != len(self.goods):
            raise ValidationError("good names must be unique")
        if not self.valuations:
            raise ValidationError("instance needs at least one agent")
        if not self.agent_names:
            object.__setattr__(
                self,
                "agent_names",
                tuple(f"agent{i}" for i in range(1, len(self.valuations) + 1)),
            )
        if len(self.agent_names) != len(self.valuations):
            raise ValidationError("one name per agent required")
        if self.scale < 1:
            raise ValidationError("scale must be a positive integer")
        for val in self.valuations:
            if val.c != self.c:
                raise ValidationError("all agents must share the same c")
            val.matroid._check_ground(self.m)

    @property
    def m(self) -> int:
        return len(self.goods)

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def agents(self) -> range:
        """Real agent indices 1..n."""
        return range(1, self.n + 1)

    def valuation(self, i: int) -> BivaluedValuation:
        """Valuation of agent ``i`` (1-based)."""
        return self.valuations[i - 1]

    def value(self, i: int, goods: Iterable[int]) -> int:
        return self.valuation(i).value(goods)


def rescale_pair(a: int, b: int) -> int:
    """Collapse an ``(a, b)`` value pair to the canonical ``c = b / a``.

    Only divisible pairs are supported; for coprime pairs the underlying
    optimization problems are NP-hard, so they are rejected outright.
    """
    if not (isinstance(a, int) and isinstance(b, int)) or a < 1 or b <= a:
        raise ValidationError(f"need integers 0 < a < b, got a={a!r}, b={b!r}")
    if b % a != 0:
        raise ValidationError(
            f"a={a} does not divide b={b}: computing optimal allocations for "
            f"non-integer value ratios is NP-hard and not supported"
        )
    return b // a


@dataclass(frozen=True)
class AxiomViolation:
    """One failed rank-axiom check in an explicit table."""

    axiom: str
    subset: tuple[int, ...]
    goods: tuple[int, ...]
    detail: str


def validate_explicit(valuation: BivaluedValuation) -> list[AxiomViolation]:
    """Audit an explicit rank table against the rank-function axioms.

    Checks normalization (empty set ranks 0), binary marginals (which
    subsumes monotonicity), and pairwise submodularity
    ``rank(S+g) + rank(S+h) >= rank(S+g+h) + rank(S)``. Returns every
    violation found; an empty list certifies the table. Missing entries are
    reported rather than raised so a single audit covers the whole table.
    """
    matroid = valuation.matroid
    if not isinstance(matroid, ExplicitMatroid):
        raise ValidationError("only explicit rank tables can be audited")
    m = matroid.m
    if m > EXPLICIT_TABLE_MAX_GOODS:
        raise SizeLimitError(f"audit supports at most {EXPLICIT_TABLE_MAX_GOODS} goods")

    table = matroid.table
    violations: list[AxiomViolation] = []
    universe = range(m)

    def lookup(goods: frozenset[int]) -> int | None:
        if goods in table:
            return table[goods]
        violations.append(
            AxiomViolation("missing-entry", tuple(sorted(goods)), (), "no rank entry")
        )
        return None

    empty_rank = lookup(frozenset())
    if empty_rank not in (None, 0):
        violations.append(
            AxiomViolation("normalization", (), (), f"rank(empty) = {empty_rank}")
        )

    for size in range(m + 1):
        for subset in itertools.combinations(universe, size):
            s = frozenset(subset)
            rank_s = lookup(s)
            if rank_s is None:
                continue
            rest = [g for g in universe if g not in s]
            singles: dict[int, int] = {}
            for g in rest:
                rank_sg = lookup(s | {g})
                if rank_sg is None:
                    continue
                singles[g] = rank_sg
                if rank_sg - rank_s not in (0, 1):
                    violations.append(
                        AxiomViolation(
                            "binary-marginal", subset, (g,),
                            f"marginal {rank_sg - rank_s} not in {{0, 1}}",
                        )
                    )
            for g, h in itertools.combinations(rest, 2):
                if g not in singles or h not in singles:
                    continue
                rank_sgh = lookup(s | {g, h})
                if rank_sgh is None:
                    continue
                if singles[g] + singles[h] < rank_sgh + rank_s:
                    violations.append(
                        AxiomViolation(
                            "submodularity", subset, (g, h),
                            f"rank(S+g)+rank(S+h)={singles[g] + singles[h]} < "
                            f"rank(S+g+h)+rank(S)={rank_sgh + rank_s}",
                        )
                    )
    return violations


def bundle_value_table(valuation: BivaluedValuation, m: int) -> list[int]:
    """Value of every subset of ``0..m-1``, indexed by bitmask.

    Exhaustive-search helpers use this to turn repeated rank queries into
    array lookups. Only sensible for small ``m``.
    """
    if m > EXPLICIT_TABLE_MAX_GOODS:
        raise SizeLimitError("value tables support at most 20 goods")
    table = [0] * (1 << m)
    for mask in range(1, 1 << m):
        goods = frozenset(g for g in range(m) if mask >> g & 1)
        table[mask] = valuation.value(goods)
    return table
