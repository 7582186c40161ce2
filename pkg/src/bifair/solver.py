"""Sequential transfer-path solver with pluggable selection criteria.

The solver starts from an empty allocation and repeatedly picks the agent
whose gain function scores highest. An agent still in play receives one
more high-value good by shifting goods along a shortest exchange-graph path
ending in the unallocated pool; once no such path exists the agent
permanently drops out of play and can only collect low-value goods, handed
out provisionally so later transfer paths may still steal them. Ties always
favor in-play agents and then lower indices, which is what makes the output
canonical among all optimal allocations.

Gain magnitudes are compared exactly: rationals via integer
cross-multiplication for Nash welfare, plain integers for leximin, and
high-precision floats with a relative tolerance for p-mean welfare. The
"escape from zero utility" bonus is a separate tier above every ordinary
magnitude rather than a large constant, so it can never collide with a
real gain value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .allocation import Allocation, Decomposition, utility_vector
from .errors import InternalInvariantError, UnsupportedCriterionError
from .exchange import CleanBundles, ExchangeGraph, f_set, shortest_path
from .exchange import augment as augment_path
from .valuation import Instance

# Working precision for p-mean gains; ~40 significant digits comfortably
# exceeds extended-double precision at desk-scale utilities.
_PMEAN_DPS = 40

PMEAN_REL_TOL = mpmath.mpf("1e-12")

_TIER_BOTTOM = 0
_TIER_ORDINARY = 1
_TIER_ZERO_ESCAPE = 2


@dataclass(frozen=True)
class GainValue:
    """Totally ordered gain: bottom < every ordinary value < zero-escape.

    The zero-escape tier carries the added value d and realizes the
    arbitrarily large bonus for lifting an agent off zero utility; within
    the tier larger d wins. Ordinary magnitudes are ``Fraction``/``int``
    (compared exactly) or ``mpmath.mpf`` (compared with a relative
    tolerance, so near-ties resolve through the solver's index tie-break).
    """

    tier: int
    magnitude: object = None

    def _cmp(self, other: "GainValue") -> int:
        if self.tier != other.tier:
            return 1 if self.tier > other.tier else -1
        if self.tier == _TIER_BOTTOM:
            return 0
        a, b = self.magnitude, other.magnitude
        if isinstance(a, mpmath.mpf) or isinstance(b, mpmath.mpf):
            a, b = mpmath.mpf(a), mpmath.mpf(b)
            if abs(a - b) <= PMEAN_REL_TOL * max(1, abs(a), abs(b)):
                return 0
        if a == b:
            return 0
        return 1 if a > b else -1

    def __lt__(self, other: "GainValue") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "GainValue") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "GainValue") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "GainValue") -> bool:
        return self._cmp(other) >= 0

    def describe(self) -> str:
        if self.tier == _TIER_BOTTOM:
            return "-inf"
        if self.tier == _TIER_ZERO_ESCAPE:
            return f"zero-escape({self.magnitude})"
        return str(self.magnitude)


BOTTOM_GAIN = GainValue(_TIER_BOTTOM)


class Criterion:
    """A justice criterion: gain function plus a total preorder on utilities."""

    name: str

    def bind(self, instance: Instance) -> "Criterion":
        """Criterion specialized to an instance; default needs no binding."""
        return self

    def gain(self, utilities: Sequence[int], i: int, d: int) -> GainValue:
        """Score of adding value ``d`` to agent ``i`` (1-based) right now."""
        raise NotImplementedError

    def compare(self, u: Sequence[int], w: Sequence[int]) -> int:
        """Order two utility vectors under the criterion; -1, 0 or 1."""
        raise NotImplementedError


class MaxNashWelfare(Criterion):
    """Most agents positive first, then largest utility product.

    The ordinary gain is the ratio ``(u_i + d) / u_i``, kept as an exact
    rational so comparisons reduce to integer cross-multiplication.
    """

    name = "mnw"

    def gain(self, utilities: Sequence[int], i: int, d: int) -> GainValue:
        u = utilities[i - 1]
        if u == 0:
            return GainValue(_TIER_ZERO_ESCAPE, d)
        return GainValue(_TIER_ORDINARY, Fraction(u + d, u))

    def compare(self, u: Sequence[int], w: Sequence[int]) -> int:
        count_u = sum(1 for x in u if x > 0)
        count_w = sum(1 for x in w if x > 0)
        if count_u != count_w:
            return 1 if count_u > count_w else -1
        prod_u = prod_w = 1
        for x in u:
            if x > 0:
                prod_u *= x
        for x in w:
            if x > 0:
                prod_w *= x
        if prod_u == prod_w:
            return 0
        return 1 if prod_u > prod_w else -1


class Leximin(Criterion):
    """Lexicographic order on ascending-sorted utility vectors.

    The gain is the exact integer ``-(c + 1) * u_i + d``; the slope beats
    any d difference, so poorer agents always outrank richer ones.
    """

    name = "leximin"

    def __init__(self, c: int | None = None):
        self.c = c

    def bind(self, instance: Instance) -> "Leximin":
        return self if self.c == instance.c else Leximin(instance.c)

    def gain(self, utilities: Sequence[int], i: int, d: int) -> GainValue:
        if self.c is None:
            raise UnsupportedCriterionError(
                "leximin gain needs the instance's c; use Leximin(c) or bind()"
            )
        return GainValue(_TIER_ORDINARY, -(self.c + 1) * utilities[i - 1] + d)

    def compare(self, u: Sequence[int], w: Sequence[int]) -> int:
        su, sw = sorted(u), sorted(w)
        if su == sw:
            return 0
        return 1 if su > sw else -1


class PMeanWelfare(Criterion):
    """Most agents positive first, then the power mean of the positives.

    Defined for real ``p < 1`` with ``p != 0``; both excluded values have
    better homes (``p -> 0`` is Nash welfare; ``p = 1`` is plain utilitarian
    welfare, whose constant gain cannot drive agent selection). Gains use
    40-digit floats and values within a relative 1e-12 count as tied.
    """

    def __init__(self, p: float):
        if p == 0 or p >= 1:
            raise UnsupportedCriterionError(
                f"p-mean welfare requires p < 1 and p != 0, got {p}"
            )
        self.p = p
        self.name = f"pmean[p={p}]"

    def gain(self, utilities: Sequence[int], i: int, d: int) -> GainValue:
        u = utilities[i - 1]
        if u == 0:
            return GainValue(_TIER_ZERO_ESCAPE, d)
        with mpmath.workdps(_PMEAN_DPS):
            p = mpmath.mpf(self.p)
            diff = mpmath.power(u + d, p) - mpmath.power(u, p)
            if self.p < 0:
                diff = -diff
        return GainValue(_TIER_ORDINARY, diff)

    def compare(self, u: Sequence[int], w: Sequence[int]) -> int:
        count_u = sum(1 for x in u if x > 0)
        count_w = sum(1 for x in w if x > 0)
        if count_u != count_w:
            return 1 if count_u > count_w else -1
        with mpmath.workdps(_PMEAN_DPS):
            p = mpmath.mpf(self.p)
            sum_u = mpmath.fsum(mpmath.power(x, p) for x in u if x > 0)
            sum_w = mpmath.fsum(mpmath.power(x, p) for x in w if x > 0)
            if abs(sum_u - sum_w) <= PMEAN_REL_TOL * max(1, abs(sum_u), abs(sum_w)):
                return 0
            # For p < 0 the outer 1/p exponent reverses the power-sum order.
            better = sum_u > sum_w if self.p > 0 else sum_u < sum_w
        return 1 if better else -1


def make_criterion(name: str, p: float | None = None) -> Criterion:
    """Criterion from its CLI name: ``mnw``, ``leximin`` or ``pmean``."""
    if name == "mnw":
        return MaxNashWelfare()
    if name == "leximin":
        return Leximin()
    if name == "pmean":
        if p is None:
            raise UnsupportedCriterionError("pmean requires a p value")
        return PMeanWelfare(p)
    raise UnsupportedCriterionError(f"unknown criterion {name!r}")


@dataclass(frozen=True)
class TraceRecord:
    """One solver iteration: who was picked, why, and what happened."""

    iteration: int
    gain_c: str
    gain_1: str
    agent: int
    action: str  # "augmented" | "removed-from-play" | "provisional"
    path: tuple[int, ...] | None = None
    good: int | None = None
    replacement: int | None = None

    def to_dict(self) -> dict:
        record: dict = {
            "iteration": self.iteration,
            "gain_c": self.gain_c,
            "gain_1": self.gain_1,
            "agent": self.agent,
            "action": self.action,
        }
        if self.path is not None:
            record["path"] = list(self.path)
        if self.good is not None:
            record["good"] = self.good
        if self.replacement is not None:
            record["replacement"] = self.replacement
        return record


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)


@dataclass(frozen=True)
class SolveResult:
    allocation: Allocation
    decomposition: Decomposition
    trace: SolveTrace
    utilities: tuple[int, ...]

    @property
    def sorted_utilities(self) -> tuple[int, ...]:
        return tuple(sorted(self.utilities))


def _argmax_min_index(
    criterion: Criterion,
    utilities: Sequence[int],
    agents: Iterable[int],
    d: int,
) -> tuple[int | None, GainValue]:
    """Best agent by gain, lowest index among ties; (None, bottom) if empty."""
    best_agent: int | None = None
    best = BOTTOM_GAIN
    for k in agents:
        g = criterion.gain(utilities, k, d)
        if best_agent is None or g > best:
            best_agent, best = k, g
    return best_agent, best


class _State:
    """Mutable solver state with O(1) utility reads."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.clean: list[set[int]] = [set(range(instance.m))]
        self.clean += [set() for _ in instance.agents]
        self.supp: list[set[int]] = [set() for _ in range(instance.n + 1)]
        self.supp_union: set[int] = set()
        self.in_play: set[int] = set(instance.agents)

    def utilities(self) -> list[int]:
        c = self.instance.c
        return [
            c * len(self.clean[i]) + len(self.supp[i])
            for i in self.instance.agents
        ]

    def unallocated_count(self) -> int:
        return len(self.clean[0]) - len(self.supp_union)

    def lowest_free_good(self) -> int:
        return min(self.clean[0] - self.supp_union)

    def frozen_clean(self) -> CleanBundles:
        return tuple(frozenset(b) for b in self.clean)

    def check_invariants(self) -> None:
        instance = self.instance
        for i in instance.agents:
            if not instance.valuation(i).is_clean(frozenset(self.clean[i])):
                raise InternalInvariantError(f"clean bundle {i} lost cleanness")
            bundle = self.clean[i] | self.supp[i]
            expected = instance.c * len(self.clean[i]) + len(self.supp[i])
            if instance.value(i, bundle) != expected:
                raise InternalInvariantError(
                    f"agent {i}: bundle value {instance.value(i, bundle)} != "
                    f"cached {expected}; a provisional good turned high-value"
                )
        if not self.supp_union <= self.clean[0]:
            raise InternalInvariantError("provisional goods escaped the pool")


def solve(
    instance: Instance,
    criterion: Criterion,
    check_invariants: bool = False,
) -> SolveResult:
    """Run the transfer-path solver to a complete optimal allocation.

    Returns the allocation together with the clean/supplementary split the
    solver maintained and a per-iteration trace. With ``check_invariants``
    the loop re-verifies its invariants every iteration (cleanness, cached
    utilities, pool containment, and the pick-the-poorest property of the
    selected agent); this is meant for tests and costs roughly a full rank
    recomputation per bundle per iteration.
    """
    criterion = criterion.bind(instance)
    state = _State(instance)
    trace = SolveTrace()
    c = instance.c
    max_iterations = instance.m + instance.n

    iteration = 0
    while state.unallocated_count() > 0:
        iteration += 1
        if iteration > max_iterations:
            raise InternalInvariantError(
                f"exceeded the {max_iterations}-iteration bound"
            )
        utilities = state.utilities()
        in_play = sorted(state.in_play)
        benched = [k for k in instance.agents if k not in state.in_play]
        agent_c, gain_c = _argmax_min_index(criterion, utilities, in_play, c)
        agent_1, gain_1 = _argmax_min_index(criterion, utilities, benched, 1)

        if gain_c >= gain_1 and agent_c is not None:
            i = agent_c
            if check_invariants:
                _check_selection(utilities, in_play, i)
            clean = state.frozen_clean()
            graph = ExchangeGraph(instance, clean)
            path = shortest_path(graph, f_set(instance, clean, i), clean[0])
            if path is None:
                state.in_play.discard(i)
                trace.records.append(
                    TraceRecord(
                        iteration, gain_c.describe(), gain_1.describe(),
                        i, "removed-from-play",
                    )
                )
            else:
                new_clean = augment_path(instance, clean, path, i)
                state.clean = [set(b) for b in new_clean]
                stolen = path[-1]
                replacement = None
                if stolen in state.supp_union:
                    holder = next(
                        j for j in instance.agents if stolen in state.supp[j]
                    )
                    replacement = state.lowest_free_good()
                    state.supp[holder].discard(stolen)
                    state.supp[holder].add(replacement)
                    state.supp_union.discard(stolen)
                    state.supp_union.add(replacement)
                trace.records.append(
                    TraceRecord(
                        iteration, gain_c.describe(), gain_1.describe(),
                        i, "augmented", path=path, replacement=replacement,
                    )
                )
        else:
            i = agent_1
            if i is None:
                raise InternalInvariantError("no agent eligible for selection")
            if check_invariants:
                _check_selection(utilities, benched, i)
            good = state.lowest_free_good()
            state.supp[i].add(good)
            state.supp_union.add(good)
            trace.records.append(
                TraceRecord(
                    iteration, gain_c.describe(), gain_1.describe(),
                    i, "provisional", good=good,
                )
            )
        if check_invariants:
            state.check_invariants()

    clean = state.frozen_clean()
    supplementary = tuple(frozenset(b) for b in state.supp)
    decomposition = Decomposition(clean, supplementary)
    allocation = decomposition.union()
    if sum(len(allocation.bundle(i)) for i in instance.agents) != instance.m:
        raise InternalInvariantError("solver left goods unallocated")
    final = utility_vector(instance, allocation)
    cached = tuple(state.utilities())
    if final != cached:
        raise InternalInvariantError(
            f"final utilities {final} disagree with cached {cached}"
        )
    return SolveResult(allocation, decomposition, trace, final)


def _check_selection(utilities: Sequence[int], pool: Iterable[int], i: int) -> None:
    """The picked agent must be the poorest in its pool, lowest index on ties."""
    for j in pool:
        if utilities[j - 1] < utilities[i - 1] or (
            utilities[j - 1] == utilities[i - 1] and j < i
        ):
            raise InternalInvariantError(
                f"picked agent {i} over poorer or lower-indexed agent {j}"
            )


def utilitarian_optimal(instance: Instance) -> Allocation:
    """A complete allocation maximizing total utility.

    Total utility is ``m + (c - 1) * sum of ranks`` once everything is
    allocated, so it suffices to grow the agents' clean bundles until no
    transfer path from any agent reaches the pool, then hand the leftover
    (uniformly low-value) goods to agent 1.
    """
    state = _State(instance)
    progress = True
    while progress and state.clean[0]:
        progress = False
        for i in instance.agents:
            if not state.clean[0]:
                break
            clean = state.frozen_clean()
            graph = ExchangeGraph(instance, clean)
            path = shortest_path(graph, f_set(instance, clean, i), clean[0])
            if path is not None:
                state.clean = [
                    set(b) for b in augment_path(instance, clean, path, i)
                ]
                progress = True
    bundles = [frozenset()] + [frozenset(state.clean[i]) for i in instance.agents]
    bundles[1] = bundles[1] | frozenset(state.clean[0])
    return Allocation(tuple(bundles))
