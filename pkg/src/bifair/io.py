"""Instance and allocation files plus seeded instance generators.

Instance files are versioned JSON. The value pair may be given directly as
``c`` or as original ``a``/``b`` values with ``a | b``; the latter are
rescaled at parse time and the scale is carried through to outputs so
reported utilities can be mapped back by multiplying with ``a``. Unknown
fields are rejected everywhere so typos fail loudly.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable

from .allocation import Allocation, Decomposition
from .errors import ValidationError
from .valuation import (
    BivaluedValuation,
    ExplicitMatroid,
    Instance,
    MarkedMatroid,
    Matroid,
    PartitionMatroid,
    TransversalMatroid,
    UniformMatroid,
    rescale_pair,
)

INSTANCE_VERSION = 1
ALLOCATION_VERSION = 1

GENERATOR_FAMILIES = ("marked", "uniform", "partition", "transversal")


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"{where}: missing fields {sorted(missing)}")


def _good_indices(names: Iterable[str], index: dict[str, int], where: str) -> frozenset[int]:
    out = set()
    for name in names:
        if name not in index:
            raise ValidationError(f"{where}: unknown good {name!r}")
        out.add(index[name])
    return frozenset(out)


def _parse_matroid(obj: dict, m: int, index: dict[str, int], where: str) -> Matroid:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError(f"{where}: matroid needs a type")
    kind = obj["type"]
    if kind == "uniform":
        _require_keys(obj, {"type", "cap"}, {"cap"}, where)
        return UniformMatroid(m, int(obj["cap"]))
    if kind == "partition":
        _require_keys(obj, {"type", "parts", "caps"}, {"parts", "caps"}, where)
        parts = tuple(
            _good_indices(part, index, where) for part in obj["parts"]
        )
        return PartitionMatroid(m, parts, tuple(int(c) for c in obj["caps"]))
    if kind == "marked":
        _require_keys(obj, {"type", "marked"}, {"marked"}, where)
        return MarkedMatroid(m, _good_indices(obj["marked"], index, where))
    if kind == "transversal":
        _require_keys(obj, {"type", "slots", "edges"}, {"slots", "edges"}, where)
        slots = int(obj["slots"])
        adjacency = [frozenset()] * m
        for name, slot_list in obj["edges"].items():
            if name not in index:
                raise ValidationError(f"{where}: unknown good {name!r} in edges")
            adjacency[index[name]] = frozenset(int(s) for s in slot_list)
        return TransversalMatroid(m, slots, tuple(adjacency))
    if kind == "explicit":
        _require_keys(obj, {"type", "rank"}, {"rank"}, where)
        table: dict[frozenset[int], int] = {}
        for key, value in obj["rank"].items():
            names = [part for part in key.split(",") if part]
            table[_good_indices(names, index, where)] = int(value)
        matroid = ExplicitMatroid(m, table)
        if len(table) != 1 << m:
            raise ValidationError(
                f"{where}: explicit table has {len(table)} of {1 << m} subsets"
            )
        return matroid
    raise ValidationError(f"{where}: unknown matroid type {kind!r}")


def parse_instance(data: dict) -> Instance:
    """Build a validated :class:`Instance` from decoded instance JSON."""
    _require_keys(
        data,
        {"version", "c", "a", "b", "goods", "agents"},
        {"version", "goods", "agents"},
        "instance",
    )
    if data["version"] != INSTANCE_VERSION:
        raise ValidationError(f"unsupported instance version {data['version']!r}")
    goods = tuple(data["goods"])
    if len(set(goods)) != len(goods):
        raise ValidationError("good names must be unique")
    index = {name: g for g, name in enumerate(goods)}

    scale = 1
    if "c" in data:
        if "a" in data or "b" in data:
            raise ValidationError("give either c or the pair a/b, not both")
        c = data["c"]
        if not isinstance(c, int) or isinstance(c, bool):
            raise ValidationError(
                f"c must be an integer >= 2; got {c!r} (non-integer value "
                f"ratios make the problem NP-hard and are rejected)"
            )
    elif "a" in data and "b" in data:
        c = rescale_pair(data["a"], data["b"])
        scale = data["a"]
    else:
        raise ValidationError("instance needs c, or both a and b")

    valuations = []
    names = []
    for idx, agent in enumerate(data["agents"], start=1):
        where = f"agent {idx}"
        _require_keys(agent, {"name", "matroid"}, {"matroid"}, where)
        names.append(agent.get("name", f"agent{idx}"))
        matroid = _parse_matroid(agent["matroid"], len(goods), index, where)
        valuations.append(BivaluedValuation(c, matroid))
    return Instance(goods, c, tuple(valuations), tuple(names), scale)


def emit_matroid(matroid: Matroid, goods: tuple[str, ...]) -> dict:
    def names(ids: Iterable[int]) -> list[str]:
        return [goods[g] for g in sorted(ids)]

    if isinstance(matroid, UniformMatroid):
        return {"type": "uniform", "cap": matroid.cap}
    if isinstance(matroid, PartitionMatroid):
        return {
            "type": "partition",
            "parts": [names(part) for part in matroid.parts],
            "caps": list(matroid.caps),
        }
    if isinstance(matroid, MarkedMatroid):
        return {"type": "marked", "marked": names(matroid.marked)}
    if isinstance(matroid, TransversalMatroid):
        return {
            "type": "transversal",
            "slots": matroid.slots,
            "edges": {
                goods[g]: sorted(matroid.adjacency[g])
                for g in range(matroid.m)
                if matroid.adjacency[g]
            },
        }
    if isinstance(matroid, ExplicitMatroid):
        return {
            "type": "explicit",
            "rank": {
                ",".join(names(subset)): rank
                for subset, rank in sorted(
                    matroid.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
                )
            },
        }
    raise ValidationError(f"cannot serialize matroid {type(matroid).__name__}")


def emit_instance(instance: Instance) -> dict:
    data: dict = {
        "version": INSTANCE_VERSION,
        "goods": list(instance.goods),
        "agents": [
            {
                "name": instance.agent_names[i - 1],
                "matroid": emit_matroid(instance.valuation(i).matroid, instance.goods),
            }
            for i in instance.agents
        ],
    }
    if instance.scale != 1:
        data["a"] = instance.scale
        data["b"] = instance.scale * instance.c
    else:
        data["c"] = instance.c
    return data


def emit_allocation(
    instance: Instance,
    allocation: Allocation,
    decomposition: Decomposition | None = None,
    criterion: str | None = None,
) -> dict:
    def names(ids: Iterable[int]) -> list[str]:
        return [instance.goods[g] for g in sorted(ids)]

    utilities = [
        instance.value(i, allocation.bundle(i)) for i in instance.agents
    ]
    data: dict = {
        "version": ALLOCATION_VERSION,
        "unallocated": names(allocation.bundle(0)),
        "bundles": [names(allocation.bundle(i)) for i in instance.agents],
        "utilities": utilities,
        "sorted_utilities": sorted(utilities),
        "scale": instance.scale,
    }
    if criterion is not None:
        data["criterion"] = criterion
    if decomposition is not None:
        data["clean"] = [names(decomposition.clean[i]) for i in instance.agents]
        data["supplementary"] = [
            names(decomposition.supplementary[i]) for i in instance.agents
        ]
    return data


def parse_allocation(data: dict, instance: Instance) -> Allocation:
    """Read an allocation file back into bundles; informational fields ignored."""
    _require_keys(
        data,
        {
            "version", "unallocated", "bundles", "utilities",
            "sorted_utilities", "clean", "supplementary", "criterion", "scale",
        },
        {"version", "unallocated", "bundles"},
        "allocation",
    )
    if data["version"] != ALLOCATION_VERSION:
        raise ValidationError(f"unsupported allocation version {data['version']!r}")
    if len(data["bundles"]) != instance.n:
        raise ValidationError(
            f"allocation has {len(data['bundles'])} bundles for {instance.n} agents"
        )
    index = {name: g for g, name in enumerate(instance.goods)}
    bundles = [_good_indices(data["unallocated"], index, "unallocated")]
    for idx, bundle in enumerate(data["bundles"], start=1):
        bundles.append(_good_indices(bundle, index, f"bundle {idx}"))
    return Allocation.from_bundles(instance, bundles)


def load_instance(path: str | Path) -> Instance:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_instance(json.load(handle))


def load_allocation(path: str | Path, instance: Instance) -> Allocation:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_allocation(json.load(handle), instance)


def dumps_canonical(data: dict) -> str:
    """Stable JSON rendering so seeded generation is byte-identical."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _random_matroid(family: str, m: int, rng: random.Random) -> Matroid:
    if family == "marked":
        marked = frozenset(g for g in range(m) if rng.random() < 0.5)
        return MarkedMatroid(m, marked)
    if family == "uniform":
        return UniformMatroid(m, rng.randint(0, m))
    if family == "partition":
        part_count = rng.randint(1, max(1, m))
        # Label part_count as "uncovered" so some goods may carry no rank.
        labels = [rng.randint(0, part_count) for _ in range(m)]
        parts = []
        caps = []
        for part in range(part_count):
            members = frozenset(g for g in range(m) if labels[g] == part)
            if members:
                parts.append(members)
                caps.append(rng.randint(0, len(members)))
        return PartitionMatroid(m, tuple(parts), tuple(caps))
    if family == "transversal":
        slots = rng.randint(1, max(1, m))
        adjacency = tuple(
            frozenset(s for s in range(slots) if rng.random() < 0.5)
            for _ in range(m)
        )
        return TransversalMatroid(m, slots, adjacency)
    raise ValidationError(
        f"unknown family {family!r}; pick one of {', '.join(GENERATOR_FAMILIES)}"
    )


def random_instance(
    family: str, n: int, m: int, c: int, seed: int | random.Random
) -> Instance:
    """Seed-deterministic random instance of one matroid family."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    goods = tuple(f"g{g + 1}" for g in range(m))
    valuations = tuple(
        BivaluedValuation(c, _random_matroid(family, m, rng)) for _ in range(n)
    )
    return Instance(goods, c, valuations)
