from __future__ import annotations

import json
import random

import pytest

from bifair.allocation import Allocation
from bifair.cli import main
from bifair.errors import ValidationError
from bifair.io import (
    dumps_canonical,
    emit_allocation,
    emit_instance,
    parse_allocation,
    parse_instance,
    random_instance,
)
from bifair.valuation import rescale_pair

FAMILIES = ("marked", "uniform", "partition", "transversal")


def _worked_example_file(tmp_path, c=5):
    data = {
        "version": 1,
        "c": c,
        "goods": [f"g{i}" for i in range(1, 7)],
        "agents": [
            {"name": "low", "matroid": {"type": "marked", "marked": []}},
            {
                "name": "high",
                "matroid": {"type": "marked", "marked": [f"g{i}" for i in range(1, 7)]},
            },
        ],
    }
    path = tmp_path / "example.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestInstanceParsing:
    def test_round_trip_every_family(self):
        rng = random.Random(9)
        for family in FAMILIES:
            instance = random_instance(family, 3, 5, 3, rng)
            again = parse_instance(emit_instance(instance))
            assert emit_instance(again) == emit_instance(instance)
            assert again.c == instance.c
            for i in instance.agents:
                for mask in range(1 << 5):
                    subset = frozenset(g for g in range(5) if mask >> g & 1)
                    assert again.value(i, subset) == instance.value(i, subset)

    def test_explicit_round_trip(self):
        table = {}
        for mask in range(4):
            subset = frozenset(g for g in range(2) if mask >> g & 1)
            table[subset] = min(len(subset), 1)
        data = {
            "version": 1,
            "c": 2,
            "goods": ["a", "b"],
            "agents": [
                {
                    "name": "only",
                    "matroid": {
                        "type": "explicit",
                        "rank": {"": 0, "a": 1, "b": 1, "a,b": 1},
                    },
                }
            ],
        }
        instance = parse_instance(data)
        assert instance.valuation(1).rank({0, 1}) == 1
        assert parse_instance(emit_instance(instance)).value(1, {0, 1}) == 3

    def test_unknown_field_rejected(self):
        data = {
            "version": 1,
            "c": 2,
            "goods": ["a"],
            "agents": [{"name": "x", "matroid": {"type": "uniform", "cap": 1}}],
            "extra": True,
        }
        with pytest.raises(ValidationError):
            parse_instance(data)

    def test_duplicate_goods_rejected(self):
        data = {
            "version": 1,
            "c": 2,
            "goods": ["a", "a"],
            "agents": [{"matroid": {"type": "uniform", "cap": 1}}],
        }
        with pytest.raises(ValidationError):
            parse_instance(data)

    def test_value_pair_rescaling(self):
        assert rescale_pair(2, 6) == 3
        data = {
            "version": 1,
            "a": 2,
            "b": 6,
            "goods": ["a", "b"],
            "agents": [{"matroid": {"type": "marked", "marked": ["a"]}}],
        }
        instance = parse_instance(data)
        assert instance.c == 3
        assert instance.scale == 2

    def test_indivisible_pair_rejected(self):
        with pytest.raises(ValidationError, match="NP-hard"):
            rescale_pair(3, 7)

    def test_non_integer_c_rejected(self):
        data = {
            "version": 1,
            "c": 2.5,
            "goods": ["a"],
            "agents": [{"matroid": {"type": "uniform", "cap": 1}}],
        }
        with pytest.raises(ValidationError):
            parse_instance(data)


class TestAllocationParsing:
    def test_round_trip(self):
        instance = random_instance("partition", 2, 5, 2, 3)
        allocation = Allocation.from_bundles(instance, [{4}, {0, 1}, {2, 3}])
        data = emit_allocation(instance, allocation)
        assert parse_allocation(data, instance).bundles == allocation.bundles

    def test_partition_violation_rejected(self):
        instance = random_instance("marked", 2, 3, 2, 4)
        data = {
            "version": 1,
            "unallocated": [],
            "bundles": [["g1", "g2"], ["g2", "g3"]],
        }
        with pytest.raises(ValidationError):
            parse_allocation(data, instance)


class TestGeneratedInstances:
    def test_seeded_generation_is_byte_identical(self):
        for family in FAMILIES:
            a = dumps_canonical(emit_instance(random_instance(family, 3, 6, 2, 42)))
            b = dumps_canonical(emit_instance(random_instance(family, 3, 6, 2, 42)))
            assert a == b

    def test_marked_family_is_additive(self):
        instance = random_instance("marked", 2, 6, 3, 11)
        for i in instance.agents:
            matroid = instance.valuation(i).matroid
            for g in range(6):
                single = matroid.can_extend(frozenset(), g)
                rest = frozenset(h for h in range(6) if h != g)
                assert matroid.can_extend(rest - {g}, g) == single

    def test_some_transversal_draw_is_not_additive(self):
        # Additive rank would make a good's marginal independent of the
        # bundle; scan generated draws for a marginal that diminishes.
        def has_diminishing_marginal(matroid) -> bool:
            for mask in range(1 << matroid.m):
                subset = frozenset(g for g in range(matroid.m) if mask >> g & 1)
                for g in range(matroid.m):
                    if g in subset:
                        continue
                    if matroid.can_extend(frozenset(), g) and not matroid.can_extend(
                        subset, g
                    ):
                        return True
            return False

        assert any(
            has_diminishing_marginal(
                random_instance("transversal", 1, 5, 2, seed).valuation(1).matroid
            )
            for seed in range(25)
        ), "no generated transversal matroid showed diminishing rank"


class TestCli:
    def test_solve_leximin(self, tmp_path, capsys):
        path = _worked_example_file(tmp_path)
        assert main(["solve", str(path), "--criterion", "leximin"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["sorted_utilities"] == [5, 5]

    def test_solve_mnw_with_trace_and_dot(self, tmp_path, capsys):
        path = _worked_example_file(tmp_path)
        trace = tmp_path / "trace.jsonl"
        dot = tmp_path / "graph.dot"
        code = main(
            [
                "solve", str(path), "--criterion", "mnw",
                "--trace", str(trace), "--dot", str(dot),
                "-o", str(tmp_path / "out.json"),
            ]
        )
        assert code == 0
        out = json.loads((tmp_path / "out.json").read_text())
        assert out["utilities"] == [3, 15]
        lines = trace.read_text().strip().splitlines()
        assert all("gain_c" in json.loads(line) for line in lines)
        assert dot.read_text().startswith("digraph")

    def test_solve_rejects_coprime_pair(self, tmp_path, capsys):
        data = {
            "version": 1,
            "a": 3,
            "b": 7,
            "goods": ["x"],
            "agents": [{"matroid": {"type": "uniform", "cap": 1}}],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        assert main(["solve", str(path)]) == 2
        assert "NP-hard" in capsys.readouterr().err

    def test_gen_then_solve_then_audit(self, tmp_path, capsys):
        inst = tmp_path / "inst.json"
        alloc = tmp_path / "alloc.json"
        assert main(
            ["gen", "--family", "partition", "--n", "2", "--m", "5",
             "--c", "2", "--seed", "3", "-o", str(inst)]
        ) == 0
        assert main(
            ["solve", str(inst), "--criterion", "leximin", "-o", str(alloc)]
        ) == 0
        assert main(
            ["audit", str(inst), str(alloc), "--mms",
             "--criterion-hint", "leximin", "--json"]
        ) == 0
        report = json.loads(capsys.readouterr().out)
        assert all(row["meets_threshold"] for row in report["mms"])

    def test_gen_deterministic_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        args = ["gen", "--family", "transversal", "--n", "2", "--m", "4",
                "--c", "3", "--seed", "9"]
        assert main(args + ["-o", str(out1)]) == 0
        assert main(args + ["-o", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_oracle_check_passes(self, capsys):
        code = main(
            ["oracle-check", "--families", "marked", "uniform", "--count", "5",
             "--criteria", "mnw", "leximin", "pmean:-1", "--seed", "2"]
        )
        assert code == 0
        assert "0 mismatches" in capsys.readouterr().out

    def test_audit_flags_envy_violation(self, tmp_path, capsys):
        from bifair.io import emit_instance
        from conftest import capped_vs_additive_instance

        instance = capped_vs_additive_instance(3)
        inst = tmp_path / "inst.json"
        alloc = tmp_path / "alloc.json"
        inst.write_text(dumps_canonical(emit_instance(instance)), encoding="utf-8")
        assert main(["solve", str(inst), "--criterion", "mnw", "-o", str(alloc)]) == 0
        assert main(["audit", str(inst), str(alloc), "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ef1"] is False
        assert report["ef1_witness"] == [1, 2]

    def test_oracle_check_parallel(self, capsys):
        code = main(
            ["oracle-check", "--families", "partition", "--count", "6",
             "--criteria", "leximin", "--seed", "4", "--jobs", "2"]
        )
        assert code == 0
        assert "0 mismatches" in capsys.readouterr().out

    def test_audit_size_limit_surfaces(self, tmp_path, capsys):
        inst = tmp_path / "inst.json"
        alloc = tmp_path / "alloc.json"
        main(["gen", "--family", "marked", "--n", "2", "--m", "13",
              "--c", "2", "--seed", "1", "-o", str(inst)])
        main(["solve", str(inst), "-o", str(alloc)])
        capsys.readouterr()
        assert main(["audit", str(inst), str(alloc), "--mms"]) == 2
        assert "limited" in capsys.readouterr().err
