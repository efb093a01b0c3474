import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptivq.assignment import (
    DEFAULT_ARM_SPLIT,
    AssignmentError,
    ExperimentGroup,
    assign_group,
    assign_level,
    build_percentile_table,
    load_table,
    save_table,
    select_variant,
)
from adaptivq.bank import Level


def rank_rule_bucket(values, x):
    """Direct evaluation of the nearest-rank rule, independent of the table code."""
    ordered = sorted(values)
    n = len(ordered)
    p33 = ordered[max(1, math.ceil(0.33 * n)) - 1]
    p66 = ordered[max(1, math.ceil(0.66 * n)) - 1]
    if x < p33:
        return Level.BEGINNER
    if x < p66:
        return Level.INTERMEDIATE
    return Level.ADVANCED


class TestPercentileTable:
    def test_single_element(self):
        table = build_percentile_table([0.4])
        assert table.p33 == table.p66 == 0.4
        assert table.n == 1

    def test_nine_element_example(self):
        table = build_percentile_table([0.1 * i for i in range(1, 10)])
        assert table.p33 == pytest.approx(0.3)
        assert table.p66 == pytest.approx(0.6)

    def test_thresholds_are_elements(self):
        values = [0.11, 0.52, 0.52, 0.52, 0.97]
        table = build_percentile_table(values)
        assert table.p33 in values and table.p66 in values
        assert table.p33 <= table.p66

    def test_duplicate_heavy_still_total(self):
        table = build_percentile_table([0.5] * 20)
        assert table.p33 == table.p66 == 0.5
        for p in (0.0, 0.49, 0.5, 0.51, 1.0):
            assert assign_level(table, p) in Level

    def test_empty_rejected(self):
        with pytest.raises(AssignmentError, match="empty"):
            build_percentile_table([])

    def test_out_of_range_rejected(self):
        with pytest.raises(AssignmentError):
            build_percentile_table([0.2, 1.4])


class TestAssignLevel:
    def test_low_probability_beginner(self):
        table = build_percentile_table([0.1 * i for i in range(1, 10)])
        assert assign_level(table, 0.15) is Level.BEGINNER

    def test_exact_p33_is_intermediate(self):
        table = build_percentile_table([0.1 * i for i in range(1, 10)])
        assert assign_level(table, table.p33) is Level.INTERMEDIATE

    def test_exact_p66_is_advanced(self):
        table = build_percentile_table([0.1 * i for i in range(1, 10)])
        assert assign_level(table, table.p66) is Level.ADVANCED

    def test_high_probability_advanced(self):
        table = build_percentile_table([0.1 * i for i in range(1, 10)])
        assert assign_level(table, 0.95) is Level.ADVANCED

    def test_out_of_range(self):
        table = build_percentile_table([0.5])
        with pytest.raises(AssignmentError):
            assign_level(table, 1.5)

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=60))
    def test_monotone_and_matches_rank_rule(self, values):
        table = build_percentile_table(values)
        grid = sorted(values + [0.0, 0.333, 0.666, 1.0])
        buckets = [assign_level(table, x) for x in grid]
        assert all(a <= b for a, b in zip(buckets, buckets[1:]))
        for x in values:
            assert assign_level(table, x) is rank_rule_bucket(values, x)

    def test_bucket_oracle_on_random_lists(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            values = rng.uniform(0, 1, size=rng.integers(1, 200)).round(4).tolist()
            table = build_percentile_table(values)
            for x in values:
                assert assign_level(table, x) is rank_rule_bucket(values, x)


class TestSelectVariant:
    def test_expected_gets_assigned(self, fixture_bank):
        q = fixture_bank.get("q-prob-mean")
        shown, text = select_variant(q, Level.BEGINNER, ExperimentGroup.EXPECTED, 0, "s1", q.id)
        assert shown is Level.BEGINNER
        assert text == q.variants[Level.BEGINNER].text

    def test_control_gets_original(self, fixture_bank):
        q = fixture_bank.get("q-prob-complement")  # original advanced
        for assigned in Level:
            shown, text = select_variant(q, assigned, ExperimentGroup.CONTROL, 0, "s1", q.id)
            assert shown is q.original_level
            assert text == q.variants[q.original_level].text

    def test_control_never_beginner(self, fixture_bank):
        for q in fixture_bank:
            for assigned in Level:
                shown, _ = select_variant(q, assigned, ExperimentGroup.CONTROL, 7, "s1", q.id)
                assert shown is not Level.BEGINNER

    def test_non_expected_mismatched_and_reproducible(self, fixture_bank):
        q = fixture_bank.get("q-prob-mean")
        first, _ = select_variant(q, Level.BEGINNER, ExperimentGroup.NON_EXPECTED, 3, "s1", q.id)
        assert first in (Level.INTERMEDIATE, Level.ADVANCED)
        again, _ = select_variant(q, Level.BEGINNER, ExperimentGroup.NON_EXPECTED, 3, "s1", q.id)
        assert again is first

    def test_non_expected_uses_both_alternatives(self, fixture_bank):
        q = fixture_bank.get("q-prob-mean")
        seen = {
            select_variant(q, Level.BEGINNER, ExperimentGroup.NON_EXPECTED, 3, f"s{i}", q.id)[0]
            for i in range(40)
        }
        assert seen == {Level.INTERMEDIATE, Level.ADVANCED}


class TestAssignGroup:
    def test_degenerate_split(self):
        for i in range(20):
            assert assign_group(f"s{i}", (1.0, 0.0, 0.0), seed=0) is ExperimentGroup.EXPECTED

    def test_deterministic(self):
        assert assign_group("alice", seed=42) is assign_group("alice", seed=42)

    def test_seed_changes_assignment_somewhere(self):
        ids = [f"s{i}" for i in range(50)]
        a = [assign_group(s, seed=1) for s in ids]
        b = [assign_group(s, seed=2) for s in ids]
        assert a != b

    def test_proportions_within_two_percent(self):
        counts = {g: 0 for g in ExperimentGroup}
        n = 10_000
        for i in range(n):
            counts[assign_group(f"student-{i}", DEFAULT_ARM_SPLIT, seed=0)] += 1
        for group, target in zip(
            (ExperimentGroup.EXPECTED, ExperimentGroup.NON_EXPECTED, ExperimentGroup.CONTROL),
            DEFAULT_ARM_SPLIT,
        ):
            assert abs(counts[group] / n - target) < 0.02

    @pytest.mark.parametrize("split", [(0.5, 0.5, 0.5), (0.9, 0.2, -0.1), (1.0, 0.0)])
    def test_invalid_split_rejected(self, split):
        with pytest.raises(AssignmentError):
            assign_group("s1", split, seed=0)


class TestTableFile:
    def test_roundtrip(self, tmp_path):
        table = build_percentile_table([0.25, 0.5, 0.75], source_model_hash="abc123def456")
        path = tmp_path / "table.json"
        save_table(table, path)
        loaded = load_table(path)
        assert loaded.p33 == table.p33
        assert loaded.p66 == table.p66
        assert loaded.n == 3
        assert loaded.source_model_hash == "abc123def456"
        assert loaded.sorted_predictions is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(AssignmentError, match="not found"):
            load_table(tmp_path / "none.json")

    def test_malformed(self, tmp_path):
        path = tmp_path / "table.json"
        path.write_text('{"p33": 0.1}')
        with pytest.raises(AssignmentError, match="malformed"):
            load_table(path)
