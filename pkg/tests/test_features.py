import numpy as np
import pytest

from bandswitch.learner import (
    FEATURE_NAMES,
    DegenerateLabelsError,
    assemble_features,
    class_weights,
    split_learn_exploit,
    stratified_partition,
)
from bandswitch.policies import UserRecord


def record(serving="sub6", rate_sub6=1.0e6, rate_mmwave=2.0e6, coords=(10.0, 5.0, 2.0)):
    return UserRecord(ue_id=0, time_step=0, serving_band=serving,
                      rate_sub6=rate_sub6, rate_mmwave=rate_mmwave,
                      threshold_sub6=1.72e6, threshold_mmwave=7.0e6, coords=coords)


class TestAssembleFeatures:
    def test_table_ordering(self):
        assert FEATURE_NAMES == ("bias", "eff_rate_sub6", "eff_rate_mmwave",
                                 "source_is_sub6", "coord_x", "coord_y", "coord_z",
                                 "switch_requested")

    def test_label_from_rate_comparison(self, reference_schedule):
        x, y = assemble_features([record()], reference_schedule, mode="full")
        assert y[0] == 1  # mmWave 2.0 > sub-6 1.0
        x, y = assemble_features([record(rate_mmwave=0.5e6)], reference_schedule, mode="full")
        assert y[0] == 0

    def test_equal_rates_label_zero(self, reference_schedule):
        _, y = assemble_features([record(rate_mmwave=1.0e6)], reference_schedule, mode="full")
        assert y[0] == 0  # strict inequality

    def test_full_mode_values(self, reference_schedule):
        x, _ = assemble_features([record()], reference_schedule, mode="full")
        row = x[0]
        assert row[0] == 1.0
        assert row[1] == pytest.approx(reference_schedule.base_weight("sub6") * 1.0e6)
        assert row[2] == pytest.approx(reference_schedule.base_weight("mmwave") * 2.0e6)
        assert row[3] == 1.0
        assert tuple(row[4:7]) == (10.0, 5.0, 2.0)
        assert row[7] == 1.0

    def test_learning_phase_forces_request_flag(self, reference_schedule):
        recs = [record(rate_sub6=5.0e6)]  # above threshold: would not request
        x, _ = assemble_features(recs, reference_schedule, mode="full", force_requested=True)
        assert x[0, 7] == 1.0
        x, _ = assemble_features(recs, reference_schedule, mode="full", force_requested=False)
        assert x[0, 7] == 0.0

    def test_deployable_masks_target_band(self, reference_schedule):
        x, _ = assemble_features([record(serving="sub6")], reference_schedule, mode="deployable")
        assert x[0, 2] == 0.0 and x[0, 1] > 0.0
        x, _ = assemble_features([record(serving="mmwave")], reference_schedule, mode="deployable")
        assert x[0, 1] == 0.0 and x[0, 2] > 0.0

    def test_missing_rate_rejected(self, reference_schedule):
        with pytest.raises(ValueError):
            assemble_features([record(rate_mmwave=float("nan"))], reference_schedule, mode="full")

    def test_unknown_mode_rejected(self, reference_schedule):
        with pytest.raises(ValueError):
            assemble_features([record()], reference_schedule, mode="both")


class TestStratifiedPartition:
    def test_equal_partition_sizes_at_54480(self, rng):
        labels = np.zeros(54_480, dtype=int)
        labels[:16_344] = 1  # 30 percent positive
        parts = stratified_partition(labels, 10, rng)
        assert [p.size for p in parts] == [5_448] * 10

    def test_class_ratio_within_one(self, rng):
        labels = np.r_[np.ones(30, dtype=int), np.zeros(70, dtype=int)]
        rng.shuffle(labels)
        parts = stratified_partition(labels, 10, rng)
        for p in parts:
            assert p.size == 10
            assert abs(int(labels[p].sum()) - 3) <= 1

    def test_single_partition(self, rng):
        labels = np.array([0, 1, 0, 1, 1])
        parts = stratified_partition(labels, 1, rng)
        assert len(parts) == 1
        assert sorted(parts[0]) == [0, 1, 2, 3, 4]

    def test_disjoint_and_covering(self, rng):
        labels = rng.integers(0, 2, 1013)
        parts = stratified_partition(labels, 7, rng)
        joined = np.concatenate(parts)
        assert len(joined) == 1013
        assert len(set(joined.tolist())) == 1013

    def test_deterministic_under_seed(self):
        labels = np.tile([0, 1, 0], 100)
        a = stratified_partition(labels, 5, np.random.default_rng(42))
        b = stratified_partition(labels, 5, np.random.default_rng(42))
        for pa, pb in zip(a, b):
            np.testing.assert_array_equal(pa, pb)

    def test_too_few_rows(self, rng):
        with pytest.raises(ValueError):
            stratified_partition([0, 1], 3, rng)


class TestSplitLearnExploit:
    def test_split_sizes_at_5448(self, rng):
        learn, exploit = split_learn_exploit(np.arange(5_448), 0.8, rng)
        assert learn.size == 1_090
        assert exploit.size == 4_358

    def test_near_zero_q_empties_exploit(self, rng):
        learn, exploit = split_learn_exploit(np.arange(100), 1e-9, rng)
        assert exploit.size <= 1

    def test_disjoint_union(self, rng):
        part = np.arange(100, 200)
        learn, exploit = split_learn_exploit(part, 0.8, rng)
        merged = sorted(np.concatenate([learn, exploit]).tolist())
        assert merged == list(range(100, 200))

    def test_invalid_q(self, rng):
        with pytest.raises(ValueError):
            split_learn_exploit(np.arange(10), 1.0, rng)


class TestClassWeights:
    def test_inverse_frequency_mean_one(self):
        y = np.array([1, 0, 0, 0])
        w = class_weights(y)
        assert w.mean() == pytest.approx(1.0)
        assert w[0] == pytest.approx(2.0)      # minority: 4 / (2 * 1)
        assert w[1] == pytest.approx(2.0 / 3)  # majority: 4 / (2 * 3)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateLabelsError):
            class_weights(np.ones(5, dtype=int))
