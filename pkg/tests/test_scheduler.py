"""Schedules: epoch rescaling, budget conservation, recall-interval laws."""

import numpy as np
import pytest

from conftest import make_samples
from vblab.errors import ConfigError, EpochExhausted, MetricError
from vblab.scheduler import (
    Schedule,
    TrainConfig,
    build_schedule,
    build_schedule_class_variant,
    drain_schedule,
    measure_recall_interval,
    next_view_batch,
)


def cfg(**kw) -> TrainConfig:
    base = dict(base_epochs=4, batch_size=8, views=1, mode="conventional")
    base.update(kw)
    return TrainConfig(**base)


def vb_cfg(**kw) -> TrainConfig:
    kw.setdefault("mode", "view_batch_sample")
    return cfg(**kw)


def run_log(n_samples, config, seed=0, epochs=None) -> list[int]:
    """Presentation log of a full (or truncated) run with identity views."""
    pool = make_samples(np.random.default_rng(123), n_samples, dim=3)
    schedule = build_schedule(n_samples, config, log_presentations=True)
    rng = np.random.default_rng(seed)
    for _ in range(epochs if epochs is not None else schedule.epochs):
        schedule.start_epoch(pool, rng)
        while True:
            try:
                next_view_batch(schedule, pool, [], None)
            except EpochExhausted:
                break
    return list(schedule.presentation_log)


class TestTrainConfigValidation:
    def test_conventional_requires_single_view(self):
        with pytest.raises(ConfigError):
            cfg(views=2)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            cfg(mode="interleaved")

    def test_positive_fields(self):
        with pytest.raises(ConfigError):
            cfg(base_epochs=0)
        with pytest.raises(ConfigError):
            cfg(batch_size=0)
        with pytest.raises(ConfigError):
            cfg(learning_rate=0.0)
        with pytest.raises(ConfigError):
            vb_cfg(views=0)


class TestBuildSchedule:
    def test_batch_size_must_divide_into_views(self):
        with pytest.raises(ConfigError):
            build_schedule(100, vb_cfg(batch_size=8, views=3))

    @pytest.mark.parametrize(
        "base,views,expected",
        [(10, 1, 10), (10, 2, 5), (10, 3, 3), (10, 4, 3), (10, 5, 2), (4, 4, 1), (3, 20, 1)],
    )
    def test_epoch_rescaling_rounds_half_up_with_floor_one(self, base, views, expected):
        schedule = build_schedule(
            100, vb_cfg(base_epochs=base, batch_size=60, views=views)
        )
        assert schedule.epochs == expected

    def test_single_sample_per_entry_at_views_equal_batch(self):
        schedule = build_schedule(4, vb_cfg(base_epochs=4, batch_size=4, views=4))
        assert schedule.epochs == 1
        assert schedule.entries_per_batch == 1
        assert schedule.steps_per_epoch == 4

    def test_large_grid_point(self):
        schedule = build_schedule(1024, vb_cfg(base_epochs=8, batch_size=32, views=4))
        assert schedule.epochs == 2
        assert schedule.steps_per_epoch == 128
        assert schedule.entries_per_batch == 8

    def test_ragged_final_step_counted(self):
        schedule = build_schedule(10, cfg(batch_size=4))
        assert schedule.steps_per_epoch == 3  # 4 + 4 + 2


class TestNextViewBatch:
    def test_single_sample_pool_two_views(self):
        pool = make_samples(np.random.default_rng(0), 1, dim=3)
        schedule = build_schedule(1, vb_cfg(batch_size=2, views=2))
        schedule.start_epoch(pool, np.random.default_rng(1))
        batch = next_view_batch(schedule, pool, [], None)
        assert batch.n_entries == 1
        assert [v.sample_id for v in batch.entries[0].views] == [0, 0]

    def test_epoch_covers_every_sample_exactly_once(self):
        log = run_log(20, cfg(base_epochs=1, batch_size=8))
        assert sorted(log) == list(range(20))

    def test_view_batch_epoch_presents_each_sample_v_contiguous_times(self):
        config = vb_cfg(base_epochs=3, batch_size=9, views=3)
        log = run_log(12, config, epochs=1)
        arr = np.array(log).reshape(-1, 3)
        assert np.all(arr == arr[:, :1])  # contiguous view blocks
        assert sorted(arr[:, 0].tolist()) == list(range(12))

    def test_epoch_exhaustion_signalled(self):
        pool = make_samples(np.random.default_rng(0), 4, dim=3)
        schedule = build_schedule(4, cfg(batch_size=4, base_epochs=1))
        schedule.start_epoch(pool, np.random.default_rng(0))
        next_view_batch(schedule, pool, [], None)
        with pytest.raises(EpochExhausted):
            next_view_batch(schedule, pool, [], None)

    def test_start_epoch_required_first(self):
        pool = make_samples(np.random.default_rng(0), 4, dim=3)
        schedule = build_schedule(4, cfg(batch_size=4))
        with pytest.raises(ConfigError):
            next_view_batch(schedule, pool, [], None)

    def test_buffer_entries_follow_current_entries(self):
        rng_data = np.random.default_rng(0)
        pool = make_samples(rng_data, 8, dim=3)
        buffer = make_samples(rng_data, 30, dim=3, start_id=100)
        schedule = build_schedule(8, vb_cfg(batch_size=4, views=2))
        schedule.start_epoch(pool, np.random.default_rng(1))
        batch = next_view_batch(
            schedule, pool, buffer, None, rng_buffer=np.random.default_rng(2)
        )
        origins = [e.origin for e in batch.entries]
        assert origins == ["current"] * 2 + ["buffer"] * 2  # B/V entries of each
        buffer_ids = [e.views[0].sample_id for e in batch.entries if e.origin == "buffer"]
        assert len(set(buffer_ids)) == len(buffer_ids)  # without replacement
        assert all(sid >= 100 for sid in buffer_ids)

    def test_origin_ratio_over_many_batches(self):
        rng_data = np.random.default_rng(3)
        pool = make_samples(rng_data, 64, dim=3)
        buffer = make_samples(rng_data, 50, dim=3, start_id=500)
        schedule = build_schedule(64, vb_cfg(batch_size=8, views=2, base_epochs=130))
        rng_sched = np.random.default_rng(4)
        rng_buf = np.random.default_rng(5)
        counts = {"current": 0, "buffer": 0}
        batches = 0
        for _ in range(schedule.epochs):
            schedule.start_epoch(pool, rng_sched)
            while True:
                try:
                    batch = next_view_batch(schedule, pool, buffer, None, rng_buffer=rng_buf)
                except EpochExhausted:
                    break
                batches += 1
                for e in batch.entries:
                    counts[e.origin] += 1
        assert batches >= 1000
        assert counts["current"] == counts["buffer"]  # configured 1:1 ratio

    def test_small_buffer_is_drawn_whole(self):
        pool = make_samples(np.random.default_rng(0), 8, dim=3)
        buffer = make_samples(np.random.default_rng(1), 2, dim=3, start_id=50)
        schedule = build_schedule(8, vb_cfg(batch_size=8, views=1))
        schedule.start_epoch(pool, np.random.default_rng(2))
        batch = next_view_batch(
            schedule, pool, buffer, None, rng_buffer=np.random.default_rng(3)
        )
        assert sum(1 for e in batch.entries if e.origin == "buffer") == 2


class TestDeterminism:
    def test_identical_seeds_identical_logs(self):
        config = vb_cfg(base_epochs=6, batch_size=6, views=2)
        assert run_log(18, config, seed=9) == run_log(18, config, seed=9)

    def test_different_seeds_differ(self):
        config = cfg(base_epochs=2, batch_size=6)
        assert run_log(18, config, seed=1) != run_log(18, config, seed=2)


class TestPresentationBudget:
    @pytest.mark.parametrize(
        "n,batch,views,base",
        [
            (64, 8, 1, 6),
            (64, 8, 2, 6),
            (64, 8, 4, 8),
            (96, 12, 3, 9),
            (50, 10, 5, 10),
            (1024, 32, 4, 8),
        ],
    )
    def test_exact_when_views_divide_epochs(self, n, batch, views, base):
        pool = make_samples(np.random.default_rng(0), n, dim=3)
        conventional = drain_schedule(
            build_schedule(n, cfg(base_epochs=base, batch_size=batch)),
            pool,
            np.random.default_rng(1),
        )
        view_batch = drain_schedule(
            build_schedule(n, vb_cfg(base_epochs=base, batch_size=batch, views=views)),
            pool,
            np.random.default_rng(2),
        )
        assert conventional == n * base
        assert abs(view_batch - conventional) <= batch

    def test_grid_point_totals(self):
        # 1024 samples, 32-wide batches of 4 views, 8 base epochs: both
        # schedules present exactly 8192 images
        pool = make_samples(np.random.default_rng(0), 1024, dim=2)
        total = drain_schedule(
            build_schedule(1024, vb_cfg(base_epochs=8, batch_size=32, views=4)),
            pool,
            np.random.default_rng(1),
        )
        assert total == 8192


class TestRecallIntervals:
    def test_hand_built_log_single_view(self):
        stats = measure_recall_interval([0, 1, 0, 1], views_per_visit=1)
        assert stats.mean == 2.0
        assert stats.minimum == 2 and stats.maximum == 2
        assert stats.n_samples == 2

    def test_hand_built_log_two_views(self):
        stats = measure_recall_interval([5, 5, 7, 7, 5, 5, 7, 7], views_per_visit=2)
        assert stats.mean == 4.0
        assert stats.n_samples == 2

    def test_misaligned_blocks_rejected(self):
        with pytest.raises(ValueError):
            measure_recall_interval([1, 2, 2, 1], views_per_visit=2)

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            measure_recall_interval([1, 1, 2], views_per_visit=2)

    def test_no_revisit_is_an_error(self):
        with pytest.raises(MetricError):
            measure_recall_interval([0, 1, 2], views_per_visit=1)

    def test_conventional_mean_equals_pool_size(self):
        n = 40
        log = run_log(n, cfg(base_epochs=4, batch_size=8), seed=11)
        stats = measure_recall_interval(log, views_per_visit=1)
        assert stats.mean == float(n)

    @pytest.mark.parametrize("views", [2, 3])
    def test_view_batch_multiplies_the_mean_interval(self, views):
        n, batch, base = 36, 12, 6
        conv = measure_recall_interval(
            run_log(n, cfg(base_epochs=base, batch_size=batch), seed=21), 1
        )
        vb = measure_recall_interval(
            run_log(n, vb_cfg(base_epochs=base, batch_size=batch, views=views), seed=22),
            views,
        )
        assert conv.mean == float(n)
        assert vb.mean == views * conv.mean  # exact, not approximate

    def test_gap_bounds_on_shuffled_epochs(self):
        n, views = 24, 3
        log = run_log(n, vb_cfg(base_epochs=9, batch_size=6, views=views), seed=31)
        stats = measure_recall_interval(log, views_per_visit=views)
        assert stats.minimum >= 1
        assert stats.maximum <= 2 * n * views - 1


class TestClassVariant:
    def pool_of_classes(self, n_classes, per_class):
        from vblab.augment import Sample

        rng = np.random.default_rng(7)
        pool = []
        sid = 0
        for c in range(n_classes):
            for _ in range(per_class):
                pool.append(
                    Sample(
                        features=rng.normal(size=3),
                        label=c,
                        task_id=0,
                        sample_id=sid,
                    )
                )
                sid += 1
        return pool

    def drain_epoch(self, schedule, pool, rng):
        schedule.start_epoch(pool, rng)
        ids = []
        while True:
            try:
                batch = next_view_batch(schedule, pool, [], None)
            except EpochExhausted:
                break
            ids.extend(v.sample_id for e in batch.entries for v in e.views)
        return ids

    def test_each_epoch_restricted_to_one_group(self):
        pool = self.pool_of_classes(10, 4)
        by_id = {s.sample_id: s.label for s in pool}
        config = vb_cfg(
            mode="view_batch_class", class_groups=5, batch_size=8, views=1, base_epochs=5
        )
        schedule = build_schedule_class_variant(len(pool), config)
        rng = np.random.default_rng(1)
        for epoch in range(5):
            ids = self.drain_epoch(schedule, pool, rng)
            labels = {by_id[i] for i in ids}
            assert labels == {2 * epoch, 2 * epoch + 1}  # groups rotate in order
            # every member of the group appears exactly group-count times
            counts = {i: ids.count(i) for i in set(ids)}
            assert set(counts.values()) == {5}

    def test_single_group_is_one_plain_permutation(self):
        pool = self.pool_of_classes(4, 3)
        config = vb_cfg(mode="view_batch_class", class_groups=1, batch_size=4, views=1)
        schedule = build_schedule_class_variant(len(pool), config)
        ids = self.drain_epoch(schedule, pool, np.random.default_rng(3))
        assert sorted(ids) == [s.sample_id for s in pool]

    def test_too_many_groups_rejected(self):
        pool = self.pool_of_classes(2, 5)
        config = vb_cfg(mode="view_batch_class", class_groups=3, batch_size=5, views=1)
        schedule = build_schedule_class_variant(len(pool), config)
        with pytest.raises(ConfigError):
            schedule.start_epoch(pool, np.random.default_rng(0))

    def test_builder_forces_class_mode(self):
        config = vb_cfg(batch_size=4, views=2, class_groups=2)
        schedule = build_schedule_class_variant(40, config)
        assert schedule.mode == "view_batch_class"
        assert schedule.class_groups == 2


class TestSummary:
    def test_summary_fields(self):
        schedule = build_schedule(100, vb_cfg(base_epochs=10, batch_size=10, views=2))
        summary = schedule.summary()
        assert summary["views"] == 2
        assert summary["epochs"] == 5
        assert summary["entries_per_batch"] == 5
        assert summary["steps_per_epoch"] == 20
