import numpy as np
import pytest

from footplan.curriculum import (
    DensitySchedule,
    load_state,
    make_velocity_grid,
    maybe_promote,
    sample_command,
    save_state,
    update_probs,
)


class TestVelocityGrid:
    def test_default_grid_shape(self):
        grid = make_velocity_grid()
        assert grid.bins_per_axis == (11, 5, 11)
        assert grid.n_bins == 605
        assert grid.probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_single_bin_grid_samples_inside_its_box(self):
        grid = make_velocity_grid(bin_counts=(1, 1, 1))
        rng = np.random.default_rng(0)
        for _ in range(100):
            cmd, index = sample_command(grid, rng)
            assert index == 0
            assert -1.0 <= cmd.vx <= 1.0
            assert -0.5 <= cmd.vy <= 0.5
            assert -1.0 <= cmd.wz <= 1.0

    def test_sampled_commands_fall_in_reported_bin(self):
        grid = make_velocity_grid(bin_counts=(4, 3, 4))
        rng = np.random.default_rng(1)
        for _ in range(300):
            cmd, index = sample_command(grid, rng)
            (x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi) = grid.bin_bounds(index)
            assert x_lo <= cmd.vx <= x_hi
            assert y_lo <= cmd.vy <= y_hi
            assert z_lo <= cmd.wz <= z_hi

    def test_uniform_sampling_frequencies(self):
        grid = make_velocity_grid(bin_counts=(3, 2, 3))
        rng = np.random.default_rng(7)
        n = 100_000
        counts = np.zeros(grid.n_bins)
        for _ in range(n):
            _, index = sample_command(grid, rng)
            counts[index] += 1
        p = 1.0 / grid.n_bins
        sigma = np.sqrt(n * p * (1 - p))
        assert (np.abs(counts - n * p) < 3 * sigma).all()

    def test_dominant_bin_dominates_draws(self):
        grid = make_velocity_grid(bin_counts=(2, 1, 1))
        # drive bin 1 to a mastered reward so bin 0 dominates
        for _ in range(3000):
            grid = update_probs(grid, 1, 2.0)
        rng = np.random.default_rng(3)
        draws = [sample_command(grid, rng)[1] for _ in range(1000)]
        assert draws.count(0) > 990

    def test_sampling_reproducible_under_seeded_rng(self):
        grid = make_velocity_grid()
        a = [sample_command(grid, np.random.default_rng(11))[1] for _ in range(50)]
        b = [sample_command(grid, np.random.default_rng(11))[1] for _ in range(50)]
        assert a == b


class TestUpdateProbs:
    def test_equal_emas_give_uniform(self):
        grid = make_velocity_grid(bin_counts=(3, 1, 3))
        assert np.allclose(grid.probs, 1.0 / grid.n_bins)
        # one identical observation everywhere keeps the distribution uniform
        for k in range(grid.n_bins):
            grid = update_probs(grid, k, 1.0)
        assert np.allclose(grid.probs, 1.0 / grid.n_bins)

    def test_mastered_bin_approaches_weight_floor_share(self):
        grid = make_velocity_grid(bin_counts=(2, 2, 2))
        for _ in range(2000):
            grid = update_probs(grid, 0, 2.0)
        n = grid.n_bins
        eps = grid.weight_floor
        expected = eps / (eps + (n - 1) * (2.0 + eps))
        assert grid.probs[0] == pytest.approx(expected, rel=1e-5)

    def test_harder_bins_sampled_more(self):
        grid = make_velocity_grid(bin_counts=(2, 1, 1))
        for _ in range(500):
            grid = update_probs(grid, 0, 2.0)   # easy: tracked perfectly
            grid = update_probs(grid, 1, 0.5)   # hard: tracked poorly
        assert grid.probs[1] > grid.probs[0]

    def test_ema_converges_to_constant_reward(self):
        grid = make_velocity_grid(bin_counts=(1, 1, 1))
        r = 1.3
        for _ in range(2000):
            grid = update_probs(grid, 0, r)
        assert abs(grid.reward_ema[0] - r) < 1e-6

    def test_probabilities_remain_valid_with_floor(self):
        grid = make_velocity_grid(bin_counts=(3, 2, 2))
        rng = np.random.default_rng(5)
        for _ in range(2000):
            grid = update_probs(grid, int(rng.integers(grid.n_bins)),
                                float(rng.uniform(0.01, 2.0)))
            assert abs(grid.probs.sum() - 1.0) <= 1e-9
            assert (grid.probs >= grid.prob_floor - 1e-15).all()

    def test_reward_range_enforced(self):
        grid = make_velocity_grid(bin_counts=(1, 1, 1))
        with pytest.raises(ValueError):
            update_probs(grid, 0, 0.0)
        with pytest.raises(ValueError):
            update_probs(grid, 0, 2.01)
        update_probs(grid, 0, 2.0)

    def test_bad_bin_rejected(self):
        grid = make_velocity_grid(bin_counts=(1, 1, 1))
        with pytest.raises(IndexError):
            update_probs(grid, 1, 1.0)


class TestDensitySchedule:
    def test_below_threshold_unchanged(self):
        sched = DensitySchedule(current=5.0, maximum=25.0, step=5.0, promote_threshold=1.6)
        assert maybe_promote(sched, 1.5) == sched

    def test_saturation_at_maximum(self):
        sched = DensitySchedule(current=25.0, maximum=25.0, step=5.0)
        assert maybe_promote(sched, 2.0).current == 25.0

    def test_example_sequence(self):
        sched = DensitySchedule(current=5.0, maximum=25.0, step=5.0, promote_threshold=1.6)
        seq = []
        for reward in (1.7, 1.7, 1.5):
            sched = maybe_promote(sched, reward)
            seq.append(sched.current)
        assert seq == [10.0, 15.0, 15.0]

    def test_never_decreases_under_random_updates(self):
        rng = np.random.default_rng(9)
        sched = DensitySchedule(current=0.0, maximum=25.0, step=2.5)
        last = sched.current
        for _ in range(2000):
            sched = maybe_promote(sched, float(rng.uniform(0.0, 2.0)))
            assert sched.current >= last
            last = sched.current

    def test_validation(self):
        with pytest.raises(ValueError):
            DensitySchedule(current=30.0, maximum=25.0)
        with pytest.raises(ValueError):
            DensitySchedule(step=-1.0)


class TestStateIO:
    def test_round_trip(self, tmp_path):
        grid = make_velocity_grid(bin_counts=(3, 2, 3))
        rng = np.random.default_rng(13)
        for _ in range(40):
            grid = update_probs(grid, int(rng.integers(grid.n_bins)),
                                float(rng.uniform(0.1, 2.0)))
        sched = DensitySchedule(current=10.0, maximum=25.0, step=5.0, promote_threshold=1.6)
        path = tmp_path / "curriculum.txt"
        save_state(grid, sched, path)
        grid2, sched2 = load_state(path)
        assert sched2 == sched
        assert grid2.weight_floor == grid.weight_floor
        for a, b in zip(grid2.edges, grid.edges):
            assert np.array_equal(a, b)
        assert np.array_equal(grid2.probs, grid.probs)
        assert np.array_equal(grid2.reward_ema, grid.reward_ema)

    def test_missing_record_rejected(self, tmp_path):
        grid = make_velocity_grid(bin_counts=(1, 1, 1))
        path = tmp_path / "curriculum.txt"
        save_state(grid, DensitySchedule(), path)
        text = "\n".join(
            ln for ln in path.read_text().splitlines() if not ln.startswith("probs")
        )
        path.write_text(text + "\n")
        with pytest.raises(ValueError, match="probs"):
            load_state(path)
