import numpy as np
import pytest

from depthproj.depth_image import DenseDepthMap, SparseDepthMap
from depthproj.errors import ConfigError, EmptyInputError
from depthproj.reliable import (FilterParams, filter_reliable, noise_rate,
                                sweep_params)
from util import random_sparse


def sparse_from(values, provenance="projected"):
    values = np.asarray(values, dtype=np.float64)
    valid = values > 0
    return SparseDepthMap(values, valid, provenance)


class TestFilterReliable:
    def test_params_validated(self):
        with pytest.raises(ConfigError):
            FilterParams(window=0)
        with pytest.raises(ConfigError):
            FilterParams(thickness=-0.1)

    def test_constant_map_keeps_everything(self):
        rng = np.random.default_rng(0)
        valid = rng.random((40, 60)) < 0.2
        s = SparseDepthMap(np.where(valid, 7.5, 0.0), valid, "projected")
        rps = filter_reliable(s, FilterParams(16, 0.5))
        assert np.array_equal(rps.kept.valid, s.valid)
        assert rps.dropped_count == 0

    def test_two_mode_tile_drops_far_mode(self):
        # one 4x4 tile holding depths {5.0, 5.2, 20.0}
        values = np.zeros((4, 4))
        values[0, 0], values[1, 2], values[3, 3] = 5.0, 5.2, 20.0
        s = sparse_from(values)
        rps = filter_reliable(s, FilterParams(4, 0.5))
        kept = sorted(rps.kept.values[rps.kept.valid])
        assert kept == [5.0, 5.2]
        assert rps.dropped_count == 1
        assert rps.window_min[0, 0] == 5.0

    def test_zero_thickness_keeps_exactly_minima(self):
        rng = np.random.default_rng(1)
        s = random_sparse(rng, 32, 24, density=0.4)
        rps = filter_reliable(s, FilterParams(8, 0.0))
        kept_vals = rps.kept.values[rps.kept.valid]
        mins = rps.window_min[~np.isnan(rps.window_min)]
        assert set(kept_vals) == set(mins)

    def test_empty_input_passes_through(self):
        s = SparseDepthMap(np.zeros((8, 8)), np.zeros((8, 8), bool), "projected")
        rps = filter_reliable(s)
        assert rps.kept.valid_count == 0
        assert rps.dropped_fraction == 0.0


class TestFilterProperties:
    def run_properties(self, rng):
        h, w = int(rng.integers(4, 40)), int(rng.integers(4, 40))
        wp = int(rng.integers(1, 10))
        theta = float(rng.choice([0.0, 0.1, 0.5, 2.0]))
        s = random_sparse(rng, w, h, density=float(rng.uniform(0.05, 0.6)))
        if s.valid_count == 0:
            return
        p = FilterParams(wp, theta)
        rps = filter_reliable(s, p)

        # subset
        assert not np.any(rps.kept.valid & ~s.valid)
        # band: every kept value within [d_m, d_m + theta] of its tile
        vv, uu = np.nonzero(rps.kept.valid)
        dm = rps.window_min[vv // wp, uu // wp]
        vals = rps.kept.values[vv, uu]
        assert np.all(vals >= dm) and np.all(vals <= dm + theta)
        # per-tile minimum kept
        tmin = rps.window_min
        for ty, tx in zip(*np.nonzero(~np.isnan(tmin))):
            tile_kept = rps.kept.values[ty * wp:(ty + 1) * wp, tx * wp:(tx + 1) * wp][
                rps.kept.valid[ty * wp:(ty + 1) * wp, tx * wp:(tx + 1) * wp]]
            assert tile_kept.size >= 1
            assert tile_kept.min() == tmin[ty, tx]
        # monotone in theta
        rps2 = filter_reliable(s, FilterParams(wp, theta + 0.7))
        assert not np.any(rps.kept.valid & ~rps2.kept.valid)
        # idempotent
        again = filter_reliable(rps.kept, p)
        assert np.array_equal(again.kept.valid, rps.kept.valid)
        assert again.dropped_count == 0

    def test_randomized_properties(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            self.run_properties(rng)


class TestNoiseRate:
    def test_sampled_from_truth_is_zero(self):
        rng = np.random.default_rng(2)
        truth = DenseDepthMap(rng.uniform(2, 30, (20, 30)), np.ones((20, 30), bool))
        keep = rng.random((20, 30)) < 0.3
        s = SparseDepthMap(np.where(keep, truth.values, 0.0), keep, "projected")
        rep = noise_rate(s, truth, 0.3)
        assert rep.eta == 0.0
        assert rep.evaluated_count == keep.sum()

    def test_counted_fraction(self):
        truth = DenseDepthMap.constant(10, 10, 10.0)
        values = np.full((10, 10), 10.0)
        valid = np.zeros((10, 10), bool)
        valid.flat[:100] = True
        values.flat[:6] = 11.0  # six points off by 1 m
        s = SparseDepthMap(values, valid, "projected")
        rep = noise_rate(s, truth, 0.3)
        assert rep.eta == pytest.approx(0.06)

    def test_points_without_truth_are_excluded(self):
        truth_valid = np.ones((10, 10), bool)
        truth_valid[0, :] = False
        truth = DenseDepthMap(np.where(truth_valid, 5.0, 0.0), truth_valid)
        s = sparse_from(np.full((10, 10), 5.0))
        rep = noise_rate(s, truth, 0.3)
        assert rep.evaluated_count == 90

    def test_zero_evaluated_is_error(self):
        truth = DenseDepthMap(np.zeros((5, 5)), np.zeros((5, 5), bool))
        s = sparse_from(np.full((5, 5), 5.0))
        with pytest.raises(EmptyInputError):
            noise_rate(s, truth, 0.3)

    def test_invariant_to_order(self):
        rng = np.random.default_rng(3)
        truth = DenseDepthMap(rng.uniform(2, 30, (12, 12)), np.ones((12, 12), bool))
        s = random_sparse(rng, 12, 12, density=0.5)
        a = noise_rate(s, truth, 0.3)
        flipped = SparseDepthMap(s.values[::-1].copy(), s.valid[::-1].copy(), "projected")
        truth_f = DenseDepthMap(truth.values[::-1].copy(), truth.valid[::-1].copy())
        b = noise_rate(flipped, truth_f, 0.3)
        assert a.eta == b.eta


class TestSweep:
    def _noise_free_corpus(self, rng, n=4):
        corpus = []
        for _ in range(n):
            truth = DenseDepthMap(rng.uniform(2, 30, (32, 48)), np.ones((32, 48), bool))
            keep = rng.random((32, 48)) < 0.3
            s = SparseDepthMap(np.where(keep, truth.values, 0.0), keep, "masked")
            corpus.append((s, truth))
        return corpus

    def test_empty_corpus_rejected(self):
        with pytest.raises(ConfigError):
            sweep_params([])

    def test_empty_grid_rejected(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ConfigError):
            sweep_params(self._noise_free_corpus(rng), window_grid=[])

    def test_degenerate_noise_free_selects_largest_window(self):
        rng = np.random.default_rng(5)
        res = sweep_params(self._noise_free_corpus(rng),
                           window_grid=[2, 4, 8], thickness_grid=[0.1, 0.5])
        eligible = [p for p in res.window_curve if p.mean_dropped <= 0.6]
        assert res.params.window == max(int(p.value) for p in eligible)
        assert "degenerate: noise-free" in res.notes

    def test_single_point_grids(self):
        rng = np.random.default_rng(6)
        res = sweep_params(self._noise_free_corpus(rng),
                           window_grid=[16], thickness_grid=[0.5])
        assert res.params == FilterParams(16, 0.5)

    def test_two_plane_scene_filtering_removes_all_noise(self, scanline50):
        from depthproj.scene import oracle_label
        c = scanline50[1]
        raw = noise_rate(c.projected, c.truth, 0.3)
        assert raw.eta > 0
        rps = filter_reliable(c.projected, FilterParams(16, 0.5))
        assert oracle_label(rps.kept, c.truth, 0.3).sum() == 0
        assert noise_rate(rps, c.truth, 0.3).eta == 0.0

    def test_selection_on_tuned_corpus(self, bernoulli50):
        res = sweep_params([c.pair for c in bernoulli50])
        assert res.params == FilterParams(16, 0.5)
        etas_w = [p.mean_eta for p in res.window_curve]
        assert all(a >= b for a, b in zip(etas_w, etas_w[1:]))
        etas_t = [p.mean_eta for p in res.thickness_curve]
        assert all(a <= b for a, b in zip(etas_t, etas_t[1:]))
        # thickness raises the kept noise once it spans the pair separation
        assert etas_t[-1] > etas_t[0]
