import numpy as np
import pytest

import helpers
from mmcbt import (Codebook, CoclusterConfig, DataError, Memberships,
                   build_codebook, cocluster, partial_codebook_ratings,
                   prune_codebook)
from mmcbt.coclustering import (alternate_cocluster, block_loss,
                                load_codebook_csv, load_partial_codebook_csv,
                                save_codebook_csv, save_partial_codebook_csv)

BLOCKS = np.array([[1, 1, 5, 5],
                   [1, 1, 5, 5],
                   [5, 5, 1, 1],
                   [5, 5, 1, 1]], dtype=float)


def same_partition(assign, expected_groups):
    groups = {}
    for idx, label in enumerate(assign):
        groups.setdefault(label, set()).add(idx)
    return set(frozenset(g) for g in groups.values()) == \
        set(frozenset(g) for g in expected_groups)


class TestCocluster:
    def test_recovers_planted_blocks(self):
        mem = cocluster(BLOCKS, CoclusterConfig(2, 2, seed=0))
        assert same_partition(mem.user_assign, [{0, 1}, {2, 3}])
        assert same_partition(mem.item_assign, [{0, 1}, {2, 3}])

    def test_single_cluster_forced(self):
        mem = cocluster(BLOCKS, CoclusterConfig(1, 1, seed=0))
        assert (mem.user_assign == 0).all()
        assert (mem.item_assign == 0).all()

    def test_matches_brute_force_on_random_matrix(self):
        rng = np.random.default_rng(42)
        Y = rng.integers(1, 6, size=(6, 6)).astype(float)
        mem = cocluster(Y, CoclusterConfig(2, 2, seed=0, restarts=50))
        achieved = block_loss(Y, mem.user_assign, mem.item_assign, 2, 2)
        optimum = helpers.brute_force_cocluster(Y, 2, 2)
        assert achieved <= optimum * 1.0 + 1e-9

    def test_objective_history_non_increasing(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            Y = rng.uniform(1, 5, size=(8, 7))
            _, _, history = alternate_cocluster(Y, 3, 2, seed=seed)
            diffs = np.diff(history)
            assert (diffs <= 1e-8 * np.abs(history[:-1])).all()

    def test_invalid_cluster_counts(self):
        with pytest.raises(ValueError):
            cocluster(BLOCKS, CoclusterConfig(5, 2))
        with pytest.raises(ValueError):
            cocluster(BLOCKS, CoclusterConfig(2, 0))

    def test_empty_matrix(self):
        with pytest.raises(DataError):
            cocluster(np.zeros((0, 0)), CoclusterConfig(1, 1))

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        Y = rng.uniform(1, 5, size=(7, 6))
        cfg = CoclusterConfig(2, 3, seed=5, restarts=4)
        a, b = cocluster(Y, cfg), cocluster(Y, cfg)
        np.testing.assert_array_equal(a.user_assign, b.user_assign)
        np.testing.assert_array_equal(a.item_assign, b.item_assign)


class TestBuildCodebook:
    def test_block_means(self):
        mem = Memberships([0, 0, 1, 1], [0, 0, 1, 1])
        cb = build_codebook(BLOCKS, mem, 2, 2)
        np.testing.assert_allclose(cb.values, [[1, 5], [5, 1]])
        np.testing.assert_array_equal(cb.counts, [[4, 4], [4, 4]])

    def test_single_cluster_is_global_mean(self):
        mem = Memberships([0] * 4, [0] * 4)
        cb = build_codebook(BLOCKS, mem, 1, 1)
        assert cb.values[0, 0] == pytest.approx(BLOCKS.mean())

    def test_matches_per_cell_average_oracle(self):
        rng = np.random.default_rng(3)
        Y = rng.uniform(1, 5, size=(5, 5))
        ua = rng.integers(0, 3, size=5)
        ia = rng.integers(0, 2, size=5)
        cb = build_codebook(Y, Memberships(ua, ia), 3, 2)
        for k in range(3):
            for l in range(2):
                cells = [Y[i, j] for i in range(5) for j in range(5)
                         if ua[i] == k and ia[j] == l]
                expected = np.mean(cells) if cells else Y.mean()
                assert cb.values[k, l] == pytest.approx(expected, rel=1e-12)
                assert cb.counts[k, l] == len(cells)

    def test_block_constant_matrix_reconstructs_exactly(self):
        rng = np.random.default_rng(4)
        ua = rng.integers(0, 3, size=7)
        ia = rng.integers(0, 2, size=6)
        base = rng.uniform(1, 5, size=(3, 2))
        Y = base[ua][:, ia]
        cb = build_codebook(Y, Memberships(ua, ia), 3, 2)
        np.testing.assert_allclose(cb.values[ua][:, ia], Y, atol=1e-12)

    def test_label_permutation_permutes_codebook(self):
        rng = np.random.default_rng(5)
        Y = rng.uniform(1, 5, size=(6, 6))
        ua = rng.integers(0, 3, size=6)
        ia = rng.integers(0, 2, size=6)
        cb = build_codebook(Y, Memberships(ua, ia), 3, 2)
        perm_u = np.array([2, 0, 1])
        perm_i = np.array([1, 0])
        cb_p = build_codebook(Y, Memberships(perm_u[ua], perm_i[ia]), 3, 2)
        np.testing.assert_allclose(cb_p.values[perm_u][:, perm_i], cb.values)


class TestPrune:
    def test_exact_cocluster_always_retained(self):
        mem = Memberships([0, 0, 1, 1], [0, 0, 1, 1])
        cb = build_codebook(BLOCKS, mem, 2, 2)
        for th in (1.0, 50.0, 99.9):
            for eps in (0.0, 0.5):
                pcb = prune_codebook(cb, BLOCKS, mem, th, eps)
                assert pcb.retained.all()

    def test_spread_cocluster_dropped(self):
        # one co-cluster of 4 cells {3,3,3,5}: mean 3.5, none within 0.2
        Y = np.array([[3.0, 3.0], [3.0, 5.0]])
        mem = Memberships([0, 0], [0, 0])
        cb = build_codebook(Y, mem, 1, 1)
        assert cb.values[0, 0] == pytest.approx(3.5)
        pcb = prune_codebook(cb, Y, mem, th=50, eps=0.2)
        assert not pcb.retained.any()
        assert pcb.values[0, 0] == 0.0

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(6)
        Y = rng.uniform(1, 5, size=(8, 8))
        ua = rng.integers(0, 3, size=8)
        ia = rng.integers(0, 3, size=8)
        mem = Memberships(ua, ia)
        cb = build_codebook(Y, mem, 3, 3)
        th, eps = 60.0, 0.8
        pcb = prune_codebook(cb, Y, mem, th, eps)
        for k in range(3):
            for l in range(3):
                cells = [Y[i, j] for i in range(8) for j in range(8)
                         if ua[i] == k and ia[j] == l]
                if not cells:
                    assert not pcb.retained[k, l]
                    continue
                frac = np.mean([abs(c - cb.values[k, l]) <= eps for c in cells])
                assert pcb.retained[k, l] == (frac > th / 100.0)

    def test_tiny_threshold_wide_margin_retains_everything(self):
        rng = np.random.default_rng(7)
        Y = rng.integers(1, 6, size=(6, 6)).astype(float)
        mem = Memberships(rng.integers(0, 2, 6), rng.integers(0, 2, 6))
        cb = build_codebook(Y, mem, 2, 2)
        pcb = prune_codebook(cb, Y, mem, th=1e-9, eps=4.0)
        np.testing.assert_array_equal(pcb.retained, cb.counts > 0)

    def test_full_threshold_retains_nothing(self):
        # the fraction must strictly exceed th/100, so th=100 drops all
        mem = Memberships([0, 0, 1, 1], [0, 0, 1, 1])
        cb = build_codebook(BLOCKS, mem, 2, 2)
        pcb = prune_codebook(cb, BLOCKS, mem, th=100.0, eps=4.0)
        assert not pcb.retained.any()

    def test_parameter_validation(self):
        mem = Memberships([0, 0, 1, 1], [0, 0, 1, 1])
        cb = build_codebook(BLOCKS, mem, 2, 2)
        with pytest.raises(ValueError):
            prune_codebook(cb, BLOCKS, mem, th=0.0, eps=0.1)
        with pytest.raises(ValueError):
            prune_codebook(cb, BLOCKS, mem, th=50.0, eps=-0.1)


class TestPartialCodebookRatings:
    def test_rounding_half_up_and_missing_cells(self):
        pcb_values = np.array([[2.5, 0.0], [4.2, 1.0]])
        retained = np.array([[True, False], [True, True]])
        from mmcbt.coclustering import PartialCodebook
        obs = partial_codebook_ratings(PartialCodebook(pcb_values, retained))
        dense = obs.to_dense()
        assert dense[0, 0] == 3  # half rounds up
        assert dense[1, 0] == 4
        assert dense[1, 1] == 1
        assert not obs.mask()[0, 1]


class TestCodebookCsv:
    def test_round_trip(self, tmp_path):
        cb = Codebook(np.array([[1.25, 3.5], [2.0, 4.75]]),
                      np.array([[2, 2], [2, 2]]))
        path = tmp_path / "cb.csv"
        save_codebook_csv(cb, path)
        np.testing.assert_allclose(load_codebook_csv(path), cb.values)

    def test_partial_round_trip_with_empty_fields(self, tmp_path):
        from mmcbt.coclustering import PartialCodebook
        pcb = PartialCodebook(np.array([[1.5, 0.0], [0.0, 4.0]]),
                              np.array([[True, False], [False, True]]))
        path = tmp_path / "pcb.csv"
        save_partial_codebook_csv(pcb, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "1.5,"
        assert lines[1] == ",4"
        loaded = load_partial_codebook_csv(path)
        np.testing.assert_array_equal(loaded.retained, pcb.retained)
        np.testing.assert_allclose(loaded.values, pcb.values)
