import numpy as np
import pytest

import helpers
from mmcbt import (DataError, RatingMatrix, load_goodbooks, load_movielens,
                   load_ratings, mean_fill_rows, split_train_test)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestRatingMatrix:
    def test_rejects_out_of_range_rating(self):
        with pytest.raises(DataError):
            RatingMatrix(2, 2, [0], [0], [6])

    def test_rejects_duplicate_entry(self):
        with pytest.raises(DataError):
            RatingMatrix(2, 2, [0, 0], [1, 1], [3, 4])

    def test_rejects_index_out_of_range(self):
        with pytest.raises(DataError):
            RatingMatrix(2, 2, [2], [0], [3])

    def test_dense_round_trip(self):
        dense = np.array([[0, 3], [5, 0]])
        m = RatingMatrix.from_dense(dense)
        np.testing.assert_array_equal(m.to_dense(), dense)
        np.testing.assert_array_equal(m.mask(), dense > 0)


class TestLoadMovielens:
    def test_single_line(self, tmp_path):
        path = write(tmp_path, "r.dat", "1::1193::5::978300760\n")
        m = load_movielens(path)
        assert (m.n_users, m.n_items) == (1, 1193)
        assert (m.users[0], m.items[0], m.ratings[0]) == (0, 1192, 5)

    def test_malformed_line_reports_number(self, tmp_path):
        path = write(tmp_path, "r.dat", "1::2::3::4\n1::2::3\n")
        with pytest.raises(DataError, match="line 2"):
            load_movielens(path)

    def test_rating_out_of_range(self, tmp_path):
        path = write(tmp_path, "r.dat", "1::2::9::4\n")
        with pytest.raises(DataError, match="line 1"):
            load_movielens(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "r.dat", "")
        with pytest.raises(DataError, match="no ratings"):
            load_movielens(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_movielens(tmp_path / "absent.dat")

    def test_crlf_accepted(self, tmp_path):
        path = write(tmp_path, "r.dat", "1::2::4::0\r\n2::1::3::0\r\n")
        m = load_movielens(path)
        assert m.n_entries == 2

    def test_loading_twice_is_identical(self, tmp_path):
        path = write(tmp_path, "r.dat", "3::7::2::0\n1::2::4::0\n")
        a, b = load_movielens(path), load_movielens(path)
        np.testing.assert_array_equal(a.users, b.users)
        np.testing.assert_array_equal(a.items, b.items)
        np.testing.assert_array_equal(a.ratings, b.ratings)


class TestLoadGoodbooks:
    HEADER = "user_id,book_id,rating\n"

    def test_single_row(self, tmp_path):
        path = write(tmp_path, "r.csv", self.HEADER + "4,7,4\n")
        m = load_goodbooks(path, max_users=5000, max_items=3000)
        assert (m.n_users, m.n_items) == (5000, 3000)
        assert (m.users[0], m.items[0], m.ratings[0]) == (3, 6, 4)

    def test_rows_beyond_bounds_dropped(self, tmp_path):
        path = write(tmp_path, "r.csv", self.HEADER + "6000,1,3\n2,2,2\n")
        m = load_goodbooks(path, max_users=5000, max_items=3000)
        assert m.n_entries == 1

    def test_header_required(self, tmp_path):
        path = write(tmp_path, "r.csv", "4,7,4\n")
        with pytest.raises(DataError, match="header"):
            load_goodbooks(path)

    def test_bad_rating(self, tmp_path):
        path = write(tmp_path, "r.csv", self.HEADER + "1,1,0\n")
        with pytest.raises(DataError, match="line 2"):
            load_goodbooks(path)


def test_load_ratings_sniffs_format(tmp_path):
    ml = write(tmp_path, "a.dat", "1::1::5::0\n")
    gb = write(tmp_path, "b.csv", "user_id,book_id,rating\n1,1,5\n")
    assert load_ratings(ml).n_items == 1
    assert load_ratings(gb).n_items == 3000


class TestSplit:
    def matrix(self, n=10):
        rng = np.random.default_rng(3)
        return helpers.random_rating_matrix(rng, 6, 5, density=0.45)

    def test_counts(self):
        m = RatingMatrix(5, 2, [0, 0, 1, 1, 2, 2, 3, 3, 4, 4],
                         [0, 1] * 5, [3] * 10)
        pair = split_train_test(m, 0.8, seed=0)
        assert pair.train.n_entries == 8
        assert pair.test.n_entries == 2

    def test_deterministic(self):
        m = self.matrix()
        a = split_train_test(m, 0.8, seed=11)
        b = split_train_test(m, 0.8, seed=11)
        np.testing.assert_array_equal(a.train.users, b.train.users)
        np.testing.assert_array_equal(a.train.items, b.train.items)
        np.testing.assert_array_equal(a.test.users, b.test.users)

    def test_partition_property(self):
        # disjoint and covering over 100 random matrices
        rng = np.random.default_rng(7)
        for trial in range(100):
            m = helpers.random_rating_matrix(rng, rng.integers(2, 8),
                                             rng.integers(2, 8), density=0.6)
            if m.n_entries < 2:
                continue
            pair = split_train_test(m, 0.8, seed=trial)
            def keys(mat):
                return set(zip(mat.users.tolist(), mat.items.tolist(),
                               mat.ratings.tolist()))
            train_keys, test_keys = keys(pair.train), keys(pair.test)
            assert train_keys | test_keys == keys(m)
            assert not (train_keys & test_keys)

    def test_bad_fraction(self):
        m = self.matrix()
        with pytest.raises(ValueError):
            split_train_test(m, 1.0, seed=0)
        with pytest.raises(ValueError):
            split_train_test(m, 0.0, seed=0)

    def test_too_few_entries(self):
        m = RatingMatrix(1, 1, [0], [0], [3])
        with pytest.raises(DataError):
            split_train_test(m, 0.5, seed=0)


class TestMeanFill:
    def test_missing_cell_gets_row_mean(self):
        m = RatingMatrix(1, 3, [0, 0], [0, 2], [2, 4])
        filled = mean_fill_rows(m)
        np.testing.assert_allclose(filled, [[2.0, 3.0, 4.0]])

    def test_fully_observed_row_unchanged(self):
        m = RatingMatrix.from_dense(np.array([[1, 2], [3, 4]]))
        np.testing.assert_allclose(mean_fill_rows(m), [[1, 2], [3, 4]])

    def test_empty_row_gets_global_mean(self):
        m = RatingMatrix(2, 2, [0, 0], [0, 1], [3, 4])
        filled = mean_fill_rows(m)
        np.testing.assert_allclose(filled[1], [3.5, 3.5])

    def test_no_entries_at_all(self):
        m = RatingMatrix(2, 2, [], [], [])
        with pytest.raises(DataError):
            mean_fill_rows(m)

    def test_observed_preserved_and_in_range(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = helpers.random_rating_matrix(rng, 6, 7, density=0.3)
            filled = mean_fill_rows(m)
            np.testing.assert_array_equal(filled[m.users, m.items], m.ratings)
            assert filled.min() >= 1.0 and filled.max() <= m.scale
