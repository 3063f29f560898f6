import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skeptic.correlation import skeptic_kendall_matrix, skeptic_spearman_matrix
from skeptic.errors import InputError
from skeptic.graph import GraphSpec
from skeptic.io import (
    Dataset,
    ingest_csv,
    read_edge_list,
    read_matrix_csv,
    write_data_csv,
    write_edge_list,
    write_matrix_csv,
)
from skeptic.preprocess import log_returns, winsorize_mad


def dataset(m):
    m = np.asarray(m, dtype=float)
    return Dataset(m, [f"c{j}" for j in range(m.shape[1])], "mem", [])


class TestIngest:
    def test_header(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("x,y\n1,2\n3,4\n5,6\n")
        ds = ingest_csv(p)
        assert ds.matrix.shape == (3, 2)
        assert ds.column_labels == ["x", "y"]
        np.testing.assert_array_equal(ds.matrix[:, 0], [1, 3, 5])

    def test_headerless(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("1.5,2,3\n4,5,6\n")
        ds = ingest_csv(p)
        assert ds.column_labels == ["V1", "V2", "V3"]
        assert ds.matrix.shape == (2, 3)

    def test_index_row_is_header_unless_overridden(self, tmp_path):
        p = tmp_path / "idx.csv"
        p.write_text("1,2\n3,4\n5,6\n")
        assert ingest_csv(p).matrix.shape == (2, 2)
        ds = ingest_csv(p, header=False)
        assert ds.matrix.shape == (3, 2) and ds.column_labels == ["V1", "V2"]

    def test_nan_cell_names_line(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("x,y\n1,2\n3,NaN\n")
        with pytest.raises(InputError, match=":3:"):
            ingest_csv(p)

    def test_ragged_and_text(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(InputError, match=":2:"):
            ingest_csv(p)
        p.write_text("x,y\n1,abc\n")
        with pytest.raises(InputError, match="non-numeric"):
            ingest_csv(p)

    def test_empty(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        with pytest.raises(InputError, match="empty"):
            ingest_csv(p)

    def test_quoted_and_delimiter(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text('"a;b";c\n1;2\n')
        ds = ingest_csv(p, delimiter=";")
        assert ds.column_labels == ["a;b", "c"]

    def test_duplicate_labels(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("x,x\n1,2\n")
        with pytest.raises(InputError, match="duplicate"):
            ingest_csv(p)

    def test_data_round_trip(self, tmp_path):
        X = np.random.default_rng(0).standard_normal((7, 3))
        write_data_csv(tmp_path / "x.csv", X)
        ds = ingest_csv(tmp_path / "x.csv")
        np.testing.assert_array_equal(ds.matrix, X)
        assert ds.column_labels == ["1", "2", "3"]


class TestFormats:
    def test_matrix_round_trip(self, tmp_path):
        M = np.random.default_rng(1).standard_normal((4, 4))
        write_matrix_csv(tmp_path / "m.csv", M)
        np.testing.assert_array_equal(read_matrix_csv(tmp_path / "m.csv"), M)

    def test_edge_list_round_trip(self, tmp_path):
        g = GraphSpec(6, {(0, 5), (2, 3)})
        write_edge_list(tmp_path / "e.tsv", g)
        assert (tmp_path / "e.tsv").read_text() == "1\t6\n3\t4\n"
        assert read_edge_list(tmp_path / "e.tsv", 6) == g

    def test_edge_list_out_of_range(self, tmp_path):
        (tmp_path / "e.tsv").write_text("1\t9\n")
        with pytest.raises(InputError, match=":1:"):
            read_edge_list(tmp_path / "e.tsv", 4)


class TestLogReturns:
    def test_constant_prices(self):
        out = log_returns(dataset([[5.0], [5.0], [5.0]]))
        np.testing.assert_array_equal(out.matrix, [[0.0], [0.0]])

    def test_exponential_prices(self):
        out = log_returns(dataset([[1.0], [math.e], [math.e**2]]))
        np.testing.assert_allclose(out.matrix.ravel(), [1.0, 1.0], atol=1e-15)

    def test_matches_two_pass_oracle(self):
        m = np.random.default_rng(2).uniform(1, 100, (5, 3))
        out = log_returns(dataset(m))
        for t in range(1, 5):
            for j in range(3):
                assert abs(out.matrix[t - 1, j] - (math.log(m[t, j]) - math.log(m[t - 1, j]))) <= 1e-15

    def test_non_positive_names_cell(self):
        with pytest.raises(InputError, match="row 2, column c1"):
            log_returns(dataset([[1.0, 2.0], [1.0, 0.0]]))

    def test_log_appended(self):
        out = log_returns(dataset([[1.0], [2.0]]))
        assert out.transform_log == ["log_returns"]
        assert out.provenance == {"source": "mem", "transforms": ["log_returns"]}


class TestWinsorize:
    def test_within_bounds_unchanged(self):
        m = np.random.default_rng(3).standard_normal((50, 2))
        m = np.clip(m, -2, 2)
        out = winsorize_mad(dataset(m))
        np.testing.assert_array_equal(out.matrix, m)

    def test_outlier_clipped_to_six_mad(self):
        # 19 zeros and a single 1: mean 0.05, MAD 0.095, outlier at mean + 10 MAD
        col = np.zeros(20)
        col[7] = 1.0
        mean = 0.05
        mad = (19 * 0.05 + 0.95) / 20
        assert (1.0 - mean) / mad == pytest.approx(10.0, abs=1e-12)
        out = winsorize_mad(dataset(col[:, None]))
        assert out.matrix[7, 0] == pytest.approx(mean + 6 * mad, abs=1e-15)
        assert np.all(out.matrix[np.arange(20) != 7, 0] == 0.0)

    def test_constant_column(self):
        m = np.full((6, 1), 3.25)
        np.testing.assert_array_equal(winsorize_mad(dataset(m)).matrix, m)

    def test_rejects_bad_k(self):
        with pytest.raises(InputError):
            winsorize_mad(dataset([[1.0], [2.0]]), k=0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_unclipped_columns_keep_rank_statistics(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((80, 4))
        m[0, 1] = 50.0
        m[1, 3] = -40.0
        out = winsorize_mad(dataset(m), k=6.0).matrix
        for f in (skeptic_spearman_matrix, skeptic_kendall_matrix):
            a, b = f(m).entries, f(out).entries
            for j in (0, 2):
                for k in (0, 2):
                    assert a[j, k] == b[j, k]


def test_pipeline_composability(tmp_path):
    rng = np.random.default_rng(4)
    prices = np.exp(np.cumsum(rng.standard_normal((60, 4)) * 0.02, axis=0)) * 100
    write_data_csv(tmp_path / "prices.csv", prices)
    chained = winsorize_mad(log_returns(ingest_csv(tmp_path / "prices.csv")))
    write_data_csv(tmp_path / "returns.csv", chained.matrix, chained.column_labels)
    direct = ingest_csv(tmp_path / "returns.csv")
    for f in (skeptic_spearman_matrix, skeptic_kendall_matrix):
        np.testing.assert_array_equal(f(chained.matrix).entries, f(direct.matrix).entries)
    assert chained.transform_log == ["log_returns", "winsorize_mad(k=6)"]
