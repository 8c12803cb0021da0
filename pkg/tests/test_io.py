"""File format round-trips and malformed-input diagnostics."""

import numpy as np
import pytest

from conftest import build_gbn
from gbnlearn.errors import DataFormatError
from gbnlearn.io import (
    ModelFile,
    model_file_from_gbn,
    read_data_csv,
    read_model_file,
    write_data_csv,
    write_model_file,
)


class TestDataCsv:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 4))
        path = tmp_path / "d.csv"
        write_data_csv(path, x)
        np.testing.assert_array_equal(read_data_csv(path), x)

    def test_seventeen_digit_values_survive(self, tmp_path):
        x = np.array([[1 / 3, np.pi, 1e-300], [0.1 + 0.2, -0.0, 2**-52]])
        path = tmp_path / "d.csv"
        write_data_csv(path, x)
        np.testing.assert_array_equal(read_data_csv(path), x)

    def test_rejects_non_2d(self, tmp_path):
        with pytest.raises(DataFormatError):
            write_data_csv(tmp_path / "d.csv", np.ones(3))

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,2.0\n\n3.0,4.0\n")
        np.testing.assert_array_equal(read_data_csv(path), [[1.0, 2.0], [3.0, 4.0]])

    def test_ragged_row_is_named(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DataFormatError, match="row 2"):
            read_data_csv(path)

    def test_non_numeric_cell_is_named(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,2.0\n3.0,abc\n")
        with pytest.raises(DataFormatError, match="row 2"):
            read_data_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(DataFormatError, match="no data rows"):
            read_data_csv(path)


class TestModelFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.txt"
        edges = {(1, 0): 0.5, (2, 0): -0.25}
        write_model_file(path, 3, 0.8, edges, meta={"seed": 7})
        mf = read_model_file(path)
        assert mf.p == 3
        np.testing.assert_array_equal(mf.sigma2, np.full(3, 0.8))
        assert mf.edges == edges
        assert mf.meta == {"seed": "7"}

    def test_per_node_variances_round_trip(self, tmp_path):
        path = tmp_path / "m.txt"
        write_model_file(path, 2, [0.75, 1.25], {(1, 0): 0.5})
        mf = read_model_file(path)
        np.testing.assert_array_equal(mf.sigma2, [0.75, 1.25])

    def test_scalar_broadcast_on_write(self, tmp_path):
        path = tmp_path / "m.txt"
        write_model_file(path, 4, 1.0, {})
        assert "# sigma2 = 1\n" in path.read_text()

    def test_edges_written_sorted(self, tmp_path):
        path = tmp_path / "m.txt"
        write_model_file(path, 3, 1.0, {(2, 1): 0.5, (1, 0): 0.25, (2, 0): -0.5})
        body = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert body == ["1,0,0.25", "2,0,-0.5", "2,1,0.5"]

    def test_weights_exact(self, tmp_path):
        path = tmp_path / "m.txt"
        write_model_file(path, 2, 1.0, {(1, 0): 1 / 3})
        assert read_model_file(path).edges[(1, 0)] == 1 / 3

    def test_to_gbn(self, tmp_path, chain_gbn):
        path = tmp_path / "m.txt"
        write_model_file(path, 2, 1.0, model_file_from_gbn(chain_gbn))
        g = read_model_file(path).to_gbn()
        assert g.dag.edges == chain_gbn.dag.edges
        np.testing.assert_array_equal(g.b, chain_gbn.b)
        np.testing.assert_array_equal(g.sigma2, chain_gbn.sigma2)

    def test_sigma2_shape_checked_on_write(self, tmp_path):
        with pytest.raises(DataFormatError):
            write_model_file(tmp_path / "m.txt", 3, [1.0, 2.0], {})


class TestModelFileParsing:
    def test_missing_p_header(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# sigma2 = 1\n")
        with pytest.raises(DataFormatError, match="missing '# p"):
            read_model_file(path)

    def test_missing_sigma2_header(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n")
        with pytest.raises(DataFormatError, match="missing '# sigma2"):
            read_model_file(path)

    def test_header_without_equals(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# hello\n# p = 2\n# sigma2 = 1\n")
        with pytest.raises(DataFormatError, match="row 1"):
            read_model_file(path)

    def test_bad_header_value(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = two\n# sigma2 = 1\n")
        with pytest.raises(DataFormatError, match="bad header value"):
            read_model_file(path)

    def test_bad_edge_row_is_named(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n1,0\n")
        with pytest.raises(DataFormatError, match="row 3"):
            read_model_file(path)

    def test_non_integer_node_is_named(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n1.5,0,0.5\n")
        with pytest.raises(DataFormatError, match="row 3"):
            read_model_file(path)

    def test_duplicate_edge(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n1,0,0.5\n1,0,0.25\n")
        with pytest.raises(DataFormatError, match="duplicate edge"):
            read_model_file(path)

    def test_out_of_range_edge(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n2,0,0.5\n")
        with pytest.raises(DataFormatError, match="invalid for p"):
            read_model_file(path)

    def test_self_loop_edge(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n1,1,0.5\n")
        with pytest.raises(DataFormatError, match="invalid for p"):
            read_model_file(path)

    def test_sigma2_length_mismatch(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 3\n# sigma2 = 1,2\n")
        with pytest.raises(DataFormatError, match="lists 2 values"):
            read_model_file(path)

    def test_unknown_headers_kept_as_meta(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# p = 2\n# sigma2 = 1\n# lambda = 0.05\n# order = 1 0\n")
        mf = read_model_file(path)
        assert mf.meta == {"lambda": "0.05", "order": "1 0"}


def test_model_file_from_gbn_covers_all_edges():
    g = build_gbn(3, {(1, 0): 0.25, (2, 1): -0.5})
    edges = model_file_from_gbn(g)
    assert edges == {(1, 0): 0.25, (2, 1): -0.5}


def test_model_file_dataclass_to_gbn_validates():
    # Cyclic files surface the Dag error, not a silent bad model.
    mf = ModelFile(p=2, sigma2=np.ones(2), edges={(0, 1): 0.5, (1, 0): 0.5})
    with pytest.raises(ValueError):
        mf.to_gbn()
