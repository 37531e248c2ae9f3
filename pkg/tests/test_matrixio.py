from __future__ import annotations

import numpy as np
import pytest

from conftest import random_complex
from mlmatrix.matrixio import (
    FORMATS,
    MatrixFormatError,
    format_float,
    guess_format,
    read_matrix,
    write_matrix,
)


def awkward(rng, n=5):
    A = random_complex(rng, (n, n))
    A[0, 0] = 1 / 3 + 1e-300j
    A[1, 2] = -0.1 - 5e-324j
    A[2, 1] = 1.7976931348623157e308
    A[3, 3] = 0
    return A


class TestFormatFloat:
    def test_round_trip_values(self):
        for x in (0.1, 1 / 3, -2.5e-310, 1e22, 5e-324):
            assert float(format_float(x)) == x

    def test_special(self):
        assert format_float(float("inf")) == "inf"
        assert format_float(float("-inf")) == "-inf"
        assert format_float(float("nan")) == "nan"
        assert format_float(np.float64(2.0)) == "2.0"


class TestGuess:
    def test_extension(self):
        assert guess_format("a.CSV") == "csv"
        assert guess_format("a.mtx") == "mm-array"


class TestRoundTrip:
    def test_array_bitwise(self, rng, tmp_path):
        A = awkward(rng)
        path = tmp_path / "a.mtx"
        write_matrix(path, A, "mm-array")
        B = read_matrix(path)
        np.testing.assert_array_equal(A, B)

    @pytest.mark.parametrize("fmt", ["mm-coordinate", "csv"])
    def test_other_formats_exact(self, rng, tmp_path, fmt):
        A = awkward(rng)
        path = tmp_path / f"a.{fmt}"
        write_matrix(path, A, fmt)
        np.testing.assert_array_equal(read_matrix(path, fmt), A)

    def test_header(self, tmp_path):
        path = tmp_path / "a.mtx"
        write_matrix(path, np.eye(2))
        head = path.read_text("utf-8").splitlines()[0]
        assert head.startswith("%%MatrixMarket matrix array complex general")

    def test_csv_layout(self, tmp_path):
        path = tmp_path / "a.csv"
        write_matrix(path, np.array([[1 + 2j, 0.5], [-1j, 3]]))
        text = path.read_bytes().decode("utf-8")
        assert "\r" not in text
        assert text == "1.0,2.0,0.5,0.0\n-0.0,-1.0,3.0,0.0\n"

    def test_real_mm_input(self, tmp_path):
        path = tmp_path / "r.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
        np.testing.assert_array_equal(read_matrix(path), [[1, 3], [2, 4]])


class TestErrors:
    def test_missing(self, tmp_path):
        with pytest.raises(MatrixFormatError):
            read_matrix(tmp_path / "nope.mtx")

    def test_malformed_mm(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text("this is not a matrix\n")
        with pytest.raises(MatrixFormatError):
            read_matrix(path)

    @pytest.mark.parametrize("text", ["", "1,2,3\n", "1,2\n3,4,5,6\n", "1,x\n"])
    def test_malformed_csv(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(MatrixFormatError):
            read_matrix(path)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(MatrixFormatError):
            read_matrix(tmp_path / "a.mtx", "hdf5")
        with pytest.raises(MatrixFormatError):
            write_matrix(tmp_path / "a.mtx", np.eye(1), "hdf5")

    def test_formats_constant(self):
        assert FORMATS == ("mm-array", "mm-coordinate", "csv")
