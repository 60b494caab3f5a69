import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from lowrank.exceptions import ParseError
from lowrank.matrix_market import load_matrix_market, parse_matrix_market, write_matrix_market


def parse(text, **kwargs):
    return parse_matrix_market(text.splitlines(), **kwargs)


class CoordinateTests(SimpleTestCase):
    def test_minimal_general(self):
        M = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 3.5\n")
        np.testing.assert_array_equal(M, [[0.0, 3.5], [0.0, 0.0]])

    def test_comments_and_blank_lines(self):
        text = (
            "%%MatrixMarket matrix coordinate integer general\n"
            "% a comment\n"
            "\n"
            "2 3 2\n"
            "% between entries\n"
            "1 1 4\n"
            "2 3 -1\n"
        )
        np.testing.assert_array_equal(parse(text), [[4.0, 0.0, 0.0], [0.0, 0.0, -1.0]])

    def test_symmetric_mirrors_entries(self):
        M = parse("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 5\n3 3 1\n")
        np.testing.assert_array_equal(M, M.T)
        self.assertEqual(M[0, 1], 5.0)

    def test_skew_symmetric_negates_mirror(self):
        M = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 2\n")
        np.testing.assert_array_equal(M, [[0.0, -2.0], [2.0, 0.0]])

    def test_asymmetric_27_by_27(self):
        rng = np.random.default_rng(70)
        cells = rng.choice(27 * 27, size=279, replace=False)
        lines = ["%%MatrixMarket matrix coordinate real general", "27 27 279"]
        expected = np.zeros((27, 27))
        for cell in cells:
            i, j = divmod(int(cell), 27)
            value = float(rng.uniform(-1e3, 1e3))
            expected[i, j] = value
            lines.append(f"{i + 1} {j + 1} {value!r}")
        M = parse_matrix_market(lines)
        self.assertEqual(M.shape, (27, 27))
        self.assertEqual(np.count_nonzero(M), 279)
        np.testing.assert_array_equal(M, expected)


class ArrayTests(SimpleTestCase):
    def test_column_major_general(self):
        M = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
        np.testing.assert_array_equal(M, [[1.0, 3.0], [2.0, 4.0]])

    def test_symmetric_lower_triangle(self):
        M = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n")
        np.testing.assert_array_equal(M, [[1.0, 2.0], [2.0, 3.0]])

    def test_skew_symmetric_strict_lower_triangle(self):
        M = parse("%%MatrixMarket matrix array real skew-symmetric\n3 3\n1\n2\n3\n")
        np.testing.assert_array_equal(M, [[0.0, -1.0, -2.0], [1.0, 0.0, -3.0], [2.0, 3.0, 0.0]])


class ErrorTests(SimpleTestCase):
    def assertParseError(self, text, line, **kwargs):
        with self.assertRaises(ParseError) as caught:
            parse(text, **kwargs)
        self.assertEqual(caught.exception.line, line)
        return caught.exception

    def test_empty_file(self):
        with self.assertRaises(ParseError) as caught:
            parse("")
        self.assertIsNone(caught.exception.line)

    def test_bad_header(self):
        self.assertParseError("%%MatrixMarket matrix coordinate\n1 1 0\n", 1)
        self.assertParseError("%%MatrixMarket vector coordinate real general\n1 1 0\n", 1)
        self.assertParseError("%%MatrixMarket matrix coordinate complex general\n1 1 0\n", 1)
        self.assertParseError("%%MatrixMarket matrix coordinate pattern general\n1 1 0\n", 1)
        self.assertParseError("%%MatrixMarket matrix coordinate real hermitian\n1 1 0\n", 1)

    def test_bad_size_line(self):
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n% c\n2 x 1\n1 1 1\n", 3)
        self.assertParseError("%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n", 2)
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n0 3 0\n", 2)

    def test_index_out_of_range(self):
        error = self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n", 4)
        self.assertIn('outside', str(error))

    def test_bad_value(self):
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", 3)
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n", 3)
        self.assertParseError("%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 1 1.5\n", 3)

    def test_duplicate_entries(self):
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n1 2 2\n", 4)
        self.assertParseError("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 2\n", 4)

    def test_skew_symmetric_diagonal(self):
        self.assertParseError("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n1 1 1\n", 3)

    def test_entry_count_mismatch(self):
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n", 4)
        self.assertParseError("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n", 4)
        self.assertParseError("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n", 5)

    def test_cell_cap(self):
        error = self.assertParseError("%%MatrixMarket matrix coordinate real general\n1000 1000 0\n", 2, max_cells=10 ** 5)
        self.assertIn('cap', str(error))

    def test_message_names_path(self):
        with self.assertRaises(ParseError) as caught:
            parse_matrix_market(["bogus"], path='data.mtx')
        self.assertTrue(str(caught.exception).startswith('data.mtx:1:'))


class FileTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)

    def test_write_then_load(self):
        M = np.random.default_rng(71).standard_normal((4, 3)) * 1e3
        path = os.path.join(self.directory.name, 'm.mtx')
        write_matrix_market(M, path, comment='seed 71\nsecond line')
        np.testing.assert_array_equal(load_matrix_market(path), M)
        with open(path) as handle:
            lines = handle.read().splitlines()
        self.assertEqual(lines[:4], ['%%MatrixMarket matrix array real general', '% seed 71', '% second line', '4 3'])

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_matrix_market(os.path.join(self.directory.name, 'missing.mtx'))
