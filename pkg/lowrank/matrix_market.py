"""
MatrixMarket reader and writer.

Reads `matrix coordinate|array real|integer general|symmetric|skew-symmetric`
files into dense float64 arrays. Writes dense arrays in array real general
format with round-trip precision.
"""
import logging

import numpy as np

from .exceptions import ParseError
from .matrix import as_matrix

logger = logging.getLogger(__name__)

MAX_DENSE_CELLS = 10 ** 8

BANNER = '%%matrixmarket'
FORMATS = ('coordinate', 'array')
FIELDS = ('real', 'double', 'integer')
SYMMETRIES = ('general', 'symmetric', 'skew-symmetric')


class _Reader:
    """Data lines of a MatrixMarket file with their 1-based line numbers."""

    def __init__(self, lines, path):
        self.path = path
        self._lines = enumerate(lines, start=1)
        self.line = 0

    def error(self, message):
        return ParseError(message, path=self.path, line=self.line)

    def header(self):
        for self.line, text in self._lines:
            return text.split()
        raise ParseError("empty file", path=self.path)

    def next_tokens(self):
        for self.line, text in self._lines:
            stripped = text.strip()
            if stripped and not stripped.startswith('%'):
                return stripped.split()
        return None


def _parse_header(reader):
    tokens = reader.header()
    if len(tokens) != 5 or tokens[0].lower() != BANNER:
        raise reader.error("header must read '%%MatrixMarket matrix <format> <field> <symmetry>'")
    obj, fmt, field, symmetry = (token.lower() for token in tokens[1:])
    if obj != 'matrix':
        raise reader.error(f"unsupported object '{obj}'")
    if fmt not in FORMATS:
        raise reader.error(f"unsupported format '{fmt}'")
    if field not in FIELDS:
        raise reader.error(f"unsupported field '{field}', only real and integer matrices are read")
    if symmetry not in SYMMETRIES:
        raise reader.error(f"unsupported symmetry '{symmetry}'")
    return fmt, field, symmetry


def _parse_int(reader, token, what):
    try:
        return int(token)
    except ValueError:
        raise reader.error(f"{what} must be an integer, got '{token}'") from None


def _parse_value(reader, token, field):
    try:
        value = float(int(token)) if field == 'integer' else float(token)
    except ValueError:
        raise reader.error(f"bad {field} value '{token}'") from None
    if not np.isfinite(value):
        raise reader.error(f"non-finite value '{token}'")
    return value


def _parse_size(reader, fmt, symmetry, max_cells):
    tokens = reader.next_tokens()
    expected = 3 if fmt == 'coordinate' else 2
    if tokens is None or len(tokens) != expected:
        raise reader.error(f"size line must hold {expected} integers")
    sizes = [_parse_int(reader, token, 'size') for token in tokens]
    m, n = sizes[0], sizes[1]
    if m < 1 or n < 1:
        raise reader.error(f"dimensions must be positive, got {m}x{n}")
    if m * n > max_cells:
        raise reader.error(f"{m}x{n} matrix exceeds the dense cell cap of {max_cells}")
    if symmetry != 'general' and m != n:
        raise reader.error(f"{symmetry} matrix must be square, got {m}x{n}")
    if fmt == 'coordinate' and sizes[2] < 0:
        raise reader.error(f"entry count must be non-negative, got {sizes[2]}")
    return sizes


def _read_coordinate(reader, m, n, nnz, field, symmetry):
    dense = np.zeros((m, n))
    seen = set()
    for _ in range(nnz):
        tokens = reader.next_tokens()
        if tokens is None:
            raise reader.error(f"expected {nnz} entries, found {len(seen)}")
        if len(tokens) != 3:
            raise reader.error("entry must read '<row> <column> <value>'")
        i = _parse_int(reader, tokens[0], 'row index')
        j = _parse_int(reader, tokens[1], 'column index')
        value = _parse_value(reader, tokens[2], field)
        if not (1 <= i <= m and 1 <= j <= n):
            raise reader.error(f"index ({i}, {j}) outside a {m}x{n} matrix")
        key = (i, j) if symmetry == 'general' else (max(i, j), min(i, j))
        if key in seen:
            raise reader.error(f"duplicate entry ({i}, {j})")
        seen.add(key)
        if symmetry == 'skew-symmetric' and i == j:
            raise reader.error(f"skew-symmetric matrix stores diagonal entry ({i}, {j})")
        dense[i - 1, j - 1] = value
        if symmetry == 'symmetric':
            dense[j - 1, i - 1] = value
        elif symmetry == 'skew-symmetric':
            dense[j - 1, i - 1] = -value
    return dense


def _read_array(reader, m, n, field, symmetry):
    if symmetry == 'general':
        cells = [(i, j) for j in range(n) for i in range(m)]
    elif symmetry == 'symmetric':
        cells = [(i, j) for j in range(n) for i in range(j, m)]
    else:
        cells = [(i, j) for j in range(n) for i in range(j + 1, m)]
    dense = np.zeros((m, n))
    for count, (i, j) in enumerate(cells):
        tokens = reader.next_tokens()
        if tokens is None:
            raise reader.error(f"expected {len(cells)} values, found {count}")
        if len(tokens) != 1:
            raise reader.error("array entries hold one value per line")
        value = _parse_value(reader, tokens[0], field)
        dense[i, j] = value
        if symmetry == 'symmetric':
            dense[j, i] = value
        elif symmetry == 'skew-symmetric':
            dense[j, i] = -value
    return dense


def parse_matrix_market(lines, *, path=None, max_cells=MAX_DENSE_CELLS):
    """Parse MatrixMarket text from an iterable of lines into a dense matrix."""
    reader = _Reader(lines, path)
    fmt, field, symmetry = _parse_header(reader)
    sizes = _parse_size(reader, fmt, symmetry, max_cells)
    m, n = sizes[0], sizes[1]
    if fmt == 'coordinate':
        dense = _read_coordinate(reader, m, n, sizes[2], field, symmetry)
    else:
        dense = _read_array(reader, m, n, field, symmetry)
    if reader.next_tokens() is not None:
        raise reader.error("data after the last entry")
    return as_matrix(dense)


def load_matrix_market(path, *, max_cells=MAX_DENSE_CELLS):
    with open(path, encoding='ascii', errors='replace') as handle:
        dense = parse_matrix_market(handle, path=str(path), max_cells=max_cells)
    logger.info("loaded %dx%d matrix from %s", dense.shape[0], dense.shape[1], path)
    return dense


def write_matrix_market(X, path, comment=None):
    """Write X in array real general format, column-major, with %.17g values."""
    X = as_matrix(X)
    m, n = X.shape
    with open(path, 'w', encoding='ascii') as handle:
        handle.write('%%MatrixMarket matrix array real general\n')
        if comment:
            for line in str(comment).splitlines():
                handle.write(f'% {line}\n')
        handle.write(f'{m} {n}\n')
        for value in X.flatten(order='F'):
            handle.write('%.17g\n' % value)
    logger.info("wrote %dx%d matrix to %s", m, n, path)
