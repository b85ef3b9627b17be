# -*- coding: utf-8 -*-
#
# galois.py
#
"""Arithmetic over GF(2^w) and dense matrix algebra over such fields.

Field elements are plain integers in ``[0, 2^w)``; matrices are
two-dimensional ``numpy.uint8`` arrays in row-major order. A
``GaloisField`` instance holds the read-only multiplication and inverse
tables for one ``FieldSpec`` and is shared through ``get_field``.

For w = 8 the multiplication table is built from log/antilog tables, for
w <= 4 directly by shift-and-reduce multiplication. ``shift_and_reduce_mul``
is exported so both paths can be cross-checked.

"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import DEFAULT_FIELD_POLY, SUPPORTED_WIDTHS
from .errors import (BadSupport, DimensionMismatch, FieldError, InconsistentBlocks, Singular,
                     ZeroInverse)


__all__ = (
    'FieldSpec',
    'GaloisField',
    'get_field',
    'is_irreducible',
    'poly_degree',
    'shift_and_reduce_mul',
)

log = logging.getLogger(__name__)


def poly_degree(poly):
    """Return the degree of a GF(2) polynomial given as a bitmask."""
    return poly.bit_length() - 1


def _poly_mod(a, b):
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly):
    """Return True if the GF(2) polynomial ``poly`` is irreducible.

    Tries every polynomial of degree 1 .. deg/2 as a factor.

    """
    degree = poly_degree(poly)
    if degree < 1:
        return False

    for factor in range(2, 1 << (degree // 2 + 1)):
        if _poly_mod(poly, factor) == 0:
            return False

    return True


def shift_and_reduce_mul(a, b, poly):
    """Multiply two field elements by shifting and reducing modulo ``poly``."""
    width = poly_degree(poly)
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if (a >> width) & 1:
            a ^= poly
    return result


@dataclass(frozen=True)
class FieldSpec:
    """Specification of GF(2^w) by its width and reduction polynomial."""

    width_bits: int = 8
    reduction_poly: int = DEFAULT_FIELD_POLY

    def __post_init__(self):
        if self.width_bits not in SUPPORTED_WIDTHS:
            raise FieldError("Unsupported field width %r (supported: %s)." %
                             (self.width_bits, ", ".join(map(str, SUPPORTED_WIDTHS))))

        if poly_degree(self.reduction_poly) != self.width_bits:
            raise FieldError("Polynomial 0x%X does not have degree %i." %
                             (self.reduction_poly, self.width_bits))

        if not is_irreducible(self.reduction_poly):
            raise FieldError("Polynomial 0x%X is not irreducible." % self.reduction_poly)

    @classmethod
    def from_poly(cls, poly):
        """Create a FieldSpec with the width implied by the degree of ``poly``."""
        return cls(poly_degree(poly), poly)

    @property
    def order(self):
        return 1 << self.width_bits

    def __str__(self):
        return "GF(2^%i)/0x%X" % (self.width_bits, self.reduction_poly)


class GaloisField:
    """Lookup tables and matrix algebra for one finite field of characteristic 2.

    Use ``get_field`` to obtain shared instances. All methods are pure and
    the tables are never modified after construction.

    """

    def __init__(self, spec):
        self.spec = spec
        self.order = spec.order
        self.exp_table = self.log_table = None

        if spec.width_bits == 8:
            self.mul_table = self._table_from_logs()
        else:
            self.mul_table = self.reference_table()

        self.mul_table.setflags(write=False)
        inv = np.argmax(self.mul_table == 1, axis=1).astype(np.uint8)
        inv[0] = 0
        inv.setflags(write=False)
        self.inv_table = inv
        log.debug("Built lookup tables for %s.", spec)

    def reference_table(self):
        """Return the multiplication table computed by shift-and-reduce."""
        q = self.order
        poly = self.spec.reduction_poly
        table = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(q):
                table[a, b] = shift_and_reduce_mul(a, b, poly)
        return table

    def _table_from_logs(self):
        q = self.order
        poly = self.spec.reduction_poly

        for generator in range(2, q):
            exp = np.zeros(2 * (q - 1), dtype=np.int64)
            x = 1
            for i in range(q - 1):
                exp[i] = x
                x = shift_and_reduce_mul(x, generator, poly)
            if len(set(exp[:q - 1].tolist())) == q - 1:
                break
        else:  # pragma: no cover - an irreducible poly of degree 8 always has one
            raise FieldError("No primitive element found for %s." % self.spec)

        exp[q - 1:] = exp[:q - 1]
        logs = np.zeros(q, dtype=np.int64)
        logs[exp[:q - 1]] = np.arange(q - 1)
        self.exp_table, self.log_table = exp, logs
        log.debug("Using generator 0x%02X for %s.", generator, self.spec)

        elems = np.arange(q)
        table = exp[logs[elems][:, None] + logs[elems][None, :]].astype(np.uint8)
        table[0, :] = 0
        table[:, 0] = 0
        return table

    # ---- elements ----

    def check(self, values):
        """Return ``values`` as a uint8 array, raising FieldError if out of range."""
        arr = np.asarray(values)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise FieldError("Element out of range for %s." % self.spec)
        return arr.astype(np.uint8, copy=False)

    @staticmethod
    def _unwrap(result):
        return int(result) if np.ndim(result) == 0 else result

    def add(self, a, b):
        """Add (XOR) two elements or element arrays."""
        return self._unwrap(np.bitwise_xor(self.check(a), self.check(b)))

    sub = add

    def mul(self, a, b):
        """Multiply two elements or element arrays (broadcasting)."""
        return self._unwrap(self.mul_table[self.check(a), self.check(b)])

    def inv(self, a):
        """Return the multiplicative inverse.

        Raises ``ZeroInverse`` if ``a`` is (or contains) zero.

        """
        a = self.check(a)
        if np.any(a == 0):
            raise ZeroInverse("Zero has no multiplicative inverse.")
        return self._unwrap(self.inv_table[a])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, e):
        result = 1
        for _ in range(e):
            result = self.mul(result, a)
        return result

    # ---- matrices ----

    def matrix(self, rows):
        """Return ``rows`` as a validated two-dimensional uint8 array."""
        mat = self.check(rows)
        if mat.ndim == 1 and mat.size == 0:
            mat = mat.reshape(0, 0)
        if mat.ndim != 2:
            raise DimensionMismatch("Expected a two-dimensional matrix, got shape %r." %
                                    (mat.shape,))
        return mat

    @staticmethod
    def identity(k):
        return np.eye(k, dtype=np.uint8)

    def matmul(self, a, b):
        """Return the matrix product ``a × b`` over the field."""
        a = self.matrix(a)
        b = self.matrix(b)
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch("Cannot multiply %ix%i by %ix%i matrix." %
                                    (a.shape + b.shape))

        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
        for t in range(a.shape[1]):
            out ^= self.mul_table[a[:, t, None], b[None, t, :]]
        return out

    def row_reduce(self, a):
        """Return the reduced row echelon form of ``a`` and its pivot columns.

        Gauss-Jordan elimination; the first row with a non-zero entry in the
        current column is used as pivot.

        """
        work = self.matrix(a).copy()
        rows, cols = work.shape
        pivots = []
        row = 0

        for col in range(cols):
            if row == rows:
                break

            nonzero = np.flatnonzero(work[row:, col])
            if nonzero.size == 0:
                continue

            pivot = row + int(nonzero[0])
            if pivot != row:
                work[[row, pivot]] = work[[pivot, row]]

            work[row] = self.mul_table[self.inv_table[work[row, col]], work[row]]
            factors = work[:, col].copy()
            factors[row] = 0
            targets = np.flatnonzero(factors)
            if targets.size:
                work[targets] ^= self.mul_table[factors[targets, None], work[row][None, :]]

            pivots.append(col)
            row += 1

        return work, pivots

    def rank(self, a):
        """Return the row rank of ``a``."""
        return len(self.row_reduce(a)[1])

    def inv_matrix(self, a):
        """Return the inverse of the square matrix ``a``.

        Raises ``Singular`` when the rank is smaller than the number of rows.

        """
        a = self.matrix(a)
        n, cols = a.shape
        if n != cols:
            raise DimensionMismatch("Cannot invert a non-square %ix%i matrix." % (n, cols))

        reduced, pivots = self.row_reduce(np.hstack([a, self.identity(n)]))
        if pivots[:n] != list(range(n)):
            raise Singular("Matrix is singular (rank %i < %i)." %
                           (len([p for p in pivots if p < n]), n))
        return reduced[:, n:]

    def solve_left(self, g, c, check=True):
        """Solve ``x × g = c`` for ``x``.

        ``g`` is a k × t matrix and ``c`` an s × t matrix whose rows are
        independent right-hand sides. Returns the s × k solution.

        Raises ``Singular`` when ``g`` has rank < k, and, if ``check`` is
        true, ``InconsistentBlocks`` when an overdetermined system has no
        solution.

        """
        g = self.matrix(g)
        c = self.matrix(c)
        k, t = g.shape
        if c.shape[1] != t:
            raise DimensionMismatch("Right-hand side has %i columns, expected %i." %
                                    (c.shape[1], t))

        _, pivots = self.row_reduce(g)
        if len(pivots) < k:
            raise Singular("System has rank %i < %i." % (len(pivots), k))

        x = self.matmul(c[:, pivots], self.inv_matrix(g[:, pivots]))
        if check and t > k and not np.array_equal(self.matmul(x, g), c):
            raise InconsistentBlocks("Overdetermined system has no solution.")
        return x

    def vandermonde(self, xs, cols):
        """Return the matrix with rows ``(1, x, x^2, ..., x^(cols-1))``."""
        xs = self.check(xs)
        out = np.ones((xs.size, cols), dtype=np.uint8)
        for j in range(1, cols):
            out[:, j] = self.mul_table[out[:, j - 1], xs]
        return out

    def cauchy(self, xs, ys):
        """Return the Cauchy matrix with entries ``1 / (x_i + y_j)``.

        Every square submatrix of the result is invertible. Raises
        ``BadSupport`` unless all elements of ``xs`` and ``ys`` are distinct.

        """
        xs = self.check(list(xs))
        ys = self.check(list(ys))
        support = np.concatenate([xs, ys])
        if np.unique(support).size != support.size:
            raise BadSupport("Cauchy support elements must be distinct, got %s + %s." %
                             (xs.tolist(), ys.tolist()))
        return self.inv_table[xs[:, None] ^ ys[None, :]]


@lru_cache(maxsize=None)
def _field_for(spec):
    return GaloisField(spec)


def get_field(spec=None):
    """Return the shared GaloisField for ``spec``.

    ``spec`` may be a FieldSpec, a reduction polynomial or None for the
    default GF(2^8) field.

    """
    if spec is None:
        spec = FieldSpec()
    elif isinstance(spec, int):
        spec = FieldSpec.from_poly(spec)
    return _field_for(spec)
