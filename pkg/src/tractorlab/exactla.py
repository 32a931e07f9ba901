"""Exact rational linear algebra on small dense matrices (row spaces, kernels)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import flint

from .jetcalc import to_fmpq, to_fraction

__all__ = ["RowSpace", "rank", "rref", "nullspace", "matmul", "transpose", "flatten", "unflatten"]

Matrix = list[list[Fraction]]


def _mat(rows: Sequence[Sequence]) -> flint.fmpq_mat:
    return flint.fmpq_mat([[to_fmpq(x) for x in r] for r in rows])


def _rows(m: flint.fmpq_mat) -> list[list[Fraction]]:
    return [[to_fraction(m[i, j]) for j in range(m.ncols())] for i in range(m.nrows())]


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return _mat(rows).rank()


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], int]:
    if not rows:
        return [], 0
    m, r = _mat(rows).rref()
    return _rows(m)[:r], r


def nullspace(rows: Sequence[Sequence], width: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{v : rows @ v = 0}``, read off the reduced row echelon form."""
    if not rows:
        if width is None:
            raise ValueError("width needed for an empty system")
        return [[Fraction(int(i == j)) for j in range(width)] for i in range(width)]
    width = len(rows[0])
    R, r = rref(rows)
    pivots = []
    for row in R:
        pivots.append(next(j for j, x in enumerate(row) if x != 0))
    free = [j for j in range(width) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * width
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][l] * b[l][j] for l in range(k)), Fraction(0)) for j in range(m)] for i in range(n)]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(r) for r in zip(*a)]


def flatten(m: Sequence[Sequence]) -> list[Fraction]:
    return [Fraction(x) for row in m for x in row]


def unflatten(v: Sequence, n: int) -> Matrix:
    return [list(v[i * n:(i + 1) * n]) for i in range(n)]


class RowSpace:
    """Incrementally grown subspace of ``Q^width`` kept in reduced row echelon form."""

    def __init__(self, width: int, vectors: Iterable[Sequence] = ()):
        self.width = width
        self._basis: list[list[Fraction]] = []
        for v in vectors:
            self.add(v)

    @property
    def dim(self) -> int:
        return len(self._basis)

    @property
    def basis(self) -> list[list[Fraction]]:
        return [list(r) for r in self._basis]

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.width:
            raise ValueError(f"vector of length {len(v)} in a space of width {self.width}")
        if all(x == 0 for x in v):
            return True
        return rank(self._basis + [list(v)]) == self.dim

    def add(self, v: Sequence) -> bool:
        """Insert ``v``; returns True if the dimension grew."""
        if self.contains(v):
            return False
        self._basis, _ = rref(self._basis + [list(v)])
        return True
