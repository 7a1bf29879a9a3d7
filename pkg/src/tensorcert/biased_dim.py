"""D-biased dimension over Q: trace of the orthogonal compression of a
symmetric matrix D to a subspace."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .linalg import Matrix, ShapeError, Subspace, invert
from .scalars import QQ


@dataclass(frozen=True)
class BiasMatrix:
    D: Matrix

    def __post_init__(self):
        if not self.D.field.is_rational:
            raise TypeError("bias matrices are rational")
        if self.D.rows != self.D.cols:
            raise ShapeError("bias matrix must be square")
        if self.D != self.D.T:
            raise ValueError("bias matrix must be symmetric")

    @classmethod
    def from_rows(cls, rows) -> "BiasMatrix":
        return cls(Matrix.from_rows(rows, QQ))

    @classmethod
    def diag(cls, values) -> "BiasMatrix":
        n = len(values)
        return cls.from_rows([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return self.D.rows

    def trace(self) -> Fraction:
        return sum((self.D.data[i][i] for i in range(self.n)), Fraction(0))

    def scale(self, c) -> "BiasMatrix":
        return BiasMatrix(self.D.scale(Fraction(c)))


def _as_vector(v) -> tuple:
    if isinstance(v, Matrix):
        return v.vec()
    return tuple(Fraction(x) for x in v)


def rayleigh(D: BiasMatrix, v) -> Fraction:
    """(v^T D v) / (v^T v)."""
    v = _as_vector(v)
    if len(v) != D.n:
        raise ShapeError(f"vector of length {len(v)} for a {D.n}x{D.n} bias matrix")
    vv = sum(x * x for x in v)
    if vv == 0:
        raise ValueError("rayleigh quotient of the zero vector")
    Dv = [sum(D.D.data[i][j] * v[j] for j in range(D.n)) for i in range(D.n)]
    return sum(x * y for x, y in zip(v, Dv)) / vv


def _basis(S: Union[Subspace, Sequence], n: int):
    if isinstance(S, Subspace):
        if S.ambient_dim != n:
            raise ShapeError(f"subspace of dimension-{S.ambient_dim} space for a {n}x{n} bias matrix")
        return [tuple(Fraction(x) for x in b) for b in S.basis]
    sp = Subspace.span_vectors([_as_vector(v) for v in S], (n, 1), QQ)
    return list(sp.basis)


def column_subspace(vectors, n: int) -> Subspace:
    """Span of vectors in Q^n, stored with ambient (n, 1)."""
    return Subspace.span_vectors([_as_vector(v) for v in vectors], (n, 1), QQ)


def biased_dim(D: BiasMatrix, S) -> Fraction:
    """trace((B^T B)^{-1} B^T D B) for any basis B of S."""
    basis = _basis(S, D.n)
    k = len(basis)
    if k == 0:
        return Fraction(0)
    B = Matrix(QQ, D.n, k, tuple(tuple(b[i] for b in basis) for i in range(D.n)))
    G = B.T @ B
    C = invert(G) @ (B.T @ D.D @ B)
    return sum((C.data[i][i] for i in range(k)), Fraction(0))


def modularity_defect(D: BiasMatrix, S1, S2) -> Fraction:
    """dim_D(S1) + dim_D(S2) - dim_D(S1 & S2) - dim_D(S1 + S2)."""
    A = S1 if isinstance(S1, Subspace) else column_subspace(S1, D.n)
    B = S2 if isinstance(S2, Subspace) else column_subspace(S2, D.n)
    return biased_dim(D, A) + biased_dim(D, B) - biased_dim(D, A & B) - biased_dim(D, A + B)
