"""Exact matrices, rank, kernels, subspaces of matrix spaces, and linear
operators between matrix spaces.

Matrix spaces F^{a x b} are vectorized row-major everywhere: entry (i, j)
sits at coordinate ``i * b + j``.  Subspaces keep their basis in reduced
row echelon form over these coordinates, so equal subspaces have equal
bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, List, Optional, Sequence, Tuple

from . import _kernels
from .scalars import FieldSpec, NotInvertibleError, QQ, Scalar

__all__ = [
    "Matrix",
    "Subspace",
    "MatrixSpaceOperator",
    "ShapeError",
    "rank",
    "kernel",
    "invert",
    "rref",
    "dot_complement",
    "subspace_sum",
    "subspace_intersect",
    "operator_rank",
    "apply_operator",
    "rank_bareiss",
    "rank_multimodular",
]


class ShapeError(ValueError):
    """Dimensions or ambient spaces do not match."""


# ---------------------------------------------------------------------------
# raw elimination helpers


def _dot(field: FieldSpec, xs, ys):
    if field.kind == "prime":
        return sum(x * y for x, y in zip(xs, ys)) % field.p
    if field.kind == "rational":
        return sum((x * y for x, y in zip(xs, ys) if x and y), Fraction(0))
    acc = field.zero()
    for x, y in zip(xs, ys):
        acc = field.add(acc, field.mul(x, y))
    return acc


def _integer_rows(rows) -> List[List[int]]:
    out = []
    for r in rows:
        d = lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * d) for x in r])
    return out


def rank_bareiss(rows: Sequence[Sequence[int]], ncols: int) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(r) for r in rows if any(r)]
    n = len(a)
    r = 0
    prev = 1
    for c in range(ncols):
        if r == n:
            break
        piv = next((i for i in range(r, n) if a[i][c]), -1)
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        prow = a[r]
        pv = prow[c]
        nz = [j for j in range(c + 1, ncols) if prow[j]]
        for i in range(r + 1, n):
            row = a[i]
            f = row[c]
            if f == 0:
                if pv != prev:
                    for j in range(c + 1, ncols):
                        if row[j]:
                            row[j] = row[j] * pv // prev
                continue
            if pv == prev:
                # pv/prev == 1: only the pivot row's support changes
                for j in nz:
                    row[j] -= f * prow[j] // prev
            else:
                for j in range(c + 1, ncols):
                    row[j] = (pv * row[j] - f * prow[j]) // prev
            row[c] = 0
        prev = pv
        r += 1
    return r


def _rref_rational(rows, ncols):
    work = [list(r) for r in rows]
    pivots = []
    r = 0
    n = len(work)
    for c in range(ncols):
        if r == n:
            break
        piv = next((i for i in range(r, n) if work[i][c]), -1)
        if piv < 0:
            continue
        work[r], work[piv] = work[piv], work[r]
        prow = work[r]
        inv = 1 / prow[c]
        if inv != 1:
            prow = [x * inv for x in prow]
            work[r] = prow
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(n):
            if i != r:
                row = work[i]
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return work[:r], pivots


def rref(rows, ncols: int, field: FieldSpec):
    """Reduced row echelon form of raw rows; returns (rows, pivots)."""
    if field.kind == "prime":
        out, piv = _kernels.rref_modp([list(r) for r in rows], ncols, field.p)
        return [tuple(r) for r in out], list(piv)
    if field.kind == "rational":
        out, piv = _rref_rational(rows, ncols)
        return [tuple(r) for r in out], piv
    raise TypeError("row reduction over an eps ring is not supported")


def _raw_rank(rows, ncols: int, field: FieldSpec) -> int:
    if field.kind == "prime":
        return _kernels.rank_modp([list(r) for r in rows], ncols, field.p)
    if field.kind == "rational":
        return rank_bareiss(_integer_rows(rows), ncols)
    base = field.base
    return _raw_rank([[x[0] for x in r] for r in rows], ncols, base)


def rank_multimodular(rows: Sequence[Sequence[int]], ncols: int, primes: Iterable[int]) -> int:
    """Max rank of an integer matrix over the given prime fields.

    Equals the rational rank unless every prime divides some maximal minor.
    """
    best = 0
    for p in primes:
        best = max(best, _kernels.rank_modp([[x % p for x in r] for r in rows], ncols, p))
    return best


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Matrix:
    """A dense matrix of raw canonical field values."""

    field: FieldSpec
    rows: int
    cols: int
    data: Tuple[tuple, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ShapeError("negative dimension")
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ShapeError("entry grid does not match dimensions")

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_rows(cls, rows, field: FieldSpec = QQ) -> "Matrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        data = tuple(tuple(field.convert(x) for x in r) for r in rows)
        return cls(field, len(rows), ncols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec = QQ) -> "Matrix":
        z = field.zero()
        return cls(field, rows, cols, tuple((z,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int, field: FieldSpec = QQ) -> "Matrix":
        z, o = field.zero(), field.one()
        return cls(field, n, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def unit(cls, i: int, j: int, rows: int, cols: int, field: FieldSpec = QQ) -> "Matrix":
        """e_ij with 0-based indices."""
        z, o = field.zero(), field.one()
        return cls(
            field, rows, cols,
            tuple(tuple(o if (a, b) == (i, j) else z for b in range(cols)) for a in range(rows)),
        )

    @classmethod
    def from_vec(cls, vec, rows: int, cols: int, field: FieldSpec) -> "Matrix":
        vec = tuple(vec)
        if len(vec) != rows * cols:
            raise ShapeError(f"vector of length {len(vec)} cannot fill {rows}x{cols}")
        return cls(field, rows, cols, tuple(vec[i * cols:(i + 1) * cols] for i in range(rows)))

    @classmethod
    def random(cls, rows: int, cols: int, field: FieldSpec, rng, bound: int = 3) -> "Matrix":
        return cls(field, rows, cols,
                   tuple(tuple(field.random(rng, bound) for _ in range(cols)) for _ in range(rows)))

    # -- accessors ---------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx) -> Scalar:
        i, j = idx
        return Scalar(self.field, self.data[i][j])

    def vec(self) -> tuple:
        return tuple(x for r in self.data for x in r)

    def is_zero(self) -> bool:
        f = self.field
        return all(f.is_zero(x) for r in self.data for x in r)

    def to_strings(self) -> List[List[str]]:
        f = self.field
        return [[f.render(x) for x in r] for r in self.data]

    def __repr__(self):
        return f"Matrix({self.field}, {self.to_strings()})"

    # -- arithmetic --------------------------------------------------------
    def _check_same(self, other: "Matrix"):
        if self.field != other.field:
            raise ShapeError(f"field mismatch: {self.field} vs {other.field}")
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(
            tuple(f.add(x, y) for x, y in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(
            tuple(f.sub(x, y) for x, y in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __neg__(self) -> "Matrix":
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(tuple(f.neg(x) for x in r) for r in self.data))

    def scale(self, c) -> "Matrix":
        f = self.field
        c = f.convert(c)
        return Matrix(f, self.rows, self.cols, tuple(tuple(f.mul(c, x) for x in r) for r in self.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.field != other.field:
            raise ShapeError(f"field mismatch: {self.field} vs {other.field}")
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        f = self.field
        cols = list(zip(*other.data)) if other.rows else [()] * other.cols
        return Matrix(f, self.rows, other.cols,
                      tuple(tuple(_dot(f, r, c) for c in cols) for r in self.data))

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.cols, self.rows,
                      tuple(zip(*self.data)) if self.rows else tuple(() for _ in range(self.cols)))

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product; row index (i, i') -> i * other.rows + i'."""
        if self.field != other.field:
            raise ShapeError(f"field mismatch: {self.field} vs {other.field}")
        f = self.field
        data = []
        for r in self.data:
            for s in other.data:
                data.append(tuple(f.mul(x, y) for x in r for y in s))
        return Matrix(f, self.rows * other.rows, self.cols * other.cols, tuple(data))

    def map_field(self, fn) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols, tuple(tuple(fn(x) for x in r) for r in self.data))

    # -- invariants ----------------------------------------------------------
    def rank(self) -> int:
        return rank(self)

    def det(self):
        """Determinant as a raw value (base fields only)."""
        if self.rows != self.cols:
            raise ShapeError("determinant of a non-square matrix")
        f = self.field
        a = [list(r) for r in self.data]
        n = self.rows
        d = f.one()
        for c in range(n):
            piv = next((i for i in range(c, n) if not f.is_zero(a[i][c])), -1)
            if piv < 0:
                return f.zero()
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                d = f.neg(d)
            pv = a[c][c]
            d = f.mul(d, pv)
            inv = f.inv(pv)
            for i in range(c + 1, n):
                if not f.is_zero(a[i][c]):
                    m = f.mul(a[i][c], inv)
                    a[i] = [f.sub(x, f.mul(m, y)) for x, y in zip(a[i], a[c])]
        return d

    def is_invertible(self) -> bool:
        return self.rows == self.cols and rank(self) == self.rows


def rank(m: Matrix) -> int:
    """Exact rank.  Over an eps ring: rank of the eps^0 coefficient matrix."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return _raw_rank(m.data, m.cols, m.field)


def kernel(m: Matrix) -> "Subspace":
    """Right kernel {x : m x = 0} as a subspace of column vectors F^{cols x 1}."""
    f = m.field
    rows, piv = rref(m.data, m.cols, f)
    pivset = set(piv)
    basis = []
    for free in range(m.cols):
        if free in pivset:
            continue
        v = [f.zero()] * m.cols
        v[free] = f.one()
        for r, pc in zip(rows, piv):
            v[pc] = f.neg(r[free])
        basis.append(tuple(v))
    return Subspace.span_vectors(basis, (m.cols, 1), f)


def invert(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ShapeError("only square matrices can be inverted")
    f = m.field
    n = m.rows
    if f.kind == "eps":
        raise TypeError("inversion over an eps ring is not supported")
    z, o = f.zero(), f.one()
    aug = [tuple(r) + tuple(o if i == j else z for j in range(n)) for i, r in enumerate(m.data)]
    rows, piv = rref(aug, 2 * n, f)
    if piv[:n] != list(range(n)) or len(rows) < n:
        raise NotInvertibleError("matrix is singular")
    return Matrix(f, n, n, tuple(tuple(r[n:]) for r in rows[:n]))


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A subspace of F^{a x b}, stored as an RREF basis of row-major vectors."""

    ambient: Tuple[int, int]
    field: FieldSpec
    basis: Tuple[tuple, ...]
    pivots: Tuple[int, ...]

    @property
    def ambient_dim(self) -> int:
        return self.ambient[0] * self.ambient[1]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self):
        return self.dim

    # -- constructors ------------------------------------------------------
    @classmethod
    def span_vectors(cls, vectors, ambient: Tuple[int, int], field: FieldSpec) -> "Subspace":
        n = ambient[0] * ambient[1]
        vectors = [tuple(v) for v in vectors]
        for v in vectors:
            if len(v) != n:
                raise ShapeError(f"vector of length {len(v)} not in ambient {ambient}")
        if not vectors:
            return cls(tuple(ambient), field, (), ())
        rows, piv = rref(vectors, n, field)
        return cls(tuple(ambient), field, tuple(rows), tuple(piv))

    @classmethod
    def span(cls, matrices: Sequence[Matrix], ambient: Optional[Tuple[int, int]] = None,
             field: Optional[FieldSpec] = None) -> "Subspace":
        matrices = list(matrices)
        if ambient is None:
            if not matrices:
                raise ShapeError("ambient required for the span of nothing")
            ambient = matrices[0].shape
        if field is None:
            if not matrices:
                raise ShapeError("field required for the span of nothing")
            field = matrices[0].field
        for m in matrices:
            if m.shape != tuple(ambient) or m.field != field:
                raise ShapeError(f"matrix {m.shape}/{m.field} not in {ambient}/{field}")
        return cls.span_vectors([m.vec() for m in matrices], ambient, field)

    @classmethod
    def zero(cls, ambient: Tuple[int, int], field: FieldSpec) -> "Subspace":
        return cls(tuple(ambient), field, (), ())

    @classmethod
    def full(cls, ambient: Tuple[int, int], field: FieldSpec) -> "Subspace":
        n = ambient[0] * ambient[1]
        z, o = field.zero(), field.one()
        return cls(tuple(ambient), field,
                   tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)),
                   tuple(range(n)))

    @classmethod
    def coordinate(cls, cells: Iterable[Tuple[int, int]], ambient: Tuple[int, int],
                   field: FieldSpec) -> "Subspace":
        """Span of the unit matrices e_ij for (i, j) in cells (0-based)."""
        a, b = ambient
        return cls.span([Matrix.unit(i, j, a, b, field) for (i, j) in sorted(set(cells))],
                        ambient, field)

    # -- queries -------------------------------------------------------------
    def basis_matrices(self) -> List[Matrix]:
        a, b = self.ambient
        return [Matrix.from_vec(v, a, b, self.field) for v in self.basis]

    def reduce(self, vec) -> tuple:
        """Remainder of vec modulo the subspace (zero iff vec is a member)."""
        f = self.field
        v = list(vec)
        for row, pc in zip(self.basis, self.pivots):
            c = v[pc]
            if not f.is_zero(c):
                v = [f.sub(x, f.mul(c, y)) for x, y in zip(v, row)]
        return tuple(v)

    def contains(self, x) -> bool:
        vec = x.vec() if isinstance(x, Matrix) else tuple(x)
        if len(vec) != self.ambient_dim:
            raise ShapeError("element not in the ambient space")
        f = self.field
        return all(f.is_zero(c) for c in self.reduce(vec))

    __contains__ = contains

    def is_proper(self) -> bool:
        return self.dim < self.ambient_dim

    def _check(self, other: "Subspace"):
        if self.ambient != other.ambient or self.field != other.field:
            raise ShapeError(
                f"ambient mismatch: {self.ambient}/{self.field} vs {other.ambient}/{other.field}")

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return subspace_intersect(self, other)

    def perp(self) -> "Subspace":
        return dot_complement(self)

    def __repr__(self):
        return f"Subspace(ambient={self.ambient}, field={self.field}, dim={self.dim})"


def dot_complement(s: Subspace) -> Subspace:
    """{z : z . a = 0 for all a in s} under the coordinatewise dot product."""
    n = s.ambient_dim
    f = s.field
    if s.dim == 0:
        return Subspace.full(s.ambient, f)
    k = kernel(Matrix(f, s.dim, n, s.basis))
    return Subspace.span_vectors(k.basis, s.ambient, f)


def subspace_sum(s1: Subspace, s2: Subspace) -> Subspace:
    s1._check(s2)
    return Subspace.span_vectors(s1.basis + s2.basis, s1.ambient, s1.field)


def subspace_intersect(s1: Subspace, s2: Subspace) -> Subspace:
    """Intersection via the kernel of [B1; -B2]^T (independent of complements)."""
    s1._check(s2)
    f = s1.field
    if s1.dim == 0 or s2.dim == 0:
        return Subspace.zero(s1.ambient, f)
    n = s1.ambient_dim
    cols = list(s1.basis) + [tuple(f.neg(x) for x in v) for v in s2.basis]
    # columns of the system are basis vectors; rows are coordinates
    system = Matrix(f, n, len(cols), tuple(tuple(c[i] for c in cols) for i in range(n)))
    ker = kernel(system)
    vecs = []
    for coeffs in ker.basis:
        x = [f.zero()] * n
        for c, v in zip(coeffs[: s1.dim], s1.basis):
            if not f.is_zero(c):
                x = [f.add(a, f.mul(c, b)) for a, b in zip(x, v)]
        vecs.append(x)
    return Subspace.span_vectors(vecs, s1.ambient, f)


# ---------------------------------------------------------------------------
# operators on matrix spaces


@dataclass(frozen=True)
class MatrixSpaceOperator:
    """A linear map F^{a x b} -> F^{c x d} acting on row-major vectorizations."""

    shape_in: Tuple[int, int]
    shape_out: Tuple[int, int]
    matrix: Matrix

    def __post_init__(self):
        a, b = self.shape_in
        c, d = self.shape_out
        if self.matrix.shape != (c * d, a * b):
            raise ShapeError(
                f"representation {self.matrix.shape} inconsistent with {self.shape_in}->{self.shape_out}")

    @property
    def field(self) -> FieldSpec:
        return self.matrix.field

    @classmethod
    def identity(cls, shape: Tuple[int, int], field: FieldSpec = QQ) -> "MatrixSpaceOperator":
        return cls(tuple(shape), tuple(shape), Matrix.identity(shape[0] * shape[1], field))

    @classmethod
    def zero(cls, shape_in, shape_out, field: FieldSpec = QQ) -> "MatrixSpaceOperator":
        return cls(tuple(shape_in), tuple(shape_out),
                   Matrix.zeros(shape_out[0] * shape_out[1], shape_in[0] * shape_in[1], field))

    @classmethod
    def from_images(cls, images: Sequence[Matrix], shape_in, shape_out=None) -> "MatrixSpaceOperator":
        """Operator sending the k-th row-major unit matrix of shape_in to images[k]."""
        a, b = shape_in
        if len(images) != a * b:
            raise ShapeError(f"need {a * b} images, got {len(images)}")
        if shape_out is None:
            shape_out = images[0].shape
        f = images[0].field
        cols = [m.vec() for m in images]
        n_out = shape_out[0] * shape_out[1]
        return cls(tuple(shape_in), tuple(shape_out),
                   Matrix(f, n_out, a * b, tuple(tuple(c[i] for c in cols) for i in range(n_out))))

    @classmethod
    def from_function(cls, fn, shape_in, shape_out, field: FieldSpec = QQ) -> "MatrixSpaceOperator":
        a, b = shape_in
        return cls.from_images([fn(Matrix.unit(i, j, a, b, field)) for i in range(a) for j in range(b)],
                               shape_in, shape_out)

    @classmethod
    def transpose_map(cls, n: int, m: Optional[int] = None, field: FieldSpec = QQ) -> "MatrixSpaceOperator":
        m = n if m is None else m
        return cls.from_function(lambda x: x.T, (n, m), (m, n), field)

    @classmethod
    def projection(cls, cells, shape, field: FieldSpec = QQ) -> "MatrixSpaceOperator":
        """Keep the entries at the given (0-based) cells, zero the rest."""
        keep = set(cells)
        a, b = shape
        images = [Matrix.unit(i, j, a, b, field) if (i, j) in keep else Matrix.zeros(a, b, field)
                  for i in range(a) for j in range(b)]
        return cls.from_images(images, shape, shape)

    @classmethod
    def from_basis_map(cls, sources: Sequence[Matrix], targets: Sequence[Matrix]) -> "MatrixSpaceOperator":
        """The operator with L(sources[k]) = targets[k]; sources must be a basis."""
        if len(sources) != len(targets):
            raise ShapeError("sources and targets differ in length")
        shape_in = sources[0].shape
        shape_out = targets[0].shape
        f = sources[0].field
        n_in = shape_in[0] * shape_in[1]
        n_out = shape_out[0] * shape_out[1]
        S = Matrix(f, n_in, len(sources), tuple(zip(*[s.vec() for s in sources])))
        T = Matrix(f, n_out, len(targets), tuple(zip(*[t.vec() for t in targets])))
        return cls(tuple(shape_in), tuple(shape_out), T @ invert(S))

    @classmethod
    def random(cls, shape_in, shape_out, field: FieldSpec, rng, bound: int = 3) -> "MatrixSpaceOperator":
        n_in = shape_in[0] * shape_in[1]
        n_out = shape_out[0] * shape_out[1]
        return cls(tuple(shape_in), tuple(shape_out), Matrix.random(n_out, n_in, field, rng, bound))

    @classmethod
    def random_invertible(cls, shape, field: FieldSpec, rng, bound: int = 3) -> "MatrixSpaceOperator":
        while True:
            op = cls.random(shape, shape, field, rng, bound)
            if op.matrix.is_invertible():
                return op

    def __call__(self, m: Matrix) -> Matrix:
        return apply_operator(self, m)

    def rank(self) -> int:
        return operator_rank(self)

    def is_invertible(self) -> bool:
        return self.shape_in[0] * self.shape_in[1] == self.shape_out[0] * self.shape_out[1] \
            and self.matrix.is_invertible()

    def inverse(self) -> "MatrixSpaceOperator":
        return MatrixSpaceOperator(self.shape_out, self.shape_in, invert(self.matrix))

    def compose(self, inner: "MatrixSpaceOperator") -> "MatrixSpaceOperator":
        """self o inner."""
        if inner.shape_out != self.shape_in:
            raise ShapeError(f"cannot compose {self.shape_in} with output {inner.shape_out}")
        return MatrixSpaceOperator(inner.shape_in, self.shape_out, self.matrix @ inner.matrix)

    def kron(self, other: "MatrixSpaceOperator") -> "MatrixSpaceOperator":
        """Operator x (x) y -> L(x) (x) M(y) on Kronecker-product matrix spaces."""
        (a, b), (c, d) = self.shape_in, self.shape_out
        (a2, b2), (c2, d2) = other.shape_in, other.shape_out
        f = self.field
        images = []
        for i in range(a * a2):
            for j in range(b * b2):
                i1, i2 = divmod(i, a2)
                j1, j2 = divmod(j, b2)
                x = self(Matrix.unit(i1, j1, a, b, f))
                y = other(Matrix.unit(i2, j2, a2, b2, f))
                images.append(x.kron(y))
        return MatrixSpaceOperator.from_images(images, (a * a2, b * b2), (c * c2, d * d2))


def operator_rank(L: MatrixSpaceOperator) -> int:
    return rank(L.matrix)


def apply_operator(L: MatrixSpaceOperator, m: Matrix) -> Matrix:
    if m.shape != L.shape_in:
        raise ShapeError(f"operator expects {L.shape_in}, got {m.shape}")
    if m.field != L.field:
        raise ShapeError(f"field mismatch: {m.field} vs {L.field}")
    f = m.field
    v = m.vec()
    out = tuple(_dot(f, row, v) for row in L.matrix.data)
    return Matrix.from_vec(out, L.shape_out[0], L.shape_out[1], f)
