"""Dense m-factor tensors over matrix spaces and the constructions built on
them: matrix multiplication and cyclic tensors, flattenings, reductions,
Kronecker composition, the kappa lift/contract maps, symmetrization,
contractions with squared cosines, and Koszul flattenings.

A tensor in F^{a1 x b1} (x) ... (x) F^{am x bm} is stored as a flat tuple in
row-major order over the index slots (r1, c1, r2, c2, ..., rm, cm).  All
indices in this module are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product
from math import prod
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .linalg import Matrix, MatrixSpaceOperator, ShapeError, Subspace, rank
from .scalars import FieldSpec, QQ

__all__ = [
    "TensorShape",
    "Tensor",
    "RankOneTerm",
    "Decomposition",
    "FlattenGrouping",
    "WedgeBasis",
    "DecompositionMismatch",
    "matmul_tensor",
    "cyclic_tensor",
    "open_cyclic_tensor",
    "evaluate_decomposition",
    "flatten",
    "apply_hom_tuple",
    "kronecker_compose",
    "kron_tensor",
    "omega_span_coefficients",
    "lift_kappa",
    "contract_kappa",
    "symmetrizer",
    "symmetrize",
    "contract_pair",
    "cos_sq",
    "i_equivalent",
    "koszul_flatten",
    "cyclic_dims",
]


class DecompositionMismatch(ValueError):
    """A decomposition does not evaluate to the tensor it was claimed to."""


@dataclass(frozen=True)
class TensorShape:
    factors: Tuple[Tuple[int, int], ...]
    field: FieldSpec = QQ

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        if not self.factors:
            raise ShapeError("a tensor needs at least one factor")
        if any(r < 1 or c < 1 for r, c in self.factors):
            raise ShapeError(f"factor dimensions must be positive: {self.factors}")

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return tuple(r * c for r, c in self.factors)

    @property
    def size(self) -> int:
        return prod(self.factor_dims)

    @property
    def slot_dims(self) -> Tuple[int, ...]:
        return tuple(x for f in self.factors for x in f)


@dataclass(frozen=True)
class Tensor:
    shape: TensorShape
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.shape.size:
            raise ShapeError(f"expected {self.shape.size} entries, got {len(self.entries)}")

    @property
    def field(self) -> FieldSpec:
        return self.shape.field

    @classmethod
    def zeros(cls, shape: TensorShape) -> "Tensor":
        return cls(shape, (shape.field.zero(),) * shape.size)

    @classmethod
    def from_dict(cls, shape: TensorShape, values: Dict[tuple, object]) -> "Tensor":
        """Build from {((r1, c1), ..., (rm, cm)): value}."""
        f = shape.field
        out = [f.zero()] * shape.size
        for idx, v in values.items():
            out[_flat_index(shape, idx)] = f.convert(v)
        return cls(shape, tuple(out))

    def __getitem__(self, idx):
        return self.entries[_flat_index(self.shape, idx)]

    def nonzero(self) -> Dict[tuple, object]:
        f = self.field
        out = {}
        for flat, v in enumerate(self.entries):
            if not f.is_zero(v):
                out[_multi_index(self.shape, flat)] = v
        return out

    def nnz(self) -> int:
        f = self.field
        return sum(1 for v in self.entries if not f.is_zero(v))

    def is_zero(self) -> bool:
        return self.nnz() == 0

    def __add__(self, other: "Tensor") -> "Tensor":
        if self.shape != other.shape:
            raise ShapeError("tensor shapes differ")
        f = self.field
        return Tensor(self.shape, tuple(f.add(x, y) for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: "Tensor") -> "Tensor":
        if self.shape != other.shape:
            raise ShapeError("tensor shapes differ")
        f = self.field
        return Tensor(self.shape, tuple(f.sub(x, y) for x, y in zip(self.entries, other.entries)))

    def scale(self, c) -> "Tensor":
        f = self.field
        c = f.convert(c)
        return Tensor(self.shape, tuple(f.mul(c, x) for x in self.entries))

    def norm_sq(self):
        if not self.field.is_rational:
            raise TypeError("norms are defined over Q only")
        return sum((x * x for x in self.entries), Fraction(0))


def _flat_index(shape: TensorShape, idx) -> int:
    flat = 0
    for (r, c), (rows, cols) in zip(idx, shape.factors):
        if not (0 <= r < rows and 0 <= c < cols):
            raise IndexError(f"index {idx} out of range for {shape.factors}")
        flat = flat * rows * cols + r * cols + c
    return flat


def _multi_index(shape: TensorShape, flat: int) -> tuple:
    out = []
    for rows, cols in reversed(shape.factors):
        flat, k = divmod(flat, rows * cols)
        out.append(divmod(k, cols))
    return tuple(reversed(out))


@dataclass(frozen=True)
class RankOneTerm:
    factors: Tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __getitem__(self, i) -> Matrix:
        return self.factors[i]

    def __len__(self):
        return len(self.factors)


@dataclass(frozen=True)
class Decomposition:
    shape: TensorShape
    terms: Tuple[RankOneTerm, ...]
    metadata: dict = dc_field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        terms = tuple(t if isinstance(t, RankOneTerm) else RankOneTerm(tuple(t)) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        for k, t in enumerate(terms):
            if len(t) != self.shape.m:
                raise ShapeError(f"term {k} has {len(t)} factors, expected {self.shape.m}")
            for f, (mat, shp) in enumerate(zip(t.factors, self.shape.factors)):
                if mat.shape != shp or mat.field != self.shape.field:
                    raise ShapeError(
                        f"term {k} factor {f}: {mat.shape}/{mat.field} does not conform to "
                        f"{shp}/{self.shape.field}")

    @property
    def r(self) -> int:
        return len(self.terms)

    def __len__(self):
        return len(self.terms)

    def factor_family(self, f: int) -> List[Matrix]:
        """The matrices in factor f (0-based) across all terms."""
        return [t.factors[f] for t in self.terms]

    def evaluate(self) -> Tensor:
        return evaluate_decomposition(self)


# ---------------------------------------------------------------------------
# builders


def cyclic_dims(shape: TensorShape) -> Optional[Tuple[int, ...]]:
    """(n1, ..., nm) if the factors chain as (n1,n2),(n2,n3),...,(nm,n1)."""
    fs = shape.factors
    m = len(fs)
    for k in range(m):
        if fs[k][1] != fs[(k + 1) % m][0]:
            return None
    return tuple(r for r, _ in fs)


def cyclic_tensor(dims: Sequence[int], field: FieldSpec = QQ) -> Tensor:
    """sum over i_1..i_m of e_{i1 i2} (x) e_{i2 i3} (x) ... (x) e_{im i1}."""
    dims = tuple(dims)
    m = len(dims)
    if m < 1 or any(d < 1 for d in dims):
        raise ShapeError(f"invalid cyclic dimensions {dims}")
    shape = TensorShape(tuple((dims[k], dims[(k + 1) % m]) for k in range(m)), field)
    one = field.one()
    out = [field.zero()] * shape.size
    for idx in product(*(range(d) for d in dims)):
        multi = tuple((idx[k], idx[(k + 1) % m]) for k in range(m))
        out[_flat_index(shape, multi)] = one
    return Tensor(shape, tuple(out))


def matmul_tensor(n1: int, n2: int, n3: int, field: FieldSpec = QQ) -> Tensor:
    """<n1,n2,n3> = sum e_ij (x) e_jk (x) e_ki."""
    return cyclic_tensor((n1, n2, n3), field)


def open_cyclic_tensor(m: int, n: int, i: int, i_last: int, field: FieldSpec = QQ) -> Tensor:
    """omega_m(i, i')(n): the (m-1)-factor tensor sum e_{i,i2} (x) ... (x) e_{i_{m-1},i'}."""
    if m < 3:
        raise ShapeError("open cyclic tensors need m >= 3")
    if not (0 <= i < n and 0 <= i_last < n):
        raise IndexError(f"indices ({i}, {i_last}) out of range for n={n}")
    shape = TensorShape(((n, n),) * (m - 1), field)
    one = field.one()
    out = [field.zero()] * shape.size
    for mid in product(range(n), repeat=m - 2):
        chain = (i,) + mid + (i_last,)
        multi = tuple((chain[k], chain[k + 1]) for k in range(m - 1))
        out[_flat_index(shape, multi)] = one
    return Tensor(shape, tuple(out))


def _outer(field: FieldSpec, vecs) -> list:
    out = [field.one()]
    kind = field.kind
    for v in vecs:
        if kind == "prime":
            p = field.p
            out = [x * y % p for x in out for y in v]
        elif kind == "rational":
            out = [x * y for x in out for y in v]
        else:
            out = [field.mul(x, y) for x in out for y in v]
    return out


def evaluate_decomposition(d: Decomposition) -> Tensor:
    f = d.shape.field
    size = d.shape.size
    acc = [f.zero()] * size
    kind = f.kind
    for term in d.terms:
        vecs = [m.vec() for m in term.factors]
        if any(all(f.is_zero(x) for x in v) for v in vecs):
            continue
        outer = _outer(f, vecs)
        if kind == "eps":
            for k, x in enumerate(outer):
                acc[k] = f.add(acc[k], x)
        else:
            for k, x in enumerate(outer):
                if x:
                    acc[k] += x
    if kind == "prime":
        acc = [x % f.p for x in acc]
    return Tensor(d.shape, tuple(acc))


def kron_tensor(t1: Tensor, t2: Tensor) -> Tensor:
    """Factor-wise Kronecker product: e_{ab} (x) e_{a'b'} -> e_{(a,a'),(b,b')} per factor."""
    if t1.shape.m != t2.shape.m or t1.field != t2.field:
        raise ShapeError("kron_tensor needs equal arity and field")
    f = t1.field
    shape = TensorShape(tuple((r1 * r2, c1 * c2) for (r1, c1), (r2, c2)
                              in zip(t1.shape.factors, t2.shape.factors)), f)
    out = [f.zero()] * shape.size
    nz2 = t2.nonzero()
    for idx1, v1 in t1.nonzero().items():
        for idx2, v2 in nz2.items():
            multi = tuple((a * r2 + a2, b * c2 + b2) for (a, b), (a2, b2), (r2, c2)
                          in zip(idx1, idx2, t2.shape.factors))
            out[_flat_index(shape, multi)] = f.mul(v1, v2)
    return Tensor(shape, tuple(out))


# ---------------------------------------------------------------------------
# flattenings


@dataclass(frozen=True)
class FlattenGrouping:
    """Assignment of the 2m index slots to LEFT (rows) or RIGHT (columns).

    Slot 2f is the row index of factor f, slot 2f + 1 its column index.
    """

    left: Tuple[int, ...]
    m: int

    def __post_init__(self):
        left = tuple(sorted(set(self.left)))
        object.__setattr__(self, "left", left)
        if any(s < 0 or s >= 2 * self.m for s in left):
            raise ValueError(f"slot out of range in {left}")
        if not left or len(left) == 2 * self.m:
            raise ValueError("both sides of a flattening must be nonempty")

    @property
    def right(self) -> Tuple[int, ...]:
        return tuple(s for s in range(2 * self.m) if s not in self.left)

    @classmethod
    def pi(cls) -> "FlattenGrouping":
        """e_ab (x) e_cd (x) e_fg -> e_abf (x) e_cdg."""
        return cls((0, 1, 4), 3)

    @classmethod
    def by_factors(cls, left_factors: Iterable[int], m: int) -> "FlattenGrouping":
        return cls(tuple(s for f in left_factors for s in (2 * f, 2 * f + 1)), m)

    @classmethod
    def pairing(cls, m: int) -> "FlattenGrouping":
        """Odd-position factors against even-position ones (m even)."""
        if m % 2:
            raise ValueError("the pairing grouping needs an even number of factors")
        return cls.by_factors(range(0, m, 2), m)

    @classmethod
    def parse(cls, text: str, m: int) -> "FlattenGrouping":
        """'0,1,4|2,3,5' style slot lists; the right side may be omitted."""
        left = text.split("|")[0]
        return cls(tuple(int(s) for s in left.split(",") if s.strip()), m)


def flatten(t: Tensor, g: FlattenGrouping) -> Matrix:
    if g.m != t.shape.m:
        raise ShapeError(f"grouping for {g.m} factors applied to {t.shape.m}-factor tensor")
    f = t.field
    sdims = t.shape.slot_dims
    left, right = g.left, g.right
    nrows = prod(sdims[s] for s in left)
    ncols = prod(sdims[s] for s in right)
    out = [[f.zero()] * ncols for _ in range(nrows)]
    for flat, v in enumerate(t.entries):
        if f.is_zero(v):
            continue
        # decompose flat into slot coordinates
        coords = [0] * len(sdims)
        rem = flat
        for s in range(len(sdims) - 1, -1, -1):
            rem, coords[s] = divmod(rem, sdims[s])
        r = 0
        for s in left:
            r = r * sdims[s] + coords[s]
        c = 0
        for s in right:
            c = c * sdims[s] + coords[s]
        out[r][c] = v
    return Matrix(f, nrows, ncols, tuple(tuple(r) for r in out))


# ---------------------------------------------------------------------------
# reductions and compositions


def _mode_apply(f: FieldSpec, entries: list, dims: List[int], k: int, op: Matrix) -> list:
    pre = prod(dims[:k])
    post = prod(dims[k + 1:])
    d_in = dims[k]
    d_out = op.rows
    cols = [[(o, op.data[o][i]) for o in range(d_out) if not f.is_zero(op.data[o][i])]
            for i in range(d_in)]
    out = [f.zero()] * (pre * d_out * post)
    for a in range(pre):
        for i in range(d_in):
            base_in = (a * d_in + i) * post
            targets = cols[i]
            if not targets:
                continue
            for b in range(post):
                v = entries[base_in + b]
                if f.is_zero(v):
                    continue
                for o, w in targets:
                    j = (a * d_out + o) * post + b
                    out[j] = f.add(out[j], f.mul(w, v))
    return out


def apply_hom_tuple(t: Tensor, maps: Sequence[Optional[MatrixSpaceOperator]]) -> Tensor:
    """(A_1 (x) ... (x) A_m) t; ``None`` entries mean identity."""
    if len(maps) != t.shape.m:
        raise ShapeError(f"need {t.shape.m} maps, got {len(maps)}")
    f = t.field
    entries = list(t.entries)
    dims = list(t.shape.factor_dims)
    factors = list(t.shape.factors)
    for k, L in enumerate(maps):
        if L is None:
            continue
        if L.shape_in != factors[k]:
            raise ShapeError(f"map {k} expects {L.shape_in}, factor is {factors[k]}")
        if L.field != f:
            raise ShapeError(f"map {k} is over {L.field}, tensor over {f}")
        entries = _mode_apply(f, entries, dims, k, L.matrix)
        dims[k] = L.shape_out[0] * L.shape_out[1]
        factors[k] = L.shape_out
    return Tensor(TensorShape(tuple(factors), f), tuple(entries))


def kronecker_compose(d1: Decomposition, d2: Decomposition) -> Decomposition:
    """r1 * r2 terms; term (rho, sigma) has factor-wise Kronecker products."""
    if d1.shape.m != d2.shape.m:
        raise ShapeError(f"arity mismatch: {d1.shape.m} vs {d2.shape.m}")
    if d1.shape.field != d2.shape.field:
        raise ShapeError("field mismatch")
    shape = TensorShape(tuple((r1 * r2, c1 * c2) for (r1, c1), (r2, c2)
                              in zip(d1.shape.factors, d2.shape.factors)), d1.shape.field)
    terms = [RankOneTerm(tuple(a.kron(b) for a, b in zip(t1.factors, t2.factors)))
             for t1 in d1.terms for t2 in d2.terms]
    return Decomposition(shape, tuple(terms))


def _kappa_params(d: Decomposition) -> Tuple[int, int]:
    dims = cyclic_dims(d.shape)
    if dims is None or len(set(dims)) != 1:
        raise DecompositionMismatch(f"shape {d.shape.factors} is not that of a kappa_m(n)")
    m, n = d.shape.m, dims[0]
    if evaluate_decomposition(d) != cyclic_tensor((n,) * m, d.shape.field):
        raise DecompositionMismatch(f"decomposition does not evaluate to kappa_{m}({n})")
    return m, n


def omega_span_coefficients(d: Decomposition) -> Dict[Tuple[int, int], list]:
    """For kappa_m(n) = sum_s T_s (x) G_s: c_s^{(i,i')} = (G_s)_{i',i}.

    Then omega_m(i,i') = sum_s c_s^{(i,i')} T_s, where T_s is the first m-1
    factors of term s.
    """
    m, n = _kappa_params(d)
    table = {}
    for i in range(n):
        for ip in range(n):
            table[(i, ip)] = [t.factors[-1].data[ip][i] for t in d.terms]
    return table


def omega_from_coefficients(d: Decomposition, coeffs: Sequence) -> Tensor:
    """sum_s coeffs[s] * (first m-1 factors of term s)."""
    f = d.shape.field
    shape = TensorShape(d.shape.factors[:-1], f)
    acc = Tensor.zeros(shape)
    for c, t in zip(coeffs, d.terms):
        if f.is_zero(c):
            continue
        part = evaluate_decomposition(Decomposition(shape, (RankOneTerm(t.factors[:-1]),)))
        acc = acc + part.scale(c)
    return acc


def lift_kappa(d: Decomposition) -> Decomposition:
    """kappa_m(n) decomposition -> kappa_{m+1}(n) decomposition with <= r n^2 terms.

    Uses omega_{m+1}(i,i') = sum_{i''} omega_m(i,i'') (x) e_{i'',i'}: the terms
    T_s (x) e_{i'',i'} span every omega_{m+1}(i,i'), and the last factor of
    each is e_{i'} (x) (row i'' of G_s).  Terms with zero last factor are dropped.
    """
    m, n = _kappa_params(d)
    f = d.shape.field
    terms = []
    for t in d.terms:
        G = t.factors[-1]
        for ipp in range(n):
            row = G.data[ipp]
            if all(f.is_zero(x) for x in row):
                continue
            for ip in range(n):
                last = Matrix(f, n, n, tuple(row if a == ip else (f.zero(),) * n for a in range(n)))
                terms.append(RankOneTerm(t.factors[:-1] + (Matrix.unit(ipp, ip, n, n, f), last)))
    shape = TensorShape(((n, n),) * (m + 1), f)
    out = Decomposition(shape, tuple(terms))
    if evaluate_decomposition(out) != cyclic_tensor((n,) * (m + 1), f):
        raise DecompositionMismatch("lifted decomposition failed to evaluate to kappa")
    return out


def contract_kappa(d: Decomposition) -> Decomposition:
    """kappa_{m+1}(n) decomposition -> kappa_m(n) decomposition with <= r terms.

    Contracting e_{i'',i'} into the last factor: term U (x) P (x) G becomes
    U (x) (P^T G).
    """
    m1, n = _kappa_params(d)
    if m1 < 3:
        raise ShapeError("contract_kappa needs at least 3 factors")
    f = d.shape.field
    terms = []
    for t in d.terms:
        last = t.factors[-2].T @ t.factors[-1]
        if last.is_zero():
            continue
        terms.append(RankOneTerm(t.factors[:-2] + (last,)))
    shape = TensorShape(((n, n),) * (m1 - 1), f)
    out = Decomposition(shape, tuple(terms))
    if evaluate_decomposition(out) != cyclic_tensor((n,) * (m1 - 1), f):
        raise DecompositionMismatch("contracted decomposition failed to evaluate to kappa")
    return out


# ---------------------------------------------------------------------------
# symmetrization


def symmetrizer(n: int, field: FieldSpec = QQ) -> MatrixSpaceOperator:
    """e_ij -> e_ij + e_ji on F^{n x n}."""
    return MatrixSpaceOperator.from_function(lambda x: x + x.T, (n, n), (n, n), field)


def symmetrize(t: Tensor) -> Tensor:
    fs = t.shape.factors
    if any(r != c for r, c in fs) or len(set(fs)) != 1:
        raise ShapeError("symmetrize needs square factors of equal size")
    S = symmetrizer(fs[0][0], t.field)
    return apply_hom_tuple(t, [S] * t.shape.m)


# ---------------------------------------------------------------------------
# contractions and cosines


def contract_pair(t1: Tensor, t2: Tensor, shared: int = 1) -> Tensor:
    """Contract the last ``shared`` factors of t1 with the first of t2.

    A result with no factors left is returned as a 1-factor (1, 1) tensor.
    """
    if t1.field != t2.field:
        raise ShapeError("field mismatch")
    a_f = t1.shape.factors[: t1.shape.m - shared]
    b1 = t1.shape.factors[t1.shape.m - shared:]
    b2 = t2.shape.factors[:shared]
    c_f = t2.shape.factors[shared:]
    if b1 != b2:
        raise ShapeError(f"middle factors differ: {b1} vs {b2}")
    f = t1.field
    na = prod(r * c for r, c in a_f)
    nb = prod(r * c for r, c in b1)
    nc = prod(r * c for r, c in c_f)
    e1, e2 = t1.entries, t2.entries
    out = []
    for a in range(na):
        row = e1[a * nb:(a + 1) * nb]
        for c in range(nc):
            acc = f.zero()
            for b in range(nb):
                x = row[b]
                if not f.is_zero(x):
                    y = e2[b * nc + c]
                    if not f.is_zero(y):
                        acc = f.add(acc, f.mul(x, y))
            out.append(acc)
    factors = a_f + c_f
    if not factors:
        factors = ((1, 1),)
    return Tensor(TensorShape(factors, f), tuple(out))


def cos_sq(t1: Tensor, t2: Tensor, shared: int = 1) -> Fraction:
    """||Contr(t1, t2)||^2 / (||t1||^2 ||t2||^2), exact over Q."""
    if not t1.field.is_rational:
        raise TypeError("cos_sq is defined over Q only")
    n1, n2 = t1.norm_sq(), t2.norm_sq()
    if n1 == 0 or n2 == 0:
        raise ZeroDivisionError("cos_sq of a zero tensor")
    return contract_pair(t1, t2, shared).norm_sq() / (n1 * n2)


def _contraction_form(t: Tensor, I: Sequence[int]) -> Matrix:
    """Coefficient matrix G with ||Contr_I(sigma, t)||^2 = sigma^T G sigma."""
    m = t.shape.m
    I = sorted(set(I))
    if not I:
        n = t.norm_sq()
        return Matrix(t.field, 1, 1, ((n,),))
    if len(I) == m:
        v = t.entries
        return Matrix(t.field, len(v), len(v), tuple(tuple(x * y for y in v) for x in v))
    F = flatten(t, FlattenGrouping.by_factors(I, m))
    return F @ F.T


def i_equivalent(t1: Tensor, t2: Tensor, I: Sequence[int]) -> bool:
    """Whether sigma -> ||Contr_I(sigma, t)||^2 agree for all sigma in the I-factors."""
    if t1.shape != t2.shape:
        raise ShapeError("i_equivalent needs equal shapes")
    if not t1.field.is_rational:
        raise TypeError("i_equivalent is defined over Q only")
    return _contraction_form(t1, I) == _contraction_form(t2, I)


# ---------------------------------------------------------------------------
# Koszul flattenings


@dataclass(frozen=True)
class WedgeBasis:
    """Basis of Lambda^p(F^d): increasing p-subsets in lexicographic order."""

    p: int
    d: int
    subsets: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        if not self.subsets:
            object.__setattr__(self, "subsets", tuple(combinations(range(self.d), self.p)))

    def index(self, subset: Tuple[int, ...]) -> int:
        return self._lookup()[subset]

    def _lookup(self):
        cache = self.__dict__.get("_idx")
        if cache is None:
            cache = {s: k for k, s in enumerate(self.subsets)}
            object.__setattr__(self, "_idx", cache)
        return cache

    def __len__(self):
        return len(self.subsets)


def wedge_insert(k: int, subset: Tuple[int, ...]) -> Tuple[int, Tuple[int, ...]]:
    """e_k ^ e_S = sign * e_{S + k}; sign 0 when k is already in S."""
    if k in subset:
        return 0, subset
    below = sum(1 for s in subset if s < k)
    return (-1) ** below, tuple(sorted(subset + (k,)))


def koszul_flatten(t: Tensor, p: int, Aprime: Optional[Subspace] = None) -> Matrix:
    """Matrix of B* (x) Lambda^p(A') -> Lambda^{p+1}(A') (x) C induced by t in A(x)B(x)C.

    A' enters through the projection A -> A' that reads the pivot coordinates
    of A''s reduced echelon basis.  Rows index (T, c) for (p+1)-subsets T;
    columns index (b, S) for p-subsets S; both row-major.
    """
    if t.shape.m != 3:
        raise ShapeError("Koszul flattening needs a 3-factor tensor")
    f = t.field
    A_shape = t.shape.factors[0]
    if Aprime is None:
        Aprime = Subspace.full(A_shape, f)
    if Aprime.ambient != A_shape or Aprime.field != f:
        raise ShapeError("A' must be a subspace of the first factor")
    dprime = Aprime.dim
    if p < 0 or p + 1 > dprime:
        raise ValueError(f"p={p} out of range for dim A'={dprime}")
    dA, dB, dC = t.shape.factor_dims
    src = WedgeBasis(p, dprime)
    tgt = WedgeBasis(p + 1, dprime)
    nrows = len(tgt) * dC
    ncols = dB * len(src)
    out = [[f.zero()] * ncols for _ in range(nrows)]
    pivots = Aprime.pivots
    ent = t.entries
    for k, u in enumerate(pivots):
        for b in range(dB):
            for c in range(dC):
                v = ent[(u * dB + b) * dC + c]
                if f.is_zero(v):
                    continue
                for si, S in enumerate(src.subsets):
                    sign, T = wedge_insert(k, S)
                    if sign == 0:
                        continue
                    row = tgt.index(T) * dC + c
                    col = b * len(src) + si
                    w = v if sign > 0 else f.neg(v)
                    out[row][col] = f.add(out[row][col], w)
    return Matrix(f, nrows, ncols, tuple(tuple(r) for r in out))
