"""Builtin decompositions, the JSON certificate format, exact and
eps-infinitesimal verification, and per-factor statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional

from .linalg import Matrix, ShapeError, Subspace
from .scalars import QQ, FieldSpec, GF, eps_ring, parse_field
from .tensors import (
    Decomposition,
    RankOneTerm,
    Tensor,
    TensorShape,
    cyclic_dims,
    cyclic_tensor,
    evaluate_decomposition,
    matmul_tensor,
)

FILE_SCHEMA = "tensorcert-decomposition/1"

# alpha, beta, gamma^T for rho = 1..7
_STRASSEN_TABLE = (
    ([[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    ([[0, 0], [1, 1]], [[1, 0], [0, 0]], [[0, 0], [1, -1]]),
    ([[1, 0], [0, 0]], [[0, 1], [0, -1]], [[0, 1], [0, 1]]),
    ([[0, 0], [0, 1]], [[-1, 0], [1, 0]], [[1, 0], [1, 0]]),
    ([[1, 1], [0, 0]], [[0, 0], [0, 1]], [[-1, 1], [0, 0]]),
    ([[-1, 0], [1, 0]], [[1, 1], [0, 0]], [[0, 0], [0, 1]]),
    ([[0, 1], [0, -1]], [[0, 0], [1, 1]], [[1, 0], [0, 0]]),
)


class DecompositionFormatError(ValueError):
    """A certificate file could not be parsed; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def strassen(field: FieldSpec = QQ) -> Decomposition:
    """Strassen's 7-term decomposition of kappa_3(2); gamma stored un-transposed."""
    terms = []
    for a, b, gt in _STRASSEN_TABLE:
        terms.append(RankOneTerm((
            Matrix.from_rows(a, field),
            Matrix.from_rows(b, field),
            Matrix.from_rows(gt, field).T,
        )))
    shape = TensorShape(((2, 2), (2, 2), (2, 2)), field)
    return Decomposition(shape, tuple(terms), {"name": "strassen"})


def naive(n1: int, n2: int, n3: int, field: FieldSpec = QQ) -> Decomposition:
    """The n1*n2*n3 terms e_ij (x) e_jk (x) e_ki."""
    if min(n1, n2, n3) < 1:
        raise ShapeError("dimensions must be positive")
    terms = []
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                terms.append(RankOneTerm((
                    Matrix.unit(i, j, n1, n2, field),
                    Matrix.unit(j, k, n2, n3, field),
                    Matrix.unit(k, i, n3, n1, field),
                )))
    shape = TensorShape(((n1, n2), (n2, n3), (n3, n1)), field)
    return Decomposition(shape, tuple(terms), {"name": f"naive{n1}{n2}{n3}"})


def naive_cyclic(m: int, n: int, field: FieldSpec = QQ) -> Decomposition:
    """n^m unit terms of kappa_m(n)."""
    from itertools import product

    terms = []
    for idx in product(range(n), repeat=m):
        terms.append(RankOneTerm(tuple(
            Matrix.unit(idx[k], idx[(k + 1) % m], n, n, field) for k in range(m))))
    shape = TensorShape(((n, n),) * m, field)
    return Decomposition(shape, tuple(terms), {"name": f"naive_kappa{m}_{n}"})


def _builtin_naive(spec: str, field: FieldSpec) -> Decomposition:
    dims = spec[len("naive"):].replace(",", "").replace("x", "")
    if len(dims) != 3 or not dims.isdigit():
        raise KeyError(spec)
    return naive(int(dims[0]), int(dims[1]), int(dims[2]), field)


REGISTRY = {
    "strassen": strassen,
    "naive222": lambda field=QQ: naive(2, 2, 2, field),
    "naive234": lambda field=QQ: naive(2, 3, 4, field),
    "naive333": lambda field=QQ: naive(3, 3, 3, field),
}


def builtin(name: str, field: FieldSpec = QQ) -> Decomposition:
    """Look up a registry entry; ``naiveXYZ`` works for any single-digit dims."""
    if name in REGISTRY:
        return REGISTRY[name](field)
    if name.startswith("naive"):
        try:
            return _builtin_naive(name, field)
        except KeyError:
            pass
    raise KeyError(f"unknown builtin decomposition {name!r}; known: {', '.join(sorted(REGISTRY))}")


def infer_target(d: Decomposition) -> Tensor:
    """kappa / matmul tensor matching a cyclic shape."""
    dims = cyclic_dims(d.shape)
    if dims is None:
        raise ShapeError(f"no default target for shape {d.shape.factors}")
    base = d.shape.field.base_field() if d.shape.field.is_eps else d.shape.field
    return cyclic_tensor(dims, base)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CertificateReport:
    status: str
    r: int
    mismatch: Optional[dict] = None
    stats: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "verified"

    def to_dict(self) -> dict:
        out = {"status": self.status, "r": self.r, "stats": self.stats}
        if self.mismatch is not None:
            out["mismatch"] = self.mismatch
        return out


def _index_repr(idx) -> List[List[int]]:
    return [list(p) for p in idx]


def verify_exact(d: Decomposition, target: Tensor) -> CertificateReport:
    if d.shape != target.shape:
        raise ShapeError(f"decomposition shape {d.shape.factors}/{d.shape.field} vs "
                         f"target {target.shape.factors}/{target.shape.field}")
    got = evaluate_decomposition(d)
    f = d.shape.field
    bad = [k for k, (x, y) in enumerate(zip(got.entries, target.entries)) if x != y]
    if not bad:
        return CertificateReport("verified", d.r, stats={"entries": len(got.entries)})
    from .tensors import _multi_index

    k = bad[0]
    return CertificateReport(
        "failed", d.r,
        mismatch={
            "index": _index_repr(_multi_index(d.shape, k)),
            "expected": f.render(target.entries[k]),
            "got": f.render(got.entries[k]),
            "count": len(bad),
        },
        stats={"entries": len(got.entries)},
    )


@dataclass(frozen=True)
class EpsDecomposition:
    decomposition: Decomposition
    h: int

    def __post_init__(self):
        f = self.decomposition.shape.field
        if not f.is_eps:
            raise TypeError("an eps decomposition needs an eps field")
        if self.h < 0:
            raise ValueError("h must be nonnegative")
        if f.order < self.h + 2:
            raise ValueError(f"eps order {f.order} too small for h={self.h}; need >= {self.h + 2}")


def lift_to_eps(d: Decomposition, order: int) -> Decomposition:
    """Embed a base-field decomposition as constant eps-polynomials."""
    base = d.shape.field
    F = eps_ring(base, order)
    pad = (base.zero(),) * (order - 1)

    def lift(m: Matrix) -> Matrix:
        return Matrix(F, m.rows, m.cols, tuple(tuple((x,) + pad for x in row) for row in m.data))

    terms = [RankOneTerm(tuple(lift(m) for m in t.factors)) for t in d.terms]
    return Decomposition(TensorShape(d.shape.factors, F), tuple(terms), dict(d.metadata))


def verify_infinitesimal(e: EpsDecomposition, target: Tensor, h: Optional[int] = None) -> CertificateReport:
    """sum of terms == eps^h target + O(eps^{h+1}); the eps^{h+1} layer is reported only."""
    h = e.h if h is None else h
    d = e.decomposition
    F = d.shape.field
    if F.order < h + 2:
        raise ValueError(f"eps order {F.order} too small for h={h}; need >= {h + 2}")
    base = F.base
    if target.field != base:
        raise ShapeError(f"target must be over the base field {base}, got {target.field}")
    if target.shape.factors != d.shape.factors:
        raise ShapeError("target shape does not match the decomposition")
    got = evaluate_decomposition(d)
    z = base.zero()
    remainder_nnz = 0
    first_bad = None
    for k, (poly, want) in enumerate(zip(got.entries, target.entries)):
        if first_bad is None:
            for deg in range(h + 1):
                expect = want if deg == h else z
                if poly[deg] != expect:
                    first_bad = (k, deg, expect, poly[deg])
                    break
        if not base.is_zero(poly[h + 1]):
            remainder_nnz += 1
    stats = {"h": h, "order": F.order, "remainder_nonzero": remainder_nnz}
    if first_bad is None:
        return CertificateReport("verified", d.r, stats=stats)
    from .tensors import _multi_index

    k, deg, expect, val = first_bad
    return CertificateReport(
        "failed", d.r,
        mismatch={
            "index": _index_repr(_multi_index(d.shape, k)),
            "degree": deg,
            "expected": base.render(expect),
            "got": base.render(val),
        },
        stats=stats,
    )


def symmetric_w_family(field: FieldSpec = QQ, order: int = 3) -> EpsDecomposition:
    """(x + eps y)^{(x)3} - x^{(x)3} over 1x2 factors: h = 1, r = 2."""
    F = eps_ring(field, order)
    o, z = field.one(), field.zero()

    def poly(*cs):
        return tuple(cs) + (z,) * (order - len(cs))

    x_plus = Matrix(F, 1, 2, ((poly(o), poly(z, o)),))
    neg_x = Matrix(F, 1, 2, ((poly(field.neg(o)), poly(z)),))
    x = Matrix(F, 1, 2, ((poly(o), poly(z)),))
    shape = TensorShape(((1, 2),) * 3, F)
    terms = (RankOneTerm((x_plus, x_plus, x_plus)), RankOneTerm((neg_x, x, x)))
    return EpsDecomposition(Decomposition(shape, terms, {"name": "w_state"}), 1)


def symmetric_w_tensor(field: FieldSpec = QQ) -> Tensor:
    """x(x)x(x)y + x(x)y(x)x + y(x)x(x)x with x = [1,0], y = [0,1]."""
    shape = TensorShape(((1, 2),) * 3, field)
    vals = {}
    for pos in range(3):
        idx = tuple((0, 1) if k == pos else (0, 0) for k in range(3))
        vals[idx] = 1
    return Tensor.from_dict(shape, vals)


# ---------------------------------------------------------------------------
# file format


def to_json_obj(d: Decomposition, h: Optional[int] = None) -> dict:
    f = d.shape.field
    obj = {
        "schema": FILE_SCHEMA,
        "field": str(f),
        "shape": [list(s) for s in d.shape.factors],
        "terms": [[m.to_strings() for m in t.factors] for t in d.terms],
    }
    if h is not None:
        obj["h"] = h
    if d.metadata:
        obj["metadata"] = d.metadata
    return obj


def dumps(d: Decomposition, h: Optional[int] = None) -> str:
    return json.dumps(to_json_obj(d, h), sort_keys=True, indent=1) + "\n"


def save(d: Decomposition, path, h: Optional[int] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(d, h))


def from_json_obj(obj) -> Decomposition:
    """Parse a certificate object; the eps degree ``h`` lands in metadata['h'] if present."""
    if not isinstance(obj, dict):
        raise DecompositionFormatError("top level must be an object")
    schema = obj.get("schema", FILE_SCHEMA)
    if schema != FILE_SCHEMA:
        raise DecompositionFormatError(f"unsupported schema {schema!r}", "schema")
    for key in ("field", "shape", "terms"):
        if key not in obj:
            raise DecompositionFormatError("missing required field", key)
    try:
        f = parse_field(str(obj["field"]))
    except ValueError as exc:
        raise DecompositionFormatError(str(exc), "field") from None
    shape_raw = obj["shape"]
    if (not isinstance(shape_raw, list) or not shape_raw
            or any(not isinstance(s, list) or len(s) != 2
                   or not all(isinstance(x, int) and x >= 1 for x in s) for s in shape_raw)):
        raise DecompositionFormatError("expected a nonempty list of [rows, cols] pairs", "shape")
    shape = TensorShape(tuple(tuple(s) for s in shape_raw), f)
    terms_raw = obj["terms"]
    if not isinstance(terms_raw, list):
        raise DecompositionFormatError("expected a list", "terms")
    terms = []
    for t, term in enumerate(terms_raw):
        if not isinstance(term, list) or len(term) != shape.m:
            raise DecompositionFormatError(f"expected {shape.m} matrices", f"terms[{t}]")
        mats = []
        for k, (mat, (rows, cols)) in enumerate(zip(term, shape.factors)):
            where = f"terms[{t}][{k}]"
            if not isinstance(mat, list) or len(mat) != rows:
                raise DecompositionFormatError(f"expected {rows} rows", where)
            data = []
            for i, row in enumerate(mat):
                if not isinstance(row, list) or len(row) != cols:
                    raise DecompositionFormatError(f"expected {cols} entries", f"{where}[{i}]")
                vals = []
                for j, x in enumerate(row):
                    try:
                        vals.append(f.parse(x if isinstance(x, str) else json.dumps(x)))
                    except (ValueError, ZeroDivisionError) as exc:
                        raise DecompositionFormatError(
                            f"bad scalar {x!r} for field {f}: {exc}", f"{where}[{i}][{j}]") from None
                data.append(tuple(vals))
            mats.append(Matrix(f, rows, cols, tuple(data)))
        terms.append(RankOneTerm(tuple(mats)))
    meta = obj.get("metadata", {})
    if not isinstance(meta, dict):
        raise DecompositionFormatError("expected an object", "metadata")
    meta = dict(meta)
    if "h" in obj:
        if not isinstance(obj["h"], int) or obj["h"] < 0:
            raise DecompositionFormatError("expected a nonnegative integer", "h")
        if not f.is_eps:
            raise DecompositionFormatError("h given for a non-eps field", "h")
    return Decomposition(shape, tuple(terms), meta)


def loads(text: str) -> Decomposition:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecompositionFormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from None
    return from_json_obj(obj)


def load(path) -> Decomposition:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def load_with_h(path):
    """(decomposition, h or None)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    d = loads(text)
    return d, json.loads(text).get("h")


# ---------------------------------------------------------------------------
# statistics


def stats(d: Decomposition) -> dict:
    """Per-factor span dimension, max proper overlap, inner ranks and their average."""
    from .bounds import max_proper_overlap

    f = d.shape.field
    if f.is_eps:
        raise TypeError("stats are computed over base fields only")
    out = {"r": d.r, "field": str(f), "factors": []}
    for k in range(d.shape.m):
        fam = d.factor_family(k)
        ranks = [m.rank() for m in fam]
        total = sum(ranks)
        ov = max_proper_overlap(fam, ambient=d.shape.factors[k], field=f) if fam else None
        span = Subspace.span(fam, d.shape.factors[k], f).dim
        out["factors"].append({
            "factor": k + 1,
            "span_dim": span,
            "ranks": ranks,
            "rank_sum": total,
            "average_rank": str(Fraction(total, d.r)) if d.r else "0",
            "max_proper_overlap": ov.value if ov is not None else 0,
        })
    return out
