"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import contextlib
import io
import random
import time
from fractions import Fraction

import pytest

from tensorcert import bounds as B
from tensorcert import decompositions as DC
from tensorcert.biased_dim import BiasMatrix, biased_dim, column_subspace, modularity_defect
from tensorcert.cli import main as cli_main
from tensorcert.linalg import Matrix, MatrixSpaceOperator, Subspace
from tensorcert.scalars import GF, QQ
from tensorcert.tensors import (
    FlattenGrouping,
    Tensor,
    TensorShape,
    cos_sq,
    cyclic_tensor,
    flatten,
    kronecker_compose,
    lift_kappa,
    matmul_tensor,
)

F5 = GF(5)


def c01_strassen_certificate():
    res = {}
    for f in (QQ, GF(2)):
        rep = DC.verify_exact(DC.strassen(f), cyclic_tensor((2, 2, 2), f))
        res[str(f)] = rep.status
    ok = all(v == "verified" for v in res.values())
    return ok, f"Q: {res['Q']}, F2: {res['F2']}"


def c02_inner_rank_equality():
    rep = B.inner_rank_sum(DC.strassen(), 2)
    ok = rep.rhs == 8 and rep.bound_lhs == 8 and rep.equality and rep.per_term_ranks == (2, 1, 1, 1, 1, 1, 1)
    return ok, f"sum {rep.rhs}, ranks {rep.per_term_ranks}"


def c03_full_rank_flattening():
    ranks, t4 = [], None
    ok = True
    for n in (1, 2, 3, 4):
        for f in (QQ, GF(2)):
            start = time.perf_counter()
            r = flatten(cyclic_tensor((n,) * 3, f), FlattenGrouping.pi()).rank()
            if n == 4:
                t4 = max(t4 or 0, time.perf_counter() - start)
            ok &= r == n ** 3
        ranks.append(r)
    ok &= t4 < 10
    return ok, f"ranks {ranks}, n=4 in {t4:.2f}s (matrix is n^3 x n^3 = 64 x 64)"


def c04_bound_formula():
    vals = [B.certified_lower_bound(n)["value"] for n in (2, 3, 4)]
    return vals == [7, 16, 29], f"values {vals}"


def c05_invertible_operator_suite():
    decs = {"strassen": DC.strassen(F5), "naive222": DC.naive(2, 2, 2, F5),
            "naive234": DC.naive(2, 3, 4, F5),
            "strassen^2": kronecker_compose(DC.strassen(F5), DC.strassen(F5))}
    violations, cases, by_flat = 0, 0, 0
    for d in decs.values():
        n1, n2, n3 = (r for r, _ in d.shape.factors)
        for seed in range(100):
            rng = random.Random(seed)
            k = seed % 3
            L = MatrixSpaceOperator.random_invertible(d.shape.factors[k], F5, rng)
            rep = B.inner_rank_sum(d, k, L)
            cases += 1
            violations += not (rep.bound_lhs == n1 * n2 * n3 <= rep.rhs)
            by_flat += rep.witnesses["flatten_certifies"]
    return violations == 0, f"{cases} cases, {violations} violations ({by_flat} also certified by one flattening)"


def c06_singular_operator_suite():
    violations, cases = 0, 0
    for d in (DC.strassen(F5), DC.naive(2, 3, 4, F5)):
        n2 = d.shape.factors[1][0]
        shp = d.shape.factors[2]
        cells = [(i, j) for i in range(shp[0]) for j in range(shp[1])]
        for seed in range(100):
            rng = random.Random(1000 + seed)
            if seed % 2:
                L = MatrixSpaceOperator.random(shp, shp, F5, rng, bound=1)
            else:
                L = MatrixSpaceOperator.projection(rng.sample(cells, rng.randint(0, 3)), shp, F5)
            rep = B.inner_rank_sum(d, 2, L)
            cases += 1
            violations += not (rep.bound_lhs == n2 * L.rank() <= rep.rhs)
    return violations == 0, f"{cases} cases, {violations} violations"


def _spanning_family(rng, n, f):
    D = n * n
    size = rng.randint(max(4, D), D + 1)
    while True:
        vs = [Matrix.random(n, n, f, rng) for _ in range(size)]
        if not any(v.is_zero() for v in vs) and Subspace.span(vs, (n, n), f).dim == D:
            return vs


def c07_operator_construction():
    bad = 0
    fields = [GF(3), F5, QQ]
    for seed in range(200):
        rng = random.Random(seed)
        n = 2 + seed % 2
        f = fields[seed % 3]
        vs = _spanning_family(rng, n, f)
        L = B.construct_rank_one_operator(vs)
        if not L.is_invertible() or any(L(v).rank() > 1 for v in vs):
            bad += 1
    return bad == 0, f"200 families, {bad} failures"


def c08_even_pairing():
    got = {}
    for m, n in ((2, 2), (2, 3), (4, 2), (4, 3)):
        got[(m, n)] = flatten(cyclic_tensor((n,) * m), FlattenGrouping.pairing(m)).rank()
    want = {(2, 2): 4, (2, 3): 9, (4, 2): 16, (4, 3): 81}
    return got == want, ", ".join(f"k{m}({n})={r}" for (m, n), r in got.items())


def c09_stars_and_zeros():
    bad, total = 0, 0
    for dims in ((2, 2, 2), (2, 3, 2)):
        n1, n2, n3 = dims
        c1 = [(i, j) for i in range(n1) for j in range(n2)]
        c2 = [(j, k) for j in range(n2) for k in range(n3)]
        for seed in range(50):
            rng = random.Random(seed)
            J1 = [c for c in c1 if rng.random() < 0.35]
            J2 = [c for c in c2 if rng.random() < 0.35]
            res = B.stars_zeros_rank(J1, J2, dims)
            total += 1
            bad += not res["agree"]
    return bad == 0, f"{total} instances, {bad} disagreements"


def c10_overlap():
    vals, plane_ok = [], True
    s = DC.strassen()
    for k in range(3):
        rep = B.max_proper_overlap(s.factor_family(k))
        vals.append(rep.value)
        plane_ok &= B.overlap(s.factor_family(k), rep.witness) == rep.value
    std = B.max_proper_overlap(B.standard_basis(2)).value
    gamma_plane = B.overlap(s.factor_family(2), Subspace.coordinate([(0, 0), (1, 1)], (2, 2), QQ))
    ok = vals == [1, 1, 1] and std == 0
    detail = (f"computed maxima {vals} (witnesses verified: {plane_ok}); "
              f"span{{e11,e22}} has overlap {gamma_plane}; standard basis {std}")
    return ok, detail


def c11_tame_search():
    start = time.perf_counter()
    r2 = B.tame_search(B.standard_basis(2), B.standard_basis(2), 2)
    r3 = B.tame_search(B.standard_basis(3), B.standard_basis(3), 3)
    dt = time.perf_counter() - start
    ok = (r2 is not None and r3 is not None and r2["rank"] == 4 and r3["rank"] == 9
          and r2["candidates_examined"] <= 36 and r3["candidates_examined"] <= 7056 and dt < 5)
    return ok, f"n=2 after {r2['candidates_examined']}, n=3 after {r3['candidates_examined']}, {dt:.2f}s"


def _rand_subspace(rng, shape, f):
    k = rng.randint(0, shape[0] * shape[1])
    return Subspace.span([Matrix.random(*shape, f, rng) for _ in range(k)], shape, f)


def c12_duality():
    f = GF(3)
    bad = 0
    for seed in range(50):
        rng = random.Random(seed)
        dims = (rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
        A = _rand_subspace(rng, dims[:2], f)
        Bs = _rand_subspace(rng, dims[1:], f)
        bad += B.quotient_span_dim(A, Bs) != B.span_product_dim(A.perp(), Bs.perp())
    return bad == 0, f"50 pairs, {bad} mismatches"


def c13_infinitesimal():
    e = DC.symmetric_w_family()
    tau = DC.symmetric_w_tensor()
    h1 = DC.verify_infinitesimal(e, tau).ok
    h0 = DC.verify_infinitesimal(e, tau, h=0).ok
    lifted = all(DC.verify_infinitesimal(DC.EpsDecomposition(DC.lift_to_eps(DC.builtin(n), 2), 0),
                                         DC.infer_target(DC.builtin(n))).ok for n in DC.REGISTRY)
    return h1 and not h0 and lifted, f"h=1 accepted {h1}, h=0 rejected {not h0}, registry at h=0 {lifted}"


def c14_biased_dimension():
    defects = {}
    for lam in (-1, 0, 2):
        D = BiasMatrix.diag([1, lam])
        defects[lam] = modularity_defect(D, [[1, 0]], [[1, 1]]) == Fraction(1 - lam, 2)
    bad = 0
    for seed in range(100):
        rng = random.Random(seed)
        n = rng.randint(1, 4)
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        D = BiasMatrix.from_rows(rows)
        S = column_subspace([[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))], n)
        bad += biased_dim(D, S) + biased_dim(D, S.perp()) != D.trace()
    return all(defects.values()) and bad == 0, f"defects {defects}, complement law failures {bad}/100"


def c15_composition():
    s2 = kronecker_compose(DC.strassen(), DC.strassen())
    ok1 = DC.verify_exact(s2, matmul_tensor(4, 4, 4)).ok and s2.r == 49
    inner = B.inner_rank_sum(s2, 2).rhs
    lifted = lift_kappa(DC.strassen())
    ok2 = DC.verify_exact(lifted, cyclic_tensor((2,) * 4)).ok and lifted.r <= 28
    return ok1 and inner >= 64 and ok2, f"r={s2.r}, inner-rank sum {inner}, lift r={lifted.r}"


def c16_pythagoras():
    shape = TensorShape(((1, 2), (2, 1), (1, 2)), QQ)
    bad = 0
    for seed in range(50):
        rng = random.Random(seed)
        vals = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(shape.size)]
        if not any(vals):
            vals[0] = Fraction(1)
        w = Tensor(shape, tuple(vals))
        total = Fraction(0)
        for k in range(shape.size):
            e = [Fraction(0)] * shape.size
            e[k] = Fraction(1)
            total += cos_sq(Tensor(shape, tuple(e)), w, shared=3)
        bad += total != 1
    return bad == 0, f"50 tensors, {bad} sums differ from 1"


SEARCH_COMMANDS = [
    ["search", "tame", "--n", "2", "--seed", "3"],
    ["search", "tame", "--n", "2", "--basis", "random", "--seed", "5"],
    ["search", "maxrank", "--dims", "2,3,2", "--A", "0,1", "--seed", "2"],
    ["search", "invertible-combo", "--builtin", "strassen", "--start", "1", "--seed", "7"],
    ["search", "invertible-combo", "--builtin", "naive222", "--field", "Q", "--seed", "7"],
]


def _capture(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(argv)
    return code, buf.getvalue().encode()


def c17_determinism():
    same = [_capture(a) == _capture(a) for a in SEARCH_COMMANDS]
    return all(same), f"{sum(same)}/{len(same)} search invocations byte-identical"


CRITERIA = [
    (1, "Strassen certificate", c01_strassen_certificate),
    (2, "inner-rank equality", c02_inner_rank_equality),
    (3, "full-rank flattening", c03_full_rank_flattening),
    (4, "bound formula", c04_bound_formula),
    (5, "invertible operator suite", c05_invertible_operator_suite),
    (6, "singular operator suite", c06_singular_operator_suite),
    (7, "rank-one operator construction", c07_operator_construction),
    (8, "even-m pairing flattening", c08_even_pairing),
    (9, "stars and zeros", c09_stars_and_zeros),
    (10, "maximum proper overlap of Strassen", c10_overlap),
    (11, "tame search", c11_tame_search),
    (12, "quotient duality", c12_duality),
    (13, "infinitesimal verifier", c13_infinitesimal),
    (14, "biased dimension", c14_biased_dimension),
    (15, "composition", c15_composition),
    (16, "Pythagoras law", c16_pythagoras),
    (17, "search determinism", c17_determinism),
]

# Each Strassen family reaches overlap 2 on a 3-dimensional flat (for alpha,
# span{e11,e21,e22} holds five of the seven vectors), so the expected value
# 1 is not what the definition gives.  Kept red on purpose.
KNOWN_RED = {10: "Strassen families have maximum proper overlap 2, not 1"}


def _line(num, name, ok, detail):
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"


def _params():
    for num, name, fn in CRITERIA:
        marks = [pytest.mark.xfail(strict=True, reason=KNOWN_RED[num])] if num in KNOWN_RED else []
        yield pytest.param(num, name, fn, id=f"c{num:02d}", marks=marks)


@pytest.mark.parametrize("num,name,fn", list(_params()))
def test_criterion(num, name, fn, acceptance_log):
    ok, detail = fn()
    line = _line(num, name, ok, detail)
    print(line)
    acceptance_log.append(line)
    assert ok, line


if __name__ == "__main__":
    for num, name, fn in CRITERIA:
        print(_line(num, name, *fn()))
