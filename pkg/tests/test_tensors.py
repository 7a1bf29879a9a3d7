import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from sympy.combinatorics import Permutation
from hypothesis import given, settings, strategies as st

from tensorcert.decompositions import naive, naive_cyclic, strassen
from tensorcert.linalg import Matrix, MatrixSpaceOperator, ShapeError, Subspace
from tensorcert.scalars import GF, QQ
from tensorcert.tensors import (
    Decomposition,
    DecompositionMismatch,
    FlattenGrouping,
    RankOneTerm,
    Tensor,
    TensorShape,
    WedgeBasis,
    apply_hom_tuple,
    contract_kappa,
    contract_pair,
    cos_sq,
    cyclic_tensor,
    evaluate_decomposition,
    flatten,
    i_equivalent,
    kron_tensor,
    kronecker_compose,
    koszul_flatten,
    lift_kappa,
    matmul_tensor,
    omega_from_coefficients,
    omega_span_coefficients,
    open_cyclic_tensor,
    symmetrize,
    wedge_insert,
)


def test_tensor_entry_counts():
    assert matmul_tensor(1, 1, 1).nnz() == 1
    assert matmul_tensor(2, 2, 2).nnz() == 8
    assert matmul_tensor(2, 1, 1).nnz() == 2
    assert cyclic_tensor((2,) * 4).nnz() == 16
    assert cyclic_tensor((2, 2)).nnz() == 4
    assert open_cyclic_tensor(3, 2, 0, 0).nnz() == 2
    assert open_cyclic_tensor(4, 2, 0, 1).nnz() == 4


def test_matmul_entries_are_products():
    t = matmul_tensor(2, 3, 2)
    for (i, j, k) in itertools.product(range(2), range(3), range(2)):
        assert t[((i, j), (j, k), (k, i))] == 1
    assert t[((0, 0), (1, 0), (0, 0))] == 0


def test_evaluate_examples():
    assert evaluate_decomposition(strassen()) == cyclic_tensor((2, 2, 2))
    assert evaluate_decomposition(naive(2, 3, 4)) == matmul_tensor(2, 3, 4)
    shape = TensorShape(((2, 2),) * 3, QQ)
    assert evaluate_decomposition(Decomposition(shape, ())).is_zero()


def test_bad_term_shape():
    shape = TensorShape(((2, 2),) * 3, QQ)
    with pytest.raises(ShapeError):
        Decomposition(shape, [(Matrix.identity(2), Matrix.identity(2))])


def _np_flatten(t: Tensor, g: FlattenGrouping):
    arr = np.array([int(x) for x in t.entries], dtype=object).reshape(t.shape.slot_dims)
    perm = g.left + g.right
    rows = int(np.prod([t.shape.slot_dims[s] for s in g.left]))
    return arr.transpose(perm).reshape(rows, -1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_flatten_matches_numpy_transpose(seed):
    rng = random.Random(seed)
    shape = TensorShape(((2, 3), (3, 1), (1, 2)), QQ)
    t = Tensor(shape, tuple(Fraction(rng.randint(-2, 2)) for _ in range(shape.size)))
    slots = list(range(6))
    left = tuple(rng.sample(slots, rng.randint(1, 5)))
    g = FlattenGrouping(left, 3)
    mine = flatten(t, g)
    ref = _np_flatten(t, g)
    assert [list(map(int, r)) for r in mine.data] == ref.tolist()


def test_flatten_ranks():
    assert flatten(cyclic_tensor((2,) * 3), FlattenGrouping.pi()).rank() == 8
    assert flatten(cyclic_tensor((3,) * 3), FlattenGrouping.pi()).rank() == 27
    assert flatten(matmul_tensor(2, 2, 2), FlattenGrouping.by_factors([0], 3)).rank() == 4
    assert FlattenGrouping.parse("0,1,4|2,3,5", 3) == FlattenGrouping.pi()
    with pytest.raises(ValueError):
        FlattenGrouping.pairing(3)


def test_apply_hom_tuple():
    t = cyclic_tensor((2, 2, 2))
    assert apply_hom_tuple(t, [None, None, None]) == t
    ident = MatrixSpaceOperator.identity((2, 2))
    assert apply_hom_tuple(t, [ident] * 3) == t
    zero = MatrixSpaceOperator.zero((2, 2), (2, 2))
    assert apply_hom_tuple(t, [None, zero, None]).is_zero()


def test_hom_tuple_commutes_with_decomposition():
    rng = random.Random(11)
    f = GF(5)
    d = strassen(f)
    ops = [MatrixSpaceOperator.random((2, 2), (2, 2), f, rng) for _ in range(3)]
    mapped = Decomposition(d.shape, [RankOneTerm(tuple(L(m) for L, m in zip(ops, t.factors))) for t in d.terms])
    assert apply_hom_tuple(evaluate_decomposition(d), ops) == evaluate_decomposition(mapped)


def test_kronecker_compose():
    d = kronecker_compose(naive(2, 2, 2), naive(2, 2, 2))
    assert d.r == 64 and evaluate_decomposition(d) == matmul_tensor(4, 4, 4)
    s = kronecker_compose(strassen(), strassen())
    assert s.r == 49 and evaluate_decomposition(s) == matmul_tensor(4, 4, 4)
    one = naive(1, 1, 1)
    c = kronecker_compose(strassen(), one)
    assert evaluate_decomposition(c) == evaluate_decomposition(strassen())


def test_kron_tensor_matches_compose():
    a, b = naive(1, 2, 1), naive(2, 1, 2)
    assert kron_tensor(a.evaluate(), b.evaluate()) == kronecker_compose(a, b).evaluate()


def test_omega_span_coefficients():
    d = strassen()
    table = omega_span_coefficients(d)
    for (i, ip), coeffs in table.items():
        assert omega_from_coefficients(d, coeffs) == open_cyclic_tensor(3, 2, i, ip)


def test_omega_rejects_wrong_evaluation():
    d = strassen()
    bad = Decomposition(d.shape, d.terms[:1])
    with pytest.raises(DecompositionMismatch):
        omega_span_coefficients(bad)


def test_lift_and_contract():
    up = lift_kappa(naive_cyclic(3, 2))
    assert up.r <= 32 and up.evaluate() == cyclic_tensor((2,) * 4)
    down = contract_kappa(up)
    assert down.evaluate() == cyclic_tensor((2,) * 3)
    s = lift_kappa(strassen())
    assert s.r <= 28
    assert contract_kappa(naive_cyclic(4, 2)).evaluate() == cyclic_tensor((2,) * 3)
    one = naive_cyclic(3, 1)
    assert lift_kappa(one).r == 1 and contract_kappa(lift_kappa(one)).r == 1


def test_symmetrize():
    t = cyclic_tensor((1, 1, 1))
    assert symmetrize(t) == t.scale(8)
    z = Tensor.zeros(TensorShape(((2, 2),) * 3, QQ))
    assert symmetrize(z).is_zero()


def test_contract_pair_is_matrix_product():
    shape = TensorShape(((1, 2), (1, 2)), QQ)
    t1 = Tensor(shape, tuple(map(Fraction, [1, 2, 3, 4])))
    t2 = Tensor(shape, tuple(map(Fraction, [5, 6, 7, 8])))
    c = contract_pair(t1, t2)
    assert [int(x) for x in c.entries] == [19, 22, 43, 50]


def _unit_tensor(shape, k):
    e = [Fraction(0)] * shape.size
    e[k] = Fraction(1)
    return Tensor(shape, tuple(e))


def test_cos_sq_examples():
    shape = TensorShape(((1, 2),), QQ)
    a, b = _unit_tensor(shape, 0), _unit_tensor(shape, 1)
    assert cos_sq(a, b) == 0
    assert cos_sq(a, a) == 1


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=8, max_size=8).filter(any))
def test_pythagoras(vals):
    shape = TensorShape(((1, 2),) * 3, QQ)
    w = Tensor(shape, tuple(map(Fraction, vals)))
    total = sum(cos_sq(_unit_tensor(shape, k), w, shared=3) for k in range(shape.size))
    assert total == 1


def test_i_equivalence():
    t = cyclic_tensor((2, 2, 2))
    flipped = list(t.entries)
    k = next(i for i, x in enumerate(flipped) if x)
    flipped[k] = -flipped[k]
    u = Tensor(t.shape, tuple(flipped))
    assert i_equivalent(t, t, [0, 1, 2])
    assert i_equivalent(t, u, [0])
    # with every factor contracted the form is t t^T, which a sign flip changes
    assert not i_equivalent(t, u, [0, 1, 2])
    for I in ([], [0], [1, 2], [0, 1, 2]):
        assert not i_equivalent(t, t.scale(2), I)


def test_wedge_insert_signs():
    assert wedge_insert(0, (1, 2)) == (1, (0, 1, 2))
    assert wedge_insert(1, (0, 2)) == (-1, (0, 1, 2))
    assert wedge_insert(2, (0, 1)) == (1, (0, 1, 2))
    assert wedge_insert(1, (1,))[0] == 0
    assert len(WedgeBasis(2, 4)) == 6


def _sympy_koszul(t: Tensor, p: int):
    """Independent construction with sympy's permutation signature."""
    dA, dB, dC = t.shape.factor_dims
    src = list(itertools.combinations(range(dA), p))
    tgt = list(itertools.combinations(range(dA), p + 1))
    M = sympy.zeros(len(tgt) * dC, dB * len(src))
    for a, b, c in itertools.product(range(dA), range(dB), range(dC)):
        v = t.entries[(a * dB + b) * dC + c]
        if not v:
            continue
        for si, S in enumerate(src):
            if a in S:
                continue
            seq = (a,) + S
            T = tuple(sorted(seq))
            perm = Permutation([T.index(x) for x in seq])
            M[tgt.index(T) * dC + c, b * len(src) + si] += perm.signature() * sympy.Rational(v)
    return M


@pytest.mark.parametrize("p", [0, 1, 2])
def test_koszul_matches_sympy(p):
    t = cyclic_tensor((2, 2, 2))
    mine = koszul_flatten(t, p)
    ref = _sympy_koszul(t, p)
    assert mine.shape == ref.shape
    assert [[sympy.Rational(x) for x in r] for r in mine.data] == ref.tolist()
    assert mine.rank() == ref.rank()


def test_koszul_p1_shape_and_rank():
    m = koszul_flatten(cyclic_tensor((2, 2, 2)), 1)
    assert m.shape == (24, 16)
    assert m.rank() == 16


def test_koszul_p0_is_flattening():
    t = strassen().evaluate()
    k0 = koszul_flatten(t, 0)
    assert k0.rank() == flatten(t, FlattenGrouping.by_factors([0, 2], 3)).rank()
    z = Tensor.zeros(t.shape)
    assert koszul_flatten(z, 1).is_zero()


def test_koszul_with_subspace():
    t = cyclic_tensor((2, 2, 2))
    Ap = Subspace.coordinate([(0, 0), (0, 1), (1, 0)], (2, 2), QQ)
    m = koszul_flatten(t, 1, Ap)
    assert m.shape == (3 * 4, 4 * 3)
    with pytest.raises(ValueError):
        koszul_flatten(t, 3, Ap)
