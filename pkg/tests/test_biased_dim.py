import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tensorcert.biased_dim import BiasMatrix, biased_dim, column_subspace, modularity_defect, rayleigh
from tensorcert.linalg import ShapeError


def gram_schmidt_dim(D, vectors):
    """sum of Rayleigh quotients over an orthogonal basis of the span."""
    ortho = []
    for v in vectors:
        w = [Fraction(x) for x in v]
        for u in ortho:
            c = sum(a * b for a, b in zip(w, u)) / sum(a * a for a in u)
            w = [a - c * b for a, b in zip(w, u)]
        if any(w):
            ortho.append(w)
    return sum((rayleigh(D, u) for u in ortho), Fraction(0))


def random_bias(rng, n):
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            rows[i][j] = rows[j][i] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return BiasMatrix.from_rows(rows)


def test_rayleigh_examples():
    lam = Fraction(3)
    D = BiasMatrix.diag([1, lam])
    assert rayleigh(BiasMatrix.diag([1, 1, 1]), [1, 2, 3]) == 1
    assert rayleigh(D, [1, 1]) == (1 + lam) / 2
    assert rayleigh(D, [1, 0]) == 1
    with pytest.raises(ValueError):
        rayleigh(D, [0, 0])


def test_biased_dim_examples():
    lam = Fraction(-2)
    D = BiasMatrix.diag([1, lam])
    S = column_subspace([[1, 1]], 2)
    assert biased_dim(D, S) == (1 + lam) / 2
    assert biased_dim(D, S) + biased_dim(D, S.perp()) == 1 + lam
    assert biased_dim(BiasMatrix.diag([1, 1, 1]), [[1, 0, 1], [0, 1, 1]]) == 2
    assert biased_dim(D, column_subspace([], 2)) == 0


@pytest.mark.parametrize("lam", [-1, 0, 2, Fraction(1, 3)])
def test_modularity_defect(lam):
    D = BiasMatrix.diag([1, lam])
    assert modularity_defect(D, [[1, 0]], [[1, 1]]) == Fraction(1 - Fraction(lam), 2)
    assert modularity_defect(D, [[1, 0]], [[0, 1]]) == 0


def test_identity_is_modular():
    rng = random.Random(1)
    D = BiasMatrix.diag([1] * 4)
    for _ in range(20):
        s1 = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(rng.randint(0, 3))]
        s2 = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(rng.randint(0, 3))]
        assert modularity_defect(D, s1, s2) == 0


def test_validation():
    with pytest.raises(ValueError):
        BiasMatrix.from_rows([[1, 2], [3, 4]])
    with pytest.raises(ShapeError):
        BiasMatrix.from_rows([[1, 2]])
    with pytest.raises(ShapeError):
        biased_dim(BiasMatrix.diag([1, 2]), column_subspace([[1, 0, 0]], 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_matches_gram_schmidt(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    D = random_bias(rng, n)
    vecs = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))]
    assert biased_dim(D, vecs) == gram_schmidt_dim(D, vecs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_complement_law(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    D = random_bias(rng, n)
    S = column_subspace([[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))], n)
    assert biased_dim(D, S) + biased_dim(D, S.perp()) == D.trace()
    assert biased_dim(D.scale(3), S) == 3 * biased_dim(D, S)
