import os
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from tensorcert import _kernels, _modp_py

try:
    from tensorcert import _modp
except ImportError:  # pragma: no cover - build without the extension
    _modp = None

needs_compiled = pytest.mark.skipif(_modp is None, reason="compiled kernel not built")


def _random_rows(rng, r, c, p):
    return [[rng.randrange(p) for _ in range(c)] for _ in range(r)]


@needs_compiled
@pytest.mark.parametrize("p", [2, 3, 5, 7919, 2147483629])
def test_backends_agree(p):
    rng = random.Random(p)
    for _ in range(30):
        r, c = rng.randint(1, 12), rng.randint(1, 12)
        rows = _random_rows(rng, r, c, p)
        assert _modp.rank_modp(rows, c, p) == _modp_py.rank_modp(rows, c, p)
        assert _modp.rref_modp(rows, c, p) == _modp_py.rref_modp(rows, c, p)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=5, max_size=5), min_size=1, max_size=6))
def test_rref_is_reduced(rows):
    red, piv = _modp_py.rref_modp(rows, 5, 5)
    assert len(red) == len(piv)
    for i, j in enumerate(piv):
        assert red[i][j] == 1
        assert all(red[k][j] == 0 for k in range(len(red)) if k != i)


def test_inputs_untouched():
    rows = [[1, 2], [3, 4]]
    _kernels.rank_modp(rows, 2, 5)
    assert rows == [[1, 2], [3, 4]]


def test_pure_switch():
    code = "from tensorcert import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, TENSORCERT_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_compiled_selected_by_default():
    if os.environ.get("TENSORCERT_PURE", "") not in ("", "0"):
        pytest.skip("pure backend forced")
    assert _kernels.BACKEND == "compiled"
