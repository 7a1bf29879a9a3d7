"""Kernel selection: compiled ``_modp`` when importable, else pure Python.

Set ``TENSORCERT_PURE=1`` to force the fallback.
"""

import os

from . import _modp_py

_COMPILED_LIMIT = 2**31

if os.environ.get("TENSORCERT_PURE", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _modp as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def rank_modp(rows, ncols, p):
    if _compiled is not None and p < _COMPILED_LIMIT:
        return _compiled.rank_modp(rows, ncols, p)
    return _modp_py.rank_modp(rows, ncols, p)


def rref_modp(rows, ncols, p):
    if _compiled is not None and p < _COMPILED_LIMIT:
        return _compiled.rref_modp(rows, ncols, p)
    return _modp_py.rref_modp(rows, ncols, p)
