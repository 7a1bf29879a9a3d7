"""Pure-Python elimination kernels over F_p.

Same signatures as the compiled ``_modp`` extension; selected automatically
when the extension is unavailable or ``TENSORCERT_PURE=1``.
"""

from __future__ import annotations

from typing import List, Tuple


def rref_modp(rows: List[List[int]], ncols: int, p: int) -> Tuple[List[List[int]], List[int]]:
    """Reduced row echelon form mod p; returns (nonzero rows, pivot columns)."""
    work = [[x % p for x in r] for r in rows]
    pivots: List[int] = []
    r = 0
    nrows = len(work)
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if work[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        work[r], work[piv] = work[piv], work[r]
        prow = work[r]
        inv = pow(prow[c], -1, p)
        if inv != 1:
            prow = [x * inv % p for x in prow]
            work[r] = prow
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(nrows):
            if i == r:
                continue
            row = work[i]
            f = row[c]
            if f:
                for j in nz:
                    row[j] = (row[j] - f * prow[j]) % p
        pivots.append(c)
        r += 1
    return work[:r], pivots


def rank_modp(rows: List[List[int]], ncols: int, p: int) -> int:
    """Rank mod p by forward elimination only."""
    work = [[x % p for x in r] for r in rows]
    nrows = len(work)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if work[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        work[r], work[piv] = work[piv], work[r]
        prow = work[r]
        inv = pow(prow[c], -1, p)
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(r + 1, nrows):
            row = work[i]
            f = row[c]
            if f:
                f = f * inv % p
                for j in nz:
                    row[j] = (row[j] - f * prow[j]) % p
        r += 1
    return r
