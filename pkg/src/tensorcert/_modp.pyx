# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels over F_p for p < 2**31."""

from libc.stdlib cimport malloc, free

ctypedef long long i64


cdef i64 _inv(i64 a, i64 p):
    cdef i64 t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


cdef i64* _load(list rows, Py_ssize_t nrows, Py_ssize_t ncols, i64 p) except NULL:
    cdef i64* a = <i64*> malloc(nrows * ncols * sizeof(i64) + 8)
    cdef Py_ssize_t i, j
    cdef i64 v
    if a == NULL:
        raise MemoryError()
    for i in range(nrows):
        row = rows[i]
        for j in range(ncols):
            v = row[j] % p
            a[i * ncols + j] = v
    return a


cdef Py_ssize_t _eliminate(i64* a, Py_ssize_t nrows, Py_ssize_t ncols, i64 p,
                           bint reduced, Py_ssize_t* pivots):
    cdef Py_ssize_t r = 0, c, i, j, piv, start
    cdef i64 inv, f, tmp
    cdef i64* prow
    cdef i64* row
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if a[i * ncols + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, ncols):
                tmp = a[r * ncols + j]
                a[r * ncols + j] = a[piv * ncols + j]
                a[piv * ncols + j] = tmp
        prow = a + r * ncols
        inv = _inv(prow[c], p)
        if inv != 1:
            for j in range(c, ncols):
                prow[j] = prow[j] * inv % p
        start = 0 if reduced else r + 1
        for i in range(start, nrows):
            if i == r:
                continue
            row = a + i * ncols
            f = row[c]
            if f != 0:
                for j in range(c, ncols):
                    if prow[j] != 0:
                        row[j] = (row[j] - f * prow[j]) % p
                        if row[j] < 0:
                            row[j] += p
        pivots[r] = c
        r += 1
    return r


def rank_modp(list rows, Py_ssize_t ncols, long long p):
    cdef Py_ssize_t nrows = len(rows), r
    if nrows == 0 or ncols == 0:
        return 0
    cdef i64* a = _load(rows, nrows, ncols, p)
    cdef Py_ssize_t* piv = <Py_ssize_t*> malloc((nrows + 1) * sizeof(Py_ssize_t))
    try:
        r = _eliminate(a, nrows, ncols, p, False, piv)
    finally:
        free(a)
        free(piv)
    return r


def rref_modp(list rows, Py_ssize_t ncols, long long p):
    cdef Py_ssize_t nrows = len(rows), r, i, j
    if nrows == 0 or ncols == 0:
        return [], []
    cdef i64* a = _load(rows, nrows, ncols, p)
    cdef Py_ssize_t* piv = <Py_ssize_t*> malloc((nrows + 1) * sizeof(Py_ssize_t))
    try:
        r = _eliminate(a, nrows, ncols, p, True, piv)
        out = [[a[i * ncols + j] for j in range(ncols)] for i in range(r)]
        pivots = [piv[i] for i in range(r)]
    finally:
        free(a)
        free(piv)
    return out, pivots
