# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled value-iteration kernel.

Value maps are stored flat: ``voff`` (n + 1 offsets) and ``vals`` (rows of
``dim`` doubles). Semantics mirror ``_fallback`` exactly, including the
lexicographic order of every stored antichain.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, realloc, free, qsort
from libc.string cimport memcpy
from libc.math cimport INFINITY, fabs, isinf

cnp.import_array()

name = "cython"

cdef enum:
    ROBOT = 0
    ENV = 1
    TERMINAL = 2
    SINK = 3

cdef int _D = 1


cdef struct Buf:
    double* data
    Py_ssize_t n
    Py_ssize_t cap


cdef int _cmp(const void* a, const void* b) noexcept nogil:
    cdef const double* x = <const double*>a
    cdef const double* y = <const double*>b
    cdef int i
    for i in range(_D):
        if x[i] < y[i]:
            return -1
        if x[i] > y[i]:
            return 1
    return 0


cdef int buf_init(Buf* b, Py_ssize_t cap, int d) except -1:
    if cap < 4:
        cap = 4
    b.data = <double*>malloc(cap * d * sizeof(double))
    if b.data == NULL:
        raise MemoryError()
    b.n = 0
    b.cap = cap
    return 0


cdef int buf_reserve(Buf* b, Py_ssize_t rows, int d) except -1:
    cdef Py_ssize_t cap = b.cap
    cdef double* p
    if rows <= cap:
        return 0
    while cap < rows:
        cap *= 2
    p = <double*>realloc(b.data, cap * d * sizeof(double))
    if p == NULL:
        raise MemoryError()
    b.data = p
    b.cap = cap
    return 0


cdef inline double* buf_row(Buf* b, Py_ssize_t i, int d) noexcept nogil:
    return b.data + i * d


cdef int push_sum(Buf* b, const double* x, const double* y, int d) except -1:
    cdef int i
    cdef double* r
    buf_reserve(b, b.n + 1, d)
    r = b.data + b.n * d
    for i in range(d):
        r[i] = x[i] + y[i]
    b.n += 1
    return 0


cdef int push_max(Buf* b, const double* x, const double* y, int d) except -1:
    cdef int i
    cdef double* r
    buf_reserve(b, b.n + 1, d)
    r = b.data + b.n * d
    for i in range(d):
        r[i] = x[i] if x[i] >= y[i] else y[i]
    b.n += 1
    return 0


cdef int push_row(Buf* b, const double* x, int d) except -1:
    buf_reserve(b, b.n + 1, d)
    memcpy(b.data + b.n * d, x, d * sizeof(double))
    b.n += 1
    return 0


cdef inline bint weakly_le(const double* a, const double* b, int d, double eps) noexcept nogil:
    cdef int i
    for i in range(d):
        if not (a[i] <= b[i] + eps):
            return False
    return True


cdef int pareto_min(Buf* src, Buf* out, int d, double eps) except -1:
    """Minimal generators of ``src`` (which is reordered) into ``out`` (reset)."""
    global _D
    cdef Py_ssize_t i, j, k
    cdef int c
    cdef bint dominated, has_inf
    cdef double* p
    out.n = 0
    for i in range(src.n):
        p = src.data + i * d
        has_inf = False
        for c in range(d):
            if isinf(p[c]):
                has_inf = True
        if has_inf:
            for c in range(d):
                p[c] = INFINITY
    _D = d
    qsort(src.data, src.n, d * sizeof(double), _cmp)
    for i in range(src.n):
        p = src.data + i * d
        dominated = False
        for j in range(out.n):
            if weakly_le(out.data + j * d, p, d, eps):
                dominated = True
                break
        if dominated:
            continue
        if eps != 0.0:
            k = 0
            for j in range(out.n):
                if not weakly_le(p, out.data + j * d, d, eps):
                    if k != j:
                        memcpy(out.data + k * d, out.data + j * d, d * sizeof(double))
                    k += 1
            out.n = k
        push_row(out, p, d)
    return 0


def compile_game(owner_codes, edge_rows, int dim):
    cdef Py_ssize_t n = len(owner_codes)
    owner = np.asarray(owner_codes, dtype=np.int32)
    off = np.zeros(n + 1, dtype=np.int64)
    dsts = []
    ws = []
    for s, row in enumerate(edge_rows):
        off[s + 1] = off[s] + len(row)
        for d, w in row:
            dsts.append(d)
            ws.append([float(x) for x in w])
    dst = np.asarray(dsts, dtype=np.int64)
    wt = np.asarray(ws, dtype=np.float64).reshape(len(dsts), dim)
    return (owner, off, dst, np.ascontiguousarray(wt), dim)


def initial_values(game):
    owner, off, dst, wt, dim = game
    n = len(owner)
    voff = np.arange(n + 1, dtype=np.int64)
    vals = np.full((n, dim), np.inf)
    vals[np.asarray(owner) == TERMINAL] = 0.0
    return (voff, vals)


def sweep(game, u, double eps):
    """One Jacobi application of the backup operator."""
    owner_a, off_a, dst_a, wt_a, dim = game
    voff_a, vals_a = u
    cdef int[::1] owner = owner_a
    cdef cnp.int64_t[::1] off = off_a
    cdef cnp.int64_t[::1] dst = dst_a
    cdef double[:, ::1] wt = wt_a
    cdef cnp.int64_t[::1] voff = voff_a
    cdef double[:, ::1] vals = np.ascontiguousarray(vals_a)
    cdef int d = dim
    cdef Py_ssize_t n = owner.shape[0]
    cdef Py_ssize_t s, e, k, i, j, t
    cdef Buf out, cand, cur, tmp, other, swap
    cdef double* top = <double*>malloc(d * sizeof(double))
    cdef double* zero = <double*>malloc(d * sizeof(double))
    new_off = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] noff = new_off
    for i in range(d):
        top[i] = INFINITY
        zero[i] = 0.0
    buf_init(&out, n * 2, d)
    buf_init(&cand, 16, d)
    buf_init(&cur, 16, d)
    buf_init(&tmp, 16, d)
    buf_init(&other, 16, d)
    try:
        for s in range(n):
            if owner[s] == TERMINAL:
                for k in range(voff[s], voff[s + 1]):
                    push_row(&out, &vals[k, 0], d)
            elif owner[s] == SINK or off[s] == off[s + 1]:
                push_row(&out, top, d)
            elif owner[s] == ROBOT:
                cand.n = 0
                for e in range(off[s], off[s + 1]):
                    t = dst[e]
                    for k in range(voff[t], voff[t + 1]):
                        push_sum(&cand, &wt[e, 0], &vals[k, 0], d)
                pareto_min(&cand, &cur, d, eps)
                if cur.n == 0:
                    push_row(&out, top, d)
                for i in range(cur.n):
                    push_row(&out, cur.data + i * d, d)
            else:
                e = off[s]
                t = dst[e]
                cand.n = 0
                for k in range(voff[t], voff[t + 1]):
                    push_sum(&cand, &wt[e, 0], &vals[k, 0], d)
                pareto_min(&cand, &cur, d, eps)
                for e in range(off[s] + 1, off[s + 1]):
                    t = dst[e]
                    other.n = 0
                    for k in range(voff[t], voff[t + 1]):
                        push_sum(&other, &wt[e, 0], &vals[k, 0], d)
                    cand.n = 0
                    for i in range(cur.n):
                        for j in range(other.n):
                            push_max(&cand, cur.data + i * d, other.data + j * d, d)
                    pareto_min(&cand, &tmp, d, eps)
                    swap = cur
                    cur = tmp
                    tmp = swap
                if cur.n == 0:
                    push_row(&out, top, d)
                for i in range(cur.n):
                    push_row(&out, cur.data + i * d, d)
            noff[s + 1] = out.n
        result = np.empty((out.n, d), dtype=np.float64)
        if out.n:
            memcpy(<double*>cnp.PyArray_DATA(result), out.data, out.n * d * sizeof(double))
    finally:
        free(out.data)
        free(cand.data)
        free(cur.data)
        free(tmp.data)
        free(other.data)
        free(top)
        free(zero)
    return (new_off, result)


def first_not_covering(game, new, old, double eps):
    """First state whose new upset fails to contain the old one, or -1."""
    cdef cnp.int64_t[::1] noff = new[0]
    cdef double[:, ::1] nv = np.ascontiguousarray(new[1])
    cdef cnp.int64_t[::1] ooff = old[0]
    cdef double[:, ::1] ov = np.ascontiguousarray(old[1])
    cdef int d = game[4]
    cdef Py_ssize_t n = noff.shape[0] - 1
    cdef Py_ssize_t s, i, j
    cdef bint found
    for s in range(n):
        for j in range(ooff[s], ooff[s + 1]):
            found = False
            for i in range(noff[s], noff[s + 1]):
                if weakly_le(&nv[i, 0], &ov[j, 0], d, eps):
                    found = True
                    break
            if not found:
                return s
    return -1


cdef inline bint near(const double* a, const double* b, int d, double eps) noexcept nogil:
    cdef int i
    for i in range(d):
        if not (a[i] == b[i] or fabs(a[i] - b[i]) <= eps):
            return False
    return True


def same_values(game, a, b, double eps):
    cdef cnp.int64_t[::1] aoff = a[0]
    cdef double[:, ::1] av = np.ascontiguousarray(a[1])
    cdef cnp.int64_t[::1] boff = b[0]
    cdef double[:, ::1] bv = np.ascontiguousarray(b[1])
    cdef int d = game[4]
    cdef Py_ssize_t n = aoff.shape[0] - 1
    cdef Py_ssize_t s, i, j
    cdef bint found
    for s in range(n):
        if eps == 0.0:
            if aoff[s + 1] - aoff[s] != boff[s + 1] - boff[s]:
                return False
            for i in range(aoff[s + 1] - aoff[s]):
                for j in range(d):
                    if av[aoff[s] + i, j] != bv[boff[s] + i, j]:
                        return False
            continue
        for i in range(aoff[s], aoff[s + 1]):
            found = False
            for j in range(boff[s], boff[s + 1]):
                if near(&av[i, 0], &bv[j, 0], d, eps):
                    found = True
                    break
            if not found:
                return False
        for j in range(boff[s], boff[s + 1]):
            found = False
            for i in range(aoff[s], aoff[s + 1]):
                if near(&bv[j, 0], &av[i, 0], d, eps):
                    found = True
                    break
            if not found:
                return False
    return True


def to_sets(game, u):
    voff, vals = u
    rows = vals.tolist()
    return [tuple(tuple(r) for r in rows[voff[s]:voff[s + 1]]) for s in range(len(voff) - 1)]


def from_sets(game, sets):
    dim = game[4]
    voff = np.zeros(len(sets) + 1, dtype=np.int64)
    flat = []
    for s, pts in enumerate(sets):
        voff[s + 1] = voff[s] + len(pts)
        flat.extend([float(x) for x in p] for p in pts)
    vals = np.asarray(flat, dtype=np.float64).reshape(len(flat), dim)
    return (voff, np.ascontiguousarray(vals))
