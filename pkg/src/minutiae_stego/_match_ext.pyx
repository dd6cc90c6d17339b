# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled alignment search for the minutiae matcher.

Inputs are per-template local frames: ``fx[i, k]``, ``fy[i, k]`` are the
rounded coordinates of minutia ``k`` seen from minutia ``i`` (origin at ``i``,
axis along its direction) and ``ft[i, k]`` is the relative direction in
degrees.  Must stay result-identical to ``_match_py.best_alignment``.
"""

from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t, int64_t


cdef int _cmp_u64(const void* a, const void* b) noexcept nogil:
    cdef uint64_t x = (<const uint64_t*>a)[0]
    cdef uint64_t y = (<const uint64_t*>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef inline int _angle_diff(int a, int b) noexcept nogil:
    cdef int d = a - b
    if d < 0:
        d = -d
    d = d % 360
    if d > 180:
        d = 360 - d
    return d


cdef struct Rows:
    int* x      # local x, each row sorted ascending
    int* y
    int* t
    int* idx    # original minutia index of each sorted slot


cdef int _sorted_rows(const int[:, ::1] fx, const int[:, ::1] fy, const int[:, ::1] ft,
                      Rows* rows) noexcept nogil:
    cdef Py_ssize_t n = fx.shape[0]
    cdef Py_ssize_t i, k, r
    cdef int64_t offset = 2147483648
    cdef uint64_t low32 = 0xFFFFFFFF
    cdef uint64_t* keys = <uint64_t*>malloc(n * sizeof(uint64_t))
    rows.x = <int*>malloc(n * n * sizeof(int))
    rows.y = <int*>malloc(n * n * sizeof(int))
    rows.t = <int*>malloc(n * n * sizeof(int))
    rows.idx = <int*>malloc(n * n * sizeof(int))
    if not (keys and rows.x and rows.y and rows.t and rows.idx):
        free(keys)
        return -1
    for i in range(n):
        for k in range(n):
            keys[k] = (<uint64_t>(<int64_t>fx[i, k] + offset) << 32) | <uint64_t>k
        qsort(keys, n, sizeof(uint64_t), _cmp_u64)
        for r in range(n):
            k = <Py_ssize_t>(keys[r] & low32)
            rows.idx[i * n + r] = <int>k
            rows.x[i * n + r] = fx[i, k]
            rows.y[i * n + r] = fy[i, k]
            rows.t[i * n + r] = ft[i, k]
    free(keys)
    return 0


cdef void _free_rows(Rows* rows) noexcept nogil:
    free(rows.x)
    free(rows.y)
    free(rows.t)
    free(rows.idx)


def best_alignment(const int[:, ::1] ax, const int[:, ::1] ay, const int[:, ::1] at,
                   const int[:, ::1] bx, const int[:, ::1] by, const int[:, ::1] bt,
                   double dist_tol, double angle_tol):
    """Return ``(pairs, i, j)`` for the best reference pair, ``(0, -1, -1)`` if empty."""
    cdef Py_ssize_t n1 = ax.shape[0]
    cdef Py_ssize_t n2 = bx.shape[0]
    if n1 == 0 or n2 == 0:
        return 0, -1, -1

    cdef Rows ra, rb
    ra.x = ra.y = ra.t = ra.idx = NULL
    rb.x = rb.y = rb.t = rb.idx = NULL
    cdef uint64_t* cand = <uint64_t*>malloc(n1 * n2 * sizeof(uint64_t))
    cdef char* used_a = <char*>malloc(n1)
    cdef char* used_b = <char*>malloc(n2)
    cdef int status = 0
    with nogil:
        status = _sorted_rows(ax, ay, at, &ra) | _sorted_rows(bx, by, bt, &rb)
    if status != 0 or not (cand and used_a and used_b):
        _free_rows(&ra); _free_rows(&rb)
        free(cand); free(used_a); free(used_b)
        raise MemoryError()

    cdef Py_ssize_t limit = n1 if n1 < n2 else n2
    cdef double tol2 = dist_tol * dist_tol
    cdef int window = <int>dist_tol
    cdef uint64_t low16 = 0xFFFF
    cdef Py_ssize_t i, j, k, l, ra_pos, lo, r, ncand, c, pairs
    cdef Py_ssize_t best = -1, best_i = -1, best_j = -1
    cdef int xk, yk, tk
    cdef int64_t dx, dy, d2
    cdef uint64_t key
    cdef int* axr
    cdef int* ayr
    cdef int* atr
    cdef int* aidx
    cdef int* bxr
    cdef int* byr
    cdef int* btr
    cdef int* bidx

    with nogil:
        for i in range(n1):
            if best == limit:
                break
            axr = ra.x + i * n1
            ayr = ra.y + i * n1
            atr = ra.t + i * n1
            aidx = ra.idx + i * n1
            for j in range(n2):
                bxr = rb.x + j * n2
                byr = rb.y + j * n2
                btr = rb.t + j * n2
                bidx = rb.idx + j * n2
                ncand = 0
                lo = 0
                for ra_pos in range(n1):
                    xk = axr[ra_pos]
                    while lo < n2 and bxr[lo] < xk - window:
                        lo += 1
                    if lo == n2:
                        break
                    yk = ayr[ra_pos]
                    tk = atr[ra_pos]
                    r = lo
                    while r < n2 and bxr[r] <= xk + window:
                        dx = xk - bxr[r]
                        dy = yk - byr[r]
                        d2 = dx * dx + dy * dy
                        if d2 <= tol2 and _angle_diff(tk, btr[r]) <= angle_tol:
                            cand[ncand] = ((<uint64_t>d2 << 32)
                                           | (<uint64_t>aidx[ra_pos] << 16)
                                           | <uint64_t>bidx[r])
                            ncand += 1
                        r += 1
                if ncand <= best:
                    continue
                qsort(cand, ncand, sizeof(uint64_t), _cmp_u64)
                for k in range(n1):
                    used_a[k] = 0
                for l in range(n2):
                    used_b[l] = 0
                pairs = 0
                for c in range(ncand):
                    key = cand[c]
                    k = <Py_ssize_t>((key >> 16) & low16)
                    l = <Py_ssize_t>(key & low16)
                    if not used_a[k] and not used_b[l]:
                        used_a[k] = 1
                        used_b[l] = 1
                        pairs += 1
                if pairs > best:
                    best = pairs
                    best_i = i
                    best_j = j
                    if best == limit:
                        break

    _free_rows(&ra); _free_rows(&rb)
    free(cand); free(used_a); free(used_b)
    return best, best_i, best_j
