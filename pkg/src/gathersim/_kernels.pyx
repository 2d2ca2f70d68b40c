# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Every function here has an operation-for-operation twin in
:mod:`gathersim._pykernels`; keep the two in sync.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

# points closer than this (relative) to the current ball are not pushed into the support
cdef double BALL_RTOL = 1e-13
cdef double PIVOT_EPS = 1e-14
# facet normals this close to orthogonal to a direction count as parallel to it
cdef double PARALLEL_EPS = 1e-12


cdef struct Miniball:
    int n
    int d
    const double* pts
    int* order
    int* support
    double* center
    double r2
    double* q
    double* m
    double* rhs
    double* lam


cdef void _ball_from_support(Miniball* mb, int k) noexcept nogil:
    cdef int d = mb.d
    cdef int a, b, j, col, piv, row
    cdef double s, best, tmp, f, scale
    cdef const double* p0
    cdef const double* pj
    if k == 0:
        mb.r2 = -1.0
        return
    p0 = mb.pts + mb.support[0] * d
    if k == 1:
        for a in range(d):
            mb.center[a] = p0[a]
        mb.r2 = 0.0
        return
    cdef int m = k - 1
    for j in range(m):
        pj = mb.pts + mb.support[j + 1] * d
        for a in range(d):
            mb.q[j * d + a] = pj[a] - p0[a]
    scale = 0.0
    for a in range(m):
        for b in range(m):
            s = 0.0
            for j in range(d):
                s = s + mb.q[a * d + j] * mb.q[b * d + j]
            mb.m[a * m + b] = 2.0 * s
        mb.rhs[a] = 0.5 * mb.m[a * m + a]
        if mb.m[a * m + a] > scale:
            scale = mb.m[a * m + a]
    # gaussian elimination with partial pivoting
    cdef bint singular = False
    for col in range(m):
        piv = col
        best = fabs(mb.m[col * m + col])
        for row in range(col + 1, m):
            if fabs(mb.m[row * m + col]) > best:
                best = fabs(mb.m[row * m + col])
                piv = row
        if best <= PIVOT_EPS * scale:
            singular = True
            break
        if piv != col:
            for j in range(m):
                tmp = mb.m[col * m + j]
                mb.m[col * m + j] = mb.m[piv * m + j]
                mb.m[piv * m + j] = tmp
            tmp = mb.rhs[col]
            mb.rhs[col] = mb.rhs[piv]
            mb.rhs[piv] = tmp
        for row in range(col + 1, m):
            f = mb.m[row * m + col] / mb.m[col * m + col]
            for j in range(col, m):
                mb.m[row * m + j] = mb.m[row * m + j] - f * mb.m[col * m + j]
            mb.rhs[row] = mb.rhs[row] - f * mb.rhs[col]
    if singular:
        # degenerate support: fall back to the diametral ball of the last support point
        pj = mb.pts + mb.support[k - 1] * d
        s = 0.0
        for a in range(d):
            mb.center[a] = 0.5 * (p0[a] + pj[a])
            tmp = mb.center[a] - p0[a]
            s = s + tmp * tmp
        mb.r2 = s
        return
    for row in range(m - 1, -1, -1):
        s = mb.rhs[row]
        for j in range(row + 1, m):
            s = s - mb.m[row * m + j] * mb.lam[j]
        mb.lam[row] = s / mb.m[row * m + row]
    s = 0.0
    for a in range(d):
        tmp = p0[a]
        for j in range(m):
            tmp = tmp + mb.lam[j] * mb.q[j * d + a]
        mb.center[a] = tmp
        tmp = tmp - p0[a]
        s = s + tmp * tmp
    mb.r2 = s


cdef bint _outside(Miniball* mb, int idx) noexcept nogil:
    cdef int a
    cdef double s = 0.0, t
    cdef const double* p
    if mb.r2 < 0.0:
        return True
    p = mb.pts + idx * mb.d
    for a in range(mb.d):
        t = p[a] - mb.center[a]
        s = s + t * t
    return s > mb.r2 * (1.0 + BALL_RTOL) + 1e-300


cdef void _mtf(Miniball* mb, int end, int k) noexcept nogil:
    cdef int i, j, idx
    _ball_from_support(mb, k)
    if k == mb.d + 1:
        return
    for i in range(end):
        idx = mb.order[i]
        if _outside(mb, idx):
            mb.support[k] = idx
            _mtf(mb, i, k + 1)
            for j in range(i, 0, -1):
                mb.order[j] = mb.order[j - 1]
            mb.order[0] = idx


def seh_center(const double[:, ::1] pts):
    """Center of the smallest enclosing ball (move-to-front Welzl)."""
    cdef int n = pts.shape[0]
    cdef int d = pts.shape[1]
    cdef int i
    cdef Miniball mb
    center = np.zeros(d, dtype=np.float64)
    cdef double[::1] cv = center
    if n == 0:
        raise ValueError("empty point set")
    mb.n = n
    mb.d = d
    mb.pts = &pts[0, 0]
    mb.order = <int*> malloc(n * sizeof(int))
    mb.support = <int*> malloc((d + 1) * sizeof(int))
    mb.center = &cv[0]
    mb.q = <double*> malloc((d + 1) * d * sizeof(double))
    mb.m = <double*> malloc((d + 1) * (d + 1) * sizeof(double))
    mb.rhs = <double*> malloc((d + 1) * sizeof(double))
    mb.lam = <double*> malloc((d + 1) * sizeof(double))
    try:
        for i in range(n):
            mb.order[i] = i
        with nogil:
            _mtf(&mb, n, 0)
    finally:
        free(mb.order)
        free(mb.support)
        free(mb.q)
        free(mb.m)
        free(mb.rhs)
        free(mb.lam)
    return center


def clamp_fraction(const double[::1] start, const double[::1] goal,
                   const double[:, ::1] centers, double radius):
    """Largest t in [0, 1] keeping start + t*(goal - start) in every disk."""
    cdef int d = start.shape[0]
    cdef int m = centers.shape[0]
    cdef int j, a
    cdef double aa = 0.0, bb, cc, disc, th, u, w, t = 1.0
    for a in range(d):
        u = goal[a] - start[a]
        aa = aa + u * u
    if aa == 0.0:
        return 1.0
    for j in range(m):
        bb = 0.0
        cc = 0.0
        for a in range(d):
            u = goal[a] - start[a]
            w = start[a] - centers[j, a]
            bb = bb + w * u
            cc = cc + w * w
        cc = cc - radius * radius
        disc = bb * bb - aa * cc
        if disc < 0.0:
            disc = 0.0
        if bb < 0.0:
            th = (-bb + sqrt(disc)) / aa
        elif bb + sqrt(disc) > 0.0:
            th = -cc / (bb + sqrt(disc))
        else:
            th = 0.0
        if th < t:
            t = th
    if t < 0.0:
        t = 0.0
    return t


def hull2d(const double[:, ::1] pts):
    """Indices of the convex hull vertices, counter-clockwise (monotone chain).

    Collinear boundary points are dropped. Input must be lexicographically
    sorted and free of duplicates.
    """
    cdef int n = pts.shape[0]
    cdef int i, k = 0, lower
    cdef double cr
    out = np.empty(2 * n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] h = out
    if n <= 2:
        return np.arange(n, dtype=np.int64)
    for i in range(n):
        while k >= 2:
            cr = ((pts[h[k - 1], 0] - pts[h[k - 2], 0]) * (pts[i, 1] - pts[h[k - 2], 1])
                  - (pts[h[k - 1], 1] - pts[h[k - 2], 1]) * (pts[i, 0] - pts[h[k - 2], 0]))
            if cr > 0.0:
                break
            k -= 1
        h[k] = i
        k += 1
    lower = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower:
            cr = ((pts[h[k - 1], 0] - pts[h[k - 2], 0]) * (pts[i, 1] - pts[h[k - 2], 1])
                  - (pts[h[k - 1], 1] - pts[h[k - 2], 1]) * (pts[i, 0] - pts[h[k - 2], 0]))
            if cr > 0.0:
                break
            k -= 1
        h[k] = i
        k += 1
    return out[:k - 1].copy()


def centered_chord(const double[:, ::1] A, const double[::1] b, const double[::1] q,
                   const double[:, ::1] dirs, double required):
    """Best 2*min(t+, t-) over the given unit directions for the polytope A x <= b.

    Stops early once the value reaches ``required``.
    """
    cdef int m = A.shape[0]
    cdef int k = A.shape[1]
    cdef int nd = dirs.shape[0]
    cdef int r, j, a
    cdef double best = 0.0, tp, tm, au, slack, c
    cdef double* slacks = <double*> malloc(m * sizeof(double))
    try:
        for j in range(m):
            slack = b[j]
            for a in range(k):
                slack = slack - A[j, a] * q[a]
            if slack < 0.0:
                slack = 0.0
            slacks[j] = slack
        for r in range(nd):
            tp = INFINITY
            tm = INFINITY
            for j in range(m):
                au = 0.0
                for a in range(k):
                    au = au + A[j, a] * dirs[r, a]
                if au > PARALLEL_EPS:
                    c = slacks[j] / au
                    if c < tp:
                        tp = c
                elif au < -PARALLEL_EPS:
                    c = slacks[j] / (-au)
                    if c < tm:
                        tm = c
            c = tp if tp < tm else tm
            c = 2.0 * c
            if c > best:
                best = c
                if best >= required:
                    break
    finally:
        free(slacks)
    return best


cdef bint _on_segment(const double* p, const double* a, const double* b, int d,
                      double tol) noexcept nogil:
    cdef int j
    cdef double uu = 0.0, pu = 0.0, s, length, e, dist2 = 0.0
    for j in range(d):
        uu = uu + (b[j] - a[j]) * (b[j] - a[j])
        pu = pu + (p[j] - a[j]) * (b[j] - a[j])
    if uu <= tol * tol:
        for j in range(d):
            dist2 = dist2 + (p[j] - a[j]) * (p[j] - a[j])
        return dist2 <= tol * tol
    length = sqrt(uu)
    s = pu / uu
    if s < -tol / length or s > 1.0 + tol / length:
        return False
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    for j in range(d):
        e = p[j] - (a[j] + s * (b[j] - a[j]))
        dist2 = dist2 + e * e
    return dist2 <= tol * tol


cdef bint _on_line(const double* p, const double* a, const double* b, int d,
                   double tol) noexcept nogil:
    cdef int j
    cdef double uu = 0.0, pu = 0.0, s, e, dist2 = 0.0
    for j in range(d):
        uu = uu + (b[j] - a[j]) * (b[j] - a[j])
        pu = pu + (p[j] - a[j]) * (b[j] - a[j])
    if uu == 0.0:
        return False
    s = pu / uu
    for j in range(d):
        e = p[j] - (a[j] + s * (b[j] - a[j]))
        dist2 = dist2 + e * e
    return dist2 <= tol * tol


cdef void _copy(const double* src, double* dst, int d) noexcept nogil:
    cdef int j
    for j in range(d):
        dst[j] = src[j]


cdef bint _crossing(const double* a1, const double* b1, const double* a2, const double* b2,
                    int d, double tol, double* out) noexcept nogil:
    """Single-point, non-collinear intersection of [a1,b1] and [a2,b2]; point lands on [a2,b2]."""
    cdef int j
    cdef double uu = 0.0, vv = 0.0, uv = 0.0, wu = 0.0, wv = 0.0, det, s, t, lu, lv, e, dist2 = 0.0
    cdef double u, v, w
    for j in range(d):
        u = b1[j] - a1[j]
        v = b2[j] - a2[j]
        w = a1[j] - a2[j]
        uu = uu + u * u
        vv = vv + v * v
        uv = uv + u * v
        wu = wu + w * u
        wv = wv + w * v
    if uu <= tol * tol or vv <= tol * tol:
        return False
    if _on_line(a1, a2, b2, d, tol) and _on_line(b1, a2, b2, d, tol):
        return False
    # a shared or touching endpoint is the crossing; solving for it is ill-conditioned at shallow angles
    if _on_segment(a2, a1, b1, d, tol):
        _copy(a2, out, d)
        return True
    if _on_segment(b2, a1, b1, d, tol):
        _copy(b2, out, d)
        return True
    if _on_segment(a1, a2, b2, d, tol):
        _copy(a1, out, d)
        return True
    if _on_segment(b1, a2, b2, d, tol):
        _copy(b1, out, d)
        return True
    det = uu * vv - uv * uv
    if det <= 1e-24 * uu * vv:
        return False
    s = (uv * wv - vv * wu) / det
    t = (uu * wv - uv * wu) / det
    lu = sqrt(uu)
    lv = sqrt(vv)
    if s < -tol / lu or s > 1.0 + tol / lu or t < -tol / lv or t > 1.0 + tol / lv:
        return False
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    for j in range(d):
        out[j] = a2[j] + t * (b2[j] - a2[j])
        e = a1[j] + s * (b1[j] - a1[j]) - out[j]
        dist2 = dist2 + e * e
    return dist2 <= tol * tol


cdef double _dist(const double* p, const double* q, int d) noexcept nogil:
    cdef int j
    cdef double s = 0.0
    for j in range(d):
        s = s + (p[j] - q[j]) * (p[j] - q[j])
    return sqrt(s)


def collision_min_dist(int i, const double[:, ::1] origins, const double[:, ::1] tips,
                       const cnp.int64_t[::1] members, double tol, double excl):
    """Smallest distance from tips[i] to a collision point the other members put on segment i.

    Membership uses ``tol``; points within ``excl`` of tips[i] are ignored; returns inf if none remain.
    """
    cdef int d = origins.shape[1]
    cdef int r, k
    cdef double best = INFINITY, c
    cdef const double* a = &origins[i, 0]
    cdef const double* b = &tips[i, 0]
    cdef double* buf = <double*> malloc(d * sizeof(double))
    try:
        for r in range(members.shape[0]):
            k = <int> members[r]
            if k == i:
                continue
            if _on_segment(&origins[k, 0], a, b, d, tol):
                c = _dist(&origins[k, 0], b, d)
                if c > excl and c < best:
                    best = c
            if _on_segment(&tips[k, 0], a, b, d, tol):
                c = _dist(&tips[k, 0], b, d)
                if c > excl and c < best:
                    best = c
            if _crossing(&origins[k, 0], &tips[k, 0], a, b, d, tol, buf):
                c = _dist(buf, b, d)
                if c > excl and c < best:
                    best = c
    finally:
        free(buf)
    return best
