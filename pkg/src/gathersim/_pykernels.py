"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``GATHERSIM_PURE=1`` is set.
The arithmetic follows the compiled code step for step.
"""
import math

import numpy as np

BALL_RTOL = 1e-13
PIVOT_EPS = 1e-14
PARALLEL_EPS = 1e-12


def _ball_from_support(pts, support, d):
    k = len(support)
    if k == 0:
        return None, -1.0
    p0 = pts[support[0]]
    if k == 1:
        return list(p0), 0.0
    m = k - 1
    q = [[pts[support[j + 1]][a] - p0[a] for a in range(d)] for j in range(m)]
    mat = [[0.0] * m for _ in range(m)]
    rhs = [0.0] * m
    scale = 0.0
    for a in range(m):
        for b in range(m):
            s = 0.0
            for j in range(d):
                s = s + q[a][j] * q[b][j]
            mat[a][b] = 2.0 * s
        rhs[a] = 0.5 * mat[a][a]
        if mat[a][a] > scale:
            scale = mat[a][a]
    singular = False
    for col in range(m):
        piv = col
        best = abs(mat[col][col])
        for row in range(col + 1, m):
            if abs(mat[row][col]) > best:
                best = abs(mat[row][col])
                piv = row
        if best <= PIVOT_EPS * scale:
            singular = True
            break
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for row in range(col + 1, m):
            f = mat[row][col] / mat[col][col]
            for j in range(col, m):
                mat[row][j] = mat[row][j] - f * mat[col][j]
            rhs[row] = rhs[row] - f * rhs[col]
    if singular:
        pj = pts[support[k - 1]]
        center = [0.5 * (p0[a] + pj[a]) for a in range(d)]
        s = 0.0
        for a in range(d):
            t = center[a] - p0[a]
            s = s + t * t
        return center, s
    lam = [0.0] * m
    for row in range(m - 1, -1, -1):
        s = rhs[row]
        for j in range(row + 1, m):
            s = s - mat[row][j] * lam[j]
        lam[row] = s / mat[row][row]
    center = [0.0] * d
    s = 0.0
    for a in range(d):
        t = p0[a]
        for j in range(m):
            t = t + lam[j] * q[j][a]
        center[a] = t
        t = t - p0[a]
        s = s + t * t
    return center, s


def _outside(p, center, r2):
    if r2 < 0.0:
        return True
    s = 0.0
    for a in range(len(p)):
        t = p[a] - center[a]
        s = s + t * t
    return s > r2 * (1.0 + BALL_RTOL) + 1e-300


def seh_center(pts):
    """Center of the smallest enclosing ball (move-to-front Welzl)."""
    pts = [list(map(float, p)) for p in np.asarray(pts)]
    n = len(pts)
    if n == 0:
        raise ValueError("empty point set")
    d = len(pts[0])
    order = list(range(n))
    support = []
    state = {}

    def mtf(end):
        center, r2 = _ball_from_support(pts, support, d)
        state["c"], state["r2"] = center, r2
        if len(support) == d + 1:
            return
        for i in range(end):
            idx = order[i]
            if _outside(pts[idx], state["c"], state["r2"]):
                support.append(idx)
                mtf(i)
                support.pop()
                order.pop(i)
                order.insert(0, idx)

    mtf(n)
    return np.array(state["c"], dtype=np.float64)


def clamp_fraction(start, goal, centers, radius):
    """Largest t in [0, 1] keeping start + t*(goal - start) in every disk."""
    start = [float(x) for x in start]
    goal = [float(x) for x in goal]
    d = len(start)
    aa = 0.0
    for a in range(d):
        u = goal[a] - start[a]
        aa = aa + u * u
    if aa == 0.0:
        return 1.0
    t = 1.0
    for cj in np.asarray(centers):
        bb = 0.0
        cc = 0.0
        for a in range(d):
            u = goal[a] - start[a]
            w = start[a] - float(cj[a])
            bb = bb + w * u
            cc = cc + w * w
        cc = cc - radius * radius
        disc = bb * bb - aa * cc
        if disc < 0.0:
            disc = 0.0
        if bb < 0.0:
            th = (-bb + math.sqrt(disc)) / aa
        elif bb + math.sqrt(disc) > 0.0:
            th = -cc / (bb + math.sqrt(disc))
        else:
            th = 0.0
        if th < t:
            t = th
    return max(t, 0.0)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull2d(pts):
    """Indices of the convex hull vertices, counter-clockwise (monotone chain)."""
    pts = np.asarray(pts)
    n = len(pts)
    if n <= 2:
        return np.arange(n, dtype=np.int64)
    h = []
    for i in range(n):
        while len(h) >= 2 and not _cross(pts[h[-2]], pts[h[-1]], pts[i]) > 0.0:
            h.pop()
        h.append(i)
    lower = len(h) + 1
    for i in range(n - 2, -1, -1):
        while len(h) >= lower and not _cross(pts[h[-2]], pts[h[-1]], pts[i]) > 0.0:
            h.pop()
        h.append(i)
    return np.array(h[:-1], dtype=np.int64)


def centered_chord(A, b, q, dirs, required):
    """Best 2*min(t+, t-) over the given unit directions for the polytope A x <= b."""
    A = np.asarray(A).tolist()
    b = np.asarray(b).tolist()
    q = np.asarray(q).tolist()
    k = len(q)
    slacks = []
    for row, bj in zip(A, b):
        slack = bj
        for a in range(k):
            slack = slack - row[a] * q[a]
        slacks.append(slack if slack > 0.0 else 0.0)
    best = 0.0
    for u in np.asarray(dirs).tolist():
        tp = math.inf
        tm = math.inf
        for row, slack in zip(A, slacks):
            au = 0.0
            for a in range(k):
                au = au + row[a] * u[a]
            if au > PARALLEL_EPS:
                c = slack / au
                if c < tp:
                    tp = c
            elif au < -PARALLEL_EPS:
                c = slack / (-au)
                if c < tm:
                    tm = c
        c = 2.0 * (tp if tp < tm else tm)
        if c > best:
            best = c
            if best >= required:
                break
    return best


def _on_segment(p, a, b, tol):
    uu = 0.0
    pu = 0.0
    for pj, aj, bj in zip(p, a, b):
        uu = uu + (bj - aj) * (bj - aj)
        pu = pu + (pj - aj) * (bj - aj)
    if uu <= tol * tol:
        dist2 = 0.0
        for pj, aj in zip(p, a):
            dist2 = dist2 + (pj - aj) * (pj - aj)
        return dist2 <= tol * tol
    length = math.sqrt(uu)
    s = pu / uu
    if s < -tol / length or s > 1.0 + tol / length:
        return False
    s = min(max(s, 0.0), 1.0)
    dist2 = 0.0
    for pj, aj, bj in zip(p, a, b):
        e = pj - (aj + s * (bj - aj))
        dist2 = dist2 + e * e
    return dist2 <= tol * tol


def _on_line(p, a, b, tol):
    uu = 0.0
    pu = 0.0
    for pj, aj, bj in zip(p, a, b):
        uu = uu + (bj - aj) * (bj - aj)
        pu = pu + (pj - aj) * (bj - aj)
    if uu == 0.0:
        return False
    s = pu / uu
    dist2 = 0.0
    for pj, aj, bj in zip(p, a, b):
        e = pj - (aj + s * (bj - aj))
        dist2 = dist2 + e * e
    return dist2 <= tol * tol


def _dist(p, q):
    s = 0.0
    for pj, qj in zip(p, q):
        s = s + (pj - qj) * (pj - qj)
    return math.sqrt(s)


def _crossing(a1, b1, a2, b2, tol):
    uu = vv = uv = wu = wv = 0.0
    for j in range(len(a1)):
        u = b1[j] - a1[j]
        v = b2[j] - a2[j]
        w = a1[j] - a2[j]
        uu = uu + u * u
        vv = vv + v * v
        uv = uv + u * v
        wu = wu + w * u
        wv = wv + w * v
    if uu <= tol * tol or vv <= tol * tol:
        return None
    if _on_line(a1, a2, b2, tol) and _on_line(b1, a2, b2, tol):
        return None
    # a shared or touching endpoint is the crossing; solving for it is ill-conditioned at shallow angles
    for p, a, b in ((a2, a1, b1), (b2, a1, b1), (a1, a2, b2), (b1, a2, b2)):
        if _on_segment(p, a, b, tol):
            return list(p)
    det = uu * vv - uv * uv
    if det <= 1e-24 * uu * vv:
        return None
    s = (uv * wv - vv * wu) / det
    t = (uu * wv - uv * wu) / det
    lu, lv = math.sqrt(uu), math.sqrt(vv)
    if s < -tol / lu or s > 1.0 + tol / lu or t < -tol / lv or t > 1.0 + tol / lv:
        return None
    s = min(max(s, 0.0), 1.0)
    t = min(max(t, 0.0), 1.0)
    out = []
    dist2 = 0.0
    for j in range(len(a1)):
        o = a2[j] + t * (b2[j] - a2[j])
        e = a1[j] + s * (b1[j] - a1[j]) - o
        dist2 = dist2 + e * e
        out.append(o)
    return out if dist2 <= tol * tol else None


def crossing(a1, b1, a2, b2, tol):
    """Single-point, non-collinear intersection of [a1,b1] and [a2,b2] (lands on [a2,b2]), or None."""
    hit = _crossing(*(np.asarray(x, dtype=np.float64).tolist() for x in (a1, b1, a2, b2)), tol)
    return None if hit is None else np.array(hit)


def _points_on(i, origins, tips, members, tol):
    a, b = origins[i], tips[i]
    for k in members:
        k = int(k)
        if k == i:
            continue
        if _on_segment(origins[k], a, b, tol):
            yield origins[k]
        if _on_segment(tips[k], a, b, tol):
            yield tips[k]
        hit = _crossing(origins[k], tips[k], a, b, tol)
        if hit is not None:
            yield hit


def collision_points_on(i, origins, tips, members, tol):
    """Collision points on segment i from the other robots: positions, tips, single crossings."""
    origins = np.asarray(origins, dtype=np.float64).tolist()
    tips = np.asarray(tips, dtype=np.float64).tolist()
    return [np.array(p) for p in _points_on(i, origins, tips, members, tol)]


def collision_min_dist(i, origins, tips, members, tol, excl):
    """Smallest distance from tips[i] to a collision point the other members put on segment i."""
    origins = np.asarray(origins, dtype=np.float64).tolist()
    tips = np.asarray(tips, dtype=np.float64).tolist()
    best = math.inf
    for c in _points_on(i, origins, tips, members, tol):
        dist = _dist(c, tips[i])
        if excl < dist < best:
            best = dist
    return best
