"""Dimension-generic geometry primitives.

Smallest enclosing hyperspheres, convex-hull handles with membership and
centered-chord queries, limit-disk clamping, segment intersection and
diameters. All functions are pure and operate on float64 arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from . import kernels

TOL = 1e-9
CHORD_RESOLUTION = 720
BRUTEFORCE_MAX_POINTS = 12


def as_points(points) -> np.ndarray:
    """Return a C-contiguous float64 (n, d) array."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    return arr


def unique_rows(points) -> np.ndarray:
    """Lexicographically sorted rows with exact duplicates removed."""
    pts = as_points(points)
    if len(pts) < 2:
        return pts.copy()
    s = pts[np.lexsort(pts.T[::-1])]
    keep = np.empty(len(s), dtype=bool)
    keep[0] = True
    np.any(s[1:] != s[:-1], axis=1, out=keep[1:])
    return s[keep]


@dataclass(frozen=True)
class Hypersphere:
    center: np.ndarray
    radius: float

    def contains(self, p, rtol: float = TOL) -> bool:
        return float(np.linalg.norm(np.asarray(p) - self.center)) <= self.radius * (1 + rtol) + rtol


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


@dataclass(frozen=True)
class PointHit:
    point: np.ndarray


@dataclass(frozen=True)
class Overlap:
    segment: Segment


@dataclass(frozen=True)
class SegmentBound:
    """Circular cap cut off by a chord of a ball of radius ``R``.

    ``h`` is the cap height and ``gamma`` the angle between the height and
    the slant from the cap apex to a chord endpoint.
    """

    R: float
    half_chord: float
    h: float
    gamma: float

    @property
    def slant(self) -> float:
        return math.hypot(self.h, self.half_chord)


def segment_bound(R: float, half_chord: float) -> SegmentBound:
    if not 0.0 <= half_chord <= R:
        raise ValueError("half_chord must lie in [0, R]")
    # R - sqrt(R^2 - c^2) written to avoid cancellation
    h = half_chord * half_chord / (R + math.sqrt(R * R - half_chord * half_chord)) if R > 0 else 0.0
    gamma = math.atan2(half_chord, h) if half_chord > 0 else 0.0
    return SegmentBound(R=R, half_chord=half_chord, h=h, gamma=gamma)


def jung_bound(diam: float, d: int) -> float:
    """Upper bound on the enclosing radius of a set with the given diameter."""
    return diam * math.sqrt(d / (2.0 * (d + 1)))


# ---------------------------------------------------------------- enclosing balls


@lru_cache(maxsize=256)
def _permutation(n: int, seed: int) -> np.ndarray:
    perm = np.random.default_rng(seed).permutation(n)
    perm.setflags(write=False)
    return perm


def seh(points, seed: int = 0) -> Hypersphere:
    """Smallest enclosing hypersphere.

    The input is shuffled with a permutation fixed by ``(len(points), seed)``
    before the move-to-front Welzl pass, so the result is deterministic for a
    fixed input order.
    """
    pts = as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    shuffled = np.ascontiguousarray(pts[_permutation(pts.shape[0], seed)])
    center = kernels.seh_center(shuffled)
    radius = float(np.sqrt(np.max(np.sum((pts - center) ** 2, axis=1))))
    return Hypersphere(center=center, radius=radius)


def _circumcenters(pts: np.ndarray, subsets: np.ndarray):
    """Circumcenters (within the affine hull) of each row of point indices."""
    base = pts[subsets[:, 0]]
    if subsets.shape[1] == 1:
        return base, np.ones(len(subsets), dtype=bool)
    q = pts[subsets[:, 1:]] - base[:, None, :]
    gram = 2.0 * np.einsum("sid,sjd->sij", q, q)
    rhs = 0.5 * np.einsum("sii->si", gram)
    scale = np.max(np.abs(gram), axis=(1, 2))
    det = np.linalg.det(gram)
    k = gram.shape[1]
    ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300) ** k
    lam = np.zeros_like(rhs)
    if ok.any():
        lam[ok] = np.linalg.solve(gram[ok], rhs[ok][..., None])[..., 0]
    return base + np.einsum("si,sid->sd", lam, q), ok


def _seh_enumerate(pts: np.ndarray) -> Hypersphere:
    n, d = pts.shape
    best_c, best_r = None, math.inf
    for k in range(1, min(n, d + 1) + 1):
        subsets = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)
        centers, ok = _circumcenters(pts, subsets)
        centers = centers[ok]
        if len(centers) == 0:
            continue
        dist = np.sqrt(np.sum((pts[None, :, :] - centers[:, None, :]) ** 2, axis=2))
        radii = np.sqrt(np.sum((pts[subsets[ok][:, 0]] - centers) ** 2, axis=1))
        encl = np.all(dist <= radii[:, None] * (1 + TOL) + 1e-15, axis=1)
        if encl.any():
            j = int(np.argmin(np.where(encl, radii, np.inf)))
            if radii[j] < best_r:
                best_c, best_r = centers[j], float(np.max(dist[j]))
    return Hypersphere(center=best_c, radius=best_r)


def seh_bruteforce(points) -> Hypersphere:
    """Exact smallest enclosing sphere by enumerating candidate support sets."""
    pts = as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    if pts.shape[0] > BRUTEFORCE_MAX_POINTS:
        raise ValueError(f"seh_bruteforce accepts at most {BRUTEFORCE_MAX_POINTS} points")
    return _seh_enumerate(pts)


# ---------------------------------------------------------------- convex hulls


@dataclass(frozen=True, eq=False)
class HullHandle:
    """Convex hull of a finite point set with membership and chord queries.

    ``kind`` is one of ``point``, ``segment``, ``polygon`` (planar input) or
    ``polytope`` (d > 2, facets from qhull in the affine hull of the points).
    """

    points: np.ndarray
    dim: int
    kind: str
    vertices: np.ndarray
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    origin: np.ndarray | None = None
    basis: np.ndarray | None = None
    diameter: float = 0.0
    tol: float = field(default=TOL)

    def _local(self, q: np.ndarray) -> tuple[np.ndarray, float]:
        """Coordinates in the facet frame and distance off the affine hull."""
        if self.basis is None:
            return q, 0.0
        rel = q - self.origin
        y = self.basis.T @ rel
        off = float(np.linalg.norm(rel - self.basis @ y))
        return y, off

    def contains(self, q, tol: float | None = None) -> bool:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: hull is {self.dim}-d, query has shape {q.shape}")
        tol = self.tol if tol is None else tol
        if self.kind == "point":
            return float(np.linalg.norm(q - self.vertices[0])) <= tol
        if self.kind == "segment":
            return _point_segment_distance(q, self.vertices[0], self.vertices[1]) <= tol
        y, off = self._local(q)
        if off > tol:
            return False
        return bool(np.all(self.A @ y - self.b <= tol))


def _point_segment_distance(q, a, b) -> float:
    u = b - a
    uu = float(u @ u)
    s = 0.0 if uu == 0.0 else min(max(float((q - a) @ u) / uu, 0.0), 1.0)
    return float(np.linalg.norm(q - (a + s * u)))


def _halfplanes(poly: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normals and offsets of a CCW polygon."""
    edges = np.roll(poly, -1, axis=0) - poly
    normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    return np.ascontiguousarray(normals), np.einsum("ij,ij->i", normals, poly)


def _diameter_value(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    return float(np.sqrt(np.max(_sq_dist_matrix(pts))))


def hull(points) -> HullHandle:
    """Build a :class:`HullHandle` for a nonempty point set."""
    pts = as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    n, d = pts.shape
    uniq = unique_rows(pts)
    diam = _diameter_value(uniq)
    tol = TOL * max(1.0, diam)
    common = dict(points=pts, dim=d, diameter=diam, tol=tol)
    if len(uniq) == 1:
        return HullHandle(kind="point", vertices=uniq, **common)
    if d == 1:
        return HullHandle(kind="segment", vertices=np.array([uniq[0], uniq[-1]]), **common)
    if d == 2:
        idx = kernels.hull2d(np.ascontiguousarray(uniq))
        verts = uniq[idx]
        if len(verts) == 2:
            return HullHandle(kind="segment", vertices=verts, **common)
        A, b = _halfplanes(verts)
        return HullHandle(kind="polygon", vertices=verts, A=A, b=b, **common)
    origin = uniq.mean(axis=0)
    rel = uniq - origin
    _, s, vt = np.linalg.svd(rel, full_matrices=False)
    # keep every direction along which some point sticks out beyond the tolerance
    extent = np.max(np.abs(rel @ vt.T), axis=0)
    rank = int(np.sum(extent > 0.1 * tol))
    if rank <= 1:
        i, j = np.unravel_index(np.argmax(_sq_dist_matrix(uniq)), (len(uniq),) * 2)
        ends = np.array(sorted([tuple(uniq[i]), tuple(uniq[j])]))
        return HullHandle(kind="segment", vertices=ends, **common)
    basis = np.ascontiguousarray(vt[:rank].T)
    y = np.ascontiguousarray(rel @ basis)
    if rank == 2:
        order = np.lexsort((y[:, 1], y[:, 0]))
        idx = order[kernels.hull2d(np.ascontiguousarray(y[order]))]
        A, b = _halfplanes(y[idx])
        verts = uniq[idx]
    else:
        try:
            qh = ConvexHull(y)
        except QhullError:
            qh = ConvexHull(y, qhull_options="QJ")
        A = np.ascontiguousarray(qh.equations[:, :-1])
        norms = np.linalg.norm(A, axis=1)
        A = A / norms[:, None]
        b = -qh.equations[:, -1] / norms
        verts = uniq[np.unique(qh.vertices)]
    return HullHandle(kind="polytope", vertices=verts, A=np.ascontiguousarray(A), b=np.ascontiguousarray(b),
                      origin=origin, basis=basis, **common)


def as_hull(h) -> HullHandle:
    return h if isinstance(h, HullHandle) else hull(h)


def hull_contains(h, q, tol: float | None = None) -> bool:
    """Membership of ``q`` in the convex hull (accepts a handle or raw points)."""
    return as_hull(h).contains(q, tol)


def hull_contains_lp(points, q, tol: float = TOL) -> bool:
    """Independent membership oracle: is ``q`` a convex combination of the points (within ``tol``)?"""
    pts = as_points(points)
    q = np.asarray(q, dtype=np.float64)
    n, d = pts.shape
    if q.shape != (d,):
        raise ValueError("dimension mismatch")
    a_ub = np.vstack([pts.T, -pts.T])
    b_ub = np.concatenate([q + tol, -(q - tol)])
    res = linprog(np.zeros(n), A_ub=a_ub, b_ub=b_ub, A_eq=np.ones((1, n)), b_eq=[1.0],
                  bounds=(0, None), method="highs")
    return res.status == 0


def scaled_hull_contains(h, p, beta: float, q, tol: float | None = None) -> bool:
    """Is ``q`` inside the hull shrunk by factor ``1 - beta`` towards ``p``?"""
    h = as_hull(h)
    tol = h.tol if tol is None else tol
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if not h.contains(p, tol):
        raise ValueError("scaling center outside hull")
    if beta == 1.0:
        return float(np.linalg.norm(q - p)) <= tol
    return h.contains(p + (q - p) / (1.0 - beta), tol)


@lru_cache(maxsize=32)
def _uniform_directions(k: int, resolution: int) -> np.ndarray:
    """``resolution`` unit directions in R^k, one per antipodal pair where possible."""
    if k == 1:
        dirs = np.ones((1, 1))
    elif k == 2:
        ang = np.pi * np.arange(resolution) / resolution
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif k == 3:
        # Fibonacci lattice on the upper hemisphere
        i = np.arange(resolution) + 0.5
        z = i / resolution
        phi = i * np.pi * (3.0 - math.sqrt(5.0))
        rr = np.sqrt(1.0 - z * z)
        dirs = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=1)
    else:
        dirs = np.random.default_rng(12345).normal(size=(resolution, k))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    dirs = np.ascontiguousarray(dirs)
    dirs.setflags(write=False)
    return dirs


def max_centered_chord(h, q, resolution: int = CHORD_RESOLUTION, required: float = math.inf) -> float:
    """Lower bound on the longest chord of the hull having ``q`` as its midpoint.

    Directions tried: towards every hull vertex plus ``resolution`` uniform
    extras. Stops early once ``required`` is reached.
    """
    h = as_hull(h)
    q = np.asarray(q, dtype=np.float64)
    if not h.contains(q):
        raise ValueError("chord center outside hull")
    if h.kind == "point":
        return 0.0
    if h.kind == "segment":
        a, b = h.vertices
        return 2.0 * min(float(np.linalg.norm(q - a)), float(np.linalg.norm(q - b)))
    y, _ = h._local(q)
    verts_local = h.vertices if h.basis is None else (h.vertices - h.origin) @ h.basis
    rel = verts_local - y
    norms = np.linalg.norm(rel, axis=1)
    keep = norms > h.tol
    vdirs = rel[keep] / norms[keep][:, None]
    dirs = np.ascontiguousarray(np.vstack([vdirs, _uniform_directions(len(y), resolution)]))
    return float(kernels.centered_chord(h.A, h.b, np.ascontiguousarray(y), dirs, required))


# ---------------------------------------------------------------- moves and segments


def clamp_to_limit_disks(start, goal, disk_centers, disk_radius: float, tol: float = TOL):
    """Furthest point on [start, goal] that stays inside every limit disk."""
    start = np.ascontiguousarray(start, dtype=np.float64)
    goal = np.ascontiguousarray(goal, dtype=np.float64)
    centers = as_points(disk_centers) if len(disk_centers) else np.zeros((0, start.shape[0]))
    if len(centers) and np.any(np.linalg.norm(centers - start, axis=1) > disk_radius + tol * max(1.0, disk_radius)):
        raise ValueError("start outside limit disk")
    t = kernels.clamp_fraction(start, goal, centers, float(disk_radius))
    if t >= 1.0:
        return goal.copy()
    return start + t * (goal - start)


def segment_intersection(s1: Segment, s2: Segment, tol: float = TOL):
    """Classify two segments as disjoint (None), crossing (PointHit) or collinear (Overlap)."""
    a1, b1 = np.asarray(s1.a, float), np.asarray(s1.b, float)
    a2, b2 = np.asarray(s2.a, float), np.asarray(s2.b, float)
    if a1.shape != a2.shape:
        raise ValueError("dimension mismatch")
    l1, l2 = s1.length, s2.length
    if l1 <= tol or l2 <= tol:
        # at least one segment is a point
        p, (a, b) = (a1, (a2, b2)) if l1 <= tol else (a2, (a1, b1))
        return PointHit(p.copy()) if _point_segment_distance(p, a, b) <= tol else None
    u = (b1 - a1) / l1
    def off_line(p):
        w = p - a1
        return float(np.linalg.norm(w - (w @ u) * u))
    if off_line(a2) <= tol and off_line(b2) <= tol:
        ta, tb = sorted([float((a2 - a1) @ u), float((b2 - a1) @ u)])
        lo, hi = max(0.0, ta), min(l1, tb)
        if hi < lo - tol:
            return None
        if hi - lo <= tol:
            return PointHit(a1 + 0.5 * (lo + hi) * u)
        return Overlap(Segment(a1 + lo * u, a1 + hi * u))
    hit = kernels.crossing(a1, b1, a2, b2, tol)
    return None if hit is None else PointHit(hit)


def _sq_dist_matrix(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def distance_matrix(points) -> np.ndarray:
    return np.sqrt(_sq_dist_matrix(as_points(points)))


def diameter(points) -> tuple[tuple[int, int], float]:
    """Maximum pairwise distance with the lexicographically first attaining pair."""
    pts = as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    if n == 1:
        return (0, 0), 0.0
    sq = _sq_dist_matrix(pts)
    iu, ju = np.triu_indices(n, k=1)
    vals = sq[iu, ju]
    k = int(np.argmax(vals))  # first maximum in row-major order
    return (int(iu[k]), int(ju[k])), float(math.sqrt(vals[k]))
