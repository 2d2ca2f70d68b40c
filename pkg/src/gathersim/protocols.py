"""Contracting gathering protocols.

Each protocol maps a robot's visible neighborhood to a target point and
reports the centered point and constants that certify the move: the target
lies in the hull shrunk by ``1 - beta`` around an ``alpha``-centered point.
All moves are clamped to the limit disks of radius V/2 around the midpoints
between the robot and each neighbor, which preserves V-connectivity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .swarm import Configuration, neighbor_ids

SQRT3_8 = math.sqrt(3.0) / 8.0
SQRT2_8 = math.sqrt(2.0) / 8.0
UNIQUE_RTOL = 1e-9


class ProtocolKind(str, enum.Enum):
    GTC = "GTC"
    DGTC = "DGTC"
    GTMD = "GTMD"
    GTCDMB = "GTCDMB"


# (alpha, beta) for a regular round; diameter-based protocols fall back to GtC constants on ties
DECLARED = {
    ProtocolKind.GTC: (SQRT3_8, 0.5),
    ProtocolKind.DGTC: (SQRT2_8, 0.5),
    ProtocolKind.GTMD: (1.0, 0.1),
    ProtocolKind.GTCDMB: (SQRT3_8, 0.1),
}
FALLBACK = (SQRT3_8, 0.5)


@dataclass(frozen=True)
class ProtocolSpec:
    kind: ProtocolKind
    V: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))

    @property
    def alpha(self) -> float:
        return DECLARED[self.kind][0]

    @property
    def beta(self) -> float:
        return DECLARED[self.kind][1]

    @property
    def lam(self) -> float:
        """Smallest alpha*beta over the regular and fallback branches."""
        a, b = DECLARED[self.kind]
        if self.kind in (ProtocolKind.GTMD, ProtocolKind.GTCDMB):
            return min(a * b, FALLBACK[0] * FALLBACK[1])
        return a * b


@dataclass(frozen=True)
class TargetResult:
    target: np.ndarray
    alpha_point: np.ndarray
    alpha: float
    beta: float
    used_fallback: bool = False

    @property
    def lam(self) -> float:
        return self.alpha * self.beta


def canonical(points) -> np.ndarray:
    """Sorted, duplicate-free copy; equal neighborhoods give bit-equal targets."""
    return geometry.unique_rows(points)


def _clamped(self_pos, goal, nbrs, V):
    # the robot's own disk would only cap the step at V/2; connectivity needs the others
    others = nbrs[np.any(nbrs != self_pos[None, :], axis=1)]
    centers = 0.5 * (self_pos[None, :] + others)
    return geometry.clamp_to_limit_disks(self_pos, goal, centers, 0.5 * V)


def gtc_target(neigh, self_pos, V: float = 1.0) -> TargetResult:
    """Move towards the center of the smallest enclosing circle (sphere in d > 2)."""
    nbrs = canonical(neigh)
    self_pos = np.asarray(self_pos, dtype=np.float64)
    c = geometry.seh(nbrs).center
    alpha = SQRT3_8 if nbrs.shape[1] <= 2 else SQRT2_8
    return TargetResult(_clamped(self_pos, c, nbrs, V), c, alpha, 0.5)


def _unique_diameter_pair(nbrs: np.ndarray, V: float):
    """Endpoints of the only pair at maximal distance, or None on a (near) tie."""
    if len(nbrs) < 2:
        return None
    (i, j), dmax = geometry.diameter(nbrs)
    dist = geometry.distance_matrix(nbrs)
    close = np.count_nonzero(np.triu(dist > dmax - UNIQUE_RTOL * V, k=1))
    if close != 1:
        return None
    return nbrs[i], nbrs[j]


def _fallback(nbrs, self_pos, V) -> TargetResult:
    r = gtc_target(nbrs, self_pos, V)
    return TargetResult(r.target, r.alpha_point, r.alpha, r.beta, used_fallback=True)


def gtmd_target(neigh, self_pos, V: float = 1.0) -> TargetResult:
    """Move towards the midpoint of the unique diameter pair; GtC on ties."""
    nbrs = canonical(neigh)
    self_pos = np.asarray(self_pos, dtype=np.float64)
    pair = _unique_diameter_pair(nbrs, V)
    if pair is None:
        return _fallback(nbrs, self_pos, V)
    md = 0.5 * (pair[0] + pair[1])
    return TargetResult(_clamped(self_pos, md, nbrs, V), md, *DECLARED[ProtocolKind.GTMD])


def minbox_center(nbrs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Center of the diameter-aligned bounding box, projected onto the diameter's bisector."""
    mid = 0.5 * (lo + hi)
    e_y = (hi - lo) / np.linalg.norm(hi - lo)
    e_x = np.array([e_y[1], -e_y[0]])
    xs = (nbrs - mid) @ e_x
    return mid + 0.5 * (xs.min() + xs.max()) * e_x


def gtcdmb_target(neigh, self_pos, V: float = 1.0) -> TargetResult:
    """Move towards the minbox center of the unique diameter pair; GtC on ties."""
    nbrs = canonical(neigh)
    if nbrs.shape[1] != 2:
        raise ValueError("GTCDMB is planar")
    self_pos = np.asarray(self_pos, dtype=np.float64)
    pair = _unique_diameter_pair(nbrs, V)
    if pair is None:
        return _fallback(nbrs, self_pos, V)
    # canonical frame: lexicographically smaller endpoint on the negative axis
    lo, hi = sorted(pair, key=tuple)
    p_box = minbox_center(nbrs, lo, hi)
    return TargetResult(_clamped(self_pos, p_box, nbrs, V), p_box, *DECLARED[ProtocolKind.GTCDMB])


_TARGETS = {
    ProtocolKind.GTC: gtc_target,
    ProtocolKind.DGTC: gtc_target,
    ProtocolKind.GTMD: gtmd_target,
    ProtocolKind.GTCDMB: gtcdmb_target,
}


def compute_target(kind, neigh, self_pos, V: float = 1.0) -> TargetResult:
    return _TARGETS[ProtocolKind(kind)](neigh, self_pos, V)


def collapse_check(neigh, V: float = 1.0) -> bool:
    """Local diameter at most V/2: every member then computes the same target."""
    return geometry.diameter(geometry.as_points(neigh))[1] <= 0.5 * V


class GatheringRule:
    """Target rule for the engine: robot ``i`` applies the protocol to its range-V view."""

    def __init__(self, spec: ProtocolSpec):
        self.spec = spec

    def result(self, cfg: Configuration, i: int) -> TargetResult:
        ids = neighbor_ids(cfg, i, self.spec.V)
        return compute_target(self.spec.kind, cfg.positions[ids], cfg.positions[i], self.spec.V)

    def __call__(self, cfg: Configuration, i: int) -> np.ndarray:
        return self.result(cfg, i).target
