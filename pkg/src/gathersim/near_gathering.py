"""Collision-free near-gathering on top of a contracting gathering protocol.

Robots see up to ``V + tau``. Each robot first computes a capped move
(the "collision vector", at most ``tau/2`` long) from the base protocol,
then stops short of its end by a distance that keeps it off every point
where another nearby robot could be: their positions, the ends of their
collision vectors, and single-point crossings with their vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, kernels
from .protocols import ProtocolKind, ProtocolSpec, TargetResult, compute_target
from .swarm import RANGE_RTOL, Configuration, neighbor_ids, within

ON_SEGMENT_RTOL = 1e-9
# collision points this close to the robot's own tip are the tip itself up to rounding
TIP_RTOL = 1e-12


@dataclass(frozen=True)
class NearGatherParams:
    V: float = 1.0
    tau: float = 2.0 / 3.0
    epsilon: float = 0.49
    base: ProtocolSpec = field(default_factory=lambda: ProtocolSpec(ProtocolKind.GTC))

    def __post_init__(self):
        if not 0.0 < self.tau <= 2.0 * self.V / 3.0 + 1e-15:
            raise ValueError(f"tau must lie in (0, 2V/3], got tau={self.tau} with V={self.V}")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.base.V != self.V:
            object.__setattr__(self, "base", ProtocolSpec(self.base.kind, self.V))

    @property
    def tol(self) -> float:
        return ON_SEGMENT_RTOL * self.V

    @property
    def tip_tol(self) -> float:
        return TIP_RTOL * self.V

    @property
    def stop_radius(self) -> float:
        return min(self.tau, 0.5 * self.V)

    def lam_tau(self, lam: float) -> float:
        """Centeredness constant of the capped protocol at viewing range V + tau."""
        return lam * self.tau / (4.0 * (self.V + self.tau))

    def lam_cl(self, lam: float) -> float:
        return self.lam_tau(lam) * (1.0 - self.epsilon)


@dataclass(frozen=True)
class CollisionVector:
    robot: int
    origin: np.ndarray
    tip: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.tip - self.origin))


@dataclass(frozen=True)
class CollisionPointSet:
    owner: int
    points: np.ndarray


@dataclass(frozen=True)
class PTauResult:
    tip: np.ndarray
    base: TargetResult
    scaled: bool
    capped: bool


def p_tau_result(cfg: Configuration, i: int, params: NearGatherParams) -> PTauResult:
    V, tau = params.V, params.tau
    p = cfg.positions[i]
    ids = neighbor_ids(cfg, i, V)
    close = np.all(within(cfg.distances[np.ix_(ids, ids)], 0.5 * tau))
    if close:
        # base protocol run on the range V + tau/2 view shrunk to range V
        big = V + 0.5 * tau
        wide = neighbor_ids(cfg, i, big)
        rel = (cfg.positions[wide] - p) * (V / big)
        res = compute_target(params.base.kind, rel, np.zeros_like(p), V)
        goal = p + res.target * (big / V)
    else:
        res = compute_target(params.base.kind, cfg.positions[ids], p, V)
        goal = res.target
    disp = goal - p
    dist = float(np.linalg.norm(disp))
    if dist > 0.5 * tau:
        return PTauResult(p + (0.5 * tau / dist) * disp, res, bool(close), True)
    return PTauResult(goal, res, bool(close), False)


def p_tau_target(cfg: Configuration, i: int, params: NearGatherParams) -> np.ndarray:
    """Base-protocol target (scaled up for tight clusters), capped at distance tau/2."""
    return p_tau_result(cfg, i, params).tip


def p_tau_vectors(cfg: Configuration, ids, params: NearGatherParams) -> dict[int, CollisionVector]:
    return {int(k): CollisionVector(int(k), cfg.positions[k], p_tau_target(cfg, int(k), params)) for k in ids}


def collision_set_ids(cfg: Configuration, i: int, params: NearGatherParams) -> np.ndarray:
    """Robots within distance tau of ``i``, including ``i``."""
    return neighbor_ids(cfg, i, params.tau)


def collision_points(cfg: Configuration, i: int, params: NearGatherParams,
                     vectors: dict[int, CollisionVector] | None = None) -> CollisionPointSet:
    """Points on robot i's collision vector that some robot within tau may occupy."""
    ids = collision_set_ids(cfg, i, params)
    if vectors is None:
        vectors = p_tau_vectors(cfg, ids, params)
    origins = np.array([vectors[int(k)].origin for k in ids])
    tips = np.array([vectors[int(k)].tip for k in ids])
    own = int(np.flatnonzero(ids == i)[0])
    pts = kernels.collision_points_on(own, origins, tips, range(len(ids)), params.tol)
    arr = geometry.unique_rows(pts) if pts else np.zeros((0, cfg.dim))
    return CollisionPointSet(owner=int(i), points=arr)


def stop_distance(d_i: float, length: float, params: NearGatherParams) -> float:
    """How far before its vector's end a robot stops."""
    return params.epsilon * d_i * (2.0 * length / params.tau)


def pcl_from_vectors(own: int, origins: np.ndarray, tips: np.ndarray, members: np.ndarray,
                     params: NearGatherParams) -> np.ndarray:
    """Collision-free target for row ``own`` given the vectors of all robots within tau."""
    p, tip = origins[own], tips[own]
    length = float(np.linalg.norm(tip - p))
    if length == 0.0:
        return p.copy()
    d_i = kernels.collision_min_dist(own, origins, tips, members, params.tol, params.tip_tol)
    if not math.isfinite(d_i):
        d_i = length
    back = stop_distance(d_i, length, params)
    return tip + (back / length) * (p - tip)


def pcl_target(cfg: Configuration, i: int, params: NearGatherParams,
               vectors: dict[int, CollisionVector] | None = None) -> np.ndarray:
    ids = collision_set_ids(cfg, i, params)
    if vectors is None:
        vectors = p_tau_vectors(cfg, ids, params)
    origins = np.ascontiguousarray([vectors[int(k)].origin for k in ids], dtype=np.float64)
    tips = np.ascontiguousarray([vectors[int(k)].tip for k in ids], dtype=np.float64)
    own = int(np.flatnonzero(ids == i)[0])
    return pcl_from_vectors(own, origins, tips, np.arange(len(ids), dtype=np.int64), params)


def termination_check(cfg: Configuration, i: int, params: NearGatherParams) -> bool:
    """All robots within viewing range V + tau, ``i`` included, lie pairwise within min(tau, V/2)."""
    seen = neighbor_ids(cfg, i, params.V + params.tau)
    local = cfg.distances[np.ix_(seen, seen)]
    return bool(np.all(local <= params.stop_radius * (1.0 + RANGE_RTOL)))


def termination_flags(cfg: Configuration, params: NearGatherParams) -> np.ndarray:
    return np.array([termination_check(cfg, i, params) for i in range(cfg.n)], dtype=bool)


def vectors_from_view(cfg: Configuration, i: int, params: NearGatherParams) -> dict[int, CollisionVector]:
    """Collision vectors of robots within tau of i, recomputed from i's own V + tau snapshot."""
    view = neighbor_ids(cfg, i, params.V + params.tau)
    local = Configuration(cfg.positions[view], cfg.V, cfg.tau)
    sub = {int(g): li for li, g in enumerate(view)}
    out = {}
    for k in collision_set_ids(cfg, i, params):
        out[int(k)] = CollisionVector(int(k), cfg.positions[k], p_tau_target(local, sub[int(k)], params))
    return out


class NearGatherRule:
    """Engine rule: terminated robots stay put; the others move to their collision-free target."""

    def __init__(self, params: NearGatherParams):
        self.params = params

    def __call__(self, cfg: Configuration, i: int) -> np.ndarray:
        return self.targets(cfg, [i])[0]

    def targets(self, cfg: Configuration, active) -> list[np.ndarray]:
        params = self.params
        movers = [i for i in active if not termination_check(cfg, i, params)]
        needed = set()
        sets = {}
        for i in movers:
            sets[i] = collision_set_ids(cfg, i, params)
            needed.update(int(k) for k in sets[i])
        tips = {k: p_tau_target(cfg, k, params) for k in sorted(needed)}
        out = []
        for i in active:
            if i not in sets:
                out.append(cfg.positions[i].copy())
                continue
            ids = sets[i]
            origins = np.ascontiguousarray(cfg.positions[ids])
            tip_arr = np.ascontiguousarray([tips[int(k)] for k in ids])
            own = int(np.flatnonzero(ids == i)[0])
            out.append(pcl_from_vectors(own, origins, tip_arr, np.arange(len(ids), dtype=np.int64), params))
        return out
