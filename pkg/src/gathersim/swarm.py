"""Swarm configurations, neighborhoods and unit-ball-graph connectivity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import geometry
from .geometry import Hypersphere

# neighbor test is d <= range * (1 + RANGE_RTOL); absorbs rounding on pairs placed exactly at range
RANGE_RTOL = 1e-12
NEAR_COLLISION = 1e-12


@dataclass(frozen=True, eq=False)
class Configuration:
    """Immutable snapshot of all robot positions plus the range parameters.

    ``V`` is the connectivity range and ``tau`` the extra viewing range, so
    robots see up to ``V + tau``.
    """

    positions: np.ndarray
    V: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64, copy=True)
        if pos.ndim != 2 or pos.shape[0] == 0:
            raise ValueError("positions must be a nonempty (n, d) array")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if self.V <= 0 or self.tau < 0:
            raise ValueError("need V > 0 and tau >= 0")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @cached_property
    def distances(self) -> np.ndarray:
        dist = geometry.distance_matrix(self.positions)
        dist.setflags(write=False)
        return dist

    def with_positions(self, positions) -> "Configuration":
        return Configuration(positions, self.V, self.tau)

    def validate_near_gathering(self) -> None:
        if not 0.0 < self.tau <= 2.0 * self.V / 3.0 + 1e-15:
            raise ValueError(f"near-gathering needs 0 < tau <= 2V/3 (got tau={self.tau}, V={self.V})")

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.V == other.V and self.tau == other.tau
                and np.array_equal(self.positions, other.positions))

    __hash__ = None


@dataclass(frozen=True)
class Neighborhood:
    center: int
    members: tuple[int, ...]
    range: float


@dataclass(frozen=True)
class GlobalMetrics:
    diam: float
    sec: Hypersphere
    min_pairwise: float


def within(dist, rng: float):
    return dist <= rng * (1.0 + RANGE_RTOL)


def _check_id(cfg: Configuration, i: int) -> None:
    if not (isinstance(i, (int, np.integer)) and 0 <= i < cfg.n):
        raise IndexError(f"invalid robot id {i!r} for {cfg.n} robots")


def neighbor_ids(cfg: Configuration, i: int, rng: float) -> np.ndarray:
    _check_id(cfg, i)
    return np.flatnonzero(within(cfg.distances[i], rng))


def neighbors(cfg: Configuration, i: int, rng: float) -> Neighborhood:
    """Robots within distance ``rng`` of robot ``i`` (closed ball, includes ``i``)."""
    return Neighborhood(center=int(i), members=tuple(int(k) for k in neighbor_ids(cfg, i, rng)), range=rng)


def ubg_connected(cfg: Configuration, rng: float) -> bool:
    """Is the unit ball graph with edge length ``rng`` connected?"""
    if cfg.n == 1:
        return True
    ncomp, _ = connected_components(csr_matrix(within(cfg.distances, rng)), directed=False)
    return ncomp == 1


def local_diameter(cfg: Configuration, i: int, rng: float) -> float:
    ids = neighbor_ids(cfg, i, rng)
    if len(ids) < 2:
        return 0.0
    return float(np.max(cfg.distances[np.ix_(ids, ids)]))


def min_pairwise(cfg: Configuration) -> float:
    if cfg.n == 1:
        return math.inf
    iu, ju = np.triu_indices(cfg.n, k=1)
    return float(np.min(cfg.distances[iu, ju]))


def has_collision(cfg: Configuration) -> bool:
    """True iff two robots share exactly the same coordinates."""
    return len(geometry.unique_rows(cfg.positions)) < cfg.n


def has_near_collision(cfg: Configuration) -> bool:
    return min_pairwise(cfg) <= NEAR_COLLISION


def global_metrics(cfg: Configuration) -> GlobalMetrics:
    _, diam = geometry.diameter(cfg.positions)
    return GlobalMetrics(diam=diam, sec=geometry.seh(cfg.positions), min_pairwise=min_pairwise(cfg))


def larger_range_diameters_exceed(cfg: Configuration) -> bool:
    """If the swarm is V-connected with diameter above tau, every robot's
    local diameter at viewing range V + tau exceeds tau."""
    if not ubg_connected(cfg, cfg.V) or global_metrics(cfg).diam <= cfg.tau:
        return True
    return all(local_diameter(cfg, i, cfg.V + cfg.tau) > cfg.tau for i in range(cfg.n))
