"""Instance generators for connected swarms."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .swarm import Configuration, has_collision, ubg_connected

DELTA_RTOL = 0.05
STRAIGHTNESS = (0.0, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 1.0)


class GeneratorKind(str, enum.Enum):
    REGULAR_POLYGON = "REGULAR_POLYGON"
    RANDOM_CONNECTED = "RANDOM_CONNECTED"
    LINE = "LINE"
    GRID = "GRID"
    ALTERNATING_STAR = "ALTERNATING_STAR"


@dataclass(frozen=True)
class InstanceSpec:
    generator: GeneratorKind
    n: int = 0
    side: float = 1.0
    delta: float = 1.0
    dim: int = 2
    seed: int = 0
    rows: int = 0
    cols: int = 0
    V: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "generator", GeneratorKind(self.generator))


def regular_polygon(n: int, side: float = 1.0) -> np.ndarray:
    if n < 2:
        raise ValueError("a polygon needs n >= 2")
    radius = side / (2.0 * math.sin(math.pi / n))
    ang = 2.0 * math.pi * np.arange(n) / n
    return np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)


def line(n: int, spacing: float = 1.0, dim: int = 2) -> np.ndarray:
    if n < 1:
        raise ValueError("need n >= 1")
    pos = np.zeros((n, dim))
    pos[:, 0] = spacing * np.arange(n)
    return pos


def grid(rows: int, cols: int, spacing: float = 1.0) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("need rows, cols >= 1")
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return spacing * np.stack([c.ravel(), r.ravel()], axis=1).astype(np.float64)


def _unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def _grow(n: int, d: int, V: float, straightness: float, rng) -> np.ndarray:
    """Attach robots one by one at distance in [V/2, V] from an existing robot.

    With probability ``straightness`` the newest robot is the parent and the
    step keeps roughly the previous heading, which stretches the swarm.
    """
    pos = np.zeros((n, d))
    heading = _unit(rng, d)
    for k in range(1, n):
        if rng.random() < straightness:
            parent = k - 1
            mix = straightness * heading + (1.0 - straightness) * _unit(rng, d)
            norm = np.linalg.norm(mix)
            heading = mix / norm if norm > 0 else _unit(rng, d)
            direction = heading
        else:
            parent = int(rng.integers(0, k))
            direction = _unit(rng, d)
        pos[k] = pos[parent] + rng.uniform(0.5 * V, V) * direction
    return pos


def random_connected(n: int, delta: float, dim: int = 2, seed: int = 0, V: float = 1.0) -> np.ndarray:
    """Connected swarm of ``n`` robots with diameter ``delta`` (shrunk onto the target exactly)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if delta <= 0 or delta > (n - 1) * V:
        raise ValueError(f"diameter {delta} unreachable with {n} robots at range {V}")
    rng = np.random.default_rng(seed)
    for s in STRAIGHTNESS:
        for _ in range(4):
            pos = _grow(n, dim, V, s, rng)
            diam = geometry.diameter(pos)[1]
            if diam >= delta:
                # shrinking keeps every edge within range
                return pos * (delta / diam)
    heading = _unit(rng, dim)
    return np.outer(np.arange(n), heading) * (delta / (n - 1))


def alternating_star(n: int, V: float = 1.0) -> np.ndarray:
    """Ring of ``n = 2m`` robots alternating between an inner and an outer circle.

    Consecutive robots are exactly V apart and each outer robot sees its two
    inner neighbors at a right angle. Experimental reconstruction.
    """
    if n < 6 or n % 2:
        raise ValueError("alternating star needs an even n >= 6")
    m = n // 2
    s, c = math.sin(math.pi / m), math.cos(math.pi / m)
    r_in = V / (math.sqrt(2.0) * s)
    r_out = r_in * (c + s)
    ang = 2.0 * math.pi * np.arange(m) / m
    inner = np.stack([r_in * np.cos(ang), r_in * np.sin(ang)], axis=1)
    outer = np.stack([r_out * np.cos(ang + math.pi / m), r_out * np.sin(ang + math.pi / m)], axis=1)
    out = np.empty((n, 2))
    out[0::2] = inner
    out[1::2] = outer
    return out


def generate(spec: InstanceSpec) -> Configuration:
    g = spec.generator
    if g is GeneratorKind.REGULAR_POLYGON:
        pos = regular_polygon(spec.n, spec.side)
    elif g is GeneratorKind.RANDOM_CONNECTED:
        pos = random_connected(spec.n, spec.delta, spec.dim, spec.seed, spec.V)
    elif g is GeneratorKind.LINE:
        pos = line(spec.n, spec.side, spec.dim)
    elif g is GeneratorKind.GRID:
        pos = grid(spec.rows, spec.cols, spec.side)
    else:
        pos = alternating_star(spec.n, spec.V)
    cfg = Configuration(pos, spec.V, spec.tau)
    if not ubg_connected(cfg, spec.V):
        raise ValueError(f"{g.value} instance is not connected at range {spec.V}")
    if has_collision(cfg):
        raise ValueError(f"{g.value} instance has coincident robots")
    return cfg
