"""Round-based execution: activation schedulers, epochs and traces."""
from __future__ import annotations

import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import swarm
from .near_gathering import NearGatherParams, NearGatherRule, termination_flags
from .protocols import GatheringRule, ProtocolSpec
from .swarm import Configuration

BOUNDARY_RTOL = 1e-9
TRACE_COLUMNS = ("round", "epoch", "sec_radius", "diameter", "min_pairwise", "n_active", "connected_V", "collision")


class ConfigurationRejected(ValueError):
    """Initial configuration or run settings violate a run precondition."""


class Mode(str, enum.Enum):
    FSYNC = "FSYNC"
    SSYNC = "SSYNC"


class Policy(str, enum.Enum):
    ALL = "ALL"
    ROUND_ROBIN_SINGLETON = "ROUND_ROBIN_SINGLETON"
    RANDOM_SUBSET = "RANDOM_SUBSET"
    ADVERSARY_FREEZE_BOUNDARY = "ADVERSARY_FREEZE_BOUNDARY"


class Termination(str, enum.Enum):
    GATHER_POINT = "GATHER_POINT"
    NEAR_GATHER = "NEAR_GATHER"


@dataclass(frozen=True)
class SchedulerPolicy:
    mode: Mode = Mode.FSYNC
    policy: Policy = Policy.ALL
    seed: int = 0
    fairness_k: int = 3
    p: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.fairness_k < 1:
            raise ValueError("fairness bound must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("activation probability must lie in [0, 1]")

    @property
    def label(self) -> str:
        if self.mode is Mode.FSYNC:
            return "FSYNC"
        extra = {Policy.RANDOM_SUBSET: f"({self.p})", Policy.ADVERSARY_FREEZE_BOUNDARY: f"(k={self.fairness_k})"}
        return self.policy.value + extra.get(self.policy, "")


def sec_boundary(positions: np.ndarray) -> np.ndarray:
    """Mask of robots on the boundary of the global smallest enclosing ball."""
    from .geometry import seh

    ball = seh(positions)
    d = np.linalg.norm(positions - ball.center, axis=1)
    return d >= ball.radius * (1.0 - BOUNDARY_RTOL)


class Scheduler:
    """Stateful fair activation scheduler; one call to :meth:`next` per round.

    Any robot left inactive for ``fairness_k - 1`` consecutive rounds is
    forced active in the next one.
    """

    def __init__(self, policy: SchedulerPolicy, n: int):
        self.policy = policy
        self.n = n
        self.round = 0
        self.idle = np.zeros(n, dtype=np.int64)

    def _proposal(self, positions) -> np.ndarray:
        pol, n = self.policy, self.n
        if pol.mode is Mode.FSYNC or pol.policy is Policy.ALL:
            return np.ones(n, dtype=bool)
        if pol.policy is Policy.ROUND_ROBIN_SINGLETON:
            mask = np.zeros(n, dtype=bool)
            mask[self.round % n] = True
            return mask
        if pol.policy is Policy.RANDOM_SUBSET:
            rng = np.random.default_rng(np.random.SeedSequence([pol.seed & (2**64 - 1), self.round]))
            return rng.random(n) < pol.p
        if positions is None:
            raise ValueError("ADVERSARY_FREEZE_BOUNDARY needs the current positions")
        return ~sec_boundary(np.asarray(positions, dtype=np.float64))

    def next(self, positions=None) -> np.ndarray:
        """Sorted ids of the robots active in the current round."""
        mask = self._proposal(positions)
        mask |= self.idle >= self.policy.fairness_k - 1
        self.idle = np.where(mask, 0, self.idle + 1)
        self.round += 1
        return np.flatnonzero(mask)


def activation_sequence(policy: SchedulerPolicy, n: int, round: int, positions=None) -> set[int]:
    """Active set of ``round`` (0-based), replayed from a fresh scheduler.

    ``positions`` (for the boundary adversary) is used for every replayed round.
    """
    sched = Scheduler(policy, n)
    for _ in range(round):
        sched.next(positions)
    return {int(i) for i in sched.next(positions)}


@dataclass(frozen=True)
class TraceRecord:
    round: int
    epoch: int
    sec_radius: float
    diameter: float
    min_pairwise: float
    n_active: int
    connected_V: bool
    collision: bool
    n_terminated: int = 0

    def csv_row(self) -> str:
        return ",".join([str(self.round), str(self.epoch), repr(float(self.sec_radius)), repr(float(self.diameter)),
                         repr(float(self.min_pairwise)), str(self.n_active),
                         "true" if self.connected_V else "false", "true" if self.collision else "false"])


@dataclass
class Trace:
    """Row ``r`` describes the configuration after ``r`` rounds; row 0 is the input."""

    records: list[TraceRecord] = field(default_factory=list)
    configurations: list[Configuration] = field(default_factory=list)
    terminated: bool = False
    dim: int = 2

    @property
    def rounds(self) -> int:
        return self.records[-1].round if self.records else 0

    @property
    def epochs(self) -> int:
        return self.records[-1].epoch if self.records else 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        for r in self.records:
            buf.write(r.csv_row() + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, dim: int = 2) -> "Trace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or tuple(lines[0].split(",")) != TRACE_COLUMNS:
            raise ValueError("trace CSV header mismatch")
        recs = []
        for ln in lines[1:]:
            f = ln.split(",")
            recs.append(TraceRecord(int(f[0]), int(f[1]), float(f[2]), float(f[3]), float(f[4]), int(f[5]),
                                    f[6] == "true", f[7] == "true"))
        return Trace(records=recs, dim=dim)


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolSpec | None = None
    near: NearGatherParams | None = None
    scheduler: SchedulerPolicy = field(default_factory=SchedulerPolicy)
    max_rounds: int | None = None
    termination: Termination = Termination.GATHER_POINT
    seed: int | None = None
    jobs: int = 1
    keep_configurations: bool = False

    def __post_init__(self):
        object.__setattr__(self, "termination", Termination(self.termination))
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.termination is Termination.GATHER_POINT and self.protocol is None:
            raise ValueError("point gathering needs a protocol")
        if self.termination is Termination.NEAR_GATHER and self.near is None:
            raise ValueError("near-gathering needs NearGatherParams")

    @property
    def policy(self) -> SchedulerPolicy:
        if self.seed is None:
            return self.scheduler
        return replace(self.scheduler, seed=self.seed)

    def rule(self):
        if self.termination is Termination.NEAR_GATHER:
            return NearGatherRule(self.near)
        return GatheringRule(self.protocol)


def default_max_rounds(rc: RunConfig, delta: float) -> int:
    """Round budget: ten times the proven worst case for the run's protocol."""
    if rc.termination is Termination.GATHER_POINT:
        lam = rc.protocol.lam
        bound = 256.0 * math.pi * delta ** 2 / lam ** 3
        return max(1, 10 * math.ceil(bound))
    near = rc.near
    lam_cl = near.lam_cl(near.base.lam)
    epochs = 32.0 * math.pi * delta ** 2 / (lam_cl ** 2 * near.tau)
    pol = rc.policy
    epoch_len = 1 if pol.mode is Mode.FSYNC or pol.policy is Policy.ALL else pol.fairness_k
    return max(1, 10 * math.ceil(epochs) * epoch_len)


def _targets(cfg: Configuration, rule, ids) -> list[np.ndarray]:
    batch = getattr(rule, "targets", None)
    if batch is not None:
        return batch(cfg, list(ids))
    return [rule(cfg, int(i)) for i in ids]


def step(cfg: Configuration, rule, active, jobs: int = 1) -> Configuration:
    """One look-compute-move round: every active robot jumps to its target.

    Targets are computed from the pre-round configuration only. With
    ``jobs > 1`` the active robots are split across threads; results are
    reassembled in id order, so the output does not depend on ``jobs``.
    """
    ids = sorted({int(i) for i in active})
    if not ids:
        return cfg
    if jobs > 1 and len(ids) > 1:
        chunks = [ids[k::jobs] for k in range(jobs) if ids[k::jobs]]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _targets(cfg, rule, c), chunks))
        targets = {}
        for c, part in zip(chunks, parts):
            targets.update(zip(c, part))
    else:
        targets = dict(zip(ids, _targets(cfg, rule, ids)))
    pos = np.array(cfg.positions, copy=True)
    for i in ids:
        pos[i] = targets[i]
    return cfg.with_positions(pos)


def _record(cfg: Configuration, rnd: int, epoch: int, n_active: int, n_term: int) -> TraceRecord:
    m = swarm.global_metrics(cfg)
    return TraceRecord(round=rnd, epoch=epoch, sec_radius=m.sec.radius, diameter=m.diam,
                       min_pairwise=m.min_pairwise, n_active=n_active,
                       connected_V=swarm.ubg_connected(cfg, cfg.V), collision=swarm.has_collision(cfg),
                       n_terminated=n_term)


def gathered(cfg: Configuration) -> bool:
    return bool(np.all(cfg.positions == cfg.positions[0]))


Observer = Callable[[int, Configuration, Configuration, np.ndarray], None]


def run(initial: Configuration, rc: RunConfig, observer: Observer | None = None) -> Trace:
    """Iterate rounds until the termination condition holds or the budget runs out.

    ``observer(round, before, after, active)`` is called after every round.
    """
    pol = rc.policy
    if rc.termination is Termination.GATHER_POINT:
        if pol.mode is not Mode.FSYNC:
            raise ConfigurationRejected("point gathering requires the FSYNC scheduler")
    else:
        if not swarm.ubg_connected(initial, rc.near.V):
            raise ConfigurationRejected("initial configuration is not V-connected")
        if swarm.has_collision(initial):
            raise ConfigurationRejected("initial positions are not pairwise distinct")

    near = rc.termination is Termination.NEAR_GATHER

    def done(cfg) -> tuple[bool, int]:
        if near:
            flags = termination_flags(cfg, rc.near)
            return bool(flags.all()), int(flags.sum())
        g = gathered(cfg)
        return g, cfg.n if g else 0

    max_rounds = rc.max_rounds
    if max_rounds is None:
        max_rounds = default_max_rounds(rc, swarm.global_metrics(initial).diam)
    rule = rc.rule()
    sched = Scheduler(pol, initial.n)
    cfg = initial
    finished, n_term = done(cfg)
    trace = Trace(dim=initial.dim)
    trace.records.append(_record(cfg, 0, 0, 0, n_term))
    if rc.keep_configurations:
        trace.configurations.append(cfg)
    epoch = 0
    seen = np.zeros(initial.n, dtype=bool)
    rnd = 0
    while not finished and rnd < max_rounds:
        rnd += 1
        active = sched.next(cfg.positions)
        nxt = step(cfg, rule, active, rc.jobs)
        seen[active] = True
        if seen.all():
            epoch += 1
            seen[:] = False
        if observer is not None:
            observer(rnd, cfg, nxt, active)
        cfg = nxt
        finished, n_term = done(cfg)
        trace.records.append(_record(cfg, rnd, epoch, len(active), n_term))
        if rc.keep_configurations:
            trace.configurations.append(cfg)
    trace.terminated = finished
    return trace
