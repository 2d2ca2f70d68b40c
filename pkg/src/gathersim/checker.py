"""Empirical certificates for protocol targets and execution traces.

Each check returns :class:`Certificate` records; a failing record carries
enough numbers (robot, round, measured vs required) to reproduce it.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable

import numpy as np

from . import geometry
from .geometry import jung_bound
from .near_gathering import NearGatherParams, p_tau_result
from .protocols import GatheringRule, ProtocolSpec, TargetResult
from .swarm import Configuration, neighbor_ids

CHORD_SLACK = 1e-6
JUNG_SLACK = 1e-9
LOWER_BOUND_MIN_N = 16


class CertKind(str, enum.Enum):
    LAMBDA_CENTERED = "LAMBDA_CENTERED"
    ALPHA_BETA = "ALPHA_BETA"
    CONNECTIVITY = "CONNECTIVITY"
    COLLISION_FREE = "COLLISION_FREE"
    RADIUS_DECREASE = "RADIUS_DECREASE"
    JUNG = "JUNG"
    LOWER_BOUND_RATE = "LOWER_BOUND_RATE"


@dataclass(frozen=True)
class Certificate:
    kind: CertKind
    passed: bool
    robot: int | None = None
    round: int | None = None
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


def write_jsonl(certs: Iterable[Certificate], fh: IO[str]) -> int:
    """One JSON object per line; returns the number of records written."""
    count = 0
    for c in certs:
        fh.write(json.dumps(c.to_dict(), sort_keys=True, default=_json_default) + "\n")
        count += 1
    return count


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def failures(certs: Iterable[Certificate]) -> list[Certificate]:
    return [c for c in certs if not c.passed]


# ---------------------------------------------------------------- per-target checks


def check_lambda_centered(hull_points, target, lam: float, local_diam: float,
                          robot: int | None = None, round: int | None = None) -> Certificate:
    """Does the hull contain a chord of length lam * local_diam centered at ``target``?"""
    h = geometry.as_hull(hull_points)
    target = np.asarray(target, dtype=np.float64)
    required = lam * local_diam
    slack = CHORD_SLACK * local_diam
    if not h.contains(target):
        return Certificate(CertKind.LAMBDA_CENTERED, False, robot, round,
                           {"reason": "target outside hull", "required": required})
    chord = geometry.max_centered_chord(h, target, required=required - slack)
    return Certificate(CertKind.LAMBDA_CENTERED, chord >= required - slack, robot, round,
                       {"chord": chord, "required": required, "lambda": lam})


def check_alpha_beta(hull_points, result: TargetResult, local_diam: float,
                     robot: int | None = None, round: int | None = None) -> Certificate:
    """Is the certified point alpha-centered, and the target inside the hull scaled by beta around it?"""
    h = geometry.as_hull(hull_points)
    required = result.alpha * local_diam
    slack = CHORD_SLACK * local_diam
    wit = {"alpha": result.alpha, "beta": result.beta, "required": required, "fallback": result.used_fallback}
    if not h.contains(result.alpha_point):
        return Certificate(CertKind.ALPHA_BETA, False, robot, round, {**wit, "reason": "alpha point outside hull"})
    chord = geometry.max_centered_chord(h, result.alpha_point, required=required - slack)
    inside = geometry.scaled_hull_contains(h, result.alpha_point, result.beta, result.target)
    return Certificate(CertKind.ALPHA_BETA, chord >= required - slack and inside, robot, round,
                       {**wit, "chord": chord, "target_in_scaled_hull": inside})


def certify_robot(cfg: Configuration, i: int, spec: ProtocolSpec, round: int | None = None) -> list[Certificate]:
    """Both target certificates for robot ``i`` under ``spec`` in configuration ``cfg``."""
    ids = neighbor_ids(cfg, i, spec.V)
    pts = cfg.positions[ids]
    res = GatheringRule(spec).result(cfg, i)
    h = geometry.hull(pts)
    return [check_alpha_beta(h, res, h.diameter, i, round),
            check_lambda_centered(h, res.target, res.lam, h.diameter, i, round)]


class RoundCertifier:
    """Engine observer certifying every active robot's target in every round."""

    def __init__(self, spec: ProtocolSpec):
        self.spec = spec
        self.certs: list[Certificate] = []

    def __call__(self, rnd: int, before: Configuration, after: Configuration, active) -> None:
        for i in active:
            self.certs.extend(certify_robot(before, int(i), self.spec, rnd))


def check_p_tau_centered(cfg: Configuration, i: int, params: NearGatherParams, lam: float,
                         round: int | None = None) -> Certificate:
    """The capped target is centered with the constant shrunk for viewing range V + tau."""
    view = neighbor_ids(cfg, i, params.V + params.tau)
    pts = cfg.positions[view]
    tip = p_tau_result(cfg, i, params).tip
    h = geometry.hull(pts)
    return check_lambda_centered(h, tip, params.lam_tau(lam), h.diameter, i, round)


# ---------------------------------------------------------------- trace checks


def radius_decrease_bound(lam: float, delta: float, dim: int = 2) -> float:
    """Guaranteed radius decrease over two synchronous rounds while diam >= V/2."""
    c = math.sqrt(3.0) if dim <= 2 else math.sqrt(2.0)
    return c * lam ** 3 / (256.0 * math.pi * delta)


def epoch_decrease_bound(lam_cl: float, delta: float, tau: float) -> float:
    return tau * math.sqrt(2.0) * lam_cl ** 2 / (64.0 * math.pi * delta)


def epoch_budget(lam_cl: float, delta: float, tau: float) -> float:
    return 32.0 * math.pi * delta ** 2 / (lam_cl ** 2 * tau)


def _per_round(trace) -> list[Certificate]:
    out = []
    d = trace.dim
    for r in trace.records:
        out.append(Certificate(CertKind.CONNECTIVITY, bool(r.connected_V), None, r.round, {}))
        bound = jung_bound(r.diameter, d) + JUNG_SLACK
        out.append(Certificate(CertKind.JUNG, r.sec_radius <= bound, None, r.round,
                               {"radius": r.sec_radius, "bound": bound}))
    return out


def _fsync_checks(trace, delta: float, lam: float, V: float) -> list[Certificate]:
    out = []
    recs = trace.records
    last = len(recs) - 1
    need = radius_decrease_bound(lam, delta, trace.dim)

    def radius_at(t):
        if t <= last:
            return recs[t].sec_radius
        # a gathered swarm stays where it is
        return recs[last].sec_radius if trace.terminated else None

    for t, r in enumerate(recs):
        if r.diameter < 0.5 * V:
            continue
        later = radius_at(t + 2)
        if later is None:
            continue
        drop = r.sec_radius - later
        out.append(Certificate(CertKind.RADIUS_DECREASE, drop >= need, None, r.round,
                               {"window": "two rounds", "decrease": drop, "required": need}))
    small = next((t for t, r in enumerate(recs) if r.diameter <= 0.5 * V), None)
    if small is not None and small < last:
        ok = recs[small + 1].diameter == 0.0
        out.append(Certificate(CertKind.RADIUS_DECREASE, ok, None, recs[small].round,
                               {"window": "collapse", "next_diameter": recs[small + 1].diameter}))
    return out


def _ssync_checks(trace, delta: float, lam_cl: float, params: NearGatherParams) -> list[Certificate]:
    out = []
    recs = trace.records
    for r in recs:
        ok = not r.collision and r.min_pairwise > 0.0
        out.append(Certificate(CertKind.COLLISION_FREE, ok, None, r.round, {"min_pairwise": r.min_pairwise}))
    need = epoch_decrease_bound(lam_cl, delta, params.tau)
    starts = {}
    for t, r in enumerate(recs):
        starts.setdefault(r.epoch, t)
    for e, t in sorted(starts.items()):
        if recs[t].diameter <= params.tau:
            continue
        nxt = starts.get(e + 1)
        if nxt is None:
            if not trace.terminated:
                continue
            nxt = len(recs) - 1
        drop = recs[t].sec_radius - recs[nxt].sec_radius
        out.append(Certificate(CertKind.RADIUS_DECREASE, drop >= need, None, recs[t].round,
                               {"window": "epoch", "epoch": e, "decrease": drop, "required": need}))
    budget = epoch_budget(lam_cl, delta, params.tau)
    out.append(Certificate(CertKind.RADIUS_DECREASE, trace.epochs <= budget, None, recs[-1].round,
                           {"window": "epoch budget", "epochs": trace.epochs, "budget": budget}))
    if trace.terminated:
        final = recs[-1].diameter
        out.append(Certificate(CertKind.RADIUS_DECREASE, final <= params.stop_radius * (1 + 1e-12), None,
                               recs[-1].round, {"window": "final diameter", "diameter": final,
                                                "required": params.stop_radius}))
        first = next((r.epoch for r in recs if r.n_terminated > 0), None)
        n = max(r.n_terminated for r in recs)
        full = next((r.epoch for r in recs if r.n_terminated == n), None)
        if first is not None:
            out.append(Certificate(CertKind.RADIUS_DECREASE, full - first <= 1, None, recs[-1].round,
                                   {"window": "termination spread", "first_epoch": first, "all_epoch": full}))
    return out


def check_trace(trace, delta: float, lam: float, mode: str, V: float = 1.0,
                params: NearGatherParams | None = None) -> list[Certificate]:
    """Per-round connectivity and Jung checks plus the mode's progress checks.

    ``mode`` is ``FSYNC`` (point gathering, two-round radius windows) or
    ``SSYNC`` (near-gathering: collisions, per-epoch radius windows, epoch
    budget, final diameter, termination spread). For ``SSYNC`` ``lam`` is
    the base protocol's constant and ``params`` is required.
    """
    certs = _per_round(trace)
    if mode.upper() == "FSYNC":
        certs += _fsync_checks(trace, delta, lam, V)
    elif mode.upper() == "SSYNC":
        if params is None:
            raise ValueError("SSYNC trace checks need near-gathering parameters")
        certs += _ssync_checks(trace, delta, params.lam_cl(lam), params)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return certs


def polygon_perimeter(positions: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.roll(positions, -1, axis=0) - positions, axis=1)))


def check_lower_bound_rate(trace, n: int, V: float = 1.0, tol: float = 1e-6) -> Certificate:
    """Per-round radius decrease stays below pi/n while the perimeter exceeds 2n/3.

    Uses the stored configurations for the perimeter when available, else
    the regular-polygon relation perimeter = 2 n R sin(pi/n).
    """
    if n < LOWER_BOUND_MIN_N:
        return Certificate(CertKind.LOWER_BOUND_RATE, True, None, None, {"skipped": "n too small", "n": n})
    recs = trace.records
    if trace.configurations:
        perim = [polygon_perimeter(c.positions) for c in trace.configurations]
    else:
        perim = [2.0 * n * r.sec_radius * math.sin(math.pi / n) for r in recs]
    limit = math.pi / n * V + tol
    worst, worst_round = 0.0, None
    for t in range(len(recs) - 1):
        if perim[t] <= 2.0 * n * V / 3.0:
            break
        drop = recs[t].sec_radius - recs[t + 1].sec_radius
        if drop > worst:
            worst, worst_round = drop, recs[t].round
    return Certificate(CertKind.LOWER_BOUND_RATE, worst <= limit, None, worst_round,
                       {"max_decrease": worst, "limit": limit, "n": n})
