"""JSON run configurations and trace files.

A configuration is one JSON document::

    {"dim": 2, "V": 1.0, "tau": 0.6666666666666666, "epsilon": 0.49,
     "protocol": "GTC", "termination": "NEAR_GATHER", "max_rounds": null,
     "scheduler": {"mode": "SSYNC", "policy": "RANDOM_SUBSET", "seed": 7,
                   "fairness_k": 3, "p": 0.5},
     "positions": [[0.0, 0.0], [0.5, 0.0]]}

Floats are written in shortest round-trip form, so load followed by dump
reproduces a dumped file byte for byte.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .engine import RunConfig, SchedulerPolicy, Termination
from .near_gathering import NearGatherParams
from .protocols import ProtocolKind, ProtocolSpec
from .swarm import Configuration


def config_to_dict(cfg: Configuration, rc: RunConfig, epsilon: float | None = None) -> dict:
    near = rc.near
    pol = rc.policy
    proto = near.base.kind if near is not None else rc.protocol.kind
    return {
        "dim": cfg.dim,
        "V": float(cfg.V),
        "tau": float(near.tau if near is not None else cfg.tau),
        "epsilon": float(near.epsilon if near is not None else (0.49 if epsilon is None else epsilon)),
        "protocol": ProtocolKind(proto).value,
        "termination": rc.termination.value,
        "max_rounds": rc.max_rounds,
        "scheduler": {"mode": pol.mode.value, "policy": pol.policy.value, "seed": int(pol.seed),
                      "fairness_k": int(pol.fairness_k), "p": float(pol.p)},
        "positions": [[float(x) for x in row] for row in cfg.positions],
    }


def config_from_dict(doc: dict) -> tuple[Configuration, RunConfig]:
    try:
        V = float(doc.get("V", 1.0))
        tau = float(doc.get("tau", 0.0))
        positions = np.asarray(doc["positions"], dtype=np.float64)
        dim = int(doc.get("dim", positions.shape[1] if positions.ndim == 2 else 0))
        if positions.ndim != 2 or positions.shape[1] != dim:
            raise ValueError(f"positions must be a list of {dim}-d points")
        termination = Termination(doc.get("termination", "GATHER_POINT"))
        sched = doc.get("scheduler", {})
        policy = SchedulerPolicy(mode=sched.get("mode", "FSYNC"), policy=sched.get("policy", "ALL"),
                                 seed=int(sched.get("seed", 0)), fairness_k=int(sched.get("fairness_k", 3)),
                                 p=float(sched.get("p", 0.5)))
        spec = ProtocolSpec(ProtocolKind(doc.get("protocol", "GTC")), V)
        near = None
        if termination is Termination.NEAR_GATHER:
            near = NearGatherParams(V=V, tau=tau, epsilon=float(doc.get("epsilon", 0.49)), base=spec)
        rc = RunConfig(protocol=spec, near=near, scheduler=policy, max_rounds=doc.get("max_rounds"),
                       termination=termination)
        return Configuration(positions, V, tau), rc
    except KeyError as exc:
        raise ValueError(f"missing config field {exc}") from exc


def dumps_config(cfg: Configuration, rc: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg, rc), indent=2, sort_keys=True) + "\n"


def loads_config(text: str) -> tuple[Configuration, RunConfig]:
    return config_from_dict(json.loads(text))


def load_config(path) -> tuple[Configuration, RunConfig]:
    return loads_config(Path(path).read_text())


def save_config(path, cfg: Configuration, rc: RunConfig) -> None:
    Path(path).write_text(dumps_config(cfg, rc))


def trace_to_json(trace) -> str:
    rows = [{k: getattr(r, k) for k in ("round", "epoch", "sec_radius", "diameter", "min_pairwise",
                                         "n_active", "connected_V", "collision")} for r in trace.records]
    return json.dumps({"terminated": trace.terminated, "records": rows}, indent=1)
