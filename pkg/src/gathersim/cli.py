"""Command line interface: run, sweep, verify, gen, oracle."""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checker, geometry
from . import io as gio
from .engine import Mode, RunConfig, SchedulerPolicy, Termination, Trace, run
from .generators import GeneratorKind, InstanceSpec, generate
from .near_gathering import NearGatherParams
from .protocols import ProtocolKind, ProtocolSpec
from .swarm import Configuration, global_metrics

SWEEP_COLUMNS = ("run_key", "generator", "n", "delta", "protocol", "scheduler", "seed", "rounds", "epochs",
                 "terminated", "min_window_decrease", "cert_failures", "error")


def _certify(initial: Configuration, rc: RunConfig, trace: Trace, target_certs) -> list:
    delta = global_metrics(initial).diam
    if rc.termination is Termination.NEAR_GATHER:
        certs = checker.check_trace(trace, delta, rc.near.base.lam, "SSYNC", rc.near.V, rc.near)
    else:
        certs = checker.check_trace(trace, delta, rc.protocol.lam, "FSYNC", rc.protocol.V)
    return list(target_certs) + certs


def execute(initial: Configuration, rc: RunConfig, certify_targets: bool = True):
    """Run one configuration and certify it; returns (trace, certificates)."""
    observer = None
    if certify_targets and rc.termination is Termination.GATHER_POINT:
        observer = checker.RoundCertifier(rc.protocol)
    trace = run(initial, rc, observer)
    return trace, _certify(initial, rc, trace, observer.certs if observer else [])


def _summary(trace: Trace, certs) -> dict:
    kinds = sorted({c.kind.value for c in certs})
    return {
        "rounds": trace.rounds,
        "epochs": trace.epochs,
        "terminated": trace.terminated,
        "final_diameter": trace.records[-1].diameter,
        "certificates": {k: {"pass": sum(1 for c in certs if c.kind.value == k and c.passed),
                             "fail": sum(1 for c in certs if c.kind.value == k and not c.passed)} for k in kinds},
    }


def _write_trace(out: Path, trace: Trace, fmt: str) -> None:
    if fmt == "json":
        (out / "trace.json").write_text(gio.trace_to_json(trace))
    else:
        (out / "trace.csv").write_text(trace.to_csv())


def cmd_run(args) -> int:
    initial, rc = gio.load_config(args.config)
    rc = replace(rc, seed=args.seed if args.seed is not None else rc.seed, jobs=args.jobs)
    trace, certs = execute(initial, rc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_trace(out, trace, args.format)
    with open(out / "certificates.jsonl", "w") as fh:
        checker.write_jsonl(certs, fh)
    summary = _summary(trace, certs)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    bad = checker.failures(certs)
    if not trace.terminated:
        print(f"not terminated after {trace.rounds} rounds", file=sys.stderr)
    if bad:
        print(f"{len(bad)} certificate failures, first: {bad[0].to_dict()}", file=sys.stderr)
    return 0 if trace.terminated and not bad else 1


def _sweep_jobs(doc: dict) -> list[dict]:
    instances = doc.get("instances", [])
    protocols = doc.get("protocols", ["GTC"])
    schedulers = doc.get("schedulers", [{"mode": "FSYNC", "policy": "ALL"}])
    seeds = doc.get("seeds", [0])
    jobs = []
    for inst, proto, sched, seed in itertools.product(instances, protocols, schedulers, seeds):
        jobs.append({"instance": inst, "protocol": proto, "scheduler": sched, "seed": seed,
                     "termination": doc.get("termination", "GATHER_POINT"), "V": doc.get("V", 1.0),
                     "tau": doc.get("tau", 2.0 / 3.0), "epsilon": doc.get("epsilon", 0.49),
                     "max_rounds": doc.get("max_rounds"), "certify_targets": doc.get("certify_targets", False)})
    return jobs


def _run_key(job: dict) -> str:
    return json.dumps([job["instance"], job["protocol"], job["scheduler"], job["seed"]], sort_keys=True)


def _sweep_one(job: dict) -> dict:
    inst = dict(job["instance"])
    inst.setdefault("seed", job["seed"])
    inst.setdefault("V", job["V"])
    row = {"run_key": _run_key(job), "generator": inst.get("generator"), "n": inst.get("n", 0),
           "delta": "", "protocol": job["protocol"], "scheduler": "", "seed": job["seed"], "rounds": "",
           "epochs": "", "terminated": "", "min_window_decrease": "", "cert_failures": "", "error": ""}
    try:
        cfg = generate(InstanceSpec(**inst))
        spec = ProtocolSpec(ProtocolKind(job["protocol"]), job["V"])
        sched = job["scheduler"]
        policy = SchedulerPolicy(mode=sched.get("mode", "FSYNC"), policy=sched.get("policy", "ALL"),
                                 seed=job["seed"], fairness_k=sched.get("fairness_k", 3), p=sched.get("p", 0.5))
        term = Termination(job["termination"])
        near = NearGatherParams(job["V"], job["tau"], job["epsilon"], spec) if term is Termination.NEAR_GATHER else None
        rc = RunConfig(protocol=spec, near=near, scheduler=policy, max_rounds=job["max_rounds"], termination=term)
        trace, certs = execute(cfg, rc, job["certify_targets"])
        drops = [c.witness["decrease"] for c in certs
                 if c.kind is checker.CertKind.RADIUS_DECREASE and "decrease" in c.witness]
        row.update(n=cfg.n, delta=repr(global_metrics(cfg).diam), scheduler=policy.label, rounds=trace.rounds,
                   epochs=trace.epochs, terminated=trace.terminated,
                   min_window_decrease=repr(min(drops)) if drops else "",
                   cert_failures=len(checker.failures(certs)))
    except Exception as exc:  # recorded per row, the sweep goes on
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_rows(doc: dict, jobs: int = 1) -> list[dict]:
    work = _sweep_jobs(doc)
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, work))
    else:
        rows = [_sweep_one(j) for j in work]
    return sorted(rows, key=lambda r: r["run_key"])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def cmd_sweep(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    if args.seed is not None and "seeds" not in doc:
        doc["seeds"] = [args.seed]
    rows = sweep_rows(doc, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        (out / "sweep.json").write_text(json.dumps(rows, indent=1, sort_keys=True, default=str) + "\n")
    else:
        (out / "sweep.csv").write_text(rows_to_csv(rows))
    bad = [r for r in rows if r["error"] or (r["cert_failures"] not in ("", 0))]
    for r in bad:
        print(f"run {r['run_key']}: failures={r['cert_failures']} {r['error']}", file=sys.stderr)
    return 1 if bad else 0


def cmd_verify(args) -> int:
    initial, rc = gio.load_config(args.config)
    trace = Trace.from_csv(Path(args.trace).read_text(), dim=initial.dim)
    trace.terminated = args.terminated
    certs = _certify(initial, rc, trace, [])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "certificates.jsonl", "w") as fh:
            checker.write_jsonl(certs, fh)
    else:
        checker.write_jsonl(certs, sys.stdout)
    bad = checker.failures(certs)
    print(f"{len(certs) - len(bad)} passed, {len(bad)} failed", file=sys.stderr)
    return 1 if bad else 0


def cmd_gen(args) -> int:
    spec = InstanceSpec(generator=GeneratorKind(args.generator.upper()), n=args.n, side=args.side,
                        delta=args.delta, dim=args.dim, seed=args.seed or 0, rows=args.rows, cols=args.cols,
                        V=args.V, tau=args.tau)
    cfg = generate(spec)
    proto = ProtocolSpec(ProtocolKind(args.protocol), args.V)
    term = Termination(args.termination)
    near = NearGatherParams(args.V, args.tau, args.epsilon, proto) if term is Termination.NEAR_GATHER else None
    mode = "FSYNC" if term is Termination.GATHER_POINT else "SSYNC"
    policy = SchedulerPolicy(mode=mode, policy=args.policy, seed=args.seed or 0, fairness_k=args.fairness_k)
    text = gio.dumps_config(cfg, RunConfig(protocol=proto, near=near, scheduler=policy, termination=term))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def oracle_suite(seed: int = 0, trials: int = 200) -> dict:
    """Cross-check the fast geometry routines against independent oracles."""
    rng = np.random.default_rng(seed)
    report = {"seh_vs_bruteforce": 0, "hull_vs_lp": 0, "chord_le_diameter": 0, "trials": trials}
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        pts = rng.normal(size=(int(rng.integers(1, 13)), d))
        a, b = geometry.seh(pts).radius, geometry.seh_bruteforce(pts).radius
        report["seh_vs_bruteforce"] += abs(a - b) > 1e-9 * max(1.0, b)
        pts = rng.normal(size=(int(rng.integers(d + 1, 15)), d))
        q = rng.normal(size=d)
        report["hull_vs_lp"] += geometry.hull_contains(pts, q) != geometry.hull_contains_lp(pts, q)
        center = pts.mean(axis=0)
        report["chord_le_diameter"] += geometry.max_centered_chord(pts, center) > geometry.diameter(pts)[1] + 1e-9
    return {k: int(v) for k, v in report.items()}


def cmd_oracle(args) -> int:
    report = oracle_suite(args.seed or 0, args.trials)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle.json").write_text(text)
    sys.stdout.write(text)
    return 0 if all(v == 0 for k, v in report.items() if k != "trials") else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gathersim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="JSON config path")
        sp.add_argument("--out", help="output directory (or file for gen)")
        sp.add_argument("--seed", type=int, default=None, help="scheduler / generator seed (u64)")
        sp.add_argument("--jobs", type=int, default=1, help="worker count")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("run", help="execute one configuration")
    common(sp)
    sp.set_defaults(func=cmd_run, out_required=True)

    sp = sub.add_parser("sweep", help="grid of runs, aggregated to one CSV row per run")
    common(sp)
    sp.set_defaults(func=cmd_sweep, out_required=True)

    sp = sub.add_parser("verify", help="certify an existing trace CSV")
    common(sp)
    sp.add_argument("--trace", required=True, help="trace CSV path")
    sp.add_argument("--terminated", action="store_true", help="the traced run reached its termination condition")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen", help="emit an instance as a JSON config")
    common(sp, config_required=False)
    sp.add_argument("--generator", required=True, choices=[g.value.lower() for g in GeneratorKind])
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--side", type=float, default=1.0, help="side length or spacing")
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--rows", type=int, default=0)
    sp.add_argument("--cols", type=int, default=0)
    sp.add_argument("--V", type=float, default=1.0)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--epsilon", type=float, default=0.49)
    sp.add_argument("--protocol", default="GTC", choices=[k.value for k in ProtocolKind])
    sp.add_argument("--termination", default="GATHER_POINT", choices=[t.value for t in Termination])
    sp.add_argument("--policy", default="ALL")
    sp.add_argument("--fairness-k", type=int, default=3)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("oracle", help="geometry cross-validation suite")
    common(sp, config_required=False)
    sp.add_argument("--trials", type=int, default=200)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_required", False) and not args.out:
        parser.error("--out is required")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
