import io
import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gathersim import checker, geometry
from gathersim.checker import CertKind
from gathersim.engine import RunConfig, SchedulerPolicy, Trace, run, step
from gathersim.generators import random_connected, regular_polygon
from gathersim.near_gathering import NearGatherParams
from gathersim.protocols import GatheringRule, ProtocolSpec, TargetResult, gtc_target, gtmd_target
from gathersim.swarm import Configuration, global_metrics

LAM_GTC = math.sqrt(3) / 16


def test_lambda_centered_examples(rng):
    seg = [(0, 0), (1, 0)]
    assert checker.check_lambda_centered(seg, (0.5, 0), 1.0, 1.0).passed
    assert not checker.check_lambda_centered(seg, (0.25, 0), 1.0, 1.0).passed
    tri = rng.uniform(-0.5, 0.5, size=(3, 2))
    r = gtc_target(tri, tri[0])
    assert checker.check_lambda_centered(tri, r.target, LAM_GTC, geometry.diameter(tri)[1]).passed


def test_lambda_centered_outside_hull_fails():
    c = checker.check_lambda_centered([(0, 0), (1, 0), (0, 1)], (2, 2), 0.1, 1.0)
    assert not c.passed and c.witness["reason"] == "target outside hull"


def test_alpha_beta_examples():
    tri = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    r = gtc_target(tri, tri[0])
    assert checker.check_alpha_beta(tri, r, 1.0).passed
    assert np.allclose(r.alpha_point, tri.mean(axis=0))
    lazy = TargetResult(tri[0].copy(), r.alpha_point, r.alpha, r.beta)
    assert not checker.check_alpha_beta(tri, lazy, 1.0).passed
    pts = np.array([(0, 0), (1, 0), (0.5, 0.3)])
    r = gtmd_target(pts, pts[2])
    assert not r.used_fallback and checker.check_alpha_beta(pts, r, 1.0).passed


def test_alpha_beta_outside_alpha_point_fails():
    tri = np.array([(0, 0), (1, 0), (0, 1)], float)
    bad = TargetResult(np.array([0.2, 0.2]), np.array([3.0, 3.0]), 0.1, 0.5)
    assert not checker.check_alpha_beta(tri, bad, 1.0).passed


def test_round_certifier_passes_on_gathering_run():
    c = Configuration(random_connected(15, 4.0, 2, 2))
    obs = checker.RoundCertifier(ProtocolSpec("GTC"))
    run(c, RunConfig(protocol=ProtocolSpec("GTC")), obs)
    assert obs.certs and not checker.failures(obs.certs)


def _fsync_trace(seed=3, n=15, delta=4.0):
    c = Configuration(random_connected(n, delta, 2, seed))
    return c, run(c, RunConfig(protocol=ProtocolSpec("GTC"), keep_configurations=True))


def test_trace_check_passes_on_clean_run():
    c, tr = _fsync_trace()
    certs = checker.check_trace(tr, global_metrics(c).diam, LAM_GTC, "FSYNC")
    assert certs and not checker.failures(certs)
    kinds = {x.kind for x in certs}
    assert {CertKind.CONNECTIVITY, CertKind.JUNG, CertKind.RADIUS_DECREASE} <= kinds


def test_teleport_breaks_connectivity():
    c, tr = _fsync_trace()
    r = tr.records[2]
    tr.records[2] = replace(r, connected_V=False)
    bad = checker.failures(checker.check_trace(tr, global_metrics(c).diam, LAM_GTC, "FSYNC"))
    assert any(x.kind is CertKind.CONNECTIVITY and x.round == 2 for x in bad)


def test_teleport_from_configuration_fails():
    c = Configuration(random_connected(8, 2.0, 2, 1), 1.0, 2 / 3)
    pos = np.array(c.positions)
    pos[0] += 50.0
    broken = c.with_positions(pos)
    tr = Trace(dim=2)
    from gathersim.engine import _record
    tr.records = [_record(c, 0, 0, 0, 0), _record(broken, 1, 0, 8, 0)]
    bad = checker.failures(checker.check_trace(tr, 2.0, LAM_GTC, "SSYNC", 1.0, NearGatherParams()))
    assert any(x.kind is CertKind.CONNECTIVITY and x.round == 1 for x in bad)


def test_duplicate_position_breaks_collision_freedom():
    from gathersim.engine import _record
    c = Configuration(random_connected(8, 2.0, 2, 1), 1.0, 2 / 3)
    pos = np.array(c.positions)
    pos[3] = pos[5]
    tr = Trace(dim=2)
    tr.records = [_record(c, 0, 0, 0, 0), _record(c.with_positions(pos), 1, 0, 8, 0)]
    bad = checker.failures(checker.check_trace(tr, 2.0, LAM_GTC, "SSYNC", 1.0, NearGatherParams()))
    assert any(x.kind is CertKind.COLLISION_FREE and x.round == 1 for x in bad)


def test_stalled_radius_fails_decrease():
    c, tr = _fsync_trace()
    frozen = [replace(r, sec_radius=tr.records[0].sec_radius, diameter=tr.records[0].diameter)
              for r in tr.records]
    tr.records = frozen
    tr.terminated = False
    bad = checker.failures(checker.check_trace(tr, global_metrics(c).diam, LAM_GTC, "FSYNC"))
    assert any(x.kind is CertKind.RADIUS_DECREASE for x in bad)


def test_jung_violation_detected():
    c, tr = _fsync_trace()
    tr.records[1] = replace(tr.records[1], sec_radius=tr.records[1].diameter)
    bad = checker.failures(checker.check_trace(tr, global_metrics(c).diam, LAM_GTC, "FSYNC"))
    assert any(x.kind is CertKind.JUNG and x.round == 1 for x in bad)


def test_missing_collapse_detected():
    c, tr = _fsync_trace()
    last = tr.records[-1]
    tr.records[-1] = replace(last, diameter=1e-3)
    bad = checker.failures(checker.check_trace(tr, global_metrics(c).diam, LAM_GTC, "FSYNC"))
    assert any(x.witness.get("window") == "collapse" for x in bad)


def test_unknown_mode():
    _, tr = _fsync_trace()
    with pytest.raises(ValueError):
        checker.check_trace(tr, 1.0, LAM_GTC, "ASYNC")
    with pytest.raises(ValueError):
        checker.check_trace(tr, 1.0, LAM_GTC, "SSYNC")


def _polygon_trace(n, rounds):
    cfg = Configuration(regular_polygon(n))
    rule = GatheringRule(ProtocolSpec("GTC"))
    tr = Trace(dim=2)
    from gathersim.engine import _record
    tr.records.append(_record(cfg, 0, 0, 0, 0))
    tr.configurations.append(cfg)
    for r in range(1, rounds + 1):
        cfg = step(cfg, rule, range(n))
        tr.records.append(_record(cfg, r, r, n, 0))
        tr.configurations.append(cfg)
    return tr


def test_lower_bound_rate_examples():
    cert = checker.check_lower_bound_rate(_polygon_trace(32, 25), 32)
    assert cert.passed and cert.witness["max_decrease"] <= math.pi / 32 + 1e-6
    skipped = checker.check_lower_bound_rate(_polygon_trace(4, 2), 4)
    assert skipped.passed and skipped.witness["skipped"] == "n too small"


def test_lower_bound_rate_detects_fast_shrink():
    tr = _polygon_trace(32, 3)
    tr.records[1] = replace(tr.records[1], sec_radius=tr.records[0].sec_radius - 1.0)
    assert not checker.check_lower_bound_rate(tr, 32).passed


def test_polygon_64_rounds_to_shrink_by_a_third():
    n = 64
    cfg = Configuration(regular_polygon(n))
    rule = GatheringRule(ProtocolSpec("GTC"))
    rounds = 0
    # the perimeter shrinks from n to 2n/3 exactly when the radius loses a third
    while checker.polygon_perimeter(cfg.positions) > 2 * n / 3:
        cfg = step(cfg, rule, range(n))
        rounds += 1
    assert rounds > n * n / 3 * (1 - 1e-6)


@given(st.floats(0.05, 1.0), st.floats(1.0, 50.0), st.floats(0.0, 1.0))
def test_segment_bound_height(lam, delta, frac):
    R = frac * delta / math.sqrt(3)
    c = lam / 8
    if c > R:
        return
    h = geometry.segment_bound(R, c).h
    assert h >= math.sqrt(3) * lam ** 2 / (64 * math.pi * delta) * (1 - 1e-9)
    assert h >= math.sqrt(2) * lam ** 2 / (64 * math.pi * delta) * (1 - 1e-9)


def test_jsonl_serialization():
    certs = [checker.Certificate(CertKind.JUNG, True, None, 3, {"radius": np.float64(1.5)}),
             checker.Certificate(CertKind.COLLISION_FREE, False, 2, 4, {"min_pairwise": 0.0})]
    buf = io.StringIO()
    assert checker.write_jsonl(certs, buf) == 2
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert rows[0]["kind"] == "JUNG" and rows[0]["witness"]["radius"] == 1.5
    assert rows[1]["passed"] is False and rows[1]["robot"] == 2
