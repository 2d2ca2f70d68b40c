import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gathersim import geometry, protocols
from gathersim.checker import check_alpha_beta, check_lambda_centered
from gathersim.generators import random_connected
from gathersim.protocols import GatheringRule, ProtocolKind, ProtocolSpec
from gathersim.swarm import Configuration, neighbor_ids

from .conftest import random_rigid

PLANAR = [ProtocolKind.GTC, ProtocolKind.GTMD, ProtocolKind.GTCDMB]


def test_declared_constants():
    assert ProtocolSpec("GTC").alpha == pytest.approx(math.sqrt(3) / 8) and ProtocolSpec("GTC").beta == 0.5
    assert ProtocolSpec("DGTC").alpha == pytest.approx(math.sqrt(2) / 8)
    assert (ProtocolSpec("GTMD").alpha, ProtocolSpec("GTMD").beta) == (1.0, 0.1)
    assert ProtocolSpec("GTCDMB").alpha == pytest.approx(math.sqrt(3) / 8) and ProtocolSpec("GTCDMB").beta == 0.1
    assert ProtocolSpec("GTC").lam == pytest.approx(math.sqrt(3) / 16)
    # diameter protocols report the weaker of their two branches
    assert ProtocolSpec("GTMD").lam == pytest.approx(0.1)
    assert ProtocolSpec("GTCDMB").lam == pytest.approx(math.sqrt(3) / 80)


def test_gtc_examples():
    r = protocols.gtc_target([(0, 0), (0.8, 0)], (0, 0))
    assert np.allclose(r.target, (0.4, 0))
    tri = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    r = protocols.gtc_target(tri, tri[0])
    assert np.allclose(r.target, tri.mean(axis=0), atol=1e-12)
    r = protocols.gtc_target([(0, 0), (0.9, 0)], (0, 0))
    assert np.allclose(r.target, (0.45, 0))
    assert r.alpha == pytest.approx(math.sqrt(3) / 8) and r.beta == 0.5


def test_gtc_uses_three_dimensional_constant():
    r = protocols.gtc_target([(0, 0, 0), (0.5, 0, 0), (0, 0.5, 0.3)], (0, 0, 0))
    assert r.alpha == pytest.approx(math.sqrt(2) / 8)


def test_gtmd_examples():
    r = protocols.gtmd_target([(0, 0), (1, 0), (0.5, 0.3)], (0.5, 0.3))
    assert np.allclose(r.target, (0.5, 0)) and not r.used_fallback and (r.alpha, r.beta) == (1.0, 0.1)
    tri = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    r = protocols.gtmd_target(tri, tri[0])
    assert r.used_fallback and np.allclose(r.target, tri.mean(axis=0), atol=1e-12)
    r = protocols.gtmd_target([(0, 0), (0.6, 0)], (0, 0))
    assert np.allclose(r.target, (0.3, 0))


def test_gtcdmb_examples():
    r = protocols.gtcdmb_target([(0, -0.5), (0, 0.5), (0.3, 0)], (0.3, 0))
    assert np.allclose(r.alpha_point, (0.15, 0)) and not r.used_fallback
    r = protocols.gtcdmb_target([(0, 0), (0.6, 0)], (0, 0))
    assert np.allclose(r.alpha_point, (0.3, 0))
    sq = [(0, 0), (0.5, 0), (0.5, 0.5), (0, 0.5)]
    assert protocols.gtcdmb_target(sq, (0, 0)).used_fallback


def test_gtcdmb_is_planar():
    with pytest.raises(ValueError, match="GTCDMB is planar"):
        protocols.gtcdmb_target([(0, 0, 0), (0.5, 0, 0)], (0, 0, 0))


def test_collapse_examples(rng):
    assert protocols.collapse_check([(0, 0), (0.3, 0), (0.1, 0.4)])
    assert not protocols.collapse_check([(0, 0), (0.6, 0)])
    pts = rng.uniform(-1, 1, size=(8, 2))
    pts *= 0.49 / geometry.diameter(pts)[1]
    cfg = Configuration(pts)
    for kind in PLANAR:
        rule = GatheringRule(ProtocolSpec(kind))
        targets = [rule(cfg, i) for i in range(cfg.n)]
        for t in targets:
            assert np.array_equal(t, targets[0])


def test_target_independent_of_neighbor_order(rng):
    pts = rng.uniform(-0.4, 0.4, size=(6, 2))
    perm = rng.permutation(6)
    for kind in PLANAR:
        a = protocols.compute_target(kind, pts, pts[0]).target
        b = protocols.compute_target(kind, pts[perm], pts[0]).target
        assert np.array_equal(a, b)


@st.composite
def swarms(draw, dim=2):
    n = draw(st.integers(2, 16))
    delta = draw(st.floats(0.3, 5.0))
    seed = draw(st.integers(0, 2**31))
    return Configuration(random_connected(n, min(delta, 0.9 * (n - 1)), dim, seed))


@given(swarms(), st.sampled_from(PLANAR))
def test_certificates_hold(cfg, kind):
    spec = ProtocolSpec(kind)
    rule = GatheringRule(spec)
    for i in range(cfg.n):
        ids = neighbor_ids(cfg, i, 1.0)
        h = geometry.hull(cfg.positions[ids])
        res = rule.result(cfg, i)
        assert check_alpha_beta(h, res, h.diameter).passed
        assert check_lambda_centered(h, res.target, res.lam, h.diameter).passed
        assert h.contains(res.target)


@given(swarms(), st.sampled_from(PLANAR))
def test_targets_keep_neighbors_connected(cfg, kind):
    rule = GatheringRule(ProtocolSpec(kind))
    targets = np.array([rule(cfg, i) for i in range(cfg.n)])
    d = cfg.distances
    for i in range(cfg.n):
        for j in range(cfg.n):
            if d[i, j] <= 1.0:
                assert np.linalg.norm(targets[i] - targets[j]) <= 1.0 + 1e-9
                assert np.linalg.norm(targets[i] - cfg.positions[j]) <= 1.0 + 1e-9


@given(swarms())
def test_gtc_moves_at_least_half_way(cfg):
    for i in range(cfg.n):
        ids = neighbor_ids(cfg, i, 1.0)
        r = protocols.gtc_target(cfg.positions[ids], cfg.positions[i])
        p = cfg.positions[i]
        assert np.linalg.norm(r.target - p) >= 0.5 * np.linalg.norm(r.alpha_point - p) - 1e-12


@given(st.integers(0, 2**31), st.sampled_from(PLANAR + [ProtocolKind.DGTC]))
def test_rigid_motion_commutes(seed, kind):
    rng = np.random.default_rng(seed)
    d = 3 if kind is ProtocolKind.DGTC else 2
    pts = rng.uniform(-0.45, 0.45, size=(rng.integers(2, 9), d))
    pts[0] = 0.0
    q, shift = random_rigid(rng, d)
    a = protocols.compute_target(kind, pts, pts[0]).target
    b = protocols.compute_target(kind, pts @ q.T + shift, pts[0] @ q.T + shift).target
    assert np.allclose(a @ q.T + shift, b, atol=1e-9)
