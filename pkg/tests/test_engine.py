import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gathersim.engine import (ConfigurationRejected, RunConfig, Scheduler, SchedulerPolicy, Trace,
                              activation_sequence, default_max_rounds, run, step)
from gathersim.generators import random_connected, regular_polygon
from gathersim.near_gathering import NearGatherParams
from gathersim.protocols import GatheringRule, ProtocolSpec
from gathersim.swarm import Configuration

GTC = ProtocolSpec("GTC")


def pair(dist=0.8, tau=0.0):
    return Configuration(np.array([(0.0, 0.0), (dist, 0.0)]), 1.0, tau)


def test_step_examples():
    after = step(pair(), GatheringRule(GTC), [0, 1])
    assert np.allclose(after.positions, [(0.4, 0), (0.4, 0)])
    assert np.all(after.positions == after.positions[0])
    after = step(pair(), GatheringRule(GTC), [0])
    assert np.array_equal(after.positions[1], (0.8, 0))
    assert step(pair(), GatheringRule(GTC), []) == pair()


def test_run_two_robots_gathers_in_one_round():
    tr = run(pair(), RunConfig(protocol=GTC))
    assert tr.terminated and tr.rounds == 1 and tr.records[-1].diameter == 0.0


def test_round_robin_epoch_length():
    pol = SchedulerPolicy(mode="SSYNC", policy="ROUND_ROBIN_SINGLETON", fairness_k=3)
    c = Configuration(np.array([(0, 0), (1.0, 0), (2.0, 0)], float), 1.0, 2 / 3)
    tr = run(c, RunConfig(near=NearGatherParams(), scheduler=pol, termination="NEAR_GATHER", max_rounds=9))
    epochs = [r.epoch for r in tr.records]
    assert epochs[:7] == [0, 0, 0, 1, 1, 1, 2]


def test_near_gather_run_end_to_end():
    c = Configuration(random_connected(12, 3.0, 2, 5), 1.0, 2 / 3)
    pol = SchedulerPolicy(mode="SSYNC", policy="RANDOM_SUBSET", p=0.5, seed=3)
    tr = run(c, RunConfig(near=NearGatherParams(), scheduler=pol, termination="NEAR_GATHER"))
    assert tr.terminated
    assert tr.records[-1].diameter <= 0.5
    assert not any(r.collision for r in tr.records)
    assert all(r.connected_V for r in tr.records)


def test_activation_examples():
    assert activation_sequence(SchedulerPolicy(), 5, 7) == set(range(5))
    rr = SchedulerPolicy(mode="SSYNC", policy="ROUND_ROBIN_SINGLETON", fairness_k=4)
    assert [activation_sequence(rr, 4, r) for r in range(4)] == [{0}, {1}, {2}, {3}]


@given(st.integers(1, 6), st.floats(0.0, 1.0), st.integers(0, 2**63), st.integers(2, 12))
def test_random_subset_is_fair(k, p, seed, n):
    pol = SchedulerPolicy(mode="SSYNC", policy="RANDOM_SUBSET", p=p, seed=seed, fairness_k=k)
    sched = Scheduler(pol, n)
    last = np.full(n, -1)
    for r in range(30):
        active = sched.next()
        last[active] = r
        assert np.all(r - last < k)


def test_adversary_freezes_boundary():
    pts = np.array([(-1, 0), (1, 0), (0, 0.2), (0.1, -0.1)], float)
    pol = SchedulerPolicy(mode="SSYNC", policy="ADVERSARY_FREEZE_BOUNDARY", fairness_k=3)
    sched = Scheduler(pol, 4)
    assert list(sched.next(pts)) == [2, 3]
    assert list(sched.next(pts)) == [2, 3]
    assert list(sched.next(pts)) == [0, 1, 2, 3]


def test_scheduler_determinism():
    pol = SchedulerPolicy(mode="SSYNC", policy="RANDOM_SUBSET", seed=99)
    a = [tuple(activation_sequence(pol, 9, r)) for r in range(10)]
    b = [tuple(activation_sequence(pol, 9, r)) for r in range(10)]
    assert a == b


def test_preconditions():
    with pytest.raises(ConfigurationRejected):
        run(pair(), RunConfig(protocol=GTC, scheduler=SchedulerPolicy(mode="SSYNC")))
    far = Configuration(np.array([(0, 0), (3, 0)], float), 1.0, 2 / 3)
    with pytest.raises(ConfigurationRejected):
        run(far, RunConfig(near=NearGatherParams(), termination="NEAR_GATHER",
                           scheduler=SchedulerPolicy(mode="SSYNC")))
    dup = Configuration(np.array([(0, 0), (0, 0)], float), 1.0, 2 / 3)
    with pytest.raises(ConfigurationRejected):
        run(dup, RunConfig(near=NearGatherParams(), termination="NEAR_GATHER",
                           scheduler=SchedulerPolicy(mode="SSYNC")))
    with pytest.raises(ValueError):
        RunConfig(protocol=GTC, max_rounds=0)


def test_collapse_round_gathers_exactly():
    c = Configuration(np.random.default_rng(4).uniform(0, 0.3, size=(9, 2)))
    tr = run(c, RunConfig(protocol=GTC))
    assert tr.terminated and tr.rounds == 1


def test_trace_rows_and_csv_round_trip():
    tr = run(Configuration(regular_polygon(8)), RunConfig(protocol=GTC))
    text = tr.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "round,epoch,sec_radius,diameter,min_pairwise,n_active,connected_V,collision"
    assert len(lines) == tr.rounds + 2
    back = Trace.from_csv(text)
    assert back.to_csv() == text


@pytest.mark.parametrize("policy", [dict(mode="FSYNC"), dict(mode="SSYNC", policy="RANDOM_SUBSET", seed=5),
                                    dict(mode="SSYNC", policy="ADVERSARY_FREEZE_BOUNDARY")])
def test_deterministic_across_runs_and_threads(policy):
    c = Configuration(random_connected(14, 3.0, 2, 11), 1.0, 2 / 3)
    pol = SchedulerPolicy(**policy)
    if pol.mode.value == "FSYNC":
        rcs = [RunConfig(protocol=GTC, jobs=j) for j in (1, 1, 4)]
    else:
        rcs = [RunConfig(near=NearGatherParams(), scheduler=pol, termination="NEAR_GATHER", jobs=j)
               for j in (1, 1, 4)]
    texts = [run(c, rc).to_csv() for rc in rcs]
    assert texts[0] == texts[1] == texts[2]


def test_default_budget_formula():
    rc = RunConfig(protocol=GTC)
    lam = GTC.lam
    assert default_max_rounds(rc, 2.0) == 10 * int(np.ceil(256 * np.pi * 4 / lam ** 3))
