import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dshrpl.detection import (DioVerdict, PdrProbeRecord, PdrThresholdState, ProbeVerdict,
                              RankObservation, classify_dio, confirm_sinkhole, dnr_p, dsn_ni,
                              update_threshold)
from dshrpl.errors import IndeterminateError, NotApplicableError, ProbeError
from dshrpl.sim import AttackerProfile, ScenarioConfig, Simulation
from dshrpl.sim.config import derive_seed


def test_rank_distances():
    assert dnr_p(3, 2) == 1
    assert dnr_p(7, 7) == 0
    assert dnr_p(602, 346) == 256
    assert dsn_ni(2, 3) == 1
    assert dsn_ni(0, 3) == 3
    assert dsn_ni(5, 5) == 0
    with pytest.raises(NotApplicableError):
        dnr_p(3, None)


def test_classify_dio():
    assert classify_dio(RankObservation(3, 2, 0, 3)) is DioVerdict.SUSPICIOUS
    assert classify_dio(RankObservation(3, 2, 2, 3)) is DioVerdict.BENIGN
    assert classify_dio(RankObservation(4, 4, 4, 1)) is DioVerdict.BENIGN


@given(st.integers(1, 60000), st.integers(0, 60000))
def test_rank_zero_is_flagged_when_closer_to_parent(r, gap):
    parent_rank = r - gap if gap < r else r - (r - 1)
    assert dnr_p(r, parent_rank) < r
    assert classify_dio(RankObservation(r, parent_rank, 0, 9)) is DioVerdict.SUSPICIOUS


@given(st.integers(0, 60000), st.integers(1, 5000))
def test_parent_dio_is_never_suspicious(parent_rank, inc):
    node_rank = parent_rank + inc
    assert classify_dio(RankObservation(node_rank, parent_rank, parent_rank, 1)) is DioVerdict.BENIGN


def test_threshold_examples():
    s = PdrThresholdState()
    for _ in range(4):
        s = update_threshold(s, 0.9)
    assert s.sd == 0 and s.pdr_t == pytest.approx(0.9)
    s = update_threshold(update_threshold(PdrThresholdState(), 0.8), 1.0)
    assert (s.pdr_a, s.sd, s.pdr_t) == pytest.approx((0.9, 0.1, 0.8))
    assert (s.lt_p, s.ut_p) == pytest.approx((0.7, 1.0))
    one = update_threshold(PdrThresholdState(), 0.37)
    assert one.pdr_t == 0.37
    with pytest.raises(ValueError):
        update_threshold(s, 1.2)


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_threshold_never_exceeds_mean(samples):
    s = PdrThresholdState()
    for x in samples:
        s = update_threshold(s, x)
    assert s.pdr_t <= s.pdr_a + 1e-15
    assert s.lt_p <= s.ut_p
    assert s.pdr_a == pytest.approx(np.mean(samples), abs=1e-12)


def test_abnormal_flag():
    s = update_threshold(update_threshold(PdrThresholdState(), 0.8), 1.0)
    assert s.is_abnormal(0.5)
    assert not s.is_abnormal(0.85)


def test_confirm_sinkhole():
    s = update_threshold(update_threshold(PdrThresholdState(), 0.8), 1.0)
    assert confirm_sinkhole(PdrProbeRecord((0, 1), 10, 0), s) is ProbeVerdict.CONFIRMED
    assert confirm_sinkhole(PdrProbeRecord((0, 1), 10, 10), s) is ProbeVerdict.CLEARED
    exact = update_threshold(PdrThresholdState(), 0.5)
    assert confirm_sinkhole(PdrProbeRecord((0, 1), 10, 5), exact) is ProbeVerdict.CLEARED
    with pytest.raises(IndeterminateError):
        confirm_sinkhole(PdrProbeRecord((0, 1), 0, 0), s)
    with pytest.raises(IndeterminateError):
        confirm_sinkhole(PdrProbeRecord((0, 1), 10, 3), PdrThresholdState())
    with pytest.raises(ValueError):
        PdrProbeRecord((0, 1), 3, 4)


# --- probing over the simulator --------------------------------------------------

CHAIN = ScenarioConfig(num_nodes=4, edges=((0, 1), (1, 2), (2, 3)), attackers=(), duration=30, seed=5)


def chain_sim(drop=None, seed=5):
    sim = Simulation(CHAIN.replace(seed=seed))
    if drop is not None:
        sim.attackers[2] = AttackerProfile(2, 0, drop, 0)
    return sim


def test_clean_route_probe():
    rec = chain_sim().probe((0, 1, 2, 3), 10)
    assert (rec.mc_sent, rec.acks_received, rec.pdr) == (10, 10, 1.0)


def test_full_drop_at_hop_two():
    sim = chain_sim(drop=1.0)
    rec = sim.probe((0, 1, 2, 3), 10)
    assert rec.pdr == 0.0
    drops = [r for r in sim.trace.select("attack") if r.detail == "RPL_MC drop"]
    assert len(drops) == 10 and all(r.actor == 2 for r in drops)
    assert not list(sim.trace.select("rx", 3))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_partial_drop_matches_replayed_decisions(seed):
    sim = chain_sim(drop=0.6, seed=seed)
    rec = sim.probe((0, 1, 2, 3), 10)
    passes = sum(1 for r in sim.trace.select("attack", 2) if r.detail == "RPL_MC pass")
    assert rec.acks_received == passes
    replay = random.Random(derive_seed(seed, "drops"))
    assert rec.acks_received == sum(1 for _ in range(10) if not replay.random() < 0.6)


def test_unreachable_route_is_a_probe_error():
    with pytest.raises(ProbeError):
        chain_sim().probe((0, 2, 3))
    with pytest.raises(ProbeError):
        chain_sim().probe((1, 2))
