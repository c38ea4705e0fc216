import random

import pytest
from hypothesis import given, settings, strategies as st

from replaykit.artifact import DirEntry, Frame, ReplayArtifact
from replaykit.engine import (
    Done, Halted, ReplayEngine, ReplayOptions, Running, init_engine,
)
from replaykit.errors import EngineError
from replaykit.interface import IGNORE, Direction, StartCondition, masked
from replaykit.vcd import Timescale

# layout: req (dut, 4 bits) | ack (agent, 1 bit) | data (dut, 8 bits)
DIRECTORY = (
    DirEntry("req", 4, Direction.DUT, 0),
    DirEntry("ack", 1, Direction.AGENT, 4),
    DirEntry("data", 8, Direction.DUT, 5),
)
FULL = (1 << 13) - 1


def frame(req, ack, data, care=FULL):
    return Frame(req | ack << 4 | data << 5, care)


def artifact(frames, directory=DIRECTORY, width=13):
    return ReplayArtifact(width, 10, Timescale(), StartCondition.FIRST_EDGE, directory, tuple(frames))


def known_frames(n, seed=0):
    rng = random.Random(seed)
    return [frame(rng.getrandbits(4), rng.getrandbits(1), rng.getrandbits(8)) for _ in range(n)]


def expected_observed(a, i):
    f = a.frames[i]
    return {e.name: e.extract(f.data) for e in a.directory if e.direction == Direction.DUT}


def test_empty_artifact_is_done():
    eng = init_engine(artifact([]))
    assert eng.status == Done(True)
    assert eng.report().passed


def test_running_at_zero():
    eng = init_engine(artifact(known_frames(5)))
    assert eng.status == Running(0)


def test_same_initial_state():
    a = artifact(known_frames(5))
    e1, e2 = init_engine(a), init_engine(a)
    assert (e1.status, e1.pending_drive(), e1.report()) == (e2.status, e2.pending_drive(), e2.report())


def test_clean_replay_reproduces_frames():
    a = artifact(known_frames(100))
    eng = ReplayEngine(a)
    for i in range(100):
        res = eng.step(expected_observed(a, i))
        assert res.drive == {"ack": a.directory[1].extract(a.frames[i].data)}
        assert res.done == (i == 99)
    rep = eng.report()
    assert (rep.cycles_executed, rep.mismatch_count, rep.first_mismatch, rep.passed) == (100, 0, None, True)


def test_single_flipped_bit_gives_one_mismatch():
    a = artifact(known_frames(20, seed=3))
    k = 7
    eng = ReplayEngine(a)
    for i in range(20):
        obs = expected_observed(a, i)
        if i == k:
            obs["data"] ^= 0x10
        eng.step(obs)
    assert eng.mismatch_count == 1
    m = eng.mismatches[0]
    assert (m.cycle, m.signal) == (k, "data")
    assert (m.expected ^ m.observed) & m.mask == 0x10
    assert eng.status == Done(False)


def test_no_dut_signals_vacuous():
    directory = (DirEntry("ack", 3, Direction.AGENT, 0),)
    a = artifact([Frame(i % 8, 7) for i in range(6)], directory, 3)
    eng = ReplayEngine(a)
    for _ in range(6):
        eng.step({})
    assert eng.report().passed


def test_checking_disabled():
    a = artifact(known_frames(10))
    eng = ReplayEngine(a, ReplayOptions(check_enabled=False))
    for _ in range(10):
        eng.step({"req": 15, "data": 255})
    assert eng.status == Done(True)
    assert eng.mismatches == []


def test_care_mask_and_policies():
    directory = (
        DirEntry("a", 4, Direction.DUT, 0),
        DirEntry("b", 4, Direction.DUT, 4, IGNORE),
        DirEntry("c", 4, Direction.DUT, 8, masked(0b0011)),
    )
    # care clears bit 3 of a
    a = artifact([Frame(0, 0xFF7)], directory, 12)
    eng = ReplayEngine(a)
    eng.step({"a": 0b1000, "b": 0xF, "c": 0b1100})
    assert eng.status == Done(True)
    eng = ReplayEngine(a)
    eng.step({"a": 0b0100, "b": 0, "c": 0b0001})
    assert sorted(m.signal for m in eng.mismatches) == ["a", "c"]


def test_halt_on_first_mismatch():
    a = artifact(known_frames(10))
    eng = ReplayEngine(a, ReplayOptions(stop_on_first_mismatch=True))
    for i in range(4):
        obs = expected_observed(a, i)
        if i == 3:
            obs["req"] ^= 1
        eng.step(obs)
    assert isinstance(eng.status, Halted)
    rep = eng.report()
    assert rep.cycles_executed == rep.first_mismatch.cycle + 1 == 4
    assert not rep.passed
    # drives freeze at the last consumed frame
    assert eng.pending_drive() == eng.drive_for(3)
    with pytest.raises(EngineError):
        eng.step(expected_observed(a, 4))


def test_step_after_done():
    a = artifact(known_frames(1))
    eng = ReplayEngine(a)
    eng.step(expected_observed(a, 0))
    with pytest.raises(EngineError, match="finished"):
        eng.step(expected_observed(a, 0))


@pytest.mark.parametrize("obs", [
    {"req": 1},
    {"req": 1, "data": 1, "extra": 0},
    {"req": 16, "data": 1},
    {"req": "101", "data": 1},
])
def test_bad_observations(obs):
    with pytest.raises(EngineError):
        ReplayEngine(artifact(known_frames(2))).step(obs)


def test_bit_string_observation():
    a = artifact([frame(0b1010, 0, 0x5A)])
    eng = ReplayEngine(a)
    eng.step({"req": "1010", "data": "01011010"})
    assert eng.status == Done(True)


def test_max_recorded_mismatches():
    a = artifact(known_frames(10))
    eng = ReplayEngine(a, ReplayOptions(max_recorded_mismatches=2))
    for i in range(10):
        obs = expected_observed(a, i)
        obs["req"] ^= 0xF
        eng.step(obs)
    assert eng.mismatch_count == 10
    assert len(eng.mismatches) == 2
    with pytest.raises(ValueError):
        ReplayOptions(max_recorded_mismatches=0)


def test_report_render_stable():
    a = artifact(known_frames(5))

    def go():
        eng = ReplayEngine(a)
        for i in range(5):
            eng.step({"req": 0, "data": 0})
        return eng.report().render()

    assert go() == go()
    assert go().startswith("result      FAIL")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 255)), min_size=30, max_size=30))
def test_mismatch_iff_masked_difference(observed):
    a = artifact(known_frames(30, seed=11))
    eng = ReplayEngine(a, ReplayOptions(max_recorded_mismatches=1000))
    for req, data in observed:
        eng.step({"req": req, "data": data})
    logged = {(m.cycle, m.signal) for m in eng.mismatches}
    expected = set()
    for i, (req, data) in enumerate(observed):
        exp = expected_observed(a, i)
        if exp["req"] != req:
            expected.add((i, "req"))
        if exp["data"] != data:
            expected.add((i, "data"))
    assert logged == expected
