import itertools
import random

import pytest

from replaykit.errors import SpecError
from replaykit.interface import (
    Direction, InterfaceSpec, SignalBinding, StartCondition, dump_spec,
    frame_layout, load_spec, masked,
)

BASE = """
clock: {path: tb.clk}
signals:
  - {name: rsp, path: tb.rsp, width: 32, direction: agent}
"""


def test_minimal_spec():
    spec = load_spec(BASE)
    assert len(spec.bindings) == 1
    assert spec.bindings[0].direction == Direction.AGENT
    assert spec.reset is None
    assert spec.start_condition == StartCondition.FIRST_EDGE


def test_reset_defaults_to_after_deassert():
    spec = load_spec(BASE + "reset: {path: tb.rst_n}\n")
    assert spec.start_condition == StartCondition.AFTER_RESET_DEASSERT
    assert spec.reset.active_level == 0


def test_clock_as_binding_rejected():
    text = BASE + "  - {name: c, path: tb.clk, width: 1, direction: dut}\n"
    with pytest.raises(SpecError, match="clock must not be a replayed binding"):
        load_spec(text)


@pytest.mark.parametrize("extra,msg", [
    ("  - {name: rsp, path: tb.other, width: 1, direction: dut}\n", "duplicate binding name"),
    ("  - {name: z, path: tb.z, width: 0, direction: dut}\n", "zero width"),
    ("  - {name: z, path: tb.z, width: 1, direction: sideways}\n", "unknown direction"),
    ("  - {name: z, path: tb.z, width: 4, direction: dut, check: {masked: '101'}}\n", "mask"),
    ("  - {name: z, path: tb.rsp, width: 4, direction: dut}\n", "duplicate capture path"),
])
def test_invalid_specs(extra, msg):
    with pytest.raises(SpecError, match=msg):
        load_spec(BASE + extra)


def test_no_bindings():
    with pytest.raises(SpecError):
        load_spec("clock: {path: c}\nsignals: []\n")


def test_check_policies():
    spec = load_spec(BASE + """\
  - {name: a, path: tb.a, width: 4, direction: dut, check: ignore}
  - {name: b, path: tb.b, width: 4, direction: dut, check: {masked: '1100'}}
  - {name: c, path: tb.c, width: 4, direction: dut, check: {masked: 3}}
""")
    assert spec.binding("a").check.effective_mask(4) == 0
    assert spec.binding("b").check.effective_mask(4) == 0b1100
    assert spec.binding("c").check.effective_mask(4) == 0b0011
    assert spec.binding("rsp").check.effective_mask(32) == 0xFFFFFFFF


def test_widths_1_32_8():
    spec = load_spec("""
clock: {path: clk}
signals:
  - {name: a, path: a, width: 1, direction: dut}
  - {name: b, path: b, width: 32, direction: agent}
  - {name: c, path: c, width: 8, direction: dut}
""")
    layout = frame_layout(spec)
    assert layout.offsets == (0, 1, 33)
    assert layout.width == 41


def test_single_bit_layout():
    spec = InterfaceSpec("clk", (SignalBinding("a", "a", 1, Direction.AGENT),))
    assert frame_layout(spec).offsets == (0,)
    assert frame_layout(spec).width == 1


def _spec(widths):
    return InterfaceSpec("clk", tuple(
        SignalBinding(f"s{i}", f"p{i}", w, Direction.DUT) for i, w in enumerate(widths)))


@pytest.mark.parametrize("seed", range(10))
def test_layout_matches_independent_prefix_sums(seed):
    rng = random.Random(seed)
    widths = [rng.randint(1, 64) for _ in range(10)]
    layout = frame_layout(_spec(widths))
    expected = [0] + list(itertools.accumulate(widths))[:-1]
    assert list(layout.offsets) == expected
    assert layout.width == sum(widths)


def test_layout_permutation():
    widths = [3, 1, 17, 8]
    spec = _spec(widths)
    perm = [2, 0, 3, 1]
    permuted = InterfaceSpec("clk", tuple(spec.bindings[i] for i in perm))
    a, b = frame_layout(spec), frame_layout(permuted)
    assert a.width == b.width
    off_a = dict(zip((x.name for x in spec.bindings), a.offsets))
    off_b = dict(zip((x.name for x in permuted.bindings), b.offsets))
    # each binding's offset is the sum of widths placed before it in its own order
    for name, off in off_b.items():
        before = [x.width for x in permuted.bindings[:[y.name for y in permuted.bindings].index(name)]]
        assert off == sum(before)
    assert set(off_a) == set(off_b)


def test_dump_load_identity():
    spec = load_spec("reset: {path: tb.rst, active_level: 1, start: first_edge}\n" + BASE + """\
  - {name: b, path: tb.b, width: 4, direction: dut, check: {masked: '1100'}}
  - {name: c, path: tb.c, width: 2, direction: dut, check: ignore}
""")
    assert load_spec(dump_spec(spec)) == spec


def test_canonical_config_matches_builtin():
    from pathlib import Path
    from replaykit.sim import boundary_spec
    text = (Path(__file__).parent.parent / "configs" / "interface.yaml").read_text()
    assert load_spec(text) == boundary_spec()


def test_masked_policy_constructor():
    assert masked(5).effective_mask(3) == 5
