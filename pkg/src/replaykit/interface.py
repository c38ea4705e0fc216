"""Replayed-boundary declaration loaded from YAML.

Schema::

    clock:  {path: tb.clk, edge: rising}
    reset:  {path: tb.rst_n, active_level: 0, start: after_deassert}   # optional
    signals:
      - {name: pm_req, path: tb.gpu.pm_req, width: 1, direction: dut}
      - {name: pm_ack, path: tb.gpu.pm_ack, width: 1, direction: agent}
      - {name: addr, path: tb.gpu.addr, width: 8, direction: dut,
         check: {masked: "11110000"}}

``direction`` is ``agent`` (re-driven on replay) or ``dut`` (observed and
checked).  ``check`` is ``strict`` (default), ``ignore`` or
``{masked: <bits>}`` where the mask is a binary string of exactly ``width``
digits, most significant first, or an integer that fits in ``width`` bits.
The clock is regenerated on replay and must never appear among ``signals``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import yaml

from .errors import SpecError


class Direction(enum.IntEnum):
    AGENT = 0
    DUT = 1


class StartCondition(enum.IntEnum):
    FIRST_EDGE = 0
    AFTER_RESET_DEASSERT = 1


_DIRECTIONS = {
    "agent": Direction.AGENT, "agent_driven": Direction.AGENT, "AgentDriven": Direction.AGENT,
    "dut": Direction.DUT, "dut_driven": Direction.DUT, "DutDriven": Direction.DUT,
}
_STARTS = {
    "first_edge": StartCondition.FIRST_EDGE,
    "after_deassert": StartCondition.AFTER_RESET_DEASSERT,
    "after_reset_deassert": StartCondition.AFTER_RESET_DEASSERT,
}


@dataclass(frozen=True)
class CheckPolicy:
    kind: str = "strict"  # strict | ignore | masked
    mask: Optional[int] = None

    def effective_mask(self, width: int) -> int:
        if self.kind == "strict":
            return (1 << width) - 1
        if self.kind == "ignore":
            return 0
        return self.mask

    @property
    def code(self) -> int:
        return {"strict": 0, "ignore": 1, "masked": 2}[self.kind]


STRICT = CheckPolicy("strict")
IGNORE = CheckPolicy("ignore")


def masked(mask: int) -> CheckPolicy:
    return CheckPolicy("masked", mask)


@dataclass(frozen=True)
class SignalBinding:
    name: str
    capture_path: str
    width: int
    direction: Direction
    check: CheckPolicy = STRICT


@dataclass(frozen=True)
class ResetSpec:
    capture_path: str
    active_level: int = 0
    start_condition: StartCondition = StartCondition.AFTER_RESET_DEASSERT


@dataclass(frozen=True)
class InterfaceSpec:
    clock: str
    bindings: tuple
    reset: Optional[ResetSpec] = None

    def __post_init__(self):
        validate_spec(self)

    @property
    def start_condition(self) -> StartCondition:
        return self.reset.start_condition if self.reset else StartCondition.FIRST_EDGE

    def binding(self, name: str) -> SignalBinding:
        for b in self.bindings:
            if b.name == name:
                return b
        raise SpecError(f"no binding named {name!r}")


@dataclass(frozen=True)
class FrameLayout:
    offsets: tuple
    width: int


def validate_spec(spec: InterfaceSpec) -> None:
    if not spec.bindings:
        raise SpecError("interface needs at least one signal binding")
    names, paths = set(), set()
    for b in spec.bindings:
        if b.width < 1:
            raise SpecError(f"signal {b.name!r} has zero width")
        if b.name in names:
            raise SpecError(f"duplicate binding name {b.name!r}")
        if b.capture_path in paths:
            raise SpecError(f"duplicate capture path {b.capture_path!r}")
        if b.capture_path == spec.clock:
            raise SpecError("clock must not be a replayed binding")
        if b.check.kind == "masked" and not 0 <= b.check.mask < (1 << b.width):
            raise SpecError(f"mask for {b.name!r} does not fit in {b.width} bits")
        names.add(b.name)
        paths.add(b.capture_path)
    if spec.reset is not None and spec.reset.active_level not in (0, 1):
        raise SpecError("reset active_level must be 0 or 1")


def frame_layout(spec: InterfaceSpec) -> FrameLayout:
    offsets = []
    pos = 0
    for b in spec.bindings:
        offsets.append(pos)
        pos += b.width
    return FrameLayout(tuple(offsets), pos)


def _parse_check(raw, width, name) -> CheckPolicy:
    if raw is None or raw == "strict":
        return STRICT
    if raw == "ignore":
        return IGNORE
    if isinstance(raw, dict) and set(raw) == {"masked"}:
        m = raw["masked"]
        if isinstance(m, str):
            digits = m.replace("_", "")
            if len(digits) != width or not set(digits) <= {"0", "1"}:
                raise SpecError(f"mask for {name!r} must be {width} binary digits, got {m!r}")
            return masked(int(digits, 2))
        if isinstance(m, int) and not isinstance(m, bool):
            if not 0 <= m < (1 << width):
                raise SpecError(f"mask for {name!r} does not fit in {width} bits")
            return masked(m)
    raise SpecError(f"bad check policy for {name!r}: {raw!r}")


def spec_from_dict(doc) -> InterfaceSpec:
    if not isinstance(doc, dict):
        raise SpecError("interface config must be a mapping")
    clock = doc.get("clock")
    if isinstance(clock, dict):
        edge = clock.get("edge", "rising")
        if edge != "rising":
            raise SpecError(f"only rising active edges are supported, got {edge!r}")
        clock = clock.get("path")
    if not isinstance(clock, str):
        raise SpecError("missing clock path")

    reset = None
    if doc.get("reset") is not None:
        r = doc["reset"]
        if not isinstance(r, dict) or "path" not in r:
            raise SpecError("reset needs a path")
        start = r.get("start", "after_deassert")
        if start not in _STARTS:
            raise SpecError(f"unknown reset start condition {start!r}")
        reset = ResetSpec(r["path"], int(r.get("active_level", 0)), _STARTS[start])

    bindings = []
    for i, s in enumerate(doc.get("signals") or []):
        try:
            name, path, width, direction = s["name"], s["path"], s["width"], s["direction"]
        except (KeyError, TypeError):
            raise SpecError(f"signal entry {i} needs name, path, width and direction") from None
        if direction not in _DIRECTIONS:
            raise SpecError(f"unknown direction {direction!r} for {name!r}")
        if not isinstance(width, int) or width < 1:
            raise SpecError(f"signal {name!r} has zero width" if width == 0 else f"bad width for {name!r}")
        check = _parse_check(s.get("check"), width, name)
        bindings.append(SignalBinding(name, path, width, _DIRECTIONS[direction], check))
    return InterfaceSpec(clock, tuple(bindings), reset)


def load_spec(text: str) -> InterfaceSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SpecError(f"invalid YAML: {e}") from None
    return spec_from_dict(doc)


def spec_to_dict(spec: InterfaceSpec) -> dict:
    doc = {"clock": {"path": spec.clock, "edge": "rising"}}
    if spec.reset:
        start = "after_deassert" if spec.reset.start_condition else "first_edge"
        doc["reset"] = {"path": spec.reset.capture_path,
                        "active_level": spec.reset.active_level, "start": start}
    signals = []
    for b in spec.bindings:
        entry = {"name": b.name, "path": b.capture_path, "width": b.width,
                 "direction": "agent" if b.direction == Direction.AGENT else "dut"}
        if b.check.kind == "masked":
            entry["check"] = {"masked": format(b.check.mask, f"0{b.width}b")}
        else:
            entry["check"] = b.check.kind
        signals.append(entry)
    doc["signals"] = signals
    return doc


def dump_spec(spec: InterfaceSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False)
