"""Cycle-ordered replay artifact: encoding, binary format, hex memory-init.

Binary layout (little-endian)::

    magic        4s   b"RPAF"
    version      u16  1
    frame_width  u32  W
    cycle_count  u64  N
    clock_period u64  ticks
    timescale    u8   unit_index * 3 + magnitude_index (s, ms, us, ns, ps, fs / 1, 10, 100)
    start        u8   0 = first edge, 1 = first edge after reset deassertion
    dir_count    u32
    directory    dir_count x {u16 name_len, name (utf-8), u32 width,
                              u8 direction (0 agent, 1 dut),
                              u8 check (0 strict, 1 ignore, 2 masked),
                              [ceil(width/8) mask bytes, LSB first, masked only],
                              u32 offset}
    data frames  N x ceil(W/8) bytes, LSB first
    care frames  N x ceil(W/8) bytes, LSB first

Frames are byte aligned and uncompressed so any cycle can be located in
O(1).  Sampling is strictly-before: the frame for edge ``t`` holds each
signal's value from its last change at a time ``< t``, so a value changing
at the same tick as the edge is not seen by that edge.
"""

from __future__ import annotations

import enum
import logging
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ArtifactFormatError, EncodeError, PeriodError
from .interface import (
    IGNORE, STRICT, CheckPolicy, Direction, InterfaceSpec, StartCondition,
    frame_layout, masked,
)
from .vcd import Timescale, WaveformDb, rising_edges, sampler

log = logging.getLogger(__name__)

MAGIC = b"RPAF"
VERSION = 1
WORD_WIDTHS = (8, 16, 32, 64)

_HEADER = struct.Struct("<4sHIQQBBI")


class XPolicy(enum.Enum):
    ERROR = "error"
    ZERO_WITH_WARNING = "zero"


@dataclass(frozen=True)
class DirEntry:
    name: str
    width: int
    direction: Direction
    offset: int
    check: CheckPolicy = STRICT

    @property
    def field_mask(self) -> int:
        return ((1 << self.width) - 1) << self.offset

    def extract(self, word: int) -> int:
        return (word >> self.offset) & ((1 << self.width) - 1)


@dataclass(frozen=True)
class Frame:
    data: int
    care: int


@dataclass(frozen=True)
class ReplayArtifact:
    frame_width: int
    clock_period: int
    timescale: Timescale
    start_condition: StartCondition
    directory: tuple
    frames: tuple = ()
    version: int = VERSION

    def __post_init__(self):
        validate_artifact(self)

    @property
    def cycle_count(self) -> int:
        return len(self.frames)

    @property
    def agent_mask(self) -> int:
        m = 0
        for e in self.directory:
            if e.direction == Direction.AGENT:
                m |= e.field_mask
        return m

    @property
    def stride(self) -> int:
        return (self.frame_width + 7) // 8

    def entry(self, name: str) -> DirEntry:
        for e in self.directory:
            if e.name == name:
                return e
        raise KeyError(name)


def validate_artifact(a: ReplayArtifact) -> None:
    pos = 0
    names = set()
    for e in a.directory:
        if e.width < 1:
            raise ArtifactFormatError(f"directory entry {e.name!r} has zero width")
        if e.offset != pos:
            raise ArtifactFormatError(
                f"directory entry {e.name!r} at offset {e.offset}, expected {pos}")
        if e.name in names:
            raise ArtifactFormatError(f"duplicate directory name {e.name!r}")
        names.add(e.name)
        pos += e.width
    if pos != a.frame_width:
        raise ArtifactFormatError(
            f"directory covers {pos} bits but frame width is {a.frame_width}")
    if a.frames and a.clock_period <= 0:
        raise ArtifactFormatError("clock period must be positive when frames are present")
    limit = 1 << a.frame_width
    agent = a.agent_mask
    for i, f in enumerate(a.frames):
        if not (0 <= f.data < limit and 0 <= f.care < limit):
            raise ArtifactFormatError(f"frame {i} wider than {a.frame_width} bits")
        if f.care & agent != agent:
            raise ArtifactFormatError(f"frame {i} has don't-care bits on agent-driven signals")


def check_fixed_period(edge_times: Sequence[int], period: Optional[int] = None,
                       tolerance: int = 0) -> int:
    """Return the constant clock period implied by ``edge_times``.

    With fewer than two edges the period must be given explicitly.  Every
    interval must match the first within ``tolerance`` ticks; the first
    interval is what gets recorded.
    """
    if len(edge_times) < 2:
        if period is None or period <= 0:
            raise EncodeError("need at least two clock edges or an explicit period")
        return period
    nominal = edge_times[1] - edge_times[0]
    if period is not None and nominal != period:
        raise PeriodError(1, period, nominal)
    for i in range(2, len(edge_times)):
        d = edge_times[i] - edge_times[i - 1]
        if abs(d - nominal) > tolerance:
            raise PeriodError(i, nominal, d)
    return nominal


def _qualifying_edges(db: WaveformDb, spec: InterfaceSpec, edges: list[int]) -> list[int]:
    if spec.reset is None or spec.start_condition == StartCondition.FIRST_EDGE:
        return edges
    rst = sampler(db, spec.reset.capture_path)
    inactive = str(1 - spec.reset.active_level)
    for k, t in enumerate(edges):
        if rst(t) == inactive:
            return edges[k:]
    return []


def directory_for(spec: InterfaceSpec) -> tuple:
    layout = frame_layout(spec)
    return tuple(
        DirEntry(b.name, b.width, b.direction, off, b.check)
        for b, off in zip(spec.bindings, layout.offsets)
    )


def encode_artifact(db: WaveformDb, spec: InterfaceSpec,
                    x_policy: XPolicy = XPolicy.ERROR,
                    period: Optional[int] = None,
                    period_tolerance: int = 0) -> ReplayArtifact:
    for b in spec.bindings:
        try:
            d = db.decl(b.capture_path)
        except Exception:
            raise EncodeError(f"signal {b.capture_path!r} not found in capture") from None
        if d.width != b.width:
            raise EncodeError(
                f"width mismatch for {b.name!r}: interface says {b.width}, capture has {d.width}")
    try:
        db.decl(spec.clock)
        if spec.reset:
            db.decl(spec.reset.capture_path)
    except Exception as e:
        raise EncodeError(str(e)) from None

    edges = _qualifying_edges(db, spec, rising_edges(db, spec.clock))
    if not edges:
        raise EncodeError("no qualifying clock edges in capture")
    clock_period = check_fixed_period(edges, period, period_tolerance)

    directory = directory_for(spec)
    samplers = [sampler(db, b.capture_path) for b in spec.bindings]
    frames = []
    zeroed = 0
    for cycle, t in enumerate(edges):
        data = care = 0
        for entry, sample in zip(directory, samplers):
            bits = sample(t)
            value = 0
            known = 0
            for ch in bits:
                value <<= 1
                known <<= 1
                if ch == "1":
                    value |= 1
                    known |= 1
                elif ch == "0":
                    known |= 1
            full = (1 << entry.width) - 1
            if entry.direction == Direction.AGENT and known != full:
                if x_policy == XPolicy.ERROR:
                    raise EncodeError(
                        f"agent-driven signal {entry.name!r} is {bits!r} (x/z) at cycle {cycle}")
                zeroed += 1
                known = full
            data |= value << entry.offset
            care |= known << entry.offset
        frames.append(Frame(data, care))
    if zeroed:
        log.warning("%d agent-driven sample(s) had x/z bits; driven as 0", zeroed)

    return ReplayArtifact(
        frame_width=frame_layout(spec).width,
        clock_period=clock_period,
        timescale=db.timescale,
        start_condition=spec.start_condition,
        directory=directory,
        frames=tuple(frames),
    )


def serialize_artifact(a: ReplayArtifact) -> bytes:
    out = bytearray(_HEADER.pack(
        MAGIC, a.version, a.frame_width, a.cycle_count, a.clock_period,
        a.timescale.code, int(a.start_condition), len(a.directory)))
    for e in a.directory:
        name = e.name.encode("utf-8")
        out += struct.pack("<H", len(name)) + name
        out += struct.pack("<IBB", e.width, int(e.direction), e.check.code)
        if e.check.kind == "masked":
            out += e.check.mask.to_bytes((e.width + 7) // 8, "little")
        out += struct.pack("<I", e.offset)
    stride = a.stride
    for f in a.frames:
        out += f.data.to_bytes(stride, "little")
    for f in a.frames:
        out += f.care.to_bytes(stride, "little")
    return bytes(out)


class _Reader:
    def __init__(self, buf: bytes, pos: int = 0):
        self.buf = buf
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ArtifactFormatError("truncated stream")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def deserialize_artifact(buf: bytes) -> ReplayArtifact:
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise ArtifactFormatError("bad magic")
    r = _Reader(buf)
    magic, version, width, count, period, ts_code, start, ndir = r.unpack(_HEADER.format)
    if version != VERSION:
        raise ArtifactFormatError(f"unsupported version {version}")
    try:
        timescale = Timescale.from_code(ts_code)
        start_condition = StartCondition(start)
    except Exception:
        raise ArtifactFormatError("bad header field") from None

    directory = []
    for _ in range(ndir):
        (nlen,) = r.unpack("<H")
        try:
            name = r.take(nlen).decode("utf-8")
        except UnicodeDecodeError:
            raise ArtifactFormatError("directory name is not utf-8") from None
        ewidth, direction, check = r.unpack("<IBB")
        if direction not in (0, 1) or check not in (0, 1, 2):
            raise ArtifactFormatError(f"bad directory entry {name!r}")
        if check == 2:
            policy = masked(int.from_bytes(r.take((ewidth + 7) // 8), "little"))
        else:
            policy = IGNORE if check == 1 else STRICT
        (offset,) = r.unpack("<I")
        directory.append(DirEntry(name, ewidth, Direction(direction), offset, policy))

    stride = (width + 7) // 8
    if len(buf) - r.pos < 2 * stride * count:
        raise ArtifactFormatError("truncated stream")
    if len(buf) - r.pos > 2 * stride * count:
        raise ArtifactFormatError("trailing bytes after care frames")
    data = [int.from_bytes(r.take(stride), "little") for _ in range(count)]
    care = [int.from_bytes(r.take(stride), "little") for _ in range(count)]
    try:
        return ReplayArtifact(
            frame_width=width,
            clock_period=period,
            timescale=timescale,
            start_condition=start_condition,
            directory=tuple(directory),
            frames=tuple(Frame(d, c) for d, c in zip(data, care)),
            version=version,
        )
    except ArtifactFormatError:
        raise
    except Exception as e:  # invalid entry widths etc
        raise ArtifactFormatError(str(e)) from None


def load_artifact(path) -> ReplayArtifact:
    with open(path, "rb") as f:
        return deserialize_artifact(f.read())


def save_artifact(a: ReplayArtifact, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize_artifact(a))


def hex_words(value: int, width: int, word_width: int) -> list[str]:
    """Split a ``width``-bit value into hex words, least significant first."""
    nwords = -(-width // word_width)
    digits = word_width // 4
    mask = (1 << word_width) - 1
    return [format((value >> (k * word_width)) & mask, f"0{digits}x") for k in range(nwords)]


def emit_hex(a: ReplayArtifact, word_width: int = 32, which: str = "data") -> str:
    """Memory-init text for the data (or ``which="care"``) frames.

    Frame-major, one word per line; each frame is zero-padded to a whole
    number of words and split least-significant word first.
    """
    if word_width not in WORD_WIDTHS:
        raise ValueError(f"word width must be one of {WORD_WIDTHS}")
    lines = []
    for f in a.frames:
        lines.extend(hex_words(f.data if which == "data" else f.care, a.frame_width, word_width))
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class Footprint:
    rom_bits: int
    naive_bits: int
    savings_bits: int


def footprint_report(a: ReplayArtifact, captured_clock_count: int = 1) -> Footprint:
    """ROM size with regenerated clocks versus storing each clock's two
    transitions per cycle alongside the frames."""
    if captured_clock_count < 0:
        raise ValueError("captured_clock_count must be >= 0")
    n, w = a.cycle_count, a.frame_width
    rom = 2 * n * w
    naive = rom + 2 * n * captured_clock_count
    return Footprint(rom, naive, naive - rom)


def render_header(a: ReplayArtifact) -> str:
    start = "after reset deassert" if a.start_condition else "first edge"
    lines = [
        f"version       {a.version}",
        f"frame width   {a.frame_width} bits ({a.stride} bytes/frame)",
        f"cycles        {a.cycle_count}",
        f"clock period  {a.clock_period} x {a.timescale}",
        f"start         {start}",
        "directory:",
    ]
    for e in a.directory:
        direction = "agent" if e.direction == Direction.AGENT else "dut"
        check = e.check.kind
        if e.check.kind == "masked":
            check += f"({e.check.mask:#x})"
        lines.append(f"  [{e.offset:>4} +{e.width:<3}] {e.name:<16} {direction:<5} {check}")
    return "\n".join(lines) + "\n"


def render_frames(a: ReplayArtifact, start: int = 0, stop: Optional[int] = None) -> str:
    stop = a.cycle_count if stop is None else min(stop, a.cycle_count)
    lines = []
    for i in range(max(start, 0), stop):
        f = a.frames[i]
        fields = []
        for e in a.directory:
            v = e.extract(f.data)
            c = e.extract(f.care)
            digits = -(-e.width // 4)
            if c == (1 << e.width) - 1:
                fields.append(f"{e.name}={v:0{digits}x}")
            elif c == 0:
                fields.append(f"{e.name}=?")
            else:
                fields.append(f"{e.name}={v:0{digits}x}/{c:0{digits}x}")
        lines.append(f"{i:6d}: " + " ".join(fields))
    return "".join(line + "\n" for line in lines)
