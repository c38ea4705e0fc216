"""Value Change Dump reading, writing and sampling.

Values are kept as 4-state strings, most significant bit first, drawn from
``"01xz"``.  Tick times are retained exactly as integers; no unit conversion
happens inside a :class:`WaveformDb`.
"""

from __future__ import annotations

import bisect
import logging
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import VcdError

log = logging.getLogger(__name__)

UNITS = ("s", "ms", "us", "ns", "ps", "fs")
MAGNITUDES = (1, 10, 100)
FOUR_STATES = frozenset("01xz")

# Kinds whose values are not bit vectors.
REJECTED_KINDS = frozenset({"real", "realtime", "event", "string", "shortreal"})
ACCEPTED_KINDS = frozenset({
    "wire", "reg", "logic", "bit", "integer", "tri", "tri0", "tri1", "triand",
    "trior", "trireg", "wand", "wor", "supply0", "supply1", "time", "parameter",
})

_TIMESCALE_RE = re.compile(r"^(1|10|100)\s*(s|ms|us|ns|ps|fs)$")


@dataclass(frozen=True)
class Timescale:
    magnitude: int = 1
    unit: str = "ns"

    def __post_init__(self):
        if self.magnitude not in MAGNITUDES:
            raise VcdError(f"timescale magnitude must be 1, 10 or 100, not {self.magnitude}")
        if self.unit not in UNITS:
            raise VcdError(f"unknown timescale unit {self.unit!r}")

    def __str__(self):
        return f"{self.magnitude}{self.unit}"

    @classmethod
    def parse(cls, text: str) -> "Timescale":
        m = _TIMESCALE_RE.match(text.strip())
        if not m:
            raise VcdError(f"malformed header: bad timescale {text.strip()!r}")
        return cls(int(m.group(1)), m.group(2))

    @property
    def code(self) -> int:
        """Single-byte code: unit index * 3 + magnitude index."""
        return UNITS.index(self.unit) * 3 + MAGNITUDES.index(self.magnitude)

    @classmethod
    def from_code(cls, code: int) -> "Timescale":
        unit, mag = divmod(code, 3)
        if unit >= len(UNITS):
            raise VcdError(f"bad timescale code {code}")
        return cls(MAGNITUDES[mag], UNITS[unit])


@dataclass(frozen=True)
class SignalDecl:
    idcode: str
    path: str
    width: int
    kind: str = "wire"

    def __post_init__(self):
        if self.width < 1:
            raise VcdError(f"signal {self.path!r} has width {self.width}")


@dataclass(frozen=True)
class WaveformDb:
    """Canonical value-change database.

    ``changes`` maps each signal path to a tuple of ``(tick, value)`` pairs
    with strictly increasing ticks.
    """

    timescale: Timescale
    decls: tuple = ()
    changes: Mapping[str, tuple] = field(default_factory=dict)

    def decl(self, path: str) -> SignalDecl:
        for d in self.decls:
            if d.path == path:
                return d
        raise VcdError(f"unknown signal {path!r}")

    @property
    def paths(self) -> list[str]:
        return [d.path for d in self.decls]

    def end_time(self) -> int:
        return max((ch[-1][0] for ch in self.changes.values() if ch), default=0)


class WaveformBuilder:
    """Incrementally assemble a canonical :class:`WaveformDb`.

    Later writes at an already-recorded timestamp replace the earlier one.
    """

    def __init__(self, timescale: Timescale | None = None):
        self.timescale = timescale or Timescale()
        self._decls: list[SignalDecl] = []
        self._by_id: dict[str, SignalDecl] = {}
        self._paths: set[str] = set()
        self._changes: dict[str, list] = {}

    def declare(self, path: str, width: int, idcode: str | None = None, kind: str = "wire") -> SignalDecl:
        if idcode is None:
            idcode = idcode_for(len(self._decls))
        if idcode in self._by_id:
            raise VcdError(f"duplicate idcode {idcode!r}")
        if path in self._paths:
            raise VcdError(f"duplicate signal path {path!r}")
        d = SignalDecl(idcode, path, width, kind)
        self._decls.append(d)
        self._by_id[idcode] = d
        self._paths.add(path)
        self._changes[path] = []
        return d

    def by_idcode(self, idcode: str) -> SignalDecl:
        try:
            return self._by_id[idcode]
        except KeyError:
            raise VcdError(f"unknown idcode {idcode!r}") from None

    def change(self, path: str, time: int, value: str) -> None:
        lst = self._changes[path]
        if lst and lst[-1][0] == time:
            lst[-1] = (time, value)
        elif lst and lst[-1][0] > time:
            raise VcdError(f"time goes backwards for {path!r}: {time} < {lst[-1][0]}")
        else:
            lst.append((time, value))

    def build(self) -> WaveformDb:
        return WaveformDb(
            self.timescale,
            tuple(self._decls),
            {p: tuple(ch) for p, ch in self._changes.items()},
        )


def idcode_for(index: int) -> str:
    """Compact printable identifier for the ``index``-th variable."""
    chars = [chr(c) for c in range(33, 127)]
    base = len(chars)
    out = []
    while True:
        index, r = divmod(index, base)
        out.append(chars[r])
        if index == 0:
            break
        index -= 1
    return "".join(reversed(out))


def extend_value(bits: str, width: int) -> str:
    """Left-extend a VCD vector value to ``width`` bits.

    0 and 1 extend with 0; x and z extend with themselves.
    """
    if len(bits) > width:
        raise VcdError(f"vector value {bits!r} longer than declared width {width}")
    if len(bits) == width:
        return bits
    fill = bits[0] if bits[0] in "xz" else "0"
    return fill * (width - len(bits)) + bits


def _skip_to_end(tokens, i):
    n = len(tokens)
    while i < n and tokens[i] != "$end":
        i += 1
    if i >= n:
        raise VcdError("malformed header: missing $end")
    return i + 1


def parse_vcd(text: str) -> WaveformDb:
    tokens = text.split()
    n = len(tokens)
    i = 0
    scopes: list[str] = []
    timescale = None
    builder = None
    pending: list[tuple] = []

    while True:
        if i >= n:
            raise VcdError("malformed header: missing $enddefinitions")
        tok = tokens[i]
        if tok == "$timescale":
            j = _skip_to_end(tokens, i + 1)
            timescale = Timescale.parse("".join(tokens[i + 1:j - 1]))
            i = j
        elif tok == "$scope":
            j = _skip_to_end(tokens, i + 1)
            if j - i != 4:
                raise VcdError("malformed header: bad $scope")
            scopes.append(tokens[i + 2])
            i = j
        elif tok == "$upscope":
            if not scopes:
                raise VcdError("malformed header: $upscope without $scope")
            scopes.pop()
            i = _skip_to_end(tokens, i + 1)
        elif tok == "$var":
            j = _skip_to_end(tokens, i + 1)
            body = tokens[i + 1:j - 1]
            if len(body) < 4:
                raise VcdError("malformed header: short $var")
            kind, size, idcode, ref = body[:4]
            if kind in REJECTED_KINDS:
                raise VcdError(f"unsupported variable kind {kind!r} for {ref!r}")
            if kind not in ACCEPTED_KINDS:
                raise VcdError(f"malformed header: unknown variable kind {kind!r}")
            try:
                width = int(size)
            except ValueError:
                raise VcdError(f"malformed header: bad width {size!r}") from None
            pending.append((".".join(scopes + [ref]), width, idcode, kind))
            i = j
        elif tok == "$enddefinitions":
            i = _skip_to_end(tokens, i + 1)
            break
        elif tok.startswith("$"):
            i = _skip_to_end(tokens, i + 1)
        else:
            raise VcdError(f"malformed header: unexpected token {tok!r}")

    if timescale is None:
        raise VcdError("malformed header: missing $timescale")
    builder = WaveformBuilder(timescale)
    for path, width, idcode, kind in pending:
        builder.declare(path, width, idcode, kind)

    time = 0
    while i < n:
        tok = tokens[i]
        c = tok[0]
        if c == "#":
            try:
                t = int(tok[1:])
            except ValueError:
                raise VcdError(f"bad timestamp {tok!r}") from None
            if t < time:
                raise VcdError(f"timestamp going backwards: #{t} after #{time}")
            time = t
            i += 1
        elif c in "bB":
            if i + 1 >= n:
                raise VcdError(f"vector change {tok!r} missing idcode")
            bits = tok[1:].lower()
            if not bits or not set(bits) <= FOUR_STATES:
                raise VcdError(f"bad vector value {tok!r}")
            d = builder.by_idcode(tokens[i + 1])
            builder.change(d.path, time, extend_value(bits, d.width))
            i += 2
        elif c in "01xzXZ":
            d = builder.by_idcode(tok[1:])
            if d.width != 1:
                # scalar form on a vector: apply the extension rule
                builder.change(d.path, time, extend_value(c.lower(), d.width))
            else:
                builder.change(d.path, time, c.lower())
            i += 1
        elif c in "rR":
            raise VcdError(f"real value change {tok!r} not supported")
        elif tok == "$comment":
            i = _skip_to_end(tokens, i + 1)
        elif tok.startswith("$"):
            # $dumpvars / $dumpall / $dumpon / $dumpoff / $end wrap ordinary changes
            i += 1
        else:
            raise VcdError(f"unexpected token {tok!r} in dump section")
    return builder.build()


def write_vcd(db: WaveformDb) -> str:
    out = ["$version replaykit $end", f"$timescale {db.timescale} $end"]
    stack: list[str] = []
    for d in db.decls:
        *scope, name = d.path.split(".")
        common = 0
        while common < min(len(stack), len(scope)) and stack[common] == scope[common]:
            common += 1
        while len(stack) > common:
            stack.pop()
            out.append("$upscope $end")
        for s in scope[common:]:
            stack.append(s)
            out.append(f"$scope module {s} $end")
        out.append(f"$var {d.kind} {d.width} {d.idcode} {name} $end")
    for _ in stack:
        out.append("$upscope $end")
    out.append("$enddefinitions $end")

    events: dict[int, list[str]] = {}
    for d in db.decls:
        for t, v in db.changes.get(d.path, ()):
            line = v + d.idcode if d.width == 1 else f"b{v} {d.idcode}"
            events.setdefault(t, []).append(line)
    for t in sorted(events):
        out.append(f"#{t}")
        out.extend(events[t])
    return "\n".join(out) + "\n"


def value_before(db: WaveformDb, path: str, time: int) -> str:
    """Value of ``path`` from its last change strictly before ``time``.

    Returns all-x when nothing was recorded earlier.
    """
    d = db.decl(path)
    ch = db.changes.get(path, ())
    k = bisect.bisect_left(ch, time, key=lambda c: c[0])
    if k == 0:
        return "x" * d.width
    return ch[k - 1][1]


def sampler(db: WaveformDb, path: str):
    """Return a callable equivalent to ``value_before`` for one signal.

    Amortises the lookup for the many-edge case by caching the time list.
    """
    d = db.decl(path)
    ch = db.changes.get(path, ())
    times = [c[0] for c in ch]
    unknown = "x" * d.width

    def sample(time: int) -> str:
        k = bisect.bisect_left(times, time)
        return ch[k - 1][1] if k else unknown

    return sample


def rising_edges(db: WaveformDb, clock: str, with_warnings: bool = False):
    """Times of clean 0->1 transitions of a 1-bit ``clock``.

    Rises out of x or z are skipped and tallied; pass ``with_warnings=True``
    to get ``(edges, tally)`` back instead of just the edge list.
    """
    d = db.decl(clock)
    if d.width != 1:
        raise VcdError(f"clock {clock!r} is {d.width} bits wide, expected 1")
    edges = []
    unknown_rises = 0
    prev = "x"
    for t, v in db.changes.get(clock, ()):
        if v == "1" and prev != "1":
            if prev == "0":
                edges.append(t)
            else:
                unknown_rises += 1
        prev = v
    if unknown_rises:
        log.warning("%s: %d rising transition(s) out of x/z ignored", clock, unknown_rises)
    if with_warnings:
        return edges, unknown_rises
    return edges


def int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def bits_to_int(bits: str) -> int:
    """Two-state conversion; raises on x/z."""
    if not set(bits) <= {"0", "1"}:
        raise ValueError(f"value {bits!r} is not two-state")
    return int(bits, 2)


def load_vcd(path) -> WaveformDb:
    with open(path) as f:
        return parse_vcd(f.read())


def save_vcd(db: WaveformDb, path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(write_vcd(db))

