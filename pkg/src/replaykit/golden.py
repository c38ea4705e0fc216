"""Golden memory-dump parsing and comparison.

Golden dumps are lines of ``HEXADDR: HEXBYTES`` giving a literal memory
image, e.g.::

    4316BC0000: 00000000010000000200000003000000

Golden bytes are never reordered.  Word values on both sides are memory
words, i.e. little-endian over the byte image; the normalization only
re-sequences and re-reads the simulation side before comparing.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional

from .errors import GoldenError

_LINE_RE = re.compile(r"^\s*([0-9A-Fa-f]+)\s*:\s*([0-9A-Fa-f]*)\s*$")


class WordOrder(enum.Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class ByteOrder(enum.Enum):
    LITTLE = "little"
    BIG = "big"


@dataclass(frozen=True)
class Normalization:
    word_size: int = 4
    word_order: WordOrder = WordOrder.ASCENDING
    byte_order: ByteOrder = ByteOrder.LITTLE

    def __post_init__(self):
        if self.word_size not in (1, 2, 4, 8):
            raise GoldenError(f"word size must be 1, 2, 4 or 8 bytes, not {self.word_size}")


IDENTITY = Normalization()


@dataclass(frozen=True)
class Record:
    base: int
    data: bytes

    @property
    def end(self) -> int:
        return self.base + len(self.data)


@dataclass(frozen=True)
class GoldenDump:
    records: tuple = ()


def parse_golden(text: str) -> GoldenDump:
    """Parse dump text; adjacent lines with contiguous addresses merge."""
    records: list[list] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise GoldenError(f"line {lineno}: malformed golden line {line.strip()!r}")
        addr = int(m.group(1), 16)
        digits = m.group(2)
        if len(digits) % 2:
            raise GoldenError(f"line {lineno}: odd number of hex digits")
        data = bytes.fromhex(digits)
        if records and records[-1][0] + len(records[-1][1]) == addr:
            records[-1][1] += data
        else:
            records.append([addr, bytearray(data)])
    out = sorted((Record(a, bytes(d)) for a, d in records), key=lambda r: r.base)
    for prev, cur in zip(out, out[1:]):
        if cur.base < prev.end:
            raise GoldenError(f"overlapping records at {cur.base:#x}")
    return GoldenDump(tuple(out))


def format_dump(base: int, data: bytes, line_bytes: int = 16) -> str:
    """Render a byte image in the golden text format (uppercase hex)."""
    lines = []
    for off in range(0, len(data), line_bytes):
        chunk = data[off:off + line_bytes]
        lines.append(f"{base + off:010X}: {chunk.hex().upper()}")
    return "".join(line + "\n" for line in lines)


def normalize(region: bytes, norm: Normalization) -> list[int]:
    """Word values of a simulation-side region under ``norm``."""
    ws = norm.word_size
    if len(region) % ws:
        raise GoldenError(f"region length {len(region)} is not a multiple of word size {ws}")
    words = [region[i:i + ws] for i in range(0, len(region), ws)]
    if norm.word_order == WordOrder.DESCENDING:
        words.reverse()
    return [int.from_bytes(w, norm.byte_order.value) for w in words]


def golden_words(data: bytes, word_size: int) -> list[int]:
    if len(data) % word_size:
        raise GoldenError(f"golden length {len(data)} is not a multiple of word size {word_size}")
    return [int.from_bytes(data[i:i + word_size], "little") for i in range(0, len(data), word_size)]


@dataclass(frozen=True)
class Difference:
    address: int
    sim_word: int
    golden_word: int


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    words_compared: int
    word_size: int
    first_difference: Optional[Difference] = None

    def render(self) -> str:
        d = 2 * self.word_size
        lines = [f"result   {'PASS' if self.passed else 'FAIL'}",
                 f"compared {self.words_compared} words of {self.word_size} bytes"]
        if self.first_difference:
            f = self.first_difference
            lines.append(f"first difference at {f.address:#x}: "
                         f"sim {f.sim_word:#0{d + 2}x} golden {f.golden_word:#0{d + 2}x}")
        return "\n".join(lines) + "\n"


def compare_memory(sim: bytes, sim_base: int, golden: GoldenDump,
                   norm: Normalization = IDENTITY) -> ComparisonReport:
    ws = norm.word_size
    sim_end = sim_base + len(sim)
    compared = 0
    first = None
    for rec in golden.records:
        if rec.base < sim_base or rec.end > sim_end:
            raise GoldenError(
                f"golden record {rec.base:#x}..{rec.end:#x} outside simulation range "
                f"{sim_base:#x}..{sim_end:#x}")
        region = sim[rec.base - sim_base:rec.end - sim_base]
        got = normalize(region, norm)
        want = golden_words(rec.data, ws)
        compared += len(want)
        if first is None:
            for k, (s, g) in enumerate(zip(got, want)):
                if s != g:
                    first = Difference(rec.base + k * ws, s, g)
                    break
    return ComparisonReport(first is None, compared, ws, first)


def load_golden(path) -> GoldenDump:
    with open(path) as f:
        return parse_golden(f.read())


def single_region(dump: GoldenDump) -> tuple[int, bytes]:
    """Collapse a dump file holding one contiguous region to (base, bytes)."""
    if len(dump.records) != 1:
        raise GoldenError(f"expected one contiguous region, found {len(dump.records)}")
    r = dump.records[0]
    return r.base, r.data


def select_range(dump: GoldenDump, start: int, length: int) -> GoldenDump:
    """Restrict a golden dump to ``[start, start + length)``."""
    end = start + length
    out = []
    for r in dump.records:
        lo, hi = max(r.base, start), min(r.end, end)
        if lo < hi:
            out.append(Record(lo, r.data[lo - r.base:hi - r.base]))
    return GoldenDump(tuple(out))
