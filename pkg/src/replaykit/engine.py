"""Open-loop replay engine.

Each call to :meth:`ReplayEngine.step` consumes one frame: it returns the
agent-driven values recorded for the current cycle and checks the observed
DUT-driven values against the same frame.  Drive values depend only on the
cycle index, never on what was observed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .artifact import ReplayArtifact
from .errors import EngineError
from .interface import Direction


@dataclass(frozen=True)
class ReplayOptions:
    check_enabled: bool = True
    stop_on_first_mismatch: bool = False
    max_recorded_mismatches: int = 64

    def __post_init__(self):
        if self.max_recorded_mismatches < 1:
            raise ValueError("max_recorded_mismatches must be >= 1")


@dataclass(frozen=True)
class Mismatch:
    cycle: int
    signal: str
    width: int
    expected: int
    observed: int
    mask: int

    def __str__(self):
        d = -(-self.width // 4)
        return (f"cycle {self.cycle}: {self.signal} expected {self.expected:0{d}x} "
                f"observed {self.observed:0{d}x} mask {self.mask:0{d}x}")


@dataclass(frozen=True)
class Running:
    cycle: int


@dataclass(frozen=True)
class Done:
    passed: bool


@dataclass(frozen=True)
class Halted:
    first: Mismatch


@dataclass(frozen=True)
class StepResult:
    drive: dict
    done: bool


@dataclass(frozen=True)
class ReplayReport:
    cycles_executed: int
    cycle_count: int
    mismatch_count: int
    first_mismatch: Optional[Mismatch]
    status: str
    passed: bool
    mismatches: tuple = field(default=(), compare=True)

    def render(self) -> str:
        lines = [
            f"result      {'PASS' if self.passed else 'FAIL'}",
            f"status      {self.status}",
            f"cycles      {self.cycles_executed}/{self.cycle_count}",
            f"mismatches  {self.mismatch_count}",
            f"first       {self.first_mismatch if self.first_mismatch else 'none'}",
        ]
        for m in self.mismatches:
            lines.append(f"  {m}")
        return "\n".join(lines) + "\n"


def _to_int(value: Union[int, str], width: int, name: str) -> int:
    if isinstance(value, str):
        if len(value) != width or not set(value) <= {"0", "1"}:
            raise EngineError(f"observed {name!r} must be {width} two-state bits, got {value!r}")
        return int(value, 2)
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < (1 << width):
        raise EngineError(f"observed {name!r} does not fit in {width} bits: {value!r}")
    return value


class ReplayEngine:
    def __init__(self, artifact: ReplayArtifact, opts: ReplayOptions = ReplayOptions()):
        self.artifact = artifact
        self.opts = opts
        self.cycle = 0
        self.mismatch_count = 0
        self.mismatches: list[Mismatch] = []
        self._agents = [e for e in artifact.directory if e.direction == Direction.AGENT]
        self._duts = [e for e in artifact.directory if e.direction == Direction.DUT]
        self._policy = {e.name: e.check.effective_mask(e.width) for e in self._duts}
        self._halted: Optional[Mismatch] = None

    @property
    def status(self):
        if self._halted is not None:
            return Halted(self._halted)
        if self.cycle >= self.artifact.cycle_count:
            return Done(self.mismatch_count == 0)
        return Running(self.cycle)

    def drive_for(self, cycle: int) -> dict:
        """Agent-driven values recorded for ``cycle`` (clamped to the last frame)."""
        frames = self.artifact.frames
        if not frames:
            return {e.name: 0 for e in self._agents}
        data = frames[min(cycle, len(frames) - 1)].data
        return {e.name: e.extract(data) for e in self._agents}

    def pending_drive(self) -> dict:
        """Values to present before the next edge; frozen once halted or done."""
        if self._halted is not None:
            return self.drive_for(self._halted.cycle)
        return self.drive_for(self.cycle)

    def step(self, observed: Mapping[str, Union[int, str]]) -> StepResult:
        if not isinstance(self.status, Running):
            raise EngineError(f"step after replay finished ({self.status})")
        if set(observed) != {e.name for e in self._duts}:
            missing = sorted({e.name for e in self._duts} - set(observed))
            extra = sorted(set(observed) - {e.name for e in self._duts})
            raise EngineError(f"observed signals mismatch: missing {missing}, unexpected {extra}")
        values = {e.name: _to_int(observed[e.name], e.width, e.name) for e in self._duts}

        frame = self.artifact.frames[self.cycle]
        drive = {e.name: e.extract(frame.data) for e in self._agents}
        if self.opts.check_enabled:
            for e in self._duts:
                mask = e.extract(frame.care) & self._policy[e.name]
                expected = e.extract(frame.data)
                got = values[e.name]
                if (expected ^ got) & mask:
                    m = Mismatch(self.cycle, e.name, e.width, expected, got, mask)
                    self.mismatch_count += 1
                    if len(self.mismatches) < self.opts.max_recorded_mismatches:
                        self.mismatches.append(m)
                    if self.opts.stop_on_first_mismatch and self._halted is None:
                        self._halted = m
        self.cycle += 1
        return StepResult(drive, not isinstance(self.status, Running))

    def report(self) -> ReplayReport:
        st = self.status
        first = self.mismatches[0] if self.mismatches else None
        if isinstance(st, Done):
            name, passed = "done", st.passed
        elif isinstance(st, Halted):
            name, passed = "halted", False
        else:
            name, passed = "incomplete", False
        return ReplayReport(self.cycle, self.artifact.cycle_count, self.mismatch_count,
                            first, name, passed, tuple(self.mismatches))


def init_engine(artifact: ReplayArtifact, opts: ReplayOptions = ReplayOptions()) -> ReplayEngine:
    return ReplayEngine(artifact, opts)
