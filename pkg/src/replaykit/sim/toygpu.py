"""Toy GPU-like IP and the components that sit at its boundary.

Boundary protocol, seen from the GPU:

* power management: GPU raises ``pm_req``; the agent answers with ``pm_ack``
  three cycles after it first samples the request and drops it once the
  request goes away.
* fuse load: agent streams ``fuse_data`` words with ``fuse_valid``; a beat
  transfers on an edge where both ``fuse_valid`` and ``fuse_ready`` are high.
* memory port: GPU masters ``mem_valid`` / ``mem_addr`` / ``mem_wdata``; the
  agent raises ``mem_ready`` one cycle after seeing ``mem_valid`` and the
  write lands on the edge where both are high.
* ``work_done`` rises after ``word_count`` writes and stays high.

Word ``i`` of the workload writes value ``i`` to ``mem_base + 4*i``.
With randomization on, the GPU inserts 0..max_stall idle cycles before
each request, fuse beat and memory beat.  Timing moves; memory does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..interface import Direction
from .kernel import Component
from .memory import SparseMemory
from .prng import XorShift64Star

DEFAULT_MEM_BASE = 0x4316BC0000

# (name, width, direction) in frame-layout order
BOUNDARY_PORTS = (
    ("pm_req", 1, Direction.DUT),
    ("pm_ack", 1, Direction.AGENT),
    ("fuse_valid", 1, Direction.AGENT),
    ("fuse_data", 32, Direction.AGENT),
    ("fuse_ready", 1, Direction.DUT),
    ("mem_valid", 1, Direction.DUT),
    ("mem_addr", 64, Direction.DUT),
    ("mem_wdata", 32, Direction.DUT),
    ("mem_ready", 1, Direction.AGENT),
    ("work_done", 1, Direction.DUT),
)
GPU_OUTPUTS = tuple(n for n, _, d in BOUNDARY_PORTS if d == Direction.DUT)
GPU_INPUTS = tuple(n for n, _, d in BOUNDARY_PORTS if d == Direction.AGENT)
PORT_WIDTHS = {n: w for n, w, _ in BOUNDARY_PORTS}

PM_LATENCY = 3


@dataclass(frozen=True)
class Randomization:
    enabled: bool = False
    seed: int = 1
    max_stall: int = 3

    def __post_init__(self):
        if self.max_stall < 0:
            raise ValueError("max_stall must be >= 0")


@dataclass(frozen=True)
class ToyGpuConfig:
    mem_base: int = DEFAULT_MEM_BASE
    word_count: int = 16
    fuse_words: tuple = (0x00000001, 0x00000010)
    randomization: Randomization = field(default_factory=Randomization)

    def __post_init__(self):
        if self.word_count < 1:
            raise ValueError("word_count must be >= 1")
        if not 0 <= self.mem_base < (1 << 64):
            raise ValueError("mem_base must fit in 64 bits")
        for w in self.fuse_words:
            if not 0 <= w < (1 << 32):
                raise ValueError(f"fuse word {w:#x} does not fit in 32 bits")


class ToyGpu(Component):
    name = "gpu"
    drives = GPU_OUTPUTS

    BOOT, PM_WAIT, FUSE, WORK, DONE = range(5)

    def __init__(self, cfg: ToyGpuConfig, reset: str = "rst_n"):
        self.cfg = cfg
        self.reset = reset
        self.rng = XorShift64Star(cfg.randomization.seed)
        self.fuses: list[int] = []
        self._reset_state()

    def _reset_state(self):
        self.state = self.BOOT
        self.wait = None
        self.index = 0
        self.out = {n: 0 for n in GPU_OUTPUTS}

    def _stall(self) -> int:
        r = self.cfg.randomization
        if not r.enabled or r.max_stall == 0:
            return 0
        return self.rng.below(r.max_stall + 1)

    def _waiting(self) -> bool:
        # Draw a stall length on first use, then count it down.
        if self.wait is None:
            self.wait = self._stall()
        if self.wait > 0:
            self.wait -= 1
            return True
        return False

    def evaluate(self, v: Mapping[str, int]) -> dict:
        if not v[self.reset]:
            self._reset_state()
            self.fuses = []
            return dict(self.out)
        out = self.out
        if self.state == self.BOOT:
            if not self._waiting():
                out["pm_req"] = 1
                self.state = self.PM_WAIT
        elif self.state == self.PM_WAIT:
            if v["pm_ack"]:
                out["pm_req"] = 0
                self.wait = None
                self.state = self.FUSE if self.cfg.fuse_words else self.WORK
        elif self.state == self.FUSE:
            if out["fuse_ready"] and v["fuse_valid"]:
                self.fuses.append(v["fuse_data"])
                out["fuse_ready"] = 0
                self.wait = None
                if len(self.fuses) == len(self.cfg.fuse_words):
                    self.state = self.WORK
            elif not out["fuse_ready"] and not self._waiting():
                out["fuse_ready"] = 1
        elif self.state == self.WORK:
            if out["mem_valid"] and v["mem_ready"]:
                out["mem_valid"] = 0
                self.index += 1
                self.wait = None
                if self.index == self.cfg.word_count:
                    out["work_done"] = 1
                    self.state = self.DONE
            elif not out["mem_valid"] and not self._waiting():
                out["mem_valid"] = 1
                out["mem_addr"] = (self.cfg.mem_base + 4 * self.index) & ((1 << 64) - 1)
                out["mem_wdata"] = self.index & 0xFFFFFFFF
        return dict(out)


class AgentBfm(Component):
    """IP-level responder: power ack, fuse streamer and memory slave."""

    name = "agent"
    drives = GPU_INPUTS

    def __init__(self, cfg: ToyGpuConfig, memory: SparseMemory, reset: str = "rst_n"):
        self.cfg = cfg
        self.memory = memory
        self.reset = reset
        self._reset_state()

    def _reset_state(self):
        self.pm_count = 0
        self.fuse_started = False
        self.fuse_index = 0
        self.out = {n: 0 for n in GPU_INPUTS}

    def evaluate(self, v: Mapping[str, int]) -> dict:
        if not v[self.reset]:
            self._reset_state()
            return dict(self.out)
        out = self.out
        words = self.cfg.fuse_words

        if v["pm_req"]:
            if not out["pm_ack"]:
                self.pm_count += 1
                if self.pm_count == PM_LATENCY:
                    out["pm_ack"] = 1
                    self.fuse_started = True
        else:
            out["pm_ack"] = 0
            self.pm_count = 0

        if out["fuse_valid"] and v["fuse_ready"]:
            self.fuse_index += 1
            if self.fuse_index < len(words):
                out["fuse_data"] = words[self.fuse_index]
            else:
                out["fuse_valid"] = 0
        elif self.fuse_started and not out["fuse_valid"] and self.fuse_index < len(words):
            out["fuse_valid"] = 1
            out["fuse_data"] = words[self.fuse_index]

        if v["mem_valid"] and out["mem_ready"]:
            self.memory.write_word(v["mem_addr"], v["mem_wdata"])
            out["mem_ready"] = 0
        elif v["mem_valid"]:
            out["mem_ready"] = 1
        return dict(out)


class MemorySink(Component):
    """Passive system-side memory: commits every accepted write beat."""

    name = "memsink"
    drives = ()

    def __init__(self, memory: SparseMemory, reset: str = "rst_n"):
        self.memory = memory
        self.reset = reset

    def evaluate(self, v: Mapping[str, int]) -> dict:
        if v[self.reset] and v["mem_valid"] and v["mem_ready"]:
            self.memory.write_word(v["mem_addr"], v["mem_wdata"])
        return {}


class ResetGen(Component):
    """Active-low reset held for ``cycles`` edges."""

    name = "resetgen"

    def __init__(self, net: str = "rst_n", cycles: int = 2):
        self.drives = (net,)
        self.net = net
        self.cycles = cycles
        self.count = 0

    def evaluate(self, v: Mapping[str, int]) -> dict:
        self.count += 1
        return {self.net: 1 if self.count >= self.cycles else 0}
