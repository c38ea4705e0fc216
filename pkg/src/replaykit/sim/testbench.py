"""IP-level and SoC-level testbenches around the toy GPU."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..artifact import ReplayArtifact
from ..engine import ReplayEngine, ReplayOptions, ReplayReport, Running
from ..errors import BuildError
from ..interface import (
    Direction, InterfaceSpec, ResetSpec, SignalBinding, StartCondition,
)
from ..vcd import WaveformDb
from .kernel import Component, Simulator
from .memory import SparseMemory, dump_memory as _dump
from .toygpu import (
    BOUNDARY_PORTS, AgentBfm, MemorySink, ResetGen, ToyGpu, ToyGpuConfig,
)

CLOCK_PATH = "tb.clk"
RESET_PATH = "tb.rst_n"
PORT_SCOPE = "tb.gpu"
TAIL_CYCLES = 2


def boundary_spec() -> InterfaceSpec:
    """Interface spec matching the toy GPU boundary as traced by the testbenches."""
    return InterfaceSpec(
        clock=CLOCK_PATH,
        reset=ResetSpec(RESET_PATH, 0, StartCondition.AFTER_RESET_DEASSERT),
        bindings=tuple(
            SignalBinding(name, f"{PORT_SCOPE}.{name}", width, direction)
            for name, width, direction in BOUNDARY_PORTS
        ),
    )


class ReplayAdapter(Component):
    """Stands where the agent BFM was and plays the artifact back.

    Its outputs always hold the drive values for the engine's next cycle, so
    the GPU samples frame ``i`` on replay edge ``i``.  Reset edges before the
    start condition are not replay cycles.
    """

    name = "replay"

    def __init__(self, engine: ReplayEngine, reset: str = "rst_n", active_level: int = 0):
        self.engine = engine
        self.reset = reset
        self.active_level = active_level
        a = engine.artifact
        self.drives = tuple(e.name for e in a.directory if e.direction == Direction.AGENT)
        self.observes = tuple(e.name for e in a.directory if e.direction == Direction.DUT)
        self.started = a.start_condition == StartCondition.FIRST_EDGE

    def initial_values(self) -> dict:
        return self.engine.pending_drive()

    def evaluate(self, v: Mapping[str, int]) -> dict:
        if not self.started:
            if v[self.reset] == self.active_level:
                return {}
            self.started = True
        if isinstance(self.engine.status, Running):
            self.engine.step({n: v[n] for n in self.observes})
        return self.engine.pending_drive()


@dataclass
class Testbench:
    sim: Simulator
    gpu: ToyGpu
    memory: SparseMemory
    tracer: object
    engine: Optional[ReplayEngine] = None
    kind: str = "ip"


@dataclass(frozen=True)
class DoneAsserted:
    cycle: int


@dataclass(frozen=True)
class Timeout:
    cycles: int


@dataclass
class RunResult:
    status: object
    vcd: WaveformDb
    memory: SparseMemory
    report: Optional[ReplayReport] = None

    @property
    def done(self) -> bool:
        return isinstance(self.status, DoneAsserted)


def _base_sim(period: int) -> Simulator:
    sim = Simulator(period)
    sim.add_net("rst_n", 1, 0, RESET_PATH)
    for name, width, _ in BOUNDARY_PORTS:
        sim.add_net(name, width, 0, f"{PORT_SCOPE}.{name}")
    return sim


def build_ip_testbench(cfg: ToyGpuConfig = ToyGpuConfig(), period: int = 10,
                       reset_cycles: int = 2) -> Testbench:
    sim = _base_sim(period)
    memory = SparseMemory()
    gpu = ToyGpu(cfg)
    sim.add(ResetGen("rst_n", reset_cycles))
    sim.add(gpu)
    sim.add(AgentBfm(cfg, memory))
    return Testbench(sim, gpu, memory, sim.trace(CLOCK_PATH), kind="ip")


def check_directory(a: ReplayArtifact) -> None:
    ports = {name: (width, direction) for name, width, direction in BOUNDARY_PORTS}
    seen = set()
    for e in a.directory:
        if e.name not in ports:
            raise BuildError(f"artifact signal {e.name!r} is not a GPU boundary port")
        width, direction = ports[e.name]
        if e.width != width:
            raise BuildError(f"artifact signal {e.name!r} is {e.width} bits, port is {width}")
        if e.direction != direction:
            raise BuildError(f"artifact signal {e.name!r} has the wrong direction")
        seen.add(e.name)
    missing = [n for n, _, d in BOUNDARY_PORTS if d == Direction.AGENT and n not in seen]
    if missing:
        raise BuildError(f"artifact does not drive GPU inputs {missing}")


def build_soc_testbench(a: ReplayArtifact, cfg: ToyGpuConfig = ToyGpuConfig(),
                        opts: ReplayOptions = ReplayOptions(), period: int | None = None,
                        reset_cycles: int = 2) -> Testbench:
    check_directory(a)
    sim = _base_sim(period or a.clock_period)
    memory = SparseMemory()
    gpu = ToyGpu(cfg)
    engine = ReplayEngine(a, opts)
    adapter = ReplayAdapter(engine)
    for name, value in adapter.initial_values().items():
        sim.nets[name].value = value
    sim.add(ResetGen("rst_n", reset_cycles))
    sim.add(gpu)
    sim.add(adapter)
    sim.add(MemorySink(memory))
    return Testbench(sim, gpu, memory, sim.trace(CLOCK_PATH), engine, kind="soc")


def run(tb: Testbench, max_cycles: int = 10000, tail_cycles: int = TAIL_CYCLES) -> RunResult:
    """Clock ``tb`` until ``work_done`` is seen (plus a short tail) or the budget runs out."""
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    sim = tb.sim
    status = None
    stop_at = None
    while sim.cycle < max_cycles:
        sim.step()
        if status is None and sim.nets["work_done"].value:
            status = DoneAsserted(sim.cycle - 1)
            stop_at = sim.cycle + tail_cycles
        if stop_at is not None and sim.cycle >= stop_at:
            break
    if status is None:
        status = Timeout(sim.cycle)
    report = tb.engine.report() if tb.engine else None
    return RunResult(status, tb.tracer.db(), tb.memory, report)


def dump_memory(tb_or_result, base: int, byte_count: int) -> bytes:
    return _dump(tb_or_result.memory, base, byte_count)
