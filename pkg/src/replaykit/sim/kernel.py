"""Two-phase cycle simulation kernel.

At every rising clock edge each component sees the same snapshot of net
values (everything as it stood just before the edge), returns the new
values for the nets it drives, and only then are all updates committed.
Registration order therefore cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..errors import BuildError
from ..vcd import Timescale, WaveformBuilder, WaveformDb, int_to_bits


@dataclass
class Net:
    name: str
    width: int
    value: int = 0
    trace_path: str | None = None


class Component:
    """Base for clocked components.

    Subclasses list the nets they drive in ``drives`` and implement
    :meth:`evaluate`, which may update private state but must only read net
    values from ``values``.
    """

    name = "component"
    drives: tuple = ()

    def evaluate(self, values: Mapping[str, int]) -> dict:
        raise NotImplementedError


class Simulator:
    def __init__(self, period: int = 10, timescale: Timescale = Timescale(1, "ns")):
        if period < 2:
            raise BuildError("clock period must be at least 2 ticks")
        self.period = period
        self.timescale = timescale
        self.nets: dict[str, Net] = {}
        self.components: list[Component] = []
        self._drivers: dict[str, str] = {}
        self.cycle = 0
        self._tracer: Tracer | None = None

    def add_net(self, name: str, width: int, init: int = 0, trace_path: str | None = None) -> Net:
        if name in self.nets:
            raise BuildError(f"duplicate net {name!r}")
        net = Net(name, width, init, trace_path)
        self.nets[name] = net
        return net

    def add(self, comp: Component) -> Component:
        for n in comp.drives:
            if n not in self.nets:
                raise BuildError(f"{comp.name} drives unknown net {n!r}")
            if n in self._drivers:
                raise BuildError(f"net {n!r} driven by both {self._drivers[n]} and {comp.name}")
            self._drivers[n] = comp.name
        self.components.append(comp)
        return comp

    def values(self) -> dict:
        return {n.name: n.value for n in self.nets.values()}

    def edge_time(self, cycle: int) -> int:
        return self.period // 2 + cycle * self.period

    def trace(self, clock_path: str = "tb.clk") -> "Tracer":
        self._tracer = Tracer(self, clock_path)
        return self._tracer

    def step(self) -> None:
        snapshot = self.values()
        updates = {}
        for comp in self.components:
            out = comp.evaluate(snapshot)
            for name, v in out.items():
                if self._drivers.get(name) != comp.name:
                    raise BuildError(f"{comp.name} wrote net {name!r} it does not drive")
                net = self.nets[name]
                if not 0 <= v < (1 << net.width):
                    raise BuildError(f"{comp.name} drove {v:#x} onto {net.width}-bit net {name!r}")
                updates[name] = v
        for name, v in updates.items():
            self.nets[name].value = v
        if self._tracer:
            self._tracer.record_edge(self.cycle)
        self.cycle += 1


class Tracer:
    """Record traced nets plus a regenerated clock into a WaveformDb."""

    def __init__(self, sim: Simulator, clock_path: str):
        self.sim = sim
        self.clock_path = clock_path
        self.builder = WaveformBuilder(sim.timescale)
        self.builder.declare(clock_path, 1)
        self._traced = [n for n in sim.nets.values() if n.trace_path]
        for n in self._traced:
            self.builder.declare(n.trace_path, n.width)
        self._last = {}
        self.builder.change(clock_path, 0, "0")
        for n in self._traced:
            self.builder.change(n.trace_path, 0, int_to_bits(n.value, n.width))
            self._last[n.name] = n.value

    def record_edge(self, cycle: int) -> None:
        t = self.sim.edge_time(cycle)
        self.builder.change(self.clock_path, t, "1")
        for n in self._traced:
            if n.value != self._last[n.name]:
                self.builder.change(n.trace_path, t, int_to_bits(n.value, n.width))
                self._last[n.name] = n.value
        self.builder.change(self.clock_path, t + self.sim.period - self.sim.period // 2, "0")

    def db(self) -> WaveformDb:
        return self.builder.build()
