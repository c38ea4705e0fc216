"""Deterministic two-phase cycle simulation of the toy GPU boundary."""

from .kernel import Component, Net, Simulator
from .memory import SparseMemory
from .prng import XorShift64Star
from .testbench import (
    DoneAsserted, RunResult, Testbench, Timeout, boundary_spec,
    build_ip_testbench, build_soc_testbench, dump_memory, run,
)
from .toygpu import DEFAULT_MEM_BASE, Randomization, ToyGpuConfig

__all__ = [
    "Component", "Net", "Simulator", "SparseMemory", "XorShift64Star",
    "DoneAsserted", "RunResult", "Testbench", "Timeout", "boundary_spec",
    "build_ip_testbench", "build_soc_testbench", "dump_memory", "run",
    "DEFAULT_MEM_BASE", "Randomization", "ToyGpuConfig",
]
