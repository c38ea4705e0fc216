"""Single-file YAML configuration for the capture/replay flow.

Every relative path is resolved against the directory holding the config
file.  See ``configs/canonical.yaml`` for a complete example.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Optional

import yaml

from .artifact import WORD_WIDTHS, XPolicy
from .engine import ReplayOptions
from .errors import ReplayKitError
from .golden import ByteOrder, Normalization, WordOrder
from .interface import InterfaceSpec, load_spec, spec_from_dict
from .romgen import RomGenOptions
from .sim.testbench import boundary_spec
from .sim.toygpu import Randomization, ToyGpuConfig


class ConfigError(ReplayKitError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    root: str
    output_dir: str
    gpu: ToyGpuConfig
    replay_seed: Optional[int]
    period: int
    reset_cycles: int
    max_cycles: int
    interface: InterfaceSpec
    x_policy: XPolicy
    period_tolerance: int
    replay: ReplayOptions
    golden: Optional[str]
    compare_base: int
    compare_length: int
    norm: Normalization
    romgen_enabled: bool
    romgen: RomGenOptions
    files: dict = field(default_factory=dict)

    def out(self, key: str) -> str:
        return os.path.join(self.output_dir, self.files[key])

    @property
    def replay_gpu(self) -> ToyGpuConfig:
        if self.replay_seed is None:
            return self.gpu
        return replace(self.gpu, randomization=replace(self.gpu.randomization, seed=self.replay_seed))


DEFAULT_FILES = {
    "vcd": "capture.vcd",
    "ip_dump": "ip_dump.txt",
    "artifact": "replay.rpaf",
    "replay_vcd": "replay.vcd",
    "replay_report": "replay_report.txt",
    "replay_dump": "replay_dump.txt",
    "compare_report": "compare_report.txt",
}


def _int(v, what):
    if isinstance(v, bool):
        raise ConfigError(f"{what} must be an integer")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v.replace("_", ""), 0)
        except ValueError:
            pass
    raise ConfigError(f"{what} must be an integer, got {v!r}")


def _section(doc, key):
    sec = doc.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {key!r} must be a mapping")
    return sec


def _enum(enum_cls, value, what):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{what} must be one of {choices}, got {value!r}") from None


def load_config(path: str, seed: Optional[int] = None, no_randomization: bool = False,
                period_tolerance: Optional[int] = None, word_width: Optional[int] = None) -> FlowConfig:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    root = os.path.dirname(os.path.abspath(path))
    with open(path) as f:
        try:
            doc = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(root, p)

    g = _section(doc, "gpu")
    r = g.get("randomization") or {}
    rand = Randomization(
        enabled=bool(r.get("enabled", False)),
        seed=_int(r.get("seed", 1), "gpu.randomization.seed"),
        max_stall=_int(r.get("max_stall", 3), "gpu.randomization.max_stall"),
    )
    rep = _section(doc, "replay")
    replay_seed = rep.get("seed")
    replay_seed = None if replay_seed is None else _int(replay_seed, "replay.seed")
    if seed is not None:
        rand = replace(rand, seed=seed)
        replay_seed = seed
    if no_randomization:
        rand = replace(rand, enabled=False)
    try:
        gpu = ToyGpuConfig(
            mem_base=_int(g.get("mem_base", 0x4316BC0000), "gpu.mem_base"),
            word_count=_int(g.get("word_count", 16), "gpu.word_count"),
            fuse_words=tuple(_int(w, "gpu.fuse_words") for w in g.get("fuse_words", (1, 0x10))),
            randomization=rand,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None

    tb = _section(doc, "testbench")
    iface = doc.get("interface")
    if iface is None:
        interface = boundary_spec()
    elif isinstance(iface, str):
        with open(resolve(iface)) as f:
            interface = load_spec(f.read())
    else:
        interface = spec_from_dict(iface)

    period = _int(tb.get("period", 10), "testbench.period")
    reset_cycles = _int(tb.get("reset_cycles", 2), "testbench.reset_cycles")
    max_cycles = _int(tb.get("max_cycles", 10000), "testbench.max_cycles")
    if period < 2:
        raise ConfigError("testbench.period must be at least 2 ticks")
    if reset_cycles < 0 or max_cycles < 1:
        raise ConfigError("testbench.reset_cycles must be >= 0 and max_cycles >= 1")

    enc = _section(doc, "encode")
    tol = _int(enc.get("period_tolerance", 0), "encode.period_tolerance")
    if period_tolerance is not None:
        tol = period_tolerance
    if tol < 0:
        raise ConfigError("period tolerance must be >= 0")

    cmp_ = _section(doc, "compare")
    golden = cmp_.get("golden")
    rg = _section(doc, "romgen")
    ww = _int(rg.get("word_width", 32), "romgen.word_width")
    if word_width is not None:
        ww = word_width
    if ww not in WORD_WIDTHS:
        raise ConfigError(f"word width must be one of {WORD_WIDTHS}")

    try:
        replay_opts = ReplayOptions(
            check_enabled=bool(rep.get("check", True)),
            stop_on_first_mismatch=bool(rep.get("stop_on_first_mismatch", False)),
            max_recorded_mismatches=_int(rep.get("max_recorded_mismatches", 16),
                                         "replay.max_recorded_mismatches"),
        )
        norm = Normalization(
            word_size=_int(cmp_.get("word_size", 4), "compare.word_size"),
            word_order=_enum(WordOrder, cmp_.get("word_order", "ascending"), "compare.word_order"),
            byte_order=_enum(ByteOrder, cmp_.get("byte_order", "little"), "compare.byte_order"),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None

    return FlowConfig(
        root=root,
        output_dir=resolve(doc.get("output_dir", "out")),
        gpu=gpu,
        replay_seed=replay_seed,
        period=period,
        reset_cycles=reset_cycles,
        max_cycles=max_cycles,
        interface=interface,
        x_policy=_enum(XPolicy, enc.get("x_policy", "error"), "encode.x_policy"),
        period_tolerance=tol,
        replay=replay_opts,
        golden=resolve(golden) if golden else None,
        compare_base=_int(cmp_.get("base", gpu.mem_base), "compare.base"),
        compare_length=_int(cmp_.get("length", 4 * gpu.word_count), "compare.length"),
        norm=norm,
        romgen_enabled=bool(rg.get("enabled", True)),
        romgen=RomGenOptions(
            module_name=rg.get("module_name", "replay_rom"),
            word_width=ww,
            include_checker=bool(rg.get("include_checker", True)),
        ),
        files=dict(DEFAULT_FILES),
    )
