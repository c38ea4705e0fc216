"""replaykit command line.

Exit codes:
    0  success
    2  usage or configuration error (including a missing config file)
    3  run-ip stage failed
    4  encode stage failed
    5  replay stage failed (error or mismatching replay)
    6  compare stage failed (error or differing memory)
    7  romgen stage failed
    8  inspect failed
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import artifact as art
from .config import ConfigError, FlowConfig, load_config
from .errors import ReplayKitError
from .golden import compare_memory, format_dump, load_golden, select_range, single_region
from .romgen import write_rom_files
from .sim.testbench import DoneAsserted, build_ip_testbench, build_soc_testbench, dump_memory, run
from .vcd import load_vcd, save_vcd

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUN_IP = 3
EXIT_ENCODE = 4
EXIT_REPLAY = 5
EXIT_COMPARE = 6
EXIT_ROMGEN = 7
EXIT_INSPECT = 8

log = logging.getLogger("replaykit")


class StageFailed(Exception):
    def __init__(self, stage: str, code: int, message: str):
        super().__init__(message)
        self.stage = stage
        self.code = code


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(text)
    print(f"wrote {path}")


def _stage(name, code):
    def wrap(fn):
        def inner(cfg, *args, **kwargs):
            try:
                return fn(cfg, *args, **kwargs)
            except StageFailed:
                raise
            except (ReplayKitError, OSError, ValueError) as e:
                raise StageFailed(name, code, str(e)) from e
        inner.__name__ = fn.__name__
        return inner
    return wrap


@_stage("run-ip", EXIT_RUN_IP)
def stage_run_ip(cfg: FlowConfig) -> None:
    tb = build_ip_testbench(cfg.gpu, cfg.period, cfg.reset_cycles)
    res = run(tb, cfg.max_cycles)
    if not isinstance(res.status, DoneAsserted):
        raise StageFailed("run-ip", EXIT_RUN_IP, f"IP run did not finish: {res.status}")
    save_vcd(res.vcd, cfg.out("vcd"))
    print(f"wrote {cfg.out('vcd')}")
    region = dump_memory(res, cfg.gpu.mem_base, 4 * cfg.gpu.word_count)
    _write(cfg.out("ip_dump"), format_dump(cfg.gpu.mem_base, region))
    print(f"run-ip: work_done at cycle {res.status.cycle}")


@_stage("encode", EXIT_ENCODE)
def stage_encode(cfg: FlowConfig) -> art.ReplayArtifact:
    db = load_vcd(cfg.out("vcd"))
    a = art.encode_artifact(db, cfg.interface, cfg.x_policy, period_tolerance=cfg.period_tolerance)
    art.save_artifact(a, cfg.out("artifact"))
    print(f"wrote {cfg.out('artifact')}")
    print(f"encode: {a.cycle_count} cycles x {a.frame_width} bits, period {a.clock_period}")
    return a


@_stage("replay", EXIT_REPLAY)
def stage_replay(cfg: FlowConfig) -> bool:
    a = art.load_artifact(cfg.out("artifact"))
    tb = build_soc_testbench(a, cfg.replay_gpu, cfg.replay, reset_cycles=cfg.reset_cycles)
    res = run(tb, cfg.max_cycles)
    save_vcd(res.vcd, cfg.out("replay_vcd"))
    print(f"wrote {cfg.out('replay_vcd')}")
    report = res.report
    status = f"{res.status}"
    _write(cfg.out("replay_report"), f"soc run     {status}\n" + report.render())
    region = dump_memory(res, cfg.gpu.mem_base, 4 * cfg.gpu.word_count)
    _write(cfg.out("replay_dump"), format_dump(cfg.gpu.mem_base, region))
    if not report.passed:
        first = report.first_mismatch
        where = f"first mismatch at cycle {first.cycle} ({first.signal})" if first else report.status
        raise StageFailed("replay", EXIT_REPLAY, f"replay failed: {where}")
    print(f"replay: PASS, {report.cycles_executed} cycles, 0 mismatches")
    return True


@_stage("compare", EXIT_COMPARE)
def stage_compare(cfg: FlowConfig, sim_dump: str | None = None, golden: str | None = None,
                  base: int | None = None, length: int | None = None) -> bool:
    sim_base, sim = single_region(load_golden(sim_dump or cfg.out("replay_dump")))
    gold = load_golden(golden or cfg.golden or cfg.out("ip_dump"))
    base = cfg.compare_base if base is None else base
    length = cfg.compare_length if length is None else length
    gold = select_range(gold, base, length)
    if not gold.records:
        raise StageFailed("compare", EXIT_COMPARE, f"golden has no data in {base:#x}+{length}")
    report = compare_memory(sim, sim_base, gold, cfg.norm)
    _write(cfg.out("compare_report"), report.render())
    if not report.passed:
        d = report.first_difference
        raise StageFailed("compare", EXIT_COMPARE,
                          f"memory differs at {d.address:#x}: sim {d.sim_word:#x} golden {d.golden_word:#x}")
    print(f"compare: PASS, {report.words_compared} words")
    return True


@_stage("romgen", EXIT_ROMGEN)
def stage_romgen(cfg: FlowConfig) -> None:
    a = art.load_artifact(cfg.out("artifact"))
    for p in write_rom_files(a, cfg.romgen, cfg.output_dir):
        print(f"wrote {p}")


def _parse_range(text: str):
    try:
        start, _, stop = text.partition(":")
        return (int(start, 0) if start else 0), (int(stop, 0) if stop else None)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected START:STOP") from None


def _parse_region(text: str) -> tuple[int, int]:
    try:
        start, _, length = text.partition(":")
        return int(start, 0), int(length, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected BASE:LENGTH") from None


def cmd_inspect(args, cfg: FlowConfig | None) -> int:
    path = args.artifact or (cfg.out("artifact") if cfg else None)
    if path is None:
        print("inspect: give an artifact path or --config", file=sys.stderr)
        return EXIT_USAGE
    try:
        a = art.load_artifact(path)
    except (ReplayKitError, OSError) as e:
        print(f"inspect: {e}", file=sys.stderr)
        return EXIT_INSPECT
    sys.stdout.write(art.render_header(a))
    fp = art.footprint_report(a, args.clocks)
    print("footprint:")
    print(f"  rom bits     {fp.rom_bits}")
    print(f"  naive bits   {fp.naive_bits} ({args.clocks} captured clock(s))")
    print(f"  savings bits {fp.savings_bits}")
    if args.cycles is not None:
        start, stop = args.cycles
        print("frames:")
        sys.stdout.write(art.render_frames(a, start, stop))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="replaykit", description="Waveform capture and replay flow.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="flow YAML config")
        sp.add_argument("--seed", type=lambda s: int(s, 0), help="override randomization seed")
        sp.add_argument("--no-randomization", action="store_true",
                        help="disable GPU stall randomization on every stage")
        sp.add_argument("--period-tolerance", type=int, help="allowed clock period jitter in ticks")
        sp.add_argument("--word-width", type=int, choices=art.WORD_WIDTHS, help="ROM word width")

    helps = {
        "run-ip": "simulate the IP testbench, write the capture VCD and memory dump",
        "encode": "encode the capture VCD into a replay artifact",
        "replay": "replay the artifact in the SoC testbench and check DUT outputs",
        "romgen": "generate the Verilog replay ROM and its hex files",
        "flow": "run-ip, encode, replay, compare and (optionally) romgen in order",
    }
    for name, text in helps.items():
        common(sub.add_parser(name, help=text))
    sp = sub.add_parser("compare", help="compare a memory dump against a golden dump")
    common(sp)
    sp.add_argument("--dump", help="simulation dump (default: replay dump)")
    sp.add_argument("--golden", help="golden dump (default: config or IP dump)")
    sp.add_argument("--range", type=_parse_region, help="BASE:LENGTH region to compare")
    sp = sub.add_parser("inspect", help="print artifact header, directory, footprint and frames")
    common(sp, config_required=False)
    sp.add_argument("artifact", nargs="?", help="artifact file (default: from config)")
    sp.add_argument("--cycles", type=_parse_range, help="START:STOP frames to print")
    sp.add_argument("--clocks", type=int, default=1,
                    help="clock signals a naive capture would store (footprint report)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    cfg = None
    if args.config:
        try:
            cfg = load_config(args.config, seed=args.seed, no_randomization=args.no_randomization,
                              period_tolerance=args.period_tolerance, word_width=args.word_width)
        except FileNotFoundError:
            print(f"replaykit: config file not found: {args.config}", file=sys.stderr)
            return EXIT_USAGE
        except (ConfigError, ReplayKitError, ValueError) as e:
            print(f"replaykit: bad config: {e}", file=sys.stderr)
            return EXIT_USAGE
        os.makedirs(cfg.output_dir, exist_ok=True)

    if args.command == "inspect":
        return cmd_inspect(args, cfg)

    try:
        if args.command == "run-ip":
            stage_run_ip(cfg)
        elif args.command == "encode":
            stage_encode(cfg)
        elif args.command == "replay":
            stage_replay(cfg)
        elif args.command == "compare":
            base, length = args.range if args.range else (None, None)
            stage_compare(cfg, args.dump, args.golden, base, length)
        elif args.command == "romgen":
            stage_romgen(cfg)
        elif args.command == "flow":
            stage_run_ip(cfg)
            stage_encode(cfg)
            stage_replay(cfg)
            stage_compare(cfg)
            if cfg.romgen_enabled:
                stage_romgen(cfg)
            print("flow: PASS")
    except StageFailed as e:
        print(f"replaykit {e.stage}: {e}", file=sys.stderr)
        return e.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
