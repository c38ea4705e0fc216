"""Verilog replay module generation from a replay artifact.

For module ``NAME`` three files are produced: ``NAME.v``, ``NAME_data.hex``
and ``NAME_care.hex``.  The hex files are exactly :func:`emit_hex` output,
so each frame occupies ``ceil(W / word_width)`` consecutive ROM words, least
significant word first.

Generated module behaviour, one replay cycle per rising ``clk`` edge while
``rst`` (active high, synchronous) is low:

* agent-driven outputs present frame ``cycle`` until the edge that consumes
  it, matching ``ReplayEngine.step``;
* with the checker, ``mismatch`` flags a masked difference on DUT-driven
  inputs in the current cycle and ``error`` latches it (sticky; replay
  carries on);
* ``done`` rises after frame N-1 is consumed and outputs then hold frame N-1.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .artifact import ReplayArtifact, WORD_WIDTHS, emit_hex
from .errors import RomGenError
from .interface import Direction

CONTROL_PORTS = ("clk", "rst", "mismatch", "error", "done")

VERILOG_KEYWORDS = frozenset("""
always and assign automatic begin buf bufif0 bufif1 case casex casez cell cmos
config deassign default defparam design disable edge else end endcase
endconfig endfunction endgenerate endmodule endprimitive endspecify endtable
endtask event for force forever fork function generate genvar highz0 highz1 if
ifnone incdir include initial inout input instance integer join large liblist
library localparam macromodule medium module nand negedge nmos nor
noshowcancelled not notif0 notif1 or output parameter pmos posedge primitive
pull0 pull1 pulldown pullup pulsestyle_ondetect pulsestyle_onevent rcmos real
realtime reg release repeat rnmos rpmos rtran rtranif0 rtranif1 scalared
showcancelled signed small specify specparam strong0 strong1 supply0 supply1
table task time tran tranif0 tranif1 tri tri0 tri1 triand trior trireg unsigned
use uwire vectored wait wand weak0 weak1 while wire wor xnor xor
""".split())

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


@dataclass(frozen=True)
class RomGenOptions:
    module_name: str = "replay_rom"
    word_width: int = 32
    include_checker: bool = True


@dataclass(frozen=True)
class RomGenOutput:
    hdl: str
    data_hex: str
    care_hex: str

    def files(self, module_name: str) -> dict:
        return {
            f"{module_name}.v": self.hdl,
            f"{module_name}_data.hex": self.data_hex,
            f"{module_name}_care.hex": self.care_hex,
        }


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name)) and name not in VERILOG_KEYWORDS


def _range(width: int) -> str:
    return f"[{width - 1}:0] " if width > 1 else ""


def _hex_literal(width: int, value: int) -> str:
    return f"{width}'h{value:0{-(-width // 4)}x}"


def emit_hdl_module(a: ReplayArtifact, opts: RomGenOptions = RomGenOptions()) -> RomGenOutput:
    if a.cycle_count == 0:
        raise RomGenError("cannot generate a replay ROM for an artifact with no frames")
    if not is_identifier(opts.module_name):
        raise RomGenError(f"invalid module name {opts.module_name!r}")
    if opts.word_width not in WORD_WIDTHS:
        raise RomGenError(f"word width must be one of {WORD_WIDTHS}")
    for e in a.directory:
        if not is_identifier(e.name):
            raise RomGenError(f"directory name {e.name!r} is not a valid HDL identifier")
        if e.name in CONTROL_PORTS:
            raise RomGenError(f"directory name {e.name!r} collides with a control port")

    n, w, ww = a.cycle_count, a.frame_width, opts.word_width
    k = -(-w // ww)
    fw = k * ww
    cw = max(1, (n - 1).bit_length())
    name = opts.module_name
    agents = [e for e in a.directory if e.direction == Direction.AGENT]
    duts = [e for e in a.directory if e.direction == Direction.DUT]
    checker = opts.include_checker

    policy = 0
    for e in duts:
        policy |= e.check.effective_mask(e.width) << e.offset

    L = []
    L.append(f"// {name}: replay ROM generated by replaykit; do not edit.")
    L.append(f"// frames {n}, frame width {w} bits, {k} x {ww}-bit ROM words per frame")
    L.append(f"// clock period {a.clock_period} x {a.timescale} (regenerated, fixed frequency)")
    L.append("// frame layout:")
    for e in a.directory:
        direction = "agent" if e.direction == Direction.AGENT else "dut"
        L.append(f"//   [{e.offset} +: {e.width}] {e.name} ({direction}, {e.check.kind})")
    L.append(f"// outputs for cycle i come from ROM words i*{k} .. i*{k}+{k - 1} "
             f"of {name}_data.hex, least significant word first")
    L.append("module " + name + " (")
    ports = ["    input  wire clk", "    input  wire rst"]
    for e in agents:
        ports.append(f"    output wire {_range(e.width)}{e.name}")
    for e in duts:
        ports.append(f"    input  wire {_range(e.width)}{e.name}")
    if checker:
        ports.append("    output wire mismatch")
        ports.append("    output reg  error")
    ports.append("    output reg  done")
    L.append(",\n".join(ports))
    L.append(");")
    L.append(f"    localparam integer N = {n};")
    L.append(f"    localparam integer K = {k};")
    L.append("")
    L.append(f"    reg [{ww - 1}:0] data_rom [0:{n * k - 1}];")
    if checker:
        L.append(f"    reg [{ww - 1}:0] care_rom [0:{n * k - 1}];")
    L.append("    initial begin")
    L.append(f'        $readmemh("{name}_data.hex", data_rom);')
    if checker:
        L.append(f'        $readmemh("{name}_care.hex", care_rom);')
    L.append("    end")
    L.append("")
    L.append(f"    reg [{cw - 1}:0] cycle;")
    L.append(f"    wire [{fw - 1}:0] frame = " + _concat("data_rom", k) + ";")
    for e in agents:
        L.append(f"    assign {e.name} = frame[{e.offset} +: {e.width}];")
    if checker:
        L.append(f"    wire [{fw - 1}:0] care = " + _concat("care_rom", k) + ";")
        L.append(f"    wire [{fw - 1}:0] observed = " + _observed(a, fw) + ";")
        L.append(f"    localparam [{fw - 1}:0] POLICY = {_hex_literal(fw, policy)};")
        L.append("    assign mismatch = !rst && !done && |((frame ^ observed) & care & POLICY);")
    L.append("")
    L.append("    always @(posedge clk) begin")
    L.append("        if (rst) begin")
    L.append(f"            cycle <= {cw}'d0;")
    if checker:
        L.append("            error <= 1'b0;")
    L.append("            done <= 1'b0;")
    L.append("        end else if (!done) begin")
    if checker:
        L.append("            if (mismatch)")
        L.append("                error <= 1'b1;")
    L.append(f"            if (cycle == {cw}'d{n - 1})")
    L.append("                done <= 1'b1;")
    L.append("            else")
    L.append(f"                cycle <= cycle + {cw}'d1;")
    L.append("        end")
    L.append("    end")
    L.append("endmodule")
    hdl = "\n".join(L) + "\n"

    return RomGenOutput(hdl, emit_hex(a, ww, "data"), emit_hex(a, ww, "care"))


def _concat(rom: str, k: int) -> str:
    if k == 1:
        return f"{rom}[cycle]"
    parts = [f"{rom}[cycle*K+{j}]" for j in reversed(range(k))]
    return "{" + ", ".join(parts) + "}"


def _observed(a: ReplayArtifact, fw: int) -> str:
    parts = []
    pad = fw - a.frame_width
    if pad:
        parts.append(f"{pad}'d0")
    for e in reversed(a.directory):
        parts.append(e.name if e.direction == Direction.DUT else f"{e.width}'d0")
    return "{" + ", ".join(parts) + "}"


def write_rom_files(a: ReplayArtifact, opts: RomGenOptions, outdir) -> list:
    out = emit_hdl_module(a, opts)
    paths = []
    for fname, text in out.files(opts.module_name).items():
        path = os.path.join(outdir, fname)
        with open(path, "w", newline="\n") as f:
            f.write(text)
        paths.append(path)
    return paths
