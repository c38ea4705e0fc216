import random
import re
from pathlib import Path

import pytest

from replaykit.artifact import DirEntry, Frame, ReplayArtifact, emit_hex
from replaykit.engine import ReplayEngine
from replaykit.errors import RomGenError
from replaykit.interface import Direction, StartCondition
from replaykit.romgen import RomGenOptions, emit_hdl_module, write_rom_files
from replaykit.vcd import Timescale

from strategies import GOLDEN_CASES, canonical_artifact, minimal_artifact, policy_artifact, random_artifact

GOLDEN_DIR = Path(__file__).parent / "golden"


def rom_drives(out, a, word_width):
    """Read cycle drives back out of the generated text: ROM words from the hex
    file, output slices from the ``assign`` lines, K from the localparam."""
    k = int(re.search(r"localparam integer K = (\d+);", out.hdl).group(1))
    words = [int(line, 16) for line in out.data_hex.splitlines()]
    assigns = re.findall(r"assign (\w+) = frame\[(\d+) \+: (\d+)\];", out.hdl)
    result = []
    for i in range(len(words) // k):
        frame = sum(words[i * k + j] << (j * word_width) for j in range(k))
        result.append({name: frame >> int(off) & ((1 << int(w)) - 1) for name, off, w in assigns})
    return result


def test_minimal_module():
    out = emit_hdl_module(minimal_artifact(), RomGenOptions("replay_min", 8))
    assert "output wire pm_ack" in out.hdl
    assert "reg [7:0] data_rom [0:0];" in out.hdl
    assert out.data_hex == "01\n"
    assert out.care_hex == "01\n"


def test_deterministic():
    a = policy_artifact()
    assert emit_hdl_module(a) == emit_hdl_module(a)


def test_canonical_hex_is_emit_hex():
    a = canonical_artifact()
    for ww in (8, 16, 32, 64):
        out = emit_hdl_module(a, RomGenOptions(word_width=ww))
        assert out.data_hex == emit_hex(a, ww)
        assert out.care_hex == emit_hex(a, ww, "care")


def test_ports_follow_directory():
    out = emit_hdl_module(policy_artifact())
    assert "output wire [1:0] grant" in out.hdl
    assert "input  wire [2:0] req" in out.hdl
    assert "input  wire [7:0] status" in out.hdl
    assert "input  wire [3:0] debug" in out.hdl
    assert "output wire mismatch" in out.hdl
    assert "output reg  error" in out.hdl
    no_chk = emit_hdl_module(policy_artifact(), RomGenOptions(include_checker=False))
    assert "mismatch" not in no_chk.hdl and "care_rom" not in no_chk.hdl


def test_policy_constant():
    out = emit_hdl_module(policy_artifact())
    # req strict (bits 0-2), status low nibble (bits 5-8), debug ignored, grant not checked
    expected = 0b111 | 0x0F << 5
    assert f"localparam [31:0] POLICY = 32'h{expected:08x};" in out.hdl


@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("ww", [8, 16, 32, 64])
def test_rom_content_matches_engine(seed, ww):
    a = random_artifact(random.Random(seed), max_width=150, max_frames=40)
    if a.cycle_count == 0:
        with pytest.raises(RomGenError):
            emit_hdl_module(a, RomGenOptions(word_width=ww))
        return
    out = emit_hdl_module(a, RomGenOptions(word_width=ww))
    eng = ReplayEngine(a)
    assert rom_drives(out, a, ww) == [eng.drive_for(i) for i in range(a.cycle_count)]


def test_rom_content_matches_engine_canonical():
    a = canonical_artifact()
    out = emit_hdl_module(a)
    eng = ReplayEngine(a)
    assert rom_drives(out, a, 32) == [eng.drive_for(i) for i in range(a.cycle_count)]


def test_errors():
    empty = ReplayArtifact(1, 10, Timescale(), StartCondition.FIRST_EDGE,
                           (DirEntry("pm_ack", 1, Direction.AGENT, 0),), ())
    with pytest.raises(RomGenError, match="no frames"):
        emit_hdl_module(empty)
    with pytest.raises(RomGenError, match="module name"):
        emit_hdl_module(minimal_artifact(), RomGenOptions("9bad"))
    with pytest.raises(RomGenError, match="module name"):
        emit_hdl_module(minimal_artifact(), RomGenOptions("module"))
    with pytest.raises(RomGenError, match="word width"):
        emit_hdl_module(minimal_artifact(), RomGenOptions(word_width=12))


@pytest.mark.parametrize("name,msg", [("done", "control port"), ("wire", "identifier"), ("a.b", "identifier")])
def test_bad_directory_names(name, msg):
    a = ReplayArtifact(1, 10, Timescale(), StartCondition.FIRST_EDGE,
                       (DirEntry(name, 1, Direction.AGENT, 0),), (Frame(1, 1),))
    with pytest.raises(RomGenError, match=msg):
        emit_hdl_module(a)


def test_write_rom_files(tmp_path):
    paths = write_rom_files(minimal_artifact(), RomGenOptions("rm"), tmp_path)
    assert sorted(Path(p).name for p in paths) == ["rm.v", "rm_care.hex", "rm_data.hex"]
    assert (tmp_path / "rm_data.hex").read_text() == "00000001\n"


@pytest.mark.parametrize("case", sorted(GOLDEN_CASES))
def test_golden_files(case):
    make, opts = GOLDEN_CASES[case]
    out = emit_hdl_module(make(), opts)
    for fname, text in out.files(opts.module_name).items():
        assert (GOLDEN_DIR / fname).read_bytes() == text.encode(), fname
