from pathlib import Path

import pytest

from replaykit.cli import (
    EXIT_COMPARE, EXIT_INSPECT, EXIT_OK, EXIT_REPLAY, EXIT_USAGE, main,
)

CONFIGS = Path(__file__).parent.parent / "configs"
OUTPUTS = ("capture.vcd", "ip_dump.txt", "replay.rpaf", "replay.vcd", "replay_report.txt",
           "replay_dump.txt", "compare_report.txt", "replay_rom.v", "replay_rom_data.hex",
           "replay_rom_care.hex")


def outputs(directory):
    return {name: (directory / name).read_bytes() for name in OUTPUTS if (directory / name).exists()}


def test_canonical_flow(make_config, tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["flow", "--config", str(cfg)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "flow: PASS" in out
    for name in OUTPUTS:
        assert str(tmp_path / "out" / name) in out
    assert (tmp_path / "out" / "ip_dump.txt").read_text() == (CONFIGS / "golden_dump.txt").read_text()
    assert (tmp_path / "out" / "compare_report.txt").read_text().startswith("result   PASS")


def test_seed_mismatch_fails_at_replay(make_config, tmp_path, capsys):
    cfg = make_config(tmp_path, **{"gpu.randomization.enabled": True, "gpu.randomization.seed": 3,
                                   "replay.seed": 4})
    assert main(["flow", "--config", str(cfg)]) == EXIT_REPLAY
    err = capsys.readouterr().err
    assert "replaykit replay:" in err
    assert "first mismatch at cycle" in err
    report = (tmp_path / "out" / "replay_report.txt").read_text()
    assert "first       cycle" in report


def test_no_randomization_override(make_config, tmp_path):
    cfg = make_config(tmp_path, **{"gpu.randomization.enabled": True, "gpu.randomization.seed": 3,
                                   "replay.seed": 4})
    assert main(["flow", "--config", str(cfg), "--no-randomization"]) == EXIT_OK
    assert "mismatches  0" in (tmp_path / "out" / "replay_report.txt").read_text()


def test_missing_config(make_config, tmp_path, capsys):
    assert main(["flow", "--config", str(tmp_path / "nope.yaml")]) == EXIT_USAGE
    assert "not found" in capsys.readouterr().err


def test_bad_config(make_config, tmp_path):
    cfg = make_config(tmp_path, **{"testbench.period": -1})
    assert main(["flow", "--config", str(cfg)]) == EXIT_USAGE


def test_usage_errors():
    assert main([]) == EXIT_USAGE
    assert main(["flow"]) == EXIT_USAGE
    assert main(["flow", "--config", "x", "--word-width", "12"]) == EXIT_USAGE


def test_manual_stages_match_flow(make_config, tmp_path):
    flow_dir = tmp_path / "a"
    manual_dir = tmp_path / "b"
    flow_dir.mkdir()
    manual_dir.mkdir()
    cfg_a, cfg_b = make_config(flow_dir), make_config(manual_dir)
    assert main(["flow", "--config", str(cfg_a)]) == EXIT_OK
    for cmd in ("run-ip", "encode", "replay", "compare", "romgen"):
        assert main([cmd, "--config", str(cfg_b)]) == EXIT_OK, cmd
    assert outputs(flow_dir / "out") == outputs(manual_dir / "out")
    assert len(outputs(flow_dir / "out")) == len(OUTPUTS)


def test_compare_detects_difference(make_config, tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["flow", "--config", str(cfg)]) == EXIT_OK
    bad = tmp_path / "bad_golden.txt"
    bad.write_text("4316BC0004: 02000000\n")
    assert main(["compare", "--config", str(cfg), "--golden", str(bad)]) == EXIT_COMPARE
    assert "0x4316bc0004" in capsys.readouterr().err
    assert main(["compare", "--config", str(cfg), "--range", "0x4316BC0000:16"]) == EXIT_OK


def test_inspect(make_config, tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["flow", "--config", str(cfg)]) == EXIT_OK
    capsys.readouterr()
    assert main(["inspect", "--config", str(cfg), "--cycles", "0:3", "--clocks", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    n, w = 59, 135
    assert f"rom bits     {2 * n * w}" in out
    assert f"naive bits   {2 * n * w + 2 * n * 2}" in out
    assert f"savings bits {2 * n * 2}" in out
    assert "frames:" in out


def test_inspect_errors(make_config, tmp_path):
    assert main(["inspect", str(tmp_path / "missing.rpaf")]) == EXIT_INSPECT
    assert main(["inspect"]) == EXIT_USAGE


@pytest.mark.parametrize("ww", ["8", "64"])
def test_word_width_override(make_config, tmp_path, ww):
    cfg = make_config(tmp_path)
    assert main(["flow", "--config", str(cfg), "--word-width", ww]) == EXIT_OK
    first = (tmp_path / "out" / "replay_rom_data.hex").read_text().splitlines()[0]
    assert len(first) == int(ww) // 4
