import shutil
import time
from contextlib import contextmanager
from pathlib import Path

import pytest
import yaml

CONFIGS = Path(__file__).parent.parent / "configs"

_criteria_lines = []


@pytest.fixture
def criterion():
    """Time an acceptance criterion and record one PASS/FAIL line for it."""

    @contextmanager
    def run(number, title, limit_s):
        start = time.perf_counter()
        ok, reason = True, ""
        try:
            yield
        except BaseException as e:
            ok, reason = False, f" ({type(e).__name__})"
            raise
        finally:
            elapsed = time.perf_counter() - start
            if ok and elapsed >= limit_s:
                ok, reason = False, " (too slow)"
            line = (f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  "
                    f"{elapsed:.2f}s / limit {limit_s:g}s{reason}")
            _criteria_lines.append(line)
            print(line)
        assert elapsed < limit_s, f"criterion {number} took {elapsed:.2f}s, limit {limit_s}s"

    return run


def pytest_terminal_summary(terminalreporter):
    if _criteria_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def make_config():
    """Copy the canonical flow config into a directory, applying dotted-key overrides."""

    def make(directory, **overrides):
        for name in ("interface.yaml", "golden_dump.txt"):
            shutil.copy(CONFIGS / name, directory / name)
        cfg = yaml.safe_load((CONFIGS / "canonical.yaml").read_text())
        for path, value in overrides.items():
            node = cfg
            keys = path.split(".")
            for k in keys[:-1]:
                node = node.setdefault(k, {})
            node[keys[-1]] = value
        p = directory / "flow.yaml"
        p.write_text(yaml.safe_dump(cfg))
        return p

    return make
