import pytest

from streamlab.domain import Constant, StrategyConfig, VideoParams, WorkloadSpec

FLASH_G = 625_000.0


@pytest.fixture
def flash_config():
    return StrategyConfig("ShortOnOff", FLASH_G, buffer_playback=40, block_size=65_536,
                          accumulation_ratio=1.25)


@pytest.fixture
def example_video():
    return VideoParams(100_000, 100)


@pytest.fixture
def example_short():
    return StrategyConfig("ShortOnOff", 500_000, buffer_bytes=1_000_000, block_size=64_000,
                          accumulation_ratio=1.25)


@pytest.fixture
def flash_workload(flash_config):
    return WorkloadSpec(0.5, Constant(125_000), Constant(120), flash_config,
                        horizon=4000, warmup=400, seed=1)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; echoed at session end."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
