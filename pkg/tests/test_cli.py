import json
from pathlib import Path

import pytest

from streamlab.cli import main
from streamlab.scenario import dump_scenario, load_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def scenario(tmp_path):
    """Short-horizon copy of the shipped flash scenario so CLI tests stay fast."""
    doc = json.loads((SCENARIOS / "flash_eq3.json").read_text())
    doc.update(horizon=800, warmup=200)
    path = tmp_path / "flash.json"
    path.write_text(json.dumps(doc))
    return path


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def test_threshold_prints_worked_example(tmp_path, capsys):
    assert run(tmp_path, "threshold", "--bprime", "40", "--k", "1.25", "--beta", "0.2") == 0
    assert "53.33" in capsys.readouterr().out
    doc = json.loads((tmp_path / "threshold.json").read_text())
    assert doc["length_threshold_s"] == pytest.approx(160 / 3)


def test_threshold_infinite(tmp_path, capsys):
    assert run(tmp_path, "threshold", "--bprime", "40", "--k", "1.25", "--beta", "0.8") == 0
    assert "no finite threshold" in capsys.readouterr().out
    assert json.loads((tmp_path / "threshold.json").read_text())["length_threshold_s"] is None


def test_generate_then_analyze_classifies(tmp_path):
    assert run(tmp_path, "generate", "--preset", "youtube-flash", "--encoding-rate", "125000",
               "--duration", "300") == 0
    assert run(tmp_path, "records", "--trace", str(tmp_path / "trace.csv")) == 0
    assert run(tmp_path, "analyze", "--records", str(tmp_path / "records.csv"),
               "--encoding-rate", "125000") == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["classification"] == "ShortOnOff"
    assert report["accumulation_ratio"] == pytest.approx(1.25, abs=0.05)
    # the analyzer also accepts the segment CSV directly
    assert run(tmp_path, "analyze", "--records", str(tmp_path / "trace.csv"),
               "--output", "direct.json") == 0
    direct = json.loads((tmp_path / "direct.json").read_text())
    assert direct["classification"] == "ShortOnOff"


def test_generate_by_kind(tmp_path):
    assert run(tmp_path, "generate", "--kind", "LongOnOff", "--on-rate", "625000",
               "--block-size", "4194304", "--k", "1.25", "--buffer-playback", "40",
               "--encoding-rate", "125000", "--duration", "600") == 0
    assert run(tmp_path, "analyze", "--records", str(tmp_path / "trace.csv")) == 0
    assert json.loads((tmp_path / "report.json").read_text())["classification"] == "LongOnOff"


def test_simulate_zero_arrivals(tmp_path, scenario):
    assert run(tmp_path, "simulate", "--scenario", str(scenario), "--arrival-rate", "0") == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["empirical_mean_Bps"] == 0 and doc["empirical_variance_Bps2"] == 0
    assert doc["seeds"] == [1]


def test_dimension(tmp_path):
    assert run(tmp_path, "dimension", "--arrival-rate", "0.5", "--encoding-rate", "125000",
               "--duration", "120", "--on-rate", "625000", "--alpha", "2") == 0
    doc = json.loads((tmp_path / "dimension.json").read_text())
    assert doc["link_rate_Bps"] == pytest.approx(1.1830e7, rel=1e-4)


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("youtube-flash", "youtube-android", "netflix-ipad"):
        assert name in out
    assert main(["presets", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["youtube-flash"]["config"]["block_size"] == 65_536


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("STREAMLAB_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["threshold", "--bprime", "40", "--k", "1.25", "--beta", "0.2"]) == 0
    assert (tmp_path / "env" / "threshold.json").exists()


def test_errors_give_nonzero_exit(tmp_path, capsys):
    assert run(tmp_path, "threshold", "--bprime", "40", "--k", "1.25", "--beta", "1.5") == 2
    assert run(tmp_path, "generate", "--kind", "NoOnOff", "--on-rate", "1000",
               "--encoding-rate", "125000", "--duration", "10") == 2
    assert run(tmp_path, "simulate", "--scenario", str(tmp_path / "missing.json")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"arrival_rate": 1, "horizon": 10}))
    assert run(tmp_path, "simulate", "--scenario", str(bad)) == 2
    assert "missing field" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["generate", "--preset", "no-such-preset", "--encoding-rate", "1",
              "--duration", "1"])


def test_scenario_round_trip(tmp_path):
    for src in sorted(SCENARIOS.glob("*.json")):
        w = load_scenario(src)
        out = tmp_path / src.name
        dump_scenario(w, out)
        assert load_scenario(out) == w
