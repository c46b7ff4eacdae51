import csv
import json
import math

import numpy as np
import pytest

from diracatom.cli import main

RABI = {
    "model_kind": "TransformedLiteral",
    "params": {"mu": 1.0},
    "field": {"kind": "static", "amplitude": [0.0, 0.0, 1.0]},
    "initial_state": [[0, 0], [1, 0], [0, 0], [0, 0]],
    "t1": 10 * math.pi,
    "dt": 1e-3,
    "sample_stride": 10,
    "output_prefix": "rabi",
    "frequency_signal": "pop4",
}


def write(tmp_path, name, document):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return path


def run(tmp_path, *args):
    return main([*map(str, args), "--output-dir", str(tmp_path / "out"), "--quiet"])


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_run_block_rabi(tmp_path):
    assert run(tmp_path, "run", write(tmp_path, "rabi.json", RABI)) == 0
    summary = json.loads((tmp_path / "out" / "rabi.json").read_text())
    assert set(summary) >= {"config", "weak_field_ratio", "weak_field_ok", "final_norm_drift",
                            "oscillation_frequency", "wall_time_s", "steps_per_second"}
    assert summary["oscillation_frequency"] == pytest.approx(2.0, rel=0.01)
    assert summary["final_norm_drift"] < 1e-10
    assert summary["weak_field_ratio"] is None

    header, data = read_csv(tmp_path / "out" / "rabi.csv")
    assert header == ["t", "norm", "pop1", "pop2", "pop3", "pop4",
                      "pop_radiant", "pop_absorptive", "dx", "dy", "dz"]
    rows = 1 + len(data)
    expected = 1 + math.ceil(RABI["t1"] / (RABI["dt"] * RABI["sample_stride"]))
    assert abs(rows - expected) <= 1
    assert data[0, 0] == 0.0 and data[-1, 0] == RABI["t1"]


def test_summary_echo_replays(tmp_path):
    assert run(tmp_path, "run", write(tmp_path, "rabi.json", RABI)) == 0
    echoed = json.loads((tmp_path / "out" / "rabi.json").read_text())["config"]
    assert echoed["integrator"] == "ExpMidpoint" and echoed["params"]["hbar"] == 1.0
    replay = {**echoed, "output_prefix": "replay"}
    assert run(tmp_path, "run", write(tmp_path, "replay.json", replay)) == 0
    out = tmp_path / "out"
    assert (out / "replay.csv").read_bytes() == (out / "rabi.csv").read_bytes()


def test_csv_number_format(tmp_path):
    assert run(tmp_path, "run", write(tmp_path, "rabi.json", {**RABI, "t1": 0.1})) == 0
    line = (tmp_path / "out" / "rabi.csv").read_text().splitlines()[2]
    for field in line.split(","):
        mantissa = field.split("e")[0].lstrip("-")
        assert len(mantissa.replace(".", "")) == 17


def test_zero_field_populations_constant(tmp_path):
    cfg = {"model_kind": "Full", "coupling": "None", "params": {"mass": 1.0, "omega": 0.5},
           "initial_state": [[0.5, 0], [0, 0.5], [0.5, 0], [-0.5, 0]],
           "t1": 20.0, "dt": 0.01, "output_prefix": "free"}
    assert run(tmp_path, "run", write(tmp_path, "free.json", cfg)) == 0
    _, data = read_csv(tmp_path / "out" / "free.csv")
    pops = data[:, 2:6]
    assert np.max(np.abs(pops - pops[0])) < 1e-12
    summary = json.loads((tmp_path / "out" / "free.json").read_text())
    assert summary["oscillation_frequency"] is None


def test_strong_field_flagged(tmp_path):
    cfg = {**RABI, "params": {"mu": 2.0, "gamma": 1.0}, "t1": 5.0, "output_prefix": "strong"}
    assert run(tmp_path, "run", write(tmp_path, "strong.json", cfg)) == 0
    summary = json.loads((tmp_path / "out" / "strong.json").read_text())
    assert summary["weak_field_ratio"] == pytest.approx(2.0)
    assert summary["weak_field_ok"] is False


def test_baseline_run_two_component_csv(tmp_path):
    cfg = {"model_kind": "Baseline2", "params": {"omega_a": 1.0, "mu": 0.5},
           "field": {"kind": "cosine", "amplitude": [0.2, 0, 0], "nu": 1.0},
           "t1": 50.0, "dt": 0.01, "sample_stride": 5, "output_prefix": "two"}
    assert run(tmp_path, "run", write(tmp_path, "two.json", cfg)) == 0
    header, data = read_csv(tmp_path / "out" / "two.csv")
    assert header == ["t", "norm", "pop_upper", "pop_lower", "dx", "dy", "dz"]
    assert data[0, 3] == 1.0


def test_run_is_byte_deterministic(tmp_path):
    cfg = {**RABI, "integrator": "RK4", "field": {"kind": "cosine", "amplitude": [0.1, 0, 1], "nu": 1.3}}
    path = write(tmp_path, "det.json", cfg)
    assert run(tmp_path, "run", path) == 0
    first = (tmp_path / "out" / "rabi.csv").read_bytes()
    assert run(tmp_path, "run", path) == 0
    assert (tmp_path / "out" / "rabi.csv").read_bytes() == first


def read_sweep(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("jobs", [1, 2])
def test_sweep_amplitude_linear(tmp_path, jobs):
    cfg = {**RABI, "output_prefix": "amp",
           "sweep": {"axis": "field.amplitude.z", "values": [0.5, 1.0, 2.0]}}
    path = write(tmp_path, "sweep.json", cfg)
    assert main(["sweep", str(path), "--output-dir", str(tmp_path / "out"), "--quiet", "--jobs", str(jobs)]) == 0
    rows = read_sweep(tmp_path / "out" / "amp_sweep.csv")
    assert [float(r["value"]) for r in rows] == [0.5, 1.0, 2.0]
    for r, expected in zip(rows, (1.0, 2.0, 4.0)):
        assert float(r["oscillation_frequency"]) == pytest.approx(expected, rel=0.01)
        assert r["status"] == "ok"
    for i in range(3):
        assert (tmp_path / "out" / f"amp_{i}.csv").exists()
        assert (tmp_path / "out" / f"amp_{i}.json").exists()


def test_sweep_zero_field_no_frequencies(tmp_path):
    cfg = {"model_kind": "TransformedLiteral", "t1": 20.0, "dt": 0.01, "output_prefix": "om",
           "sweep": {"axis": "params.omega", "values": [0.5, 1.0, 1.5]}}
    assert run(tmp_path, "sweep", write(tmp_path, "s.json", cfg)) == 0
    rows = read_sweep(tmp_path / "out" / "om_sweep.csv")
    assert all(r["oscillation_frequency"] == "" for r in rows)
    assert all("no oscillation detected" in r["detail"] for r in rows)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_sweep_records_failed_row(tmp_path):
    cfg = {**RABI, "t1": 1.0, "output_prefix": "bad",
           "field": {"kind": "static", "amplitude": [0, 0, 1e308]},
           "sweep": {"axis": "params.mu", "values": [1e-308, 1e308]}}
    assert run(tmp_path, "sweep", write(tmp_path, "s.json", cfg)) != 0
    rows = read_sweep(tmp_path / "out" / "bad_sweep.csv")
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert "NumericalAbort" in rows[1]["detail"]


def test_sweep_empty_values_is_config_error(tmp_path):
    cfg = {**RABI, "sweep": {"axis": "params.mu", "values": []}}
    assert run(tmp_path, "sweep", write(tmp_path, "s.json", cfg)) == 1


def test_algebra_check(capsys):
    assert main(["algebra-check"]) == 0
    out = capsys.readouterr().out
    assert "beta1 not Dirac: [α_z, β¹] ≠ 0" in out
    assert "parity: βΣ_xβ = Σ_x" in out
    assert "FAIL" not in out


COMPARE = {
    "model_kind": "Full",
    "params": {"mass": 0.1, "omega": 1.0, "mu": 1.0},
    "field": {"kind": "cosine", "amplitude": [0.0, 0.0, 0.1], "nu": 2.0},
    "t1": 100.0,
    "dt": 0.005,
    "sample_stride": 20,
    "output_prefix": "cmp",
}


def compare_report(tmp_path, document):
    assert run(tmp_path, "compare", write(tmp_path, "cmp.json", document)) == 0
    return json.loads((tmp_path / "out" / f"{document['output_prefix']}_compare.json").read_text())


def test_compare_resonant(tmp_path):
    report = compare_report(tmp_path, COMPARE)
    assert report["baseline_equivalence"]["max_population_deviation"] < 1e-8
    ip = report["interaction_picture"]
    assert ip["ok"] and ip["max_amplitude_deviation"] <= 10 * ip["convergence_error"] + 1e-12
    assert report["literal_vs_exact"]["max_population_deviation"] > 1e-3


def test_compare_massless(tmp_path):
    report = compare_report(tmp_path, {**COMPARE, "params": {"mass": 0.0, "omega": 1.0, "mu": 1.0}})
    assert report["literal_vs_exact"]["max_population_deviation"] < 1e-12


@pytest.mark.parametrize(
    "changes",
    [
        {"params": {"mass": 0.1, "momentum": [0, 0, 0.1]}},
        {"field": {"kind": "static", "amplitude": [0.1, 0, 0]}},
        {"coupling": "SigmaE"},
        {"model_kind": "TransformedExact"},
    ],
)
def test_compare_unsupported(tmp_path, changes):
    assert run(tmp_path, "compare", write(tmp_path, "cmp.json", {**COMPARE, **changes})) == 4


def test_exit_codes(tmp_path):
    assert run(tmp_path, "run", write(tmp_path, "bad.json", {**RABI, "dt": -1})) == 1
    assert run(tmp_path, "run", tmp_path / "missing.json") == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    path = write(tmp_path, "ok.json", {**RABI, "t1": 0.1})
    assert main(["run", str(path), "--output-dir", str(blocker), "--quiet"]) == 2
    sweep = write(tmp_path, "sw.json", {**RABI, "sweep": {"axis": "params.mu", "values": [1]}})
    assert run(tmp_path, "run", sweep) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_abort_exit_code(tmp_path):
    cfg = {**RABI, "t1": 1.0, "params": {"mu": 1e308},
           "field": {"kind": "static", "amplitude": [0, 0, 1e308]}}
    assert run(tmp_path, "run", write(tmp_path, "nan.json", cfg)) == 3


def test_module_entry_point():
    import subprocess
    import sys

    result = subprocess.run([sys.executable, "-m", "diracatom", "algebra-check", "--quiet"])
    assert result.returncode == 0
