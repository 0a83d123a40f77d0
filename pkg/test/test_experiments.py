import json

import pytest
from click.testing import CliRunner

from app import app
from core.errors import ConfigError
from core.experiments import reference
from core.experiments.services import (
    BER_HEADER,
    DIFF_HEADER,
    build_run_config,
    load_ber_csv,
    load_constellation,
    load_labeling,
    parse_config_file,
)
from core.labeling.services import pairwise_error_matrix, union_bound_ber
from core.simulate.services import noise_param_from_osnr
from core.utils import read_csv
from dependencies import get_experiment_service

FAST = ["--restarts", "2", "--seed", "5"]


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def invoke(runner, *args):
    result = runner.invoke(app, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def design(runner, out, *extra):
    invoke(runner, "design", *FAST, "--out", str(out), *extra)
    return out / "constellation.json"


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# balanced run\nrestarts = 3\nosnr_db_grid = 0, 5,10  # dB\n\nprofile = extreme\n")
    assert parse_config_file(path) == {"restarts": "3", "osnr_db_grid": "0, 5,10", "profile": "extreme"}

    config = build_run_config(path, {"restarts": 7, "seed": None})
    assert config.restarts == 7
    assert config.osnr_db_grid == (0.0, 5.0, 10.0)
    assert config.fractions == (0.7, 0.15, 0.15)


def test_unknown_config_key_is_an_error(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("restart = 3\n")
    with pytest.raises(ConfigError, match="restart"):
        build_run_config(path)


def test_config_line_without_value(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("restarts\n")
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_bits_must_fill_whole_symbols():
    with pytest.raises(ConfigError, match="multiple"):
        build_run_config(None, {"n_bits": 1000})


def test_design_writes_artifacts(runner, tmp_path):
    path = design(runner, tmp_path)
    payload = json.loads(path.read_text())

    assert payload["dim"] == 3
    assert payload["domain_tag"] == "intensity"
    assert len(payload["points"]) == 8
    assert len(payload["restart_meds"]) == 2
    assert payload["failed_restarts"] == 0
    assert payload["med"] == max(payload["restart_meds"])

    constellation = load_constellation(path)
    assert constellation.med == pytest.approx(payload["med"], abs=1e-5)

    summary = read_csv(tmp_path / "design_summary.csv")
    assert summary[0]["profile"] == "balanced"
    assert summary[0]["feasible"] == "1"
    assert float(summary[0]["baseline_med"]) == pytest.approx(20 / 3, abs=1e-6)


def test_design_is_byte_identical_across_runs(runner, tmp_path):
    first = design(runner, tmp_path / "a").read_bytes()
    second = design(runner, tmp_path / "b").read_bytes()
    assert first == second


def test_design_with_papr_cap(runner, tmp_path):
    payload = json.loads(design(runner, tmp_path, "--papr", "2").read_text())
    summary = read_csv(tmp_path / "design_summary.csv")
    assert summary[0]["papr_alpha"] == "2.000000"
    assert payload["med"] > 0


def test_infeasible_spec_exits_nonzero(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_green = 0\n")
    result = runner.invoke(app, ["design", "--config", str(cfg), *FAST, "--out", str(tmp_path)])
    assert result.exit_code != 0
    assert "no green LEDs" in result.output
    assert not (tmp_path / "constellation.json").exists()


def test_label_and_simulate(runner, tmp_path):
    constellation_path = design(runner, tmp_path)
    invoke(runner, "label", "--constellation", str(constellation_path), *FAST, "--out", str(tmp_path))

    labeling = load_labeling(tmp_path / "labeling.json")
    payload = json.loads((tmp_path / "labeling.json").read_text())
    constellation = load_constellation(constellation_path)
    pem = pairwise_error_matrix(constellation, noise_param_from_osnr(5.0, 10.0))
    assert payload["design_osnr_db"] == 5.0
    assert labeling.cost == pytest.approx(union_bound_ber(labeling, pem), abs=1e-6)

    invoke(
        runner, "simulate",
        "--constellation", str(constellation_path),
        "--labeling", str(tmp_path / "labeling.json"),
        *FAST, "--osnr", "0,60", "--bits", "3000", "--out", str(tmp_path),
    )
    text = (tmp_path / "ber.csv").read_text()
    assert text.splitlines()[0] == ",".join(BER_HEADER)
    report = load_ber_csv(tmp_path / "ber.csv", 3)
    assert report.osnr_db == (0.0, 60.0)
    assert report.bit_errors[0] > 0
    assert report.bit_errors[1] == 0


def test_label_rejects_size_mismatch(runner, tmp_path):
    constellation_path = design(runner, tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_symbols = 4\nn_bits = 3000\n")
    result = runner.invoke(app, ["label", "--config", str(cfg), "--constellation", str(constellation_path),
                                 "--out", str(tmp_path)])
    assert result.exit_code != 0
    assert "8 points" in result.output


def test_two_point_constellation(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_symbols = 2\n")
    path = design(runner, tmp_path, "--config", str(cfg))
    invoke(runner, "label", "--config", str(cfg), "--constellation", str(path), *FAST, "--out", str(tmp_path))
    assert load_labeling(tmp_path / "labeling.json").bits_per_symbol == 1


def test_svd_pre_pipeline(runner, tmp_path):
    path = design(runner, tmp_path, "--equalizer", "svd-pre", "--epsilon", "0.1")
    assert load_constellation(path).domain_tag == "pre-equalized"
    invoke(runner, "label", "--constellation", str(path), *FAST, "--out", str(tmp_path))
    invoke(
        runner, "simulate", "--constellation", str(path), "--labeling", str(tmp_path / "labeling.json"),
        *FAST, "--equalizer", "svd-pre", "--epsilon", "0.1", "--osnr", "60", "--bits", "3000",
        "--out", str(tmp_path),
    )
    assert load_ber_csv(tmp_path / "ber.csv", 3).bit_errors == (0,)


def test_simulating_design_space_points_without_pre_equalizer_fails(runner, tmp_path):
    path = design(runner, tmp_path, "--equalizer", "svd-pre", "--epsilon", "0.1")
    invoke(runner, "label", "--constellation", str(path), *FAST, "--out", str(tmp_path))
    result = runner.invoke(app, [
        "simulate", "--constellation", str(path), "--labeling", str(tmp_path / "labeling.json"),
        *FAST, "--equalizer", "zf", "--epsilon", "0.1", "--bits", "3000", "--out", str(tmp_path),
    ])
    assert result.exit_code != 0
    assert "Stage 'simulate' failed" in result.output


def test_end_to_end_runs_are_byte_identical(runner, tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        path = design(runner, out)
        invoke(runner, "label", "--constellation", str(path), *FAST, "--out", str(out))
        invoke(runner, "simulate", "--constellation", str(path), "--labeling", str(out / "labeling.json"),
               *FAST, "--osnr", "2,5", "--bits", "30000", "--out", str(out))
        outputs.append([(out / f).read_bytes() for f in ("constellation.json", "labeling.json", "ber.csv")])
    assert outputs[0] == outputs[1]


def test_reproduce_table1(runner, tmp_path):
    invoke(runner, "reproduce", "table1", *FAST, "--out", str(tmp_path))

    rows = read_csv(tmp_path / "table1.csv")
    assert len(rows) == 12
    diff_lines = (tmp_path / "diff_vs_paper.csv").read_text().splitlines()
    assert diff_lines[0] == ",".join(DIFF_HEADER)
    diff = read_csv(tmp_path / "diff_vs_paper.csv")
    assert len(diff) == 12
    assert float(diff[0]["reference"]) == reference.TABLE1_MED[(1.5, "balanced")]


def test_reproduce_fig4_histogram(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("hist_runs = 6\n")
    invoke(runner, "reproduce", "fig4", "--config", str(cfg), *FAST, "--out", str(tmp_path))

    hist = read_csv(tmp_path / "fig4_hist.csv")
    assert sum(int(r["count"]) for r in hist) == 6
    summary = read_csv(tmp_path / "fig4_summary.csv")[0]
    assert int(summary["n_runs"]) == 6
    assert int(summary["failed_restarts"]) == 0
    assert 0.0 < float(summary["near_best_fraction"]) <= 1.0


def test_reproduce_rejects_unknown_target(runner, tmp_path):
    result = runner.invoke(app, ["reproduce", "table9", "--out", str(tmp_path)])
    assert result.exit_code != 0


@pytest.mark.slow
def test_table3_within_two_percent(tmp_path):
    config = build_run_config(None, {"out_dir": str(tmp_path)})
    _, diff = get_experiment_service(config).reproduce_table3(config)

    assert len(diff) == 15
    for target, cell, ref, measured, rel in diff:
        assert abs(rel) <= 0.02, cell


@pytest.mark.slow
def test_table1_within_two_percent(tmp_path):
    config = build_run_config(None, {"out_dir": str(tmp_path)})
    _, diff = get_experiment_service(config).reproduce_table1(config)

    assert len(diff) == 12
    for target, cell, ref, measured, rel in diff:
        assert abs(rel) <= 0.02, cell


@pytest.mark.slow
def test_near_best_share_of_restarts(tmp_path):
    config = build_run_config(None, {"out_dir": str(tmp_path)})
    _, diff = get_experiment_service(config).reproduce_fig4(config)
    assert 0.10 <= diff[0][3] <= 0.45


@pytest.mark.slow
def test_table2_bit_errors_per_symbol_error(tmp_path):
    config = build_run_config(None, {"out_dir": str(tmp_path)})
    _, diff = get_experiment_service(config).reproduce_table2(config)

    bsa, random_mean = diff
    assert bsa[3] == pytest.approx(1.33, abs=0.10)
    assert random_mean[3] == pytest.approx(1.73, abs=0.10)
