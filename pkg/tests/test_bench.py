from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from replicable import (
    AffineParityHypothesis,
    ChannelError,
    ConstantHypothesis,
    DomainError,
    ParameterError,
    ProductDistribution,
    SeedStream,
)
from replicable.bench import (
    EXPERIMENTS,
    ExperimentConfig,
    build_experiment,
    estimate_error,
    estimate_replicability,
    main,
    wilson_interval,
)
from replicable.bench.cli import CSV_HEADER


class ConstantExperiment:
    threshold = None

    def run(self, stream, rng):
        return ConstantHypothesis(1)

    def error(self, h):
        return 0.0


class FreshCoinExperiment:
    threshold = None

    def run(self, stream, rng):
        return ConstantHypothesis(int(rng.integers(0, 2)))

    def error(self, h):
        return 0.5


class SharedMisuseExperiment:
    threshold = None

    def run(self, stream, rng):
        return ConstantHypothesis(int(stream.generator().integers(0, 2)))

    def error(self, h):
        return 0.0


def test_wilson_matches_closed_form():
    lo, hi, half = wilson_interval(10, 100)
    z = 1.959963984540054
    center = (0.1 + z * z / 200) / (1 + z * z / 100)
    assert math.isclose((lo + hi) / 2, center, rel_tol=1e-9)
    assert lo <= 0.1 <= hi
    assert wilson_interval(0, 50)[0] == 0.0
    with pytest.raises(ParameterError):
        wilson_interval(5, 3)


def test_constant_learner_never_disagrees():
    r = estimate_replicability(ExperimentConfig("custom", trials=50), ConstantExperiment())
    assert r.rho_hat == 0 and r.failures == 0


def test_fresh_coin_disagrees_half_the_time():
    r = estimate_replicability(ExperimentConfig("custom", trials=1000), FreshCoinExperiment())
    assert abs(r.rho_hat - 0.5) <= 0.06


def test_shared_stream_misuse_is_caught():
    r = estimate_replicability(ExperimentConfig("custom", trials=30), SharedMisuseExperiment())
    assert r.failures == 30 and r.rho_hat == 1.0
    with pytest.raises(ChannelError):
        SharedMisuseExperiment().run(SeedStream(1), None)


def test_r_mean_sign_certification():
    r = estimate_replicability(ExperimentConfig("r-mean", rho=0.2, trials=200))
    assert r.rho_hat <= 0.2 + 3 * r.half_width


def test_estimate_error_modes():
    d = 6
    f = AffineParityHypothesis(0b100101, 0, d)
    D = ProductDistribution(np.full(d, 0.5), f)
    assert estimate_error(f, D) == 0
    assert estimate_error(ConstantHypothesis(0), D) == 0.5
    flipped = AffineParityHypothesis(0b100101, 1, d)
    assert estimate_error(flipped, D) == 1.0
    mc = estimate_error(ConstantHypothesis(0), D, "montecarlo", n=10**5, rng=np.random.default_rng(0))
    assert abs(mc - 0.5) < 0.01
    big = ProductDistribution(np.full(25, 0.5), ConstantHypothesis(0))
    with pytest.raises(DomainError):
        estimate_error(ConstantHypothesis(0), big)


def test_config_validation():
    with pytest.raises(ParameterError, match="config.trials"):
        ExperimentConfig("r-mean", trials=5).validate()
    with pytest.raises(ParameterError, match="config.rho"):
        ExperimentConfig("r-mean", rho=1.5).validate()
    with pytest.raises(ParameterError, match="config.bogus"):
        ExperimentConfig.from_dict({"experiment": "r-mean", "bogus": 1})
    with pytest.raises(ParameterError, match="config.distribution.q"):
        build_experiment(ExperimentConfig("r-mean", distribution={"q": 1}).validate())
    with pytest.raises(ParameterError, match="config.experiment"):
        build_experiment(ExperimentConfig("nope").validate())


def test_defaults_fill_budgets():
    c = ExperimentConfig("parity-lift").validate()
    assert (c.alpha, c.rho, c.beta) == (0.25, 0.5, 0.1)


def test_threads_do_not_change_results():
    a = estimate_replicability(ExperimentConfig("aff-parity", trials=40, threads=1))
    b = estimate_replicability(ExperimentConfig("aff-parity", trials=40, threads=4))
    assert a.summary() == b.summary()
    assert [r.output_a for r in a.records] == [r.output_a for r in b.records]


def test_all_experiments_registered():
    assert set(EXPERIMENTS) >= {"ge-nonreplicable", "parity-lift", "ows-learn", "build-dt", "dp2rep-weak"}


def test_cli_writes_reports(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["run-dp2rep", "--trials", "30", "--seed", "3", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["trials"] == 30 and report["config"]["seed"] == 3
    with open(out / "trials.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER == ["trial", "seed_label", "output_a", "output_b", "equal", "err_a", "err_b"]
    assert len(rows) == 31
    assert "dp2rep-weak" in capsys.readouterr().out


def test_cli_rejects_mismatched_experiment(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "ows-learn"}))
    assert main(["run-parity", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "config.experiment" in capsys.readouterr().err
