import json
import math

import numpy as np
import pytest
from scipy import stats as sps

from torusmut import asymptotics
from torusmut.process import Guards, ModelParams
from torusmut.regimes import ScalingFamily
from torusmut.stats import (
    DEFAULT_KS_THRESHOLD,
    KS_CRITICAL_COEFF,
    HypothesisViolationError,
    InvalidConfigError,
    NoLawError,
    ValidationConfig,
    ks_statistic,
    run_replicates,
    run_validation,
    samples_header,
    volume_diagnostic,
    write_samples_csv,
)

FAST = ModelParams(d=1, L=100.0, alpha=1.0, mu=(0.01, 1.0))
EXP1 = asymptotics.Exp1Law()


def _config(params=FAST, targets=({"kind": "sigma1_exact"},), law=EXP1,
            scale_name="beta_1", scale_value=None, replicates=50, seed=5,
            **kw):
    if law is not None and scale_value is None:
        scale_value = asymptotics.beta_k(params, 1)
    return ValidationConfig(params=params, targets=tuple(targets),
                            replicates=replicates, master_seed=seed, law=law,
                            scale_name=scale_name, scale_value=scale_value,
                            **kw)


class TestKsStatistic:
    def test_single_median_point(self):
        assert ks_statistic([math.log(2.0)], EXP1.cdf) == pytest.approx(0.5)

    def test_exact_quantile_sample_attains_the_floor(self):
        m = 40
        qs = -np.log1p(-(np.arange(1, m + 1) - 0.5) / m)  # Exp(1) quantiles
        assert ks_statistic(qs, EXP1.cdf) == pytest.approx(1.0 / (2 * m))

    def test_matches_scipy(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            sample = rng.standard_exponential(int(rng.integers(5, 200)))
            mine = ks_statistic(sample, EXP1.cdf)
            ref = sps.kstest(sample, lambda t: 1.0 - np.exp(-t)).statistic
            assert mine == pytest.approx(ref, abs=1e-12)

    def test_rejects_bad_samples(self):
        with pytest.raises(InvalidConfigError):
            ks_statistic([], EXP1.cdf)
        with pytest.raises(InvalidConfigError):
            ks_statistic([1.0, float("nan")], EXP1.cdf)


class TestRunReplicates:
    def test_parallel_equals_serial(self):
        serial = run_replicates(FAST, 77, Guards(), 12, workers=1)
        parallel = run_replicates(FAST, 77, Guards(), 12, workers=2)
        assert serial == parallel

    def test_start_index_shifts_the_stream(self):
        block = run_replicates(FAST, 77, Guards(), 6, workers=1)
        tail = run_replicates(FAST, 77, Guards(), 3, workers=1, start_index=3)
        assert block[3:] == tail

    def test_with_events_keeps_the_same_records(self):
        plain = run_replicates(FAST, 77, Guards(), 4)
        paired = run_replicates(FAST, 77, Guards(), 4, with_events=True)
        assert [record for record, _ in paired] == plain
        for record, events in paired:
            assert all(ev.accepted for ev in events)


class TestValidationConfig:
    def test_unknown_target_kind_rejected(self):
        with pytest.raises(InvalidConfigError):
            _config(targets=({"kind": "moment_match"},))

    def test_law_without_scale_rejected(self):
        config = ValidationConfig(params=FAST,
                                  targets=({"kind": "sigma_k_law"},),
                                  replicates=5, master_seed=1, law=EXP1)
        with pytest.raises(InvalidConfigError):
            run_validation(config)

    def test_law_target_without_any_law_rejected(self):
        config = ValidationConfig(params=FAST,
                                  targets=({"kind": "sigma_k_law"},),
                                  replicates=5, master_seed=1)
        with pytest.raises(NoLawError):
            run_validation(config)

    def test_replicate_count_must_be_positive(self):
        with pytest.raises(InvalidConfigError):
            _config(replicates=0)


class TestRunValidation:
    def test_exactness_target_passes(self):
        report = run_validation(_config(replicates=200))
        assert report["pass"] is True
        (target,) = report["targets"]
        assert target["kind"] == "sigma1_exact"
        assert target["sample_size"] == 200
        assert target["ks"] <= target["ks_critical"]
        assert target["ks_critical"] == pytest.approx(
            KS_CRITICAL_COEFF / math.sqrt(200))

    def test_report_is_deterministic_and_serializable(self):
        a = run_validation(_config())
        b = run_validation(_config())
        assert a == b
        json.dumps(a)  # must not raise

    def test_report_carries_run_metadata(self):
        report = run_validation(_config())
        assert report["package"] == "torusmut"
        assert report["generator"] == "philox4x64"
        assert report["params"]["mu"] == [0.01, 1.0]
        assert report["scale"]["name"] == "beta_1"
        assert report["scale"]["value"] == pytest.approx(1.0)
        assert report["law"] == {"kind": "exp1"}

    def test_family_resolves_law_and_scale(self):
        family = ScalingFamily(d=1, k=2, a=["-1/2", "1/2"], b=1)
        config = ValidationConfig(params=FAST,
                                  targets=({"kind": "sigma_k_law"},),
                                  replicates=60, master_seed=9, family=family)
        report = run_validation(config)
        assert report["regime"] == "theorem2"
        assert report["law"] == {"kind": "exp1"}
        assert report["scale"]["name"] == "beta_1"

    def test_boundary_family_has_no_law(self):
        family = ScalingFamily(d=1, k=2, a=[-1, 0], b=1)
        config = ValidationConfig(params=FAST,
                                  targets=({"kind": "sigma_k_law"},),
                                  replicates=5, master_seed=1, family=family)
        with pytest.raises(NoLawError):
            run_validation(config)

    def test_mismatched_law_fails_the_ks_gate(self):
        # sigma_2 at these parameters is nowhere near Exp(1) on the beta_1
        # scale stretched by 100, so the verdict must be a clean failure
        config = _config(targets=({"kind": "sigma_k_law"},),
                         scale_value=100.0, replicates=80)
        report = run_validation(config)
        assert report["pass"] is False
        assert report["targets"][0]["ks"] > 0.5

    def test_distance_exclusions_warn_when_nesting_often_breaks(self):
        params = ModelParams(d=1, L=100.0, alpha=1.0, mu=(0.01, 1.0))
        config = ValidationConfig(
            params=params,
            targets=({"kind": "distance_law", "j": 1, "k": 2},),
            replicates=80, master_seed=31, law=EXP1, scale_name="beta_1",
            scale_value=1.0)
        report = run_validation(config)
        (target,) = report["targets"]
        assert target["kind"] == "distance_law"
        assert target["excluded_broken_nesting"] > 0
        assert target["sample_size"] + target["excluded_broken_nesting"] == 80
        assert report["warnings"]  # > 5% exclusions at these parameters
        assert "lost nesting" in report["warnings"][0]

    def test_distance_indices_validated(self):
        config = _config(targets=({"kind": "distance_law", "j": 2, "k": 2},))
        with pytest.raises(InvalidConfigError):
            run_validation(config)

    def test_samples_csv_written_with_full_schema(self, tmp_path):
        path = tmp_path / "samples.csv"
        report = run_validation(_config(replicates=12), samples_csv=str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0].split(",") == samples_header(FAST)
        assert len(lines) == 13
        first = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert int(first["replicate_index"]) == 0
        assert float(first["sigma_1"]) < float(first["sigma_2"])
        assert report["replicates"] == 12

    def test_seventeen_digit_floats_round_trip(self, tmp_path):
        path = tmp_path / "samples.csv"
        records = run_replicates(FAST, 5, Guards(), 6)
        write_samples_csv(str(path), records, FAST)
        lines = path.read_text().strip().splitlines()
        header = lines[0].split(",")
        for record, line in zip(records, lines[1:]):
            row = dict(zip(header, line.split(",")))
            assert float(row["sigma_1"]) == record.sigma[0]
            assert float(row["sigma_2"]) == record.sigma[1]
            assert float(row["D_1_2"]) == record.distances[(1, 2)]


class TestVolumeDiagnostic:
    def test_rows_and_degenerate_time(self):
        rows = volume_diagnostic(FAST, level=1, times=[0.0, 2.0],
                                 replicates=40, master_seed=3)
        assert rows[0]["degenerate"] is True
        assert rows[0]["ratio"] == 1.0
        assert rows[1]["degenerate"] is False
        assert rows[1]["approximation"] == pytest.approx(
            asymptotics.v_k(FAST, 1, 2.0))
        assert rows[1]["ratio"] == pytest.approx(
            rows[1]["mean_volume"] / rows[1]["approximation"])

    def test_dilute_regime_ratio_is_near_one(self):
        rows = volume_diagnostic(FAST, level=1, times=[2.0], replicates=300,
                                 master_seed=3)
        assert rows[0]["ratio"] == pytest.approx(1.0, abs=0.1)

    def test_late_times_rejected(self):
        limit = FAST.N / (2.0 * FAST.alpha)
        with pytest.raises(HypothesisViolationError):
            volume_diagnostic(FAST, level=1, times=[limit * 1.01],
                              replicates=5, master_seed=1)

    def test_negative_time_and_replicates_rejected(self):
        with pytest.raises(InvalidConfigError):
            volume_diagnostic(FAST, level=1, times=[-1.0], replicates=5,
                              master_seed=1)
        with pytest.raises(InvalidConfigError):
            volume_diagnostic(FAST, level=1, times=[1.0], replicates=0,
                              master_seed=1)

    def test_band_verdict_through_validation(self):
        config = _config(targets=({"kind": "volume_diag", "times": [2.0],
                                   "replicates": 120, "band": (0.8, 1.2)},),
                         law=None, scale_name=None, scale_value=None)
        report = run_validation(config)
        (target,) = report["targets"]
        assert target["kind"] == "volume_diag"
        assert target["band"] == [0.8, 1.2]
        assert target["pass"] is True


class TestDefaults:
    def test_default_threshold_is_five_percent(self):
        assert DEFAULT_KS_THRESHOLD == 0.05
