import csv
import math

import numpy as np
import pytest

from rfocus.channel import Environment, SurfaceConfig, rssi_ratio_exact
from rfocus.envgen import IidEnvSpec, gen_iid
from rfocus.errors import DegenerateBaselineError, RfocusError
from rfocus.measurement import (
    SNR_FLOOR_DB,
    MeasurementOracle,
    NoiseModel,
    measurability_snr,
    write_trace,
)


class TestNoiseModel:
    def test_noiseless_property(self):
        assert NoiseModel().noiseless
        assert not NoiseModel(rel_sigma_db=0.1).noiseless
        assert not NoiseModel(outlier_prob=0.01, outlier_scale_db=3.0).noiseless

    def test_validation(self):
        with pytest.raises(RfocusError):
            NoiseModel(rel_sigma_db=-0.1)
        with pytest.raises(RfocusError):
            NoiseModel(outlier_prob=1.0)
        with pytest.raises(RfocusError):
            NoiseModel(outlier_scale_db=-1.0)


class TestOracle:
    def test_noiseless_equals_exact(self, small_env):
        oracle = MeasurementOracle(small_env, NoiseModel())
        cfg = SurfaceConfig([1, 0, 1, 1, 0, 0, 1, 0])
        rec = oracle.measure(cfg)
        assert rec.rssi_ratio == pytest.approx(rssi_ratio_exact(small_env, cfg),
                                               rel=1e-14)
        assert rec.config == cfg

    def test_sequence_and_batch_stamps(self, small_env):
        oracle = MeasurementOracle(small_env, NoiseModel())
        cfgs = [SurfaceConfig.all_zeros(8), SurfaceConfig.all_zeros(8).complement()]
        recs = oracle.measure_batch(cfgs, batch=2)
        assert [r.seq for r in recs] == [0, 1]
        assert all(r.batch == 2 for r in recs)
        assert oracle.seq == 2
        rec = oracle.measure(cfgs[0], batch=3)
        assert rec.seq == 2

    def test_seeded_noise_reproducible(self, small_env):
        cfg = SurfaceConfig.all_zeros(8)
        a = MeasurementOracle(small_env, NoiseModel(0.5, seed=6)).measure(cfg)
        b = MeasurementOracle(small_env, NoiseModel(0.5, seed=6)).measure(cfg)
        c = MeasurementOracle(small_env, NoiseModel(0.5, seed=7)).measure(cfg)
        assert a.rssi_ratio == b.rssi_ratio
        assert a.rssi_ratio != c.rssi_ratio

    def test_state_matrix_matches_batch(self, small_env):
        rng = np.random.default_rng(2)
        bits = rng.random((16, 8)) < 0.5
        a = MeasurementOracle(small_env, NoiseModel(0.3, seed=5))
        b = MeasurementOracle(small_env, NoiseModel(0.3, seed=5))
        recs_a = a.measure_state_matrix(bits)
        recs_b = b.measure_batch([SurfaceConfig(row) for row in bits])
        for ra, rb in zip(recs_a, recs_b):
            assert ra.rssi_ratio == pytest.approx(rb.rssi_ratio, rel=1e-12)

    def test_state_matrix_width_check(self, small_env):
        oracle = MeasurementOracle(small_env, NoiseModel())
        with pytest.raises(RfocusError):
            oracle.measure_state_matrix(np.zeros((4, 5), dtype=bool))

    def test_zero_baseline_raises(self):
        env = Environment(0.0 + 0j, np.array([1.0 + 0j]))
        oracle = MeasurementOracle(env, NoiseModel())
        with pytest.raises(DegenerateBaselineError):
            oracle.measure(SurfaceConfig([1]))
        with pytest.raises(DegenerateBaselineError):
            oracle.measure_state_matrix(np.ones((2, 1), dtype=bool))

    def test_db_noise_calibration(self):
        # with sigma = 1 dB the measured dB errors are standard normal
        env = Environment(1.0 + 0j, np.array([0.0 + 0j]))
        oracle = MeasurementOracle(env, NoiseModel(rel_sigma_db=1.0, seed=0))
        bits = np.zeros((100_000, 1), dtype=bool)
        ratios = np.array([r.rssi_ratio for r in oracle.measure_state_matrix(bits)])
        errors_db = 10.0 * np.log10(ratios)
        assert errors_db.mean() == pytest.approx(0.0, abs=0.02)
        assert errors_db.std() == pytest.approx(1.0, rel=0.02)

    def test_outliers(self):
        env = Environment(1.0 + 0j, np.array([0.0 + 0j]))
        noise = NoiseModel(outlier_prob=0.1, outlier_scale_db=10.0, seed=1)
        oracle = MeasurementOracle(env, noise)
        bits = np.zeros((50_000, 1), dtype=bool)
        ratios = np.array([r.rssi_ratio for r in oracle.measure_state_matrix(bits)])
        hit = ~np.isclose(ratios, 1.0)
        assert hit.mean() == pytest.approx(0.1, abs=0.01)
        assert set(np.round(10 * np.log10(ratios[hit]))) == {-10.0, 10.0}


class TestMeasurabilitySnr:
    def test_infinite_without_noise(self, small_env):
        assert measurability_snr(small_env, 8, 4, NoiseModel()) == math.inf

    def test_floor_when_elements_do_nothing(self):
        # configurations are indistinguishable, so the between-configuration
        # variance is pure estimation residual (~1/reps) and hits the floor
        env = Environment(1.0 + 0j, np.zeros(4, dtype=np.complex128))
        snr = measurability_snr(env, 16, 100_000,
                                NoiseModel(rel_sigma_db=0.5, seed=0))
        assert snr == SNR_FLOOR_DB

    def test_argument_validation(self, small_env):
        with pytest.raises(RfocusError):
            measurability_snr(small_env, 1, 4, NoiseModel())
        with pytest.raises(RfocusError):
            measurability_snr(small_env, 4, 1, NoiseModel())

    def test_more_elements_boost_snr(self):
        noise = NoiseModel(rel_sigma_db=0.5, seed=3)
        snr_small = measurability_snr(gen_iid(IidEnvSpec(32, 3e-3, seed=1)),
                                      40, 200, noise)
        snr_large = measurability_snr(gen_iid(IidEnvSpec(2048, 3e-3, seed=1)),
                                      40, 200, noise)
        assert snr_large > snr_small + 10.0


class TestTrace:
    def test_csv_roundtrip(self, small_env, tmp_path):
        oracle = MeasurementOracle(small_env, NoiseModel(0.2, seed=4))
        cfgs = [SurfaceConfig.all_zeros(8).complement(), SurfaceConfig.all_zeros(8)]
        recs = oracle.measure_batch(cfgs, batch=1)
        path = tmp_path / "trace.csv"
        write_trace(recs, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert rows[0]["config"] == "ff"
        assert float(rows[0]["rssi_ratio"]) == recs[0].rssi_ratio
        assert float(rows[0]["rssi_ratio_db"]) == pytest.approx(
            10 * math.log10(recs[0].rssi_ratio))
