"""Simulated RSSI-ratio measurement oracle with configurable noise.

Noise is multiplicative in the linear power domain (additive in dB), which
matches gain-control and amplifier-drift phenomenology.  Packet loss and AGC
glitches are modeled as occasional dB-scale outliers rather than missing
samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from rfocus.channel import Environment, SurfaceConfig, evaluate_state_matrix, rssi_ratio_exact
from rfocus.errors import RfocusError

SNR_FLOOR_DB = -40.0  # reporting floor; keeps degenerate environments plottable


@dataclass(frozen=True)
class NoiseModel:
    """Per-sample measurement noise: rel_sigma_db of Gaussian dB jitter, plus
    outliers of +-outlier_scale_db with probability outlier_prob."""

    rel_sigma_db: float = 0.0
    outlier_prob: float = 0.0
    outlier_scale_db: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rel_sigma_db < 0:
            raise RfocusError("rel_sigma_db must be >= 0")
        if not (0 <= self.outlier_prob < 1):
            raise RfocusError("outlier_prob must be in [0, 1)")
        if self.outlier_scale_db < 0:
            raise RfocusError("outlier_scale_db must be >= 0")

    @property
    def noiseless(self) -> bool:
        return self.rel_sigma_db == 0.0 and self.outlier_prob == 0.0


@dataclass(frozen=True)
class MeasurementRecord:
    config: SurfaceConfig
    rssi_ratio: float
    seq: int
    batch: int


class MeasurementOracle:
    """One measurement session: a seeded noise stream plus a sequence counter.

    Use one oracle per logical session; concurrent sessions should hold
    independent oracles with distinct seeds.
    """

    def __init__(self, env: Environment, noise: NoiseModel):
        self.env = env
        self.noise = noise
        self._rng = np.random.default_rng(noise.seed)
        self._seq = 0

    @property
    def seq(self) -> int:
        return self._seq

    def measure(self, config: SurfaceConfig, batch: int = 0) -> MeasurementRecord:
        return self.measure_batch([config], batch)[0]

    def measure_batch(self, configs, batch: int = 0) -> list:
        """Measure several configurations in sequence order."""
        ratios = np.array([rssi_ratio_exact(self.env, c) for c in configs])
        records = self._records_from_exact(configs, ratios, batch)
        return records

    def measure_state_matrix(self, bits: np.ndarray, batch: int = 0) -> list:
        """Measure a (K, N) boolean state matrix; faster than per-config calls."""
        if bits.shape[1] != self.env.n_elements:
            raise RfocusError("state matrix width does not match element count")
        base = abs(self.env.h_z)
        if base == 0.0:
            # delegate the error path to the scalar evaluator
            rssi_ratio_exact(self.env, SurfaceConfig.all_zeros(self.env.n_elements))
        h = evaluate_state_matrix(self.env, bits)
        ratios = np.abs(h) ** 2 / base**2
        configs = [SurfaceConfig(row) for row in bits]
        return self._records_from_exact(configs, ratios, batch)

    def _records_from_exact(self, configs, ratios, batch: int) -> list:
        k = len(configs)
        eps = self._rng.normal(0.0, self.noise.rel_sigma_db, k) if self.noise.rel_sigma_db > 0 \
            else np.zeros(k)
        if self.noise.outlier_prob > 0:
            hit = self._rng.random(k) < self.noise.outlier_prob
            signs = self._rng.choice([-1.0, 1.0], k)
            eps = eps + np.where(hit, signs * self.noise.outlier_scale_db, 0.0)
        measured = ratios * 10.0 ** (eps / 10.0)
        records = []
        for c, r in zip(configs, measured):
            records.append(MeasurementRecord(c, float(r), self._seq, batch))
            self._seq += 1
        return records


def measurability_snr(env: Environment, n_configs: int, reps: int, noise: NoiseModel) -> float:
    """Measurement SNR in dB: variance of per-configuration mean RSSI-ratios
    over the mean within-configuration variance.

    Returns ``inf`` when the measurement noise variance is exactly zero, and
    floors the result at -40 dB.
    """
    if n_configs < 2 or reps < 2:
        raise RfocusError("need at least 2 configurations and 2 repetitions")
    cfg_rng = np.random.default_rng((noise.seed, 0xC0FFEE))
    bits = cfg_rng.random((n_configs, env.n_elements)) < 0.5
    oracle = MeasurementOracle(env, noise)
    samples = np.empty((n_configs, reps))
    for r in range(reps):
        recs = oracle.measure_state_matrix(bits, batch=r)
        samples[:, r] = [rec.rssi_ratio for rec in recs]
    means = samples.mean(axis=1)
    noise_var = float(samples.var(axis=1, ddof=1).mean())
    signal_var = float(means.var(ddof=1))
    if noise_var == 0.0:
        return math.inf
    if signal_var == 0.0:
        return SNR_FLOOR_DB
    return max(10.0 * math.log10(signal_var / noise_var), SNR_FLOOR_DB)


def write_trace(records, path) -> None:
    """Stream measurement records to CSV (config hex-encoded, MSB = element 0)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seq", "batch", "config", "rssi_ratio", "rssi_ratio_db"])
        for rec in records:
            db = 10.0 * math.log10(rec.rssi_ratio) if rec.rssi_ratio > 0 else -math.inf
            w.writerow([rec.seq, rec.batch, rec.config.to_hex(), repr(rec.rssi_ratio), db])
