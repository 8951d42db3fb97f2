"""Pydantic request/response models for the HTTP service.

The wire format for environments matches the JSON produced by
``channel.environment_to_json``: complex numbers as [real, imag] pairs and
interactions as [i, j, real, imag] rows.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from rfocus.channel import Environment
from rfocus.measurement import NoiseModel
from rfocus.optimize import ControllerParams


class EnvironmentModel(BaseModel):
    h_z: list[float] = Field(min_length=2, max_length=2)
    h: list[list[float]]
    interactions: list[list[float]] = Field(default_factory=list)
    noise_floor_power: float = 1.0

    def to_domain(self) -> Environment:
        h = np.array([complex(re, im) for re, im in self.h], dtype=np.complex128)
        inter = {(int(i), int(j)): complex(re, im)
                 for i, j, re, im in self.interactions}
        return Environment(complex(*self.h_z), h, inter, self.noise_floor_power)

    @classmethod
    def from_domain(cls, env: Environment) -> "EnvironmentModel":
        return cls(
            h_z=[env.h_z.real, env.h_z.imag],
            h=[[z.real, z.imag] for z in env.h],
            interactions=[[float(i), float(j), g.real, g.imag]
                          for (i, j), g in sorted(env.interactions.items())],
            noise_floor_power=env.noise_floor_power,
        )


class NoiseModelModel(BaseModel):
    rel_sigma_db: float = 0.0
    outlier_prob: float = 0.0
    outlier_scale_db: float = 0.0
    seed: int = 0

    def to_domain(self) -> NoiseModel:
        return NoiseModel(self.rel_sigma_db, self.outlier_prob,
                          self.outlier_scale_db, self.seed)


class ControllerParamsModel(BaseModel):
    batch_size: int = 2000
    confidence: float = 0.95
    budget: int = 40000
    center_statistic: Literal["median", "mean"] = "median"
    seed: int = 0

    def to_domain(self) -> ControllerParams:
        return ControllerParams(self.batch_size, self.confidence, self.budget,
                                self.center_statistic, self.seed)


class IidEnvRequest(BaseModel):
    n_elements: int
    element_sigma: float
    baseline_magnitude: float = 1.0
    seed: int = 0
    noise_floor_power: float = 1.0
    interaction_strength: float = 0.0
    interaction_seed: int = 0


class SceneModel(BaseModel):
    wavelength_m: float
    grid: dict
    tx_m: list[float] = Field(min_length=3, max_length=3)
    rx_m: list[float] = Field(min_length=3, max_length=3)
    element_reflectivity: float = 1.0
    direct_path_gain: float = 1.0
    extra_paths: list[dict] = Field(default_factory=list)
    noise_floor_power: float = 1.0


class SceneEnvRequest(BaseModel):
    scene: SceneModel
    frequency_hz: float


class EvaluateRequest(BaseModel):
    environment: EnvironmentModel
    config_hex: str


class EvaluateResponse(BaseModel):
    h: list[float]
    magnitude: float
    rssi_ratio: Optional[float]


class MeasureRequest(BaseModel):
    environment: EnvironmentModel
    noise: NoiseModelModel = Field(default_factory=NoiseModelModel)
    config_hexes: list[str]
    batch: int = 0


class MeasurementRecordModel(BaseModel):
    config_hex: str
    rssi_ratio: float
    seq: int
    batch: int


class MeasureResponse(BaseModel):
    records: list[MeasurementRecordModel]


class OptimizeRequest(BaseModel):
    environment: EnvironmentModel


class OptimizeResponse(BaseModel):
    config_hex: str
    magnitude: float
    rssi_ratio: Optional[float]


class ControllerRequest(BaseModel):
    environment: EnvironmentModel
    noise: NoiseModelModel = Field(default_factory=NoiseModelModel)
    params: ControllerParamsModel = Field(default_factory=ControllerParamsModel)


class ControllerResponse(BaseModel):
    best_config_hex: str
    complement_candidate_hex: str
    achieved_ratio: float
    trajectory: list[list[float]]
    fixed_at: list[int]
    seed: int
    total_measurements: int


class ExperimentRequest(BaseModel):
    name: str
    params: dict = Field(default_factory=dict)
    trials: Optional[int] = None
    seed: int = 0


class PropertyCheckModel(BaseModel):
    name: str
    passed: bool
    detail: dict


class SeriesModel(BaseModel):
    columns: list[str]
    rows: list[list]


class ExperimentResponse(BaseModel):
    manifest: dict
    passed: bool
    properties: list[PropertyCheckModel]
    stats: dict
    series: dict[str, SeriesModel]
    grids: dict[str, str]  # name -> base64 of the binary grid file format


class HealthResponse(BaseModel):
    status: str
    version: str
