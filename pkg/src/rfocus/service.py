"""HTTP service exposing environment generation, channel evaluation,
measurement, optimization, and the experiment drivers.

All computation lives in the core modules; this layer only translates between
the wire schemas and domain objects.  Domain validation errors map to 422,
degenerate-input errors to 400.
"""

from __future__ import annotations

import base64
import struct

import numpy as np
from fastapi import FastAPI, HTTPException

from rfocus import __version__
from rfocus.channel import Environment, SurfaceConfig, evaluate_channel, rssi_ratio_exact
from rfocus.envgen import (
    IidEnvSpec,
    add_adjacent_interactions,
    gen_geometric,
    gen_iid,
    scene_from_dict,
)
from rfocus.errors import DegenerateBaselineError, RfocusError
from rfocus.experiments import ExperimentSpec, run_experiment
from rfocus.measurement import MeasurementOracle
from rfocus.optimize import brute_force_opt, halfplane_opt, run_controller
from rfocus import schemas as s

app = FastAPI(title="rfocus", version=__version__)


def _domain_errors(fn):
    try:
        return fn()
    except DegenerateBaselineError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except RfocusError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=s.HealthResponse)
def health() -> s.HealthResponse:
    return s.HealthResponse(status="ok", version=__version__)


@app.post("/env/iid", response_model=s.EnvironmentModel)
def env_iid(req: s.IidEnvRequest) -> s.EnvironmentModel:
    def build():
        env = gen_iid(IidEnvSpec(req.n_elements, req.element_sigma,
                                 req.baseline_magnitude, req.seed,
                                 req.noise_floor_power))
        if req.interaction_strength > 0:
            env = add_adjacent_interactions(env, req.interaction_strength,
                                            req.interaction_seed)
        return s.EnvironmentModel.from_domain(env)
    return _domain_errors(build)


@app.post("/env/scene", response_model=s.EnvironmentModel)
def env_scene(req: s.SceneEnvRequest) -> s.EnvironmentModel:
    def build():
        scene = scene_from_dict(req.scene.model_dump())
        return s.EnvironmentModel.from_domain(gen_geometric(scene, req.frequency_hz))
    return _domain_errors(build)


@app.post("/channel/evaluate", response_model=s.EvaluateResponse)
def channel_evaluate(req: s.EvaluateRequest) -> s.EvaluateResponse:
    def build():
        env = req.environment.to_domain()
        cfg = SurfaceConfig.from_hex(req.config_hex, env.n_elements)
        h = evaluate_channel(env, cfg)
        try:
            ratio = rssi_ratio_exact(env, cfg)
        except DegenerateBaselineError:
            ratio = None
        return s.EvaluateResponse(h=[h.real, h.imag], magnitude=abs(h),
                                  rssi_ratio=ratio)
    return _domain_errors(build)


@app.post("/measure", response_model=s.MeasureResponse)
def measure(req: s.MeasureRequest) -> s.MeasureResponse:
    def build():
        env = req.environment.to_domain()
        oracle = MeasurementOracle(env, req.noise.to_domain())
        configs = [SurfaceConfig.from_hex(h, env.n_elements)
                   for h in req.config_hexes]
        records = oracle.measure_batch(configs, req.batch)
        return s.MeasureResponse(records=[
            s.MeasurementRecordModel(config_hex=r.config.to_hex(),
                                     rssi_ratio=r.rssi_ratio,
                                     seq=r.seq, batch=r.batch)
            for r in records
        ])
    return _domain_errors(build)


def _optimize_response(env: Environment, cfg: SurfaceConfig,
                       magnitude: float) -> s.OptimizeResponse:
    try:
        ratio = rssi_ratio_exact(env, cfg)
    except DegenerateBaselineError:
        ratio = None
    return s.OptimizeResponse(config_hex=cfg.to_hex(), magnitude=magnitude,
                              rssi_ratio=ratio)


@app.post("/optimize/halfplane", response_model=s.OptimizeResponse)
def optimize_halfplane(req: s.OptimizeRequest) -> s.OptimizeResponse:
    def build():
        env = req.environment.to_domain()
        cfg, mag = halfplane_opt(env)
        return _optimize_response(env, cfg, mag)
    return _domain_errors(build)


@app.post("/optimize/brute-force", response_model=s.OptimizeResponse)
def optimize_brute_force(req: s.OptimizeRequest) -> s.OptimizeResponse:
    def build():
        env = req.environment.to_domain()
        cfg, mag = brute_force_opt(env)
        return _optimize_response(env, cfg, mag)
    return _domain_errors(build)


@app.post("/optimize/controller", response_model=s.ControllerResponse)
def optimize_controller(req: s.ControllerRequest) -> s.ControllerResponse:
    def build():
        env = req.environment.to_domain()
        report = run_controller(env, req.noise.to_domain(), req.params.to_domain())
        return s.ControllerResponse(
            best_config_hex=report.best_config.to_hex(),
            complement_candidate_hex=report.best_config_complement_candidate.to_hex(),
            achieved_ratio=report.achieved_ratio,
            trajectory=[[float(u), float(r)] for u, r in report.trajectory],
            fixed_at=list(report.fixed_at),
            seed=report.seed,
            total_measurements=report.total_measurements,
        )
    return _domain_errors(build)


def _grid_to_base64(power: np.ndarray, grid) -> str:
    header = struct.pack("<6d", grid.x0, grid.y0, grid.width, grid.height,
                         float(grid.nx), float(grid.ny))
    body = np.ascontiguousarray(power, dtype="<f8").tobytes()
    return base64.b64encode(header + body).decode("ascii")


@app.post("/experiments/run", response_model=s.ExperimentResponse)
def experiments_run(req: s.ExperimentRequest) -> s.ExperimentResponse:
    def build():
        spec = ExperimentSpec(name=req.name, params=req.params,
                              trials=req.trials, seed=req.seed)
        report = run_experiment(spec)
        manifest = {"name": spec.name, "params": spec.params,
                    "trials": spec.n_trials, "seed": spec.seed,
                    "version": __version__}
        return s.ExperimentResponse(
            manifest=manifest,
            passed=report.passed,
            properties=[s.PropertyCheckModel(name=c.name, passed=c.passed,
                                             detail=c.detail)
                        for c in report.properties],
            stats=report.stats,
            series={name: s.SeriesModel(columns=cols,
                                        rows=[list(r) for r in rows])
                    for name, (cols, rows) in report.series.items()},
            grids={name: _grid_to_base64(power, grid)
                   for name, (power, grid) in report.grids.items()},
        )
    return _domain_errors(build)
