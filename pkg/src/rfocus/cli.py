"""Command-line client for the rfocus service.

By default the CLI talks to an in-process instance of the HTTP app, so no
server needs to be running; ``--server URL`` points it at a remote one
instead.  All commands are thin: they post requests, print summaries, and
write the returned artifacts to disk.
"""

from __future__ import annotations

import base64
import csv
import json
import sys
from pathlib import Path

import click

from rfocus import __version__
from rfocus.experiments import EXPERIMENT_NAMES


class ServiceClient:
    """HTTP client that is either in-process (default) or remote."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from rfocus.service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
        return resp.json()


class _NormalizingGroup(click.Group):
    """Accepts underscore spellings of hyphenated command names."""

    def get_command(self, ctx, cmd_name):
        cmd = super().get_command(ctx, cmd_name)
        if cmd is None and "_" in cmd_name:
            cmd = super().get_command(ctx, cmd_name.replace("_", "-"))
        return cmd


@click.group(cls=_NormalizingGroup)
@click.version_option(version=__version__)
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; defaults to in-process.")
@click.pass_context
def main(ctx, server):
    """Simulator and optimizer for programmable binary reflecting surfaces."""
    ctx.obj = ServiceClient(server)


def _load_spec_file(path: str | None) -> dict:
    if path is None:
        return {}
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict):
        raise click.ClickException("--spec file must contain a JSON object")
    return obj


def _write_experiment_outputs(result: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = result["manifest"]
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True))
    summary = {
        "name": manifest["name"],
        "seed": manifest["seed"],
        "passed": result["passed"],
        "properties": [{"name": p["name"], "passed": p["passed"], **p["detail"]}
                       for p in result["properties"]],
        "stats": result["stats"],
        "series": sorted(result["series"]),
        "grids": sorted(result["grids"]),
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))
    if result["series"]:
        series_dir = out_dir / "series"
        series_dir.mkdir(exist_ok=True)
        for name, table in result["series"].items():
            with open(series_dir / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(table["columns"])
                w.writerows(table["rows"])
    if result["grids"]:
        grids_dir = out_dir / "grids"
        grids_dir.mkdir(exist_ok=True)
        for name, b64 in result["grids"].items():
            (grids_dir / f"{name}.bin").write_bytes(base64.b64decode(b64))


def _run_experiment_command(client: ServiceClient, name: str, spec_path: str | None,
                            out: str, seed: int | None, trials: int | None) -> None:
    spec_obj = _load_spec_file(spec_path)
    params = spec_obj.get("params", {k: v for k, v in spec_obj.items()
                                     if k not in ("name", "seed", "trials")})
    payload = {
        "name": name,
        "params": params,
        "trials": trials if trials is not None else spec_obj.get("trials"),
        "seed": seed if seed is not None else int(spec_obj.get("seed", 0)),
    }
    result = client.post("/experiments/run", payload)
    _write_experiment_outputs(result, Path(out))
    for prop in result["properties"]:
        status = "PASS" if prop["passed"] else "FAIL"
        click.echo(f"[{status}] {name}: {prop['name']}")
    click.echo(f"outputs written to {out}")
    if not result["passed"]:
        sys.exit(1)


def _make_experiment_command(exp_name: str):
    @click.option("--spec", "spec_path", default=None, type=click.Path(exists=True),
                  help="JSON file with experiment parameters.")
    @click.option("--out", required=True, type=click.Path(),
                  help="Output directory for manifest/summary/series/grids.")
    @click.option("--seed", default=None, type=int, help="Experiment seed.")
    @click.option("--trials", default=None, type=int, help="Number of trials.")
    @click.pass_obj
    def command(client, spec_path, out, seed, trials):
        _run_experiment_command(client, exp_name, spec_path, out, seed, trials)

    command.__name__ = exp_name
    return main.command(name=exp_name.replace("_", "-"),
                        help=f"Run the {exp_name} experiment.")(command)


for _name in EXPERIMENT_NAMES:
    _make_experiment_command(_name)


@main.command(name="gen-env")
@click.option("--iid", "mode", flag_value="iid", default=True,
              help="Generate a statistical i.i.d. environment (default).")
@click.option("--scene", "mode", flag_value="scene",
              help="Evaluate a geometric scene file instead.")
@click.option("--n-elements", default=64, type=int, show_default=True)
@click.option("--element-sigma", default=1.0, type=float, show_default=True)
@click.option("--baseline", default=1.0, type=float, show_default=True)
@click.option("--interaction-strength", default=0.0, type=float, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--scene-file", default=None, type=click.Path(exists=True),
              help="Scene JSON (required with --scene).")
@click.option("--frequency", default=None, type=float,
              help="Carrier frequency in Hz (required with --scene).")
@click.option("--out", required=True, type=click.Path(),
              help="Where to write the environment JSON.")
@click.pass_obj
def gen_env(client, mode, n_elements, element_sigma, baseline,
            interaction_strength, seed, scene_file, frequency, out):
    """Generate an environment and write it as JSON."""
    if mode == "iid":
        env = client.post("/env/iid", {
            "n_elements": n_elements,
            "element_sigma": element_sigma,
            "baseline_magnitude": baseline,
            "seed": seed,
            "interaction_strength": interaction_strength,
            "interaction_seed": seed,
        })
    else:
        if scene_file is None or frequency is None:
            raise click.ClickException("--scene requires --scene-file and --frequency")
        scene = json.loads(Path(scene_file).read_text())
        env = client.post("/env/scene", {"scene": scene, "frequency_hz": frequency})
    Path(out).write_text(json.dumps(env, indent=2, sort_keys=True))
    click.echo(f"environment with {len(env['h'])} elements written to {out}")


@main.command()
@click.option("--env", "env_path", required=True, type=click.Path(exists=True),
              help="Environment JSON file.")
@click.option("--noise", default=0.0, type=float, show_default=True,
              help="Measurement noise sigma in dB.")
@click.option("--outlier-prob", default=0.0, type=float, show_default=True)
@click.option("--outlier-scale", default=0.0, type=float, show_default=True)
@click.option("--algorithm", default="controller", show_default=True,
              type=click.Choice(["controller", "halfplane", "brute-force"]))
@click.option("--batch-size", default=2000, type=int, show_default=True)
@click.option("--budget", default=40000, type=int, show_default=True)
@click.option("--confidence", default=0.95, type=float, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", default=None, type=click.Path(),
              help="Optional path for the JSON optimization report.")
@click.pass_obj
def optimize(client, env_path, noise, outlier_prob, outlier_scale, algorithm,
             batch_size, budget, confidence, seed, out):
    """Optimize a surface configuration for an environment."""
    env = json.loads(Path(env_path).read_text())
    if algorithm == "controller":
        result = client.post("/optimize/controller", {
            "environment": env,
            "noise": {"rel_sigma_db": noise, "outlier_prob": outlier_prob,
                      "outlier_scale_db": outlier_scale, "seed": seed},
            "params": {"batch_size": batch_size, "budget": budget,
                       "confidence": confidence, "seed": seed},
        })
        click.echo(f"best config: {result['best_config_hex']}")
        click.echo(f"achieved rssi ratio: {result['achieved_ratio']:.6g} "
                   f"({result['total_measurements']} measurements)")
    else:
        result = client.post(f"/optimize/{algorithm}", {"environment": env})
        click.echo(f"best config: {result['config_hex']}")
        click.echo(f"channel magnitude: {result['magnitude']:.6g}")
        if result.get("rssi_ratio") is not None:
            click.echo(f"rssi ratio: {result['rssi_ratio']:.6g}")
    if out is not None:
        Path(out).write_text(json.dumps(result, indent=2, sort_keys=True))
        click.echo(f"report written to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    from rfocus.service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
