"""Deterministic, seedable generators of synthetic environments.

Two families: i.i.d. statistical ensembles (for theorem and scaling checks)
and geometric multipath scenes built from a planar element grid with explicit
transmitter/receiver positions.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from rfocus.channel import Environment
from rfocus.errors import GeometryError, RfocusError

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class GratingLobeWarning(UserWarning):
    """Element spacing exceeds half a wavelength; grating lobes are possible."""


@dataclass(frozen=True)
class IidEnvSpec:
    """Ensemble of i.i.d. element contributions around a fixed-magnitude baseline.

    Element magnitudes are folded-Gaussian with scale ``element_sigma``; all
    phases are uniform.  Same spec (including seed) yields a bit-identical
    environment.
    """

    n_elements: int
    element_sigma: float
    baseline_magnitude: float = 1.0
    seed: int = 0
    noise_floor_power: float = 1.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise RfocusError("n_elements must be >= 1")
        if self.element_sigma < 0:
            raise RfocusError("element_sigma must be >= 0")
        if self.baseline_magnitude < 0:
            raise RfocusError("baseline_magnitude must be >= 0")


def gen_iid(spec: IidEnvSpec) -> Environment:
    rng = np.random.default_rng(spec.seed)
    base_phase = rng.uniform(-np.pi, np.pi)
    h_z = spec.baseline_magnitude * np.exp(1j * base_phase)
    mags = np.abs(rng.normal(0.0, spec.element_sigma, spec.n_elements)) if spec.element_sigma > 0 \
        else np.zeros(spec.n_elements)
    phases = rng.uniform(-np.pi, np.pi, spec.n_elements)
    h = mags * np.exp(1j * phases)
    return Environment(complex(h_z), h, {}, spec.noise_floor_power)


def add_adjacent_interactions(env: Environment, strength: float, seed: int = 0) -> Environment:
    """Attach bilinear terms between consecutive elements.

    Each pair (i, i+1) gets a term of magnitude
    ``strength * sqrt(|h_i| * |h_i+1|)`` with uniform random phase.  Models the
    small residual coupling between neighboring elements.
    """
    rng = np.random.default_rng(seed)
    mags = np.abs(env.h)
    inter = dict(env.interactions)
    for i in range(env.n_elements - 1):
        g_mag = strength * math.sqrt(mags[i] * mags[i + 1])
        phase = rng.uniform(-np.pi, np.pi)
        inter[(i, i + 1)] = g_mag * np.exp(1j * phase)
    return Environment(env.h_z, env.h, inter, env.noise_floor_power)


@dataclass(frozen=True)
class GeometricScene:
    """Planar element grid with free-space transmitter and receiver.

    The grid lies in the z = 0 plane, centered at the origin, rows along y and
    columns along x.  ``wavelength`` is the nominal design wavelength used for
    the half-wavelength spacing diagnostic; per-frequency evaluation derives
    its own wavelength from the requested frequency.
    """

    wavelength: float
    rows: int
    cols: int
    row_spacing: float
    col_spacing: float
    tx: tuple
    rx: tuple
    element_reflectivity: float = 1.0
    direct_path_gain: float = 1.0
    extra_paths: tuple = ()
    noise_floor_power: float = 1.0

    def __post_init__(self):
        if self.wavelength <= 0:
            raise GeometryError("wavelength must be positive")
        if self.rows < 1 or self.cols < 1:
            raise GeometryError("grid must have at least one row and column")
        if self.row_spacing <= 0 or self.col_spacing <= 0:
            raise GeometryError("grid spacing must be positive")
        if not (0 < self.element_reflectivity <= 1):
            raise GeometryError("element_reflectivity must be in (0, 1]")
        if self.direct_path_gain < 0:
            raise GeometryError("direct_path_gain must be >= 0")
        tx = np.asarray(self.tx, dtype=float)
        rx = np.asarray(self.rx, dtype=float)
        if tx.shape != (3,) or rx.shape != (3,):
            raise GeometryError("tx and rx must be 3-D points")
        if np.array_equal(tx, rx):
            raise GeometryError("tx and rx must be distinct")
        object.__setattr__(self, "tx", tuple(tx))
        object.__setattr__(self, "rx", tuple(rx))
        object.__setattr__(self, "extra_paths", tuple((float(l), float(g)) for l, g in self.extra_paths))
        pos = self.element_positions
        for name, p in (("tx", tx), ("rx", rx)):
            if np.any(np.all(np.isclose(pos, p), axis=1)):
                raise GeometryError(f"{name} coincides with an element position")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def element_positions(self) -> np.ndarray:
        """(N, 3) element centers, row-major (element 0 at min x, min y)."""
        xs = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.col_spacing
        ys = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.row_spacing
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel(), np.zeros(self.n_elements)])

    @property
    def surface_area(self) -> float:
        return (self.rows * self.row_spacing) * (self.cols * self.col_spacing)


def gen_geometric(scene: GeometricScene, frequency: float) -> Environment:
    """Evaluate a scene's channel at one frequency.

    Each element contributes ``reflectivity / (d1 * d2) * exp(-j*2*pi*(d1+d2)/lam)``
    where d1, d2 are the tx-element and element-rx distances.  The baseline is
    the direct path plus any static extra paths.
    """
    if frequency <= 0:
        raise GeometryError("frequency must be positive")
    lam = SPEED_OF_LIGHT / frequency
    if max(scene.row_spacing, scene.col_spacing) > scene.wavelength / 2.0:
        warnings.warn(
            "element spacing exceeds half the design wavelength", GratingLobeWarning,
            stacklevel=2,
        )
    pos = scene.element_positions
    tx = np.asarray(scene.tx)
    rx = np.asarray(scene.rx)
    d1 = np.linalg.norm(pos - tx, axis=1)
    d2 = np.linalg.norm(pos - rx, axis=1)
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise GeometryError("an endpoint coincides with an element (zero path length)")
    h = scene.element_reflectivity / (d1 * d2) * np.exp(-2j * np.pi * (d1 + d2) / lam)
    d0 = float(np.linalg.norm(rx - tx))
    if d0 == 0:
        raise GeometryError("zero-length direct path")
    h_z = scene.direct_path_gain / d0 * np.exp(-2j * np.pi * d0 / lam)
    for length, gain in scene.extra_paths:
        if length <= 0:
            raise GeometryError("extra path length must be positive")
        h_z += gain / length * np.exp(-2j * np.pi * length / lam)
    return Environment(complex(h_z), h, {}, scene.noise_floor_power)


def scene_at_frequencies(scene: GeometricScene, freqs) -> list:
    """One environment per frequency, identical geometry and element order."""
    return [gen_geometric(scene, f) for f in freqs]


def element_path_lengths(scene: GeometricScene) -> np.ndarray:
    """Total tx-element-rx path length per element, in meters."""
    pos = scene.element_positions
    d1 = np.linalg.norm(pos - np.asarray(scene.tx), axis=1)
    d2 = np.linalg.norm(pos - np.asarray(scene.rx), axis=1)
    return d1 + d2


def scene_to_json(scene: GeometricScene) -> str:
    obj = {
        "wavelength_m": scene.wavelength,
        "grid": {
            "rows": scene.rows,
            "cols": scene.cols,
            "row_spacing_m": scene.row_spacing,
            "col_spacing_m": scene.col_spacing,
        },
        "tx_m": list(scene.tx),
        "rx_m": list(scene.rx),
        "element_reflectivity": scene.element_reflectivity,
        "direct_path_gain": scene.direct_path_gain,
        "extra_paths": [{"length_m": l, "gain": g} for l, g in scene.extra_paths],
        "noise_floor_power": scene.noise_floor_power,
    }
    return json.dumps(obj)


def scene_from_json(text: str) -> GeometricScene:
    return scene_from_dict(json.loads(text))


def scene_from_dict(obj: dict) -> GeometricScene:
    grid = obj["grid"]
    return GeometricScene(
        wavelength=float(obj["wavelength_m"]),
        rows=int(grid["rows"]),
        cols=int(grid["cols"]),
        row_spacing=float(grid["row_spacing_m"]),
        col_spacing=float(grid["col_spacing_m"]),
        tx=tuple(obj["tx_m"]),
        rx=tuple(obj["rx_m"]),
        element_reflectivity=float(obj.get("element_reflectivity", 1.0)),
        direct_path_gain=float(obj.get("direct_path_gain", 1.0)),
        extra_paths=tuple((p["length_m"], p["gain"]) for p in obj.get("extra_paths", [])),
        noise_floor_power=float(obj.get("noise_floor_power", 1.0)),
    )
