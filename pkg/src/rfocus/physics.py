"""Field-grid focusing simulation and aperture-size laws.

A 2-D scene of point emitters phase-conjugated onto a target point, the Abbe
spot-size law for an aperture focusing at a distance, and the lower bound on
the energy fraction retained by a surface with finite pixel size.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from rfocus.errors import RfocusError


class EmitterProximityWarning(UserWarning):
    """A grid sample fell within a tenth wavelength of an emitter; its
    distance was clamped."""


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid: origin is the lower-left corner."""

    x0: float
    y0: float
    width: float
    height: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.nx < 2 or self.ny < 2:
            raise RfocusError("grid must have positive extent and at least 2x2 samples")

    @property
    def cell_area(self) -> float:
        return (self.width / self.nx) * (self.height / self.ny)

    def axes(self):
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.width / self.nx
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.height / self.ny
        return xs, ys

    def contains(self, point) -> bool:
        x, y = point
        return (self.x0 <= x <= self.x0 + self.width) and (self.y0 <= y <= self.y0 + self.height)

    def index_of(self, point) -> tuple:
        x, y = point
        ix = int(np.clip((x - self.x0) / self.width * self.nx, 0, self.nx - 1))
        iy = int(np.clip((y - self.y0) / self.height * self.ny, 0, self.ny - 1))
        return iy, ix


@dataclass(frozen=True)
class ArraySceneGrid:
    """2-D emitter array focused on a target point."""

    emitters: np.ndarray  # (M, 2)
    target: tuple
    wavelength: float
    grid: GridSpec

    def __post_init__(self):
        em = np.atleast_2d(np.asarray(self.emitters, dtype=float))
        if em.shape[0] < 1 or em.shape[1] != 2:
            raise RfocusError("need at least one 2-D emitter position")
        em.setflags(write=False)
        object.__setattr__(self, "emitters", em)
        object.__setattr__(self, "target", (float(self.target[0]), float(self.target[1])))
        if self.wavelength <= 0:
            raise RfocusError("wavelength must be positive")
        if not self.grid.contains(self.target):
            raise RfocusError("target must lie inside the grid extent")
        # at least 4 samples per wavelength in each direction
        if (self.grid.width / self.grid.nx > self.wavelength / 4
                or self.grid.height / self.grid.ny > self.wavelength / 4):
            raise RfocusError("grid resolution must be at least 4 samples per wavelength")


def focus_field_map(scene: ArraySceneGrid) -> np.ndarray:
    """Power map of the array focused on the target.

    Each emitter carries amplitude 1/sqrt(M) (constant total power) with the
    phase conjugate of its path to the target, so all contributions add in
    phase there.  Grid samples closer than a tenth wavelength to an emitter
    have the distance clamped, with a warning.
    """
    m = scene.emitters.shape[0]
    lam = scene.wavelength
    k = 2 * np.pi / lam
    xs, ys = scene.grid.axes()
    gx, gy = np.meshgrid(xs, ys)
    field = np.zeros((scene.grid.ny, scene.grid.nx), dtype=np.complex128)
    amp = 1.0 / np.sqrt(m)
    tgt = np.asarray(scene.target)
    clamped = False
    for e in scene.emitters:
        d_t = float(np.hypot(*(e - tgt)))
        if d_t == 0:
            raise RfocusError("target coincides with an emitter")
        conj_phase = np.exp(1j * k * d_t)
        dist = np.hypot(gx - e[0], gy - e[1])
        near = dist < lam / 10.0
        if np.any(near):
            clamped = True
            dist = np.where(near, lam / 10.0, dist)
        field += amp / dist * np.exp(-1j * k * dist) * conj_phase
    if clamped:
        warnings.warn("grid samples within lambda/10 of an emitter were clamped",
                      EmitterProximityWarning, stacklevel=2)
    return np.abs(field) ** 2


def half_max_spot_area(power: np.ndarray, grid: GridSpec, target) -> float:
    """Area of the connected region around the target with power >= half the
    target power."""
    iy, ix = grid.index_of(target)
    threshold = 0.5 * power[iy, ix]
    mask = power >= threshold
    labels, _ = ndimage.label(mask)
    return float((labels == labels[iy, ix]).sum()) * grid.cell_area


@dataclass(frozen=True)
class AbbeParams:
    surface_area: float  # m^2
    distance: float  # m
    wavelength: float  # m
    k: float = 0.5
    solid_angle: float = np.pi  # subtended on the transmitter, used for energy budgets

    def __post_init__(self):
        if min(self.surface_area, self.distance, self.wavelength, self.k) <= 0:
            raise RfocusError("all Abbe parameters must be positive")
        if not (0 < self.solid_angle <= 2 * np.pi):
            raise RfocusError("solid_angle must be in (0, 2*pi]")


def abbe_spot_area(p: AbbeParams) -> float:
    """Minimum focal spot area for an aperture of the given area focusing at
    the given distance: k * lambda^2 * (1 + 4 d^2 / A)."""
    return p.k * p.wavelength**2 * (1.0 + 4.0 * p.distance**2 / p.surface_area)


def pixelation_bound(a: float, frequency_nu: float) -> float:
    """Lower bound on the energy fraction retained by a surface with largest
    pixel dimension ``a``, in normalized units where the wave speed is 1 (so
    nu * a equals a / lambda).  Zero once the pixel reaches a full wavelength.
    """
    if a <= 0 or frequency_nu <= 0:
        raise RfocusError("pixel size and frequency must be positive")
    lam = 1.0 / frequency_nu
    if a >= lam:
        return 0.0
    return float(np.sin(np.pi * frequency_nu * a) / (np.sqrt(2.0) * np.pi * a * frequency_nu))


def write_field_csv(power: np.ndarray, grid: GridSpec, path) -> None:
    xs, ys = grid.axes()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "power"])
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(power[iy, ix]))])


_GRID_HEADER = struct.Struct("<6d")


def write_field_grid(power: np.ndarray, grid: GridSpec, path) -> None:
    """Compact binary grid: 6 little-endian float64 header fields
    (x0, y0, width, height, nx, ny) followed by row-major float64 powers."""
    if power.shape != (grid.ny, grid.nx):
        raise RfocusError("power array does not match grid shape")
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(grid.x0, grid.y0, grid.width, grid.height,
                                   float(grid.nx), float(grid.ny)))
        fh.write(np.ascontiguousarray(power, dtype="<f8").tobytes())


def read_field_grid(path) -> tuple:
    with open(path, "rb") as fh:
        x0, y0, width, height, nx, ny = _GRID_HEADER.unpack(fh.read(_GRID_HEADER.size))
        grid = GridSpec(x0, y0, width, height, int(nx), int(ny))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(grid.ny, grid.nx)
    return data, grid
