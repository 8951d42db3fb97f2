"""Linear per-element channel model.

The aggregate channel between two endpoints is a complex number.  Each surface
element, when on, adds its own complex contribution to the all-off baseline.
Optionally, declared pairs of adjacent elements contribute a small bilinear
interaction term, which breaks exact linearity in a controlled way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from rfocus.errors import DegenerateBaselineError, DimensionError, RfocusError


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise RfocusError(f"channel coefficient must be finite, got {z!r}")
    return z


class SurfaceConfig:
    """Ordered on/off states of the N surface elements.

    Immutable.  Element 0 is the first bit; hex encodings put element 0 in the
    most significant bit of the first nibble.
    """

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.array(bits, dtype=bool)
        if arr.ndim != 1 or arr.size < 1:
            raise DimensionError("config must be a non-empty 1-D bit sequence")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SurfaceConfig is immutable")

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurfaceConfig):
            return NotImplemented
        return self.bits.size == other.bits.size and bool(np.all(self.bits == other.bits))

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return f"SurfaceConfig({''.join('1' if b else '0' for b in self.bits)})"

    @classmethod
    def all_zeros(cls, n: int) -> "SurfaceConfig":
        return cls(np.zeros(n, dtype=bool))

    def complement(self) -> "SurfaceConfig":
        return SurfaceConfig(~self.bits)

    def to_hex(self) -> str:
        n = self.bits.size
        nibbles = -(-n // 4)
        padded = np.zeros(nibbles * 4, dtype=bool)
        padded[:n] = self.bits
        packed = np.packbits(padded, bitorder="big")
        return packed.tobytes().hex()[:nibbles]

    @classmethod
    def from_hex(cls, s: str, n: int) -> "SurfaceConfig":
        if len(s) != -(-n // 4):
            raise DimensionError(f"hex string {s!r} does not encode {n} bits")
        raw = bytes.fromhex(s if len(s) % 2 == 0 else s + "0")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="big")
        return cls(bits[:n])


@dataclass(frozen=True)
class Environment:
    """Baseline channel plus per-element contributions.

    ``interactions`` maps (i, j) with i < j to the extra complex term added
    when both elements are on.  With no interactions the channel is exactly
    linear in the configuration bits.
    """

    h_z: complex
    h: np.ndarray
    interactions: dict = field(default_factory=dict)
    noise_floor_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "h_z", _as_complex(self.h_z))
        arr = np.asarray(self.h, dtype=np.complex128).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise RfocusError("environment needs at least one element")
        if not np.all(np.isfinite(arr)):
            raise RfocusError("element contributions must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "h", arr)
        n = arr.size
        inter = {}
        for (i, j), g in dict(self.interactions).items():
            i, j = int(i), int(j)
            if not (0 <= i < j < n):
                raise RfocusError(f"interaction key ({i}, {j}) must satisfy 0 <= i < j < N")
            inter[(i, j)] = _as_complex(g)
        object.__setattr__(self, "interactions", inter)
        if not (self.noise_floor_power > 0 and math.isfinite(self.noise_floor_power)):
            raise RfocusError("noise_floor_power must be a positive finite real")

    @property
    def n_elements(self) -> int:
        return self.h.size

    def without_interactions(self) -> "Environment":
        return Environment(self.h_z, self.h, {}, self.noise_floor_power)

    def with_baseline(self, h_z: complex) -> "Environment":
        return Environment(h_z, self.h, self.interactions, self.noise_floor_power)


def evaluate_channel(env: Environment, config: SurfaceConfig) -> complex:
    """Exact, noise-free channel for a configuration."""
    if len(config) != env.n_elements:
        raise DimensionError(
            f"config has {len(config)} bits, environment has {env.n_elements} elements"
        )
    h = env.h_z + env.h[config.bits].sum()
    for (i, j), g in env.interactions.items():
        if config.bits[i] and config.bits[j]:
            h += g
    return complex(h)


def evaluate_state_matrix(env: Environment, bits: np.ndarray) -> np.ndarray:
    """Channel for each row of a (K, N) boolean state matrix."""
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim != 2 or bits.shape[1] != env.n_elements:
        raise DimensionError(
            f"state matrix shape {bits.shape} does not match {env.n_elements} elements"
        )
    h = env.h_z + bits.astype(float) @ env.h
    for (i, j), g in env.interactions.items():
        h = h + np.where(bits[:, i] & bits[:, j], g, 0.0)
    return h


def rssi_ratio_exact(env: Environment, config: SurfaceConfig) -> float:
    """Noise-free received power relative to the all-off baseline."""
    base = abs(env.h_z)
    if base == 0.0:
        raise DegenerateBaselineError("baseline channel has zero magnitude")
    return abs(evaluate_channel(env, config)) ** 2 / base**2


def capacity_improvement(env: Environment, base: SurfaceConfig, opt: SurfaceConfig) -> float:
    """Shannon-capacity ratio of two configurations at unit bandwidth.

    Returns ``inf`` when the base configuration has zero capacity and the
    optimized one does not.
    """
    snr_base = abs(evaluate_channel(env, base)) ** 2 / env.noise_floor_power
    snr_opt = abs(evaluate_channel(env, opt)) ** 2 / env.noise_floor_power
    cap_base = math.log2(1.0 + snr_base)
    cap_opt = math.log2(1.0 + snr_opt)
    if cap_base == 0.0:
        return 1.0 if cap_opt == 0.0 else math.inf
    return cap_opt / cap_base


def ideal_upper_bound(env: Environment) -> float:
    """Channel magnitude achievable with full complex control of every element."""
    return abs(env.h_z) + float(np.abs(env.h).sum())


def environment_to_json(env: Environment) -> str:
    """Serialize an environment.  Round-trips 64-bit floats losslessly."""
    obj = {
        "h_z": [env.h_z.real, env.h_z.imag],
        "h": [[z.real, z.imag] for z in env.h],
        "interactions": [[i, j, g.real, g.imag] for (i, j), g in sorted(env.interactions.items())],
        "noise_floor_power": env.noise_floor_power,
    }
    return json.dumps(obj)


def environment_from_json(text: str) -> Environment:
    obj = json.loads(text)
    return environment_from_dict(obj)


def environment_from_dict(obj: dict) -> Environment:
    h_z = complex(*obj["h_z"])
    h = np.array([complex(re, im) for re, im in obj["h"]], dtype=np.complex128)
    inter = {(int(i), int(j)): complex(re, im) for i, j, re, im in obj.get("interactions", [])}
    return Environment(h_z, h, inter, float(obj.get("noise_floor_power", 1.0)))
