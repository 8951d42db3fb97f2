"""Configuration-selection algorithms.

Four perfect-information solvers (exhaustive oracle, optimal halfplane sweep,
arbitrary-line 2-approximation, surface-only optimum) and the RSSI-only
controller: batched random probing, per-batch majority voting against the
batch median, and per-element freezing once a two-sample t-test separates the
element's on/off RSSI-ratio populations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from rfocus.channel import (
    Environment,
    SurfaceConfig,
    evaluate_channel,
    evaluate_state_matrix,
)
from rfocus.errors import RfocusError, SizeGuardError
from rfocus.measurement import MeasurementOracle, NoiseModel
from rfocus.stats import welch_p_values_by_column

BRUTE_FORCE_MAX_ELEMENTS = 24
_ENUM_CHUNK = 1 << 16


def _bit_matrix(start: int, stop: int, n: int) -> np.ndarray:
    """Rows are configs for indices [start, stop); bit i of a config is the
    (n-1-i)-th binary digit of its index, so index order is lexicographic
    order of the bit string."""
    idx = np.arange(start, stop, dtype=np.uint32)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(bool)


def brute_force_opt(env: Environment) -> tuple:
    """Exhaustive maximization of |h| over all 2^N configurations.

    Ties break toward the lexicographically smallest bit string.
    """
    n = env.n_elements
    if n > BRUTE_FORCE_MAX_ELEMENTS:
        raise SizeGuardError(f"brute force limited to N <= {BRUTE_FORCE_MAX_ELEMENTS}, got {n}")
    best_mag = -1.0
    best_idx = 0
    total = 1 << n
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(start + _ENUM_CHUNK, total)
        bits = _bit_matrix(start, stop, n)
        mags = np.abs(evaluate_state_matrix(env, bits))
        k = int(np.argmax(mags))
        if mags[k] > best_mag:
            best_mag = float(mags[k])
            best_idx = start + k
    config = SurfaceConfig(_bit_matrix(best_idx, best_idx + 1, n)[0])
    return config, abs(evaluate_channel(env, config))


def _halfplane_candidates(phi: np.ndarray, extra: np.ndarray) -> np.ndarray:
    """One direction per maximal halfplane set: the membership set only
    changes at directions perpendicular to some h_i, so the midpoints between
    consecutive such events enumerate every distinct set.  Midpoints sit
    strictly inside their intervals, so boundary rounding cannot flip an
    element in or out."""
    events = np.concatenate([phi - np.pi / 2, phi + np.pi / 2, extra])
    events = np.mod(events + np.pi, 2 * np.pi) - np.pi
    events = np.unique(events)
    if events.size == 1:
        return np.array([events[0] + np.pi / 2])
    nxt = np.roll(events, -1).copy()
    nxt[-1] += 2 * np.pi  # wrap gap
    mids = (events + nxt) / 2.0
    return np.unique(np.mod(mids + np.pi, 2 * np.pi) - np.pi)


def halfplane_opt(env: Environment) -> tuple:
    """Optimal halfplane solution: best config of the form
    b_i = 1 iff Re(h_i * e^{-j*theta}) >= 0 over all directions theta.

    The membership set only changes at directions perpendicular to some h_i,
    so a sorted-angle sweep with prefix sums finds the exact optimum in
    O(N log N).  Elements with h_i = 0 stay off.
    """
    h = env.h
    n = env.n_elements
    nonzero = h != 0
    if not np.any(nonzero):
        return SurfaceConfig.all_zeros(n), abs(env.h_z)
    hz = env.h_z
    phi_all = np.angle(h[nonzero])
    order = np.argsort(phi_all, kind="stable")
    phis = phi_all[order]
    vals = h[nonzero][order]
    prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(vals)])
    total = prefix[-1]

    extra = np.array([np.angle(hz)]) if hz != 0 else np.empty(0)
    thetas = _halfplane_candidates(phi_all, extra)

    sums = _arc_sums(phis, prefix, thetas)
    mags = np.abs(hz + sums)
    theta_star = float(thetas[int(np.argmax(mags))])

    member = _arc_membership(phis, theta_star)
    bits = np.zeros(n, dtype=bool)
    idx_nonzero = np.flatnonzero(nonzero)
    bits[idx_nonzero[order[member]]] = True
    config = SurfaceConfig(bits)
    return config, abs(evaluate_channel(env, config))


def _arc_bounds(thetas):
    lo = np.mod(np.asarray(thetas) - np.pi / 2 + np.pi, 2 * np.pi) - np.pi
    return lo, lo + np.pi


def _arc_sums(phis: np.ndarray, prefix: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Sum of sorted-angle contributions within [theta - pi/2, theta + pi/2]."""
    lo, hi = _arc_bounds(thetas)
    i_lo = np.searchsorted(phis, lo, side="left")
    i_hi = np.searchsorted(phis, np.minimum(hi, np.pi), side="right")
    sums = prefix[i_hi] - prefix[i_lo]
    wrap = hi > np.pi
    if np.any(wrap):
        j_hi = np.searchsorted(phis, hi[wrap] - 2 * np.pi, side="right")
        sums[wrap] += prefix[j_hi]
    return sums


def _arc_membership(phis: np.ndarray, theta: float) -> np.ndarray:
    """Indices (into the sorted-angle order) inside the halfplane at ``theta``."""
    lo, hi = _arc_bounds([theta])
    lo, hi = float(lo[0]), float(hi[0])
    i_lo = np.searchsorted(phis, lo, side="left")
    i_hi = np.searchsorted(phis, min(hi, np.pi), side="right")
    idx = np.arange(i_lo, i_hi)
    if hi > np.pi:
        j_hi = np.searchsorted(phis, hi - 2 * np.pi, side="right")
        idx = np.concatenate([np.arange(0, j_hi), idx])
    return idx


def arbitrary_line_2approx(env: Environment, theta: float) -> tuple:
    """Split elements by the line perpendicular to direction ``theta``; the
    better of the two side-configurations is a 2-approximation."""
    if not (-np.pi <= theta < np.pi):
        raise RfocusError("theta must be in [-pi, pi)")
    side = np.real(env.h * np.exp(-1j * theta)) >= 0
    a = SurfaceConfig(side)
    b = SurfaceConfig(~side)
    mag_a = abs(evaluate_channel(env, a))
    mag_b = abs(evaluate_channel(env, b))
    return (a, mag_a) if mag_a >= mag_b else (b, mag_b)


def surface_only_opt(env: Environment) -> float:
    """Best achievable |sum of on-element contributions|, ignoring the
    baseline path entirely."""
    _, mag = halfplane_opt(env.with_baseline(0.0))
    return mag


def majority_vote(measurements, center_statistic: str = "median") -> tuple:
    """Per-element majority vote over measured RSSI-ratios.

    An element collects an "on" vote from each record where it was on and the
    ratio exceeded the center statistic, or off and the ratio was below it.
    Ties set the element off.  Returns the voted config and its complement;
    one of the two is the 2-approximation candidate.
    """
    measurements = list(measurements)
    if not measurements:
        raise RfocusError("majority_vote needs at least one measurement")
    n = len(measurements[0].config)
    if any(len(m.config) != n for m in measurements):
        raise RfocusError("all measurements must share one element count")
    if center_statistic not in ("mean", "median"):
        raise RfocusError("center_statistic must be 'mean' or 'median'")
    bits = np.array([m.config.bits for m in measurements])
    ratios = np.array([m.rssi_ratio for m in measurements])
    center = float(np.median(ratios) if center_statistic == "median" else np.mean(ratios))
    above = ratios > center
    below = ratios < center
    votes_on = (bits & above[:, None]).sum(axis=0) + (~bits & below[:, None]).sum(axis=0)
    votes_off = len(measurements) - votes_on
    opt = SurfaceConfig(votes_on > votes_off)
    return opt, opt.complement()


@dataclass(frozen=True)
class ControllerParams:
    batch_size: int = 2000
    confidence: float = 0.95
    budget: int = 40000
    center_statistic: str = "median"
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise RfocusError("batch_size must be >= 2")
        if not (0.5 < self.confidence < 1.0):
            raise RfocusError("confidence must be in (0.5, 1)")
        if self.center_statistic not in ("mean", "median"):
            raise RfocusError("center_statistic must be 'mean' or 'median'")


@dataclass(frozen=True)
class OptimizationReport:
    best_config: SurfaceConfig
    best_config_complement_candidate: SurfaceConfig
    achieved_ratio: float
    trajectory: tuple  # of (measurements_used, best_so_far_ratio)
    fixed_at: tuple  # per-element measurement index at freeze, -1 if never frozen
    seed: int
    total_measurements: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "best_config": self.best_config.to_hex(),
                "best_config_complement_candidate": self.best_config_complement_candidate.to_hex(),
                "n_elements": len(self.best_config),
                "achieved_ratio": self.achieved_ratio,
                "trajectory": [[m, r] for m, r in self.trajectory],
                "fixed_at": list(self.fixed_at),
                "seed": self.seed,
                "total_measurements": self.total_measurements,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "OptimizationReport":
        obj = json.loads(text)
        n = int(obj["n_elements"])
        return cls(
            best_config=SurfaceConfig.from_hex(obj["best_config"], n),
            best_config_complement_candidate=SurfaceConfig.from_hex(
                obj["best_config_complement_candidate"], n
            ),
            achieved_ratio=float(obj["achieved_ratio"]),
            trajectory=tuple((int(m), float(r)) for m, r in obj["trajectory"]),
            fixed_at=tuple(int(v) for v in obj["fixed_at"]),
            seed=int(obj["seed"]),
            total_measurements=int(obj["total_measurements"]),
        )


def _probe(oracle: MeasurementOracle, bits: np.ndarray, reps: int, batch: int) -> float:
    recs = oracle.measure_batch([SurfaceConfig(bits)] * reps, batch=batch)
    return float(np.median([r.rssi_ratio for r in recs]))


def run_controller(env: Environment, noise: NoiseModel, params: ControllerParams) -> OptimizationReport:
    """RSSI-only batched controller.

    Each batch measures random configurations over the still-free elements,
    votes against the batch's center statistic, and freezes every free element
    whose on/off ratio populations separate at the requested confidence.
    Stops when all elements are frozen or the measurement budget runs out;
    never-frozen elements keep their latest majority-vote value.
    """
    n = env.n_elements
    if params.budget < params.batch_size:
        raise RfocusError("budget must cover at least one batch")
    oracle = MeasurementOracle(env, noise)
    cfg_rng = np.random.default_rng(params.seed)
    center_fn = np.median if params.center_statistic == "median" else np.mean
    alpha = 1.0 - params.confidence

    frozen_mask = np.zeros(n, dtype=bool)
    frozen_val = np.zeros(n, dtype=bool)
    vote_val = np.zeros(n, dtype=bool)
    fixed_at = np.full(n, -1, dtype=int)
    trajectory = []
    best_ratio = -math.inf
    used = 0
    batch_idx = 0

    while used < params.budget and not frozen_mask.all():
        bsize = min(params.batch_size, params.budget - used)
        if bsize < 2:
            break
        bits = cfg_rng.random((bsize, n)) < 0.5
        bits[:, frozen_mask] = frozen_val[frozen_mask]
        recs = oracle.measure_state_matrix(bits, batch=batch_idx)
        ratios = np.array([r.rssi_ratio for r in recs])
        used += bsize

        center = float(center_fn(ratios))
        free_idx = np.flatnonzero(~frozen_mask)
        on = bits[:, free_idx]
        above = (ratios > center)[:, None]
        below = (ratios < center)[:, None]
        votes_on = (on & above).sum(axis=0) + (~on & below).sum(axis=0)
        votes_off = bsize - votes_on
        vote_val[free_idx] = votes_on > votes_off

        n_on = on.sum(axis=0)
        mean_on = np.divide(ratios @ on, n_on, out=np.zeros(free_idx.size), where=n_on > 0)
        n_off = bsize - n_on
        mean_off = np.divide(ratios.sum() - ratios @ on, n_off,
                             out=np.zeros(free_idx.size), where=n_off > 0)
        pvals = welch_p_values_by_column(bits, ratios, free_idx)
        sig = pvals < alpha
        newly = free_idx[sig]
        frozen_val[newly] = mean_on[sig] > mean_off[sig]
        frozen_mask[newly] = True
        fixed_at[newly] = used

        hyp = np.where(frozen_mask, frozen_val, vote_val)
        comp = hyp.copy()
        comp[~frozen_mask] = ~comp[~frozen_mask]
        probes = oracle.measure_batch([SurfaceConfig(hyp), SurfaceConfig(comp)], batch=batch_idx)
        used += 2
        best_ratio = max(best_ratio, float(ratios.max()),
                         probes[0].rssi_ratio, probes[1].rssi_ratio)
        trajectory.append((used, best_ratio))
        batch_idx += 1

    final = np.where(frozen_mask, frozen_val, vote_val)
    final_c = ~final  # the global on/off ambiguity flips every element
    r_final = _probe(oracle, final, 3, batch_idx)
    r_comp = _probe(oracle, final_c, 3, batch_idx)
    used += 6
    if r_comp > r_final:
        final, final_c = final_c, final
    achieved = _probe(oracle, final, 5, batch_idx)
    used += 5
    best_ratio = max(best_ratio, achieved)
    trajectory.append((used, best_ratio))

    return OptimizationReport(
        best_config=SurfaceConfig(final),
        best_config_complement_candidate=SurfaceConfig(final_c),
        achieved_ratio=achieved,
        trajectory=tuple(trajectory),
        fixed_at=tuple(int(v) for v in fixed_at),
        seed=params.seed,
        total_measurements=used,
    )
