"""Straight multi-lane road geometry and lane-relative feature construction.

Lateral positions are measured from the left road edge, so lane 1 is the
leftmost lane and a left lane change decreases ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import read_kv, write_kv

DT = 0.1
WINDOW = 50
HORIZON = 50

LK, LLC, RLC = 0, 1, 2
INTENTIONS = ("LK", "LLC", "RLC")

FEATURE_NAMES = ("x_rel", "x_rel_dot", "x_rel_ddot",
                 "x_dev", "x_dev_dot", "x_dev_ddot", "v_y", "a_y")
X_DEV_COL = 3
SPEED_SCALE = 30.0
ACCEL_SCALE = 3.0


@dataclass(frozen=True)
class LaneGeometry:
    num_lanes: int = 6
    lane_width: float = 3.66
    leftmost_marking: float = 0.0

    def __post_init__(self):
        if self.num_lanes < 1 or not self.lane_width > 0:
            raise ValueError("need at least one lane of positive width")

    @property
    def marking_positions(self) -> np.ndarray:
        return self.leftmost_marking + self.lane_width * np.arange(self.num_lanes + 1)

    @property
    def centerline_positions(self) -> np.ndarray:
        m = self.marking_positions
        return (m[:-1] + m[1:]) / 2

    def check_lane(self, lane) -> None:
        lane = np.asarray(lane)
        if np.any(lane < 1) or np.any(lane > self.num_lanes):
            raise ValueError(f"lane index outside 1..{self.num_lanes}: {lane}")

    def centerline(self, lane):
        """Centerline position of 1-based ``lane`` (scalar or array)."""
        self.check_lane(lane)
        return self.centerline_positions[np.asarray(lane) - 1]

    def lane_of(self, x):
        """1-based lane containing ``x``; a point on a marking belongs to the lane on its right."""
        k = np.floor((np.asarray(x, dtype=np.float64) - self.leftmost_marking) / self.lane_width)
        return np.clip(k.astype(np.int64) + 1, 1, self.num_lanes)

    @classmethod
    def from_file(cls, path) -> "LaneGeometry":
        kv = read_kv(path)
        return cls(num_lanes=int(kv.get("num_lanes", 6)),
                   lane_width=float(kv.get("lane_width_m", 3.66)),
                   leftmost_marking=float(kv.get("leftmost_marking_m", 0.0)))

    def to_file(self, path) -> None:
        write_kv(path, {"num_lanes": self.num_lanes,
                        "lane_width_m": self.lane_width,
                        "leftmost_marking_m": self.leftmost_marking})


def nearest_marking(geom: LaneGeometry, x, tol: float = 1e-9):
    """Marking closest to ``x``; ties resolve to the smaller position.

    A lane centre counts as a tie when it is within ``tol`` lane widths of
    the midpoint, so rounding noise cannot flip the choice.
    """
    r = (np.asarray(x, dtype=np.float64) - geom.leftmost_marking) / geom.lane_width
    idx = np.clip(np.ceil(r - 0.5 - tol), 0, geom.num_lanes).astype(np.int64)
    return geom.marking_positions[idx]


def relative_lateral(x, x_n):
    return np.asarray(x) - x_n


def lateral_deviation(x, x_targ):
    return np.asarray(x) - x_targ


def target_lane(current_lane: int, intention: int, geom: LaneGeometry) -> int:
    geom.check_lane(current_lane)
    if intention == LLC:
        lane = current_lane - 1
    elif intention == RLC:
        lane = current_lane + 1
    elif intention == LK:
        lane = current_lane
    else:
        raise ValueError(f"unknown intention {intention!r}")
    return lane if 1 <= lane <= geom.num_lanes else current_lane


def target_lanes(current, intention, geom: LaneGeometry) -> np.ndarray:
    """Vectorised :func:`target_lane`."""
    current = np.asarray(current)
    intention = np.asarray(intention)
    shift = np.where(intention == LLC, -1, np.where(intention == RLC, 1, 0))
    lane = current + shift
    return np.where((lane >= 1) & (lane <= geom.num_lanes), lane, current)


def finite_diff_derivatives(series, dt: float = DT):
    """First and second time derivatives along the last axis.

    Central differences inside and first-order one-sided differences at the
    ends. Affine series are exact everywhere, quadratics at interior points.
    The first-order end stencil is deliberate: the last sample of a window is
    the one the recurrent state sees most directly, and the second-order
    stencil roughly triples the noise gain of the second derivative there.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.shape[-1] < 3:
        raise ValueError("need at least 3 samples to differentiate")
    if not dt > 0:
        raise ValueError("dt must be positive")
    first = np.gradient(series, dt, axis=-1, edge_order=1)
    second = np.gradient(first, dt, axis=-1, edge_order=1)
    return first, second


def smooth(series, half_width: int = 2):
    """Centered moving average whose window shrinks symmetrically at the ends.

    The symmetric shrink keeps affine series unchanged and never looks
    past the last sample. Averaging offsets from the centre sample keeps a
    constant series bit-for-bit constant.
    """
    series = np.asarray(series, dtype=np.float64)
    n = series.shape[-1]
    k = np.arange(n)
    half = np.minimum(np.minimum(k, n - 1 - k), half_width)
    acc = np.zeros_like(series)
    for j in range(-half_width, half_width + 1):
        if j == 0:
            continue
        nb = series[..., np.clip(k + j, 0, n - 1)]
        acc += np.where(abs(j) <= half, nb - series, 0.0)
    return series + acc / (2 * half + 1)


def lateral_features(x_smooth, x_targ, geom: LaneGeometry, dt: float = DT):
    """The six lateral feature columns for smoothed positions ``(..., T)``.

    Rate columns are derivatives of the position itself: the nearest marking
    and the target centerline are piecewise constant, and differencing
    ``x_rel`` across a switch of nearest marking would produce spikes.
    """
    d1, d2 = finite_diff_derivatives(x_smooth, dt)
    x_rel = relative_lateral(x_smooth, nearest_marking(geom, x_smooth))
    x_dev = lateral_deviation(x_smooth, np.asarray(x_targ)[..., None])
    return np.stack([x_rel, d1, d2, x_dev, d1, d2], axis=-1)


def assemble_features(x_smooth, x_targ, speed, accel, geom: LaneGeometry, dt: float = DT):
    """Stack the full ``(..., T, 8)`` feature array."""
    lat = lateral_features(x_smooth, x_targ, geom, dt)
    lon = np.stack([np.asarray(speed) / SPEED_SCALE, np.asarray(accel) / ACCEL_SCALE], axis=-1)
    return np.concatenate([lat, lon], axis=-1)


def retarget(features, lateral, x_targ):
    """Copy of ``features`` with the x_dev column recomputed for a new target."""
    out = np.array(features, dtype=np.float64)
    out[..., X_DEV_COL] = lateral - np.asarray(x_targ)[..., None]
    return out
