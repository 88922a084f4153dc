"""Trajectory ingestion, lane-change detection, windowing and synthetic tracks."""

from __future__ import annotations

import hashlib
import io
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import geometry as G
from .config import read_kv
from .geometry import DT, HORIZON, WINDOW, LaneGeometry

log = logging.getLogger(__name__)

FEET = 0.3048

# 0-based column indices of the NGSIM trajectory layout
COL_VEHICLE_ID = 0
COL_FRAME_ID = 1
COL_TOTAL_FRAMES = 2
COL_GLOBAL_TIME = 3
COL_LOCAL_X = 4
COL_LOCAL_Y = 5
COL_GLOBAL_X = 6
COL_GLOBAL_Y = 7
COL_LENGTH = 8
COL_WIDTH = 9
COL_CLASS = 10
COL_VEL = 11
COL_ACC = 12
COL_LANE = 13
NGSIM_COLUMNS = 18

DWELL_FRAMES = 20          # "successful" change: 2 s in the destination lane
LABEL_FRAMES = 40          # intention labelling interval before t_cross
STRIDE = 10


class DataError(ValueError):
    """Input data could not be used; message names the source and line where possible."""


@dataclass
class LaneChangeEvent:
    vehicle_id: int
    direction: str          # "left" or "right"
    t_cross: int            # index into the track arrays of the first frame in the new lane
    from_lane: int
    to_lane: int

    @property
    def intention(self) -> int:
        return G.LLC if self.direction == "left" else G.RLC


@dataclass(eq=False)
class Track:
    vehicle_id: int
    frame: np.ndarray
    local_x: np.ndarray
    local_y: np.ndarray
    speed: np.ndarray
    accel: np.ndarray
    lane_id: np.ndarray
    length: np.ndarray
    v_class: np.ndarray
    scheduled: LaneChangeEvent | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.frame)

    def __eq__(self, other):
        if not isinstance(other, Track) or self.vehicle_id != other.vehicle_id:
            return False
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in fields(self) if f.name not in ("vehicle_id", "scheduled"))

    def slice(self, start, stop) -> "Track":
        kw = {f.name: getattr(self, f.name)[start:stop] for f in fields(self)
              if f.name not in ("vehicle_id", "scheduled")}
        return Track(self.vehicle_id, **kw)


# ---------------------------------------------------------------- file I/O

def parse_trajectory_file(source, unit_mode: str = "meters", name: str | None = None) -> list[Track]:
    """Read NGSIM-layout rows into frame-sorted tracks.

    ``source`` is a path, a text/binary stream or raw bytes. Rows may be
    whitespace- or comma-delimited; one leading header line is allowed.
    Malformed rows are skipped and counted; more than 1% of them is fatal.
    Tracks are split wherever frame ids are not contiguous.
    """
    if unit_mode not in ("feet", "meters"):
        raise ValueError("unit_mode must be 'feet' or 'meters'")
    if isinstance(source, (str, Path)):
        name = name or str(source)
        try:
            text = Path(source).read_bytes().decode()
        except OSError as exc:
            raise DataError(f"{source}: cannot read ({exc})") from exc
    elif isinstance(source, bytes):
        text = source.decode()
    else:
        raw = source.read()
        text = raw.decode() if isinstance(raw, bytes) else raw
    name = name or "<stream>"

    rows = []
    bad = []
    total = 0
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            vals = [float(p) for p in parts[:COL_LANE + 1]]
        except ValueError:
            if total == 0 and not rows and not bad:
                continue  # header
            vals = None
        total += 1
        if vals is None or len(vals) <= COL_LANE or not np.all(np.isfinite(vals)):
            bad.append(lineno)
            continue
        rows.append((lineno, vals))
    if total and len(bad) / total > 0.01:
        raise DataError(f"{name}: {len(bad)} of {total} rows malformed "
                        f"(first at line {bad[0]})")
    if bad:
        log.warning("%s: skipped %d malformed rows (first at line %d)", name, len(bad), bad[0])
    if not rows:
        return []

    arr = np.array([v for _, v in rows])
    scale = FEET if unit_mode == "feet" else 1.0
    vid = arr[:, COL_VEHICLE_ID].astype(np.int64)
    frame = arr[:, COL_FRAME_ID].astype(np.int64)
    order = np.lexsort((frame, vid))
    arr, vid, frame = arr[order], vid[order], frame[order]

    tracks = []
    for v in np.unique(vid):
        sel = np.flatnonzero(vid == v)
        fr = frame[sel]
        keep = np.concatenate([[True], np.diff(fr) != 0])  # drop duplicate frames
        sel, fr = sel[keep], fr[keep]
        a = arr[sel]
        whole = Track(
            vehicle_id=int(v),
            frame=fr,
            local_x=a[:, COL_LOCAL_X] * scale,
            local_y=a[:, COL_LOCAL_Y] * scale,
            speed=a[:, COL_VEL] * scale,
            accel=a[:, COL_ACC] * scale,
            lane_id=a[:, COL_LANE].astype(np.int64),
            length=a[:, COL_LENGTH] * scale,
            v_class=a[:, COL_CLASS].astype(np.int64),
        )
        cuts = np.flatnonzero(np.diff(fr) != 1) + 1
        bounds = np.concatenate([[0], cuts, [len(fr)]])
        for s, e in zip(bounds[:-1], bounds[1:]):
            tracks.append(whole.slice(s, e))
    return tracks


def format_trajectory_rows(tracks) -> str:
    """NGSIM column order, metres; unused columns are filled with zeros."""
    out = []
    for tr in tracks:
        n = len(tr)
        for k in range(n):
            row = [0.0] * NGSIM_COLUMNS
            row[COL_VEHICLE_ID] = tr.vehicle_id
            row[COL_FRAME_ID] = int(tr.frame[k])
            row[COL_TOTAL_FRAMES] = n
            row[COL_GLOBAL_TIME] = int(tr.frame[k]) * 100
            row[COL_LOCAL_X] = tr.local_x[k]
            row[COL_LOCAL_Y] = tr.local_y[k]
            row[COL_LENGTH] = tr.length[k]
            row[COL_WIDTH] = 0.0
            row[COL_CLASS] = int(tr.v_class[k])
            row[COL_VEL] = tr.speed[k]
            row[COL_ACC] = tr.accel[k]
            row[COL_LANE] = int(tr.lane_id[k])
            out.append(" ".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                                for v in row))
    return "\n".join(out) + ("\n" if out else "")


def write_trajectory_file(path, tracks) -> None:
    Path(path).write_text(format_trajectory_rows(tracks))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- events

def detect_lane_changes(track: Track, geom: LaneGeometry) -> list[LaneChangeEvent]:
    """Lane changes between settled stretches of driving.

    Lanes are recomputed from ``local_x``; the dataset's lane column is
    ignored. A run of identical lanes is settled when it lasts at least 2 s
    (the opening run of a track always counts as the origin). An event is a
    one-lane step between consecutive settled runs, so excursions that come
    back (aborts) and flicker across a marking are not separate events.
    ``t_cross`` is the first frame in the destination lane after the origin run.
    """
    lanes = geom.lane_of(track.local_x)
    if len(lanes) == 0:
        return []
    starts = np.concatenate([[0], np.flatnonzero(np.diff(lanes) != 0) + 1])
    ends = np.concatenate([starts[1:], [len(lanes)]])
    settled = [(int(lanes[s]), s, e) for s, e in zip(starts, ends)
               if e - s >= DWELL_FRAMES or s == 0]
    events = []
    for (frm, _, a_end), (to, b_start, b_end) in zip(settled, settled[1:]):
        if abs(to - frm) != 1 or b_end - b_start < DWELL_FRAMES:
            continue
        k = a_end + int(np.argmax(lanes[a_end:b_start + 1] == to))
        events.append(LaneChangeEvent(track.vehicle_id, "left" if to < frm else "right",
                                      int(k), frm, to))
    return events


def label_anchors(anchors, events: list[LaneChangeEvent]) -> np.ndarray:
    """Intention label per anchor index.

    Anchors in ``[t_cross - 40, t_cross - 1]`` take the event's direction,
    the nearest crossing wins when intervals overlap, everything else is LK.
    """
    anchors = np.asarray(anchors, dtype=np.int64)
    labels = np.full(anchors.shape, G.LK, dtype=np.int64)
    best = np.full(anchors.shape, np.iinfo(np.int64).max)
    for ev in events:
        dist = ev.t_cross - anchors
        hit = (dist >= 1) & (dist <= LABEL_FRAMES) & (dist < best)
        labels[hit] = ev.intention
        best[hit] = dist[hit]
    return labels


# ---------------------------------------------------------------- windows

@dataclass
class FeatureWindow:
    """One observation window and its targets.

    ``anchor`` indexes the last observed frame of the track; the future is
    the next 50 frames. ``features[:, 3]`` (x_dev) is relative to
    ``target_lane``, as is :attr:`future_x_dev`.
    """

    vehicle_id: int
    anchor: int
    frame: int
    current_lane: int
    target_lane: int
    label: int
    features: np.ndarray
    lateral: np.ndarray
    future_accel: np.ndarray
    future_x: np.ndarray
    future_y: np.ndarray
    v0: float
    y0: float
    x0: float
    geom: LaneGeometry = field(default_factory=LaneGeometry, repr=False)

    @property
    def future_x_dev(self) -> np.ndarray:
        return self.future_x - self.geom.centerline(self.target_lane)

    def with_target_lane(self, lane: int) -> "FeatureWindow":
        x_targ = self.geom.centerline(lane)
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw["features"] = G.retarget(self.features, self.lateral, x_targ)
        kw["target_lane"] = int(lane)
        return FeatureWindow(**kw)


def build_feature_window(track: Track, geom: LaneGeometry, anchor: int,
                         intention_for_targets: int = G.LK, label: int | None = None) -> FeatureWindow:
    """Single-window convenience wrapper around :func:`window_arrays`."""
    if anchor < WINDOW - 1 or anchor + HORIZON >= len(track):
        raise DataError(f"vehicle {track.vehicle_id}: anchor {anchor} lacks history or future")
    arr = window_arrays(track, geom, np.array([anchor]), np.array([intention_for_targets]))
    return FeatureWindow(
        vehicle_id=track.vehicle_id, anchor=int(anchor), frame=int(track.frame[anchor]),
        current_lane=int(arr["current_lane"][0]), target_lane=int(arr["target_lane"][0]),
        label=int(intention_for_targets if label is None else label),
        features=arr["features"][0], lateral=arr["lateral"][0],
        future_accel=arr["future_accel"][0], future_x=arr["future_x"][0],
        future_y=arr["future_y"][0], v0=float(arr["v0"][0]), y0=float(arr["y0"][0]),
        x0=float(arr["x0"][0]), geom=geom)


def window_arrays(track: Track, geom: LaneGeometry, anchors, intentions) -> dict:
    """Vectorised window construction for many anchors of one track.

    The x_dev column is computed against the lane implied by ``intentions``
    relative to the lane occupied at each anchor. Future arrays are only
    filled where 50 future frames exist (NaN otherwise).
    """
    anchors = np.asarray(anchors, dtype=np.int64)
    past = anchors[:, None] + np.arange(-WINDOW + 1, 1)
    raw_x = track.local_x[past]
    lateral = G.smooth(raw_x)
    cur = geom.lane_of(track.local_x[anchors])
    tgt = G.target_lanes(cur, intentions, geom)
    feats = G.assemble_features(lateral, geom.centerline(tgt), track.speed[past],
                                track.accel[past], geom)
    fut = anchors[:, None] + np.arange(1, HORIZON + 1)
    ok = fut < len(track)
    futc = np.minimum(fut, len(track) - 1)

    def future(a):
        return np.where(ok, a[futc], np.nan)

    return {
        "features": feats, "lateral": lateral, "current_lane": cur, "target_lane": tgt,
        "future_accel": future(track.accel), "future_x": future(track.local_x),
        "future_y": future(track.local_y), "v0": track.speed[anchors],
        "y0": track.local_y[anchors], "x0": track.local_x[anchors],
    }


_SAMPLE_FIELDS = ("vehicle_id", "anchor", "frame", "current_lane", "target_lane", "label",
                  "features", "lateral", "future_accel", "future_x", "future_y",
                  "v0", "y0", "x0")


@dataclass
class SampleSet:
    """Stacked feature windows, ordered by (track order, anchor).

    ``features`` x_dev is relative to the current lane (the classifier's
    input); ``target_lane`` is the ground-truth target from the label.
    """

    geom: LaneGeometry
    vehicle_id: np.ndarray
    anchor: np.ndarray
    frame: np.ndarray
    current_lane: np.ndarray
    target_lane: np.ndarray
    label: np.ndarray
    features: np.ndarray
    lateral: np.ndarray
    future_accel: np.ndarray
    future_x: np.ndarray
    future_y: np.ndarray
    v0: np.ndarray
    y0: np.ndarray
    x0: np.ndarray
    provenance: dict = field(default_factory=dict)
    skipped: int = 0

    def __len__(self):
        return len(self.label)

    @classmethod
    def empty(cls, geom: LaneGeometry) -> "SampleSet":
        z = np.zeros(0)
        zi = np.zeros(0, dtype=np.int64)
        return cls(geom, zi, zi, zi, zi, zi, zi, np.zeros((0, WINDOW, len(G.FEATURE_NAMES))),
                   np.zeros((0, WINDOW)), np.zeros((0, HORIZON)), np.zeros((0, HORIZON)),
                   np.zeros((0, HORIZON)), z, z, z)

    def subset(self, idx) -> "SampleSet":
        idx = np.asarray(idx, dtype=np.intp)
        kw = {name: getattr(self, name)[idx] for name in _SAMPLE_FIELDS}
        return SampleSet(self.geom, provenance=dict(self.provenance), **kw)

    def window(self, i: int) -> FeatureWindow:
        kw = {name: getattr(self, name)[i] for name in _SAMPLE_FIELDS}
        for name in ("vehicle_id", "anchor", "frame", "current_lane", "target_lane", "label"):
            kw[name] = int(kw[name])
        for name in ("v0", "y0", "x0"):
            kw[name] = float(kw[name])
        return FeatureWindow(geom=self.geom, **kw)

    def target_features(self, target_lane=None) -> np.ndarray:
        """Features with x_dev recomputed against ``target_lane`` (ground truth by default)."""
        lanes = self.target_lane if target_lane is None else np.asarray(target_lane)
        return G.retarget(self.features, self.lateral, self.geom.centerline(lanes))

    def future_x_dev(self, target_lane=None) -> np.ndarray:
        lanes = self.target_lane if target_lane is None else np.asarray(target_lane)
        return self.future_x - self.geom.centerline(lanes)[:, None]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.label, minlength=3)

    def manifest(self) -> str:
        lines = ["SAMPLESET v1"]
        for k, v in self.provenance.items():
            lines.append(f"{k}={v}")
        counts = self.class_counts()
        lines.append(f"windows={len(self)}")
        for name, c in zip(G.INTENTIONS, counts):
            lines.append(f"count_{name}={int(c)}")
        lines.append(f"vehicles={len(np.unique(self.vehicle_id))}")
        lines.append(f"skipped_anchors={self.skipped}")
        return "\n".join(lines) + "\n"


def anchor_indices(n_frames: int, window: int = WINDOW, stride: int = STRIDE,
                   horizon: int = HORIZON) -> np.ndarray:
    """Feasible anchors: the first has 50 frames of history, the last 50 of future."""
    first = window - 1
    last = n_frames - 1 - horizon
    if last < first:
        return np.zeros(0, dtype=np.int64)
    return np.arange(first, last + 1, stride)


def stride_grid(n_frames: int, window: int = WINDOW, stride: int = STRIDE) -> np.ndarray:
    """All anchor positions on the stride grid, feasible or not."""
    return np.arange((window - 1) % stride, n_frames, stride)


def slice_windows(tracks, geom: LaneGeometry, window: int = WINDOW, stride: int = STRIDE,
                  horizon: int = HORIZON, require_future: bool = True) -> SampleSet:
    """Cut every track into strided windows with labels and ground-truth targets.

    With ``require_future=False`` an anchor only needs 50 frames of history
    (prediction on live data); the future arrays are then NaN past the end
    of the track. Anchors on the stride grid that cannot be used are counted
    in ``skipped``.
    """
    if (window, horizon) != (WINDOW, HORIZON):
        raise ValueError(f"only window={WINDOW}, horizon={HORIZON} are supported")
    parts = []
    skipped = 0
    for tr in tracks:
        anchors = anchor_indices(len(tr), window, stride, horizon if require_future else 0)
        skipped += len(stride_grid(len(tr), window, stride)) - len(anchors)
        if len(anchors) == 0:
            continue
        labels = label_anchors(anchors, detect_lane_changes(tr, geom))
        arr = window_arrays(tr, geom, anchors, np.full(len(anchors), G.LK))
        arr["target_lane"] = G.target_lanes(arr["current_lane"], labels, geom)
        arr["label"] = labels
        arr["vehicle_id"] = np.full(len(anchors), tr.vehicle_id, dtype=np.int64)
        arr["anchor"] = anchors
        arr["frame"] = tr.frame[anchors]
        parts.append(arr)
    if not parts:
        out = SampleSet.empty(geom)
    else:
        kw = {name: np.concatenate([p[name] for p in parts]) for name in _SAMPLE_FIELDS}
        out = SampleSet(geom, **kw)
    out.skipped = skipped
    out.provenance.update({"window": window, "stride": stride, "horizon": horizon,
                           "require_future": require_future})
    return out


def split_train_val(samples: SampleSet, ratio: float = 0.7, seed: int = 0):
    """Split by vehicle so that no vehicle contributes to both sides."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    if len(samples) == 0:
        return samples.subset([]), samples.subset([])
    vids, counts = np.unique(samples.vehicle_id, return_counts=True)
    order = np.random.default_rng(seed).permutation(len(vids))
    cum = np.concatenate([[0], np.cumsum(counts[order])])
    cut = int(np.argmin(np.abs(cum - ratio * cum[-1])))
    train_v = vids[order[:cut]]
    in_train = np.isin(samples.vehicle_id, train_v)
    return samples.subset(np.flatnonzero(in_train)), samples.subset(np.flatnonzero(~in_train))


# ---------------------------------------------------------------- synthetic

@dataclass
class SynthConfig:
    n_lk: int = 200
    n_llc: int = 50
    n_rlc: int = 50
    duration_s: float = 300.0
    speed_min: float = 20.0
    speed_max: float = 30.0
    accel_max: float = 0.5
    accel_segment_min_s: float = 5.0
    accel_segment_max_s: float = 10.0
    noise_lateral: float = 0.05
    lc_duration_s: float = 4.0
    crossing_margin_s: float = 10.0
    vehicle_length: float = 4.5
    vehicle_class: int = 2

    def validate(self) -> None:
        if min(self.n_lk, self.n_llc, self.n_rlc) < 0:
            raise ValueError("track counts must be non-negative")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("need 0 < speed_min <= speed_max")
        if self.accel_max < 0 or self.noise_lateral < 0:
            raise ValueError("accel_max and noise_lateral must be non-negative")
        if not 0 < self.accel_segment_min_s <= self.accel_segment_max_s:
            raise ValueError("invalid acceleration segment bounds")
        if not self.lc_duration_s > 0:
            raise ValueError("lc_duration_s must be positive")
        if self.duration_s < 2 * self.crossing_margin_s or self.crossing_margin_s < self.lc_duration_s / 2:
            raise ValueError("duration too short for the crossing margins")

    @classmethod
    def from_file(cls, path) -> "SynthConfig":
        kv = read_kv(path)
        known = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, v in kv.items():
            if k not in known:
                raise ValueError(f"{path}: unknown synth option {k!r}")
            kw[k] = int(v) if known[k] == "int" else float(v)
        cfg = cls(**kw)
        cfg.validate()
        return cfg


def lane_change_profile(t, t_mid: float, duration: float) -> np.ndarray:
    """Lateral progress in [0, 1]: a logistic rescaled to hit 0 and 1 exactly.

    The transition spans ``duration`` centred on ``t_mid`` and is flat outside.
    """
    k = 8.0 / duration
    half = duration / 2
    lo = 1.0 / (1.0 + np.exp(k * half))
    hi = 1.0 / (1.0 + np.exp(-k * half))
    tau = np.clip(np.asarray(t, dtype=np.float64) - t_mid, -half, half)
    s = (1.0 / (1.0 + np.exp(-k * tau)) - lo) / (hi - lo)
    s[tau <= -half] = 0.0
    s[tau >= half] = 1.0
    return s


def _longitudinal(cfg: SynthConfig, n: int, rng: np.random.Generator):
    """Piecewise-constant acceleration integrated with the Euler recursion."""
    a = np.empty(n)
    v = np.empty(n)
    y = np.empty(n)
    v[0] = rng.uniform(cfg.speed_min, cfg.speed_max)
    y[0] = rng.uniform(0.0, 50.0)
    seg_a = rng.uniform(-cfg.accel_max, cfg.accel_max)
    seg_left = int(round(rng.uniform(cfg.accel_segment_min_s, cfg.accel_segment_max_s) / DT))
    a[0] = seg_a
    for k in range(1, n):
        if seg_left <= 0:
            seg_a = rng.uniform(-cfg.accel_max, cfg.accel_max)
            seg_left = int(round(rng.uniform(cfg.accel_segment_min_s, cfg.accel_segment_max_s) / DT))
        nv = v[k - 1] + seg_a * DT
        if nv < cfg.speed_min or nv > cfg.speed_max:
            # head back into the speed band with a fresh segment
            toward = 1.0 if nv < cfg.speed_min else -1.0
            seg_a = toward * rng.uniform(0.0, cfg.accel_max)
            seg_left = int(round(rng.uniform(cfg.accel_segment_min_s, cfg.accel_segment_max_s) / DT))
            nv = v[k - 1] + seg_a * DT
        a[k] = seg_a
        v[k] = nv
        y[k] = y[k - 1] + v[k] * DT
        seg_left -= 1
    return a, v, y


def synth_generate(config: SynthConfig, seed: int, geom: LaneGeometry | None = None) -> list[Track]:
    """Deterministic synthetic highway tracks.

    Lane-keeping tracks follow a centerline plus white lateral noise. Lane
    changes add a one-lane transition centred half a frame before the
    scheduled crossing frame, so that frame is the first one in the new lane.
    """
    config.validate()
    geom = geom or LaneGeometry()
    rng = np.random.default_rng(seed)
    n = int(round(config.duration_s / DT)) + 1
    kinds = np.array([G.LK] * config.n_lk + [G.LLC] * config.n_llc + [G.RLC] * config.n_rlc)
    kinds = kinds[rng.permutation(len(kinds))]
    t = np.arange(n) * DT
    margin = int(round(config.crossing_margin_s / DT))
    tracks = []
    for vid, kind in enumerate(kinds, start=1):
        if kind == G.LLC:
            lane = int(rng.integers(2, geom.num_lanes + 1))
        elif kind == G.RLC:
            lane = int(rng.integers(1, geom.num_lanes))
        else:
            lane = int(rng.integers(1, geom.num_lanes + 1))
        x = np.full(n, geom.centerline(lane), dtype=np.float64)
        scheduled = None
        if kind != G.LK:
            k_cross = int(rng.integers(margin, n - margin))
            sign = -1.0 if kind == G.LLC else 1.0
            x = x + sign * geom.lane_width * lane_change_profile(
                t, (k_cross - 0.5) * DT, config.lc_duration_s)
            to = lane - 1 if kind == G.LLC else lane + 1
            scheduled = LaneChangeEvent(vid, "left" if kind == G.LLC else "right",
                                        k_cross, lane, to)
        a, v, y = _longitudinal(config, n, rng)
        if config.noise_lateral > 0:
            x = x + rng.normal(0.0, config.noise_lateral, n)
        tracks.append(Track(
            vehicle_id=vid, frame=np.arange(1, n + 1, dtype=np.int64), local_x=x,
            local_y=y, speed=v, accel=a, lane_id=geom.lane_of(x),
            length=np.full(n, config.vehicle_length), v_class=np.full(n, config.vehicle_class),
            scheduled=scheduled))
    return tracks
