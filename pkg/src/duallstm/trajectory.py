"""Trajectory network (128-cell LSTM, one-shot dense head) and kinematic reconstruction."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import geometry as G
from .dataset import FeatureWindow, SampleSet
from .geometry import ACCEL_SCALE, DT, HORIZON, LaneGeometry
from .intention import classify
from .lstm import ContractError, DenseParams, LstmParams, SequenceModel, forward_final

log = logging.getLogger(__name__)

HIDDEN = 128
OUT_DIM = 2 * HORIZON


def init_trajectory_model(rng: np.random.Generator, hidden: int = HIDDEN,
                          input_dim: int = len(G.FEATURE_NAMES), horizon: int = HORIZON,
                          forget_bias: float = 1.0) -> SequenceModel:
    return SequenceModel(LstmParams.init(input_dim, hidden, rng, forget_bias),
                         DenseParams.init(hidden, 2 * horizon, rng))


def split_targets(out, horizon: int = HORIZON):
    """Network output rows -> (acceleration in m/s^2, lateral deviation in m)."""
    out = np.asarray(out)
    return out[..., :horizon] * ACCEL_SCALE, out[..., horizon:]


def join_targets(accel, x_dev):
    """Inverse of :func:`split_targets`: the regression target the head is trained on."""
    return np.concatenate([np.asarray(accel) / ACCEL_SCALE, np.asarray(x_dev)], axis=-1)


def predict_raw(model: SequenceModel, features, chunk: int = 2000):
    """Future accelerations (m/s^2) and lateral deviations (m) for one or many windows."""
    xs = np.asarray(features, dtype=np.float64)
    single = xs.ndim == 2
    if single:
        xs = xs[None]
    if xs.shape[-1] != model.lstm.input_dim:
        raise ContractError(f"features have {xs.shape[-1]} columns, expected {model.lstm.input_dim}")
    if model.head.out_dim % 2:
        raise ContractError("trajectory head must have an even number of outputs")
    out = np.empty((len(xs), model.head.out_dim))
    for s in range(0, len(xs), chunk):
        out[s:s + chunk] = forward_final(model, np.swapaxes(xs[s:s + chunk], 0, 1))
    a_hat, x_dev_hat = split_targets(out, model.head.out_dim // 2)
    if single:
        return a_hat[0], x_dev_hat[0]
    return a_hat, x_dev_hat


def integrate_longitudinal(v0, y0, a_hat, dt: float = DT):
    """Forward-Euler speed and position over the horizon.

    ``v(t) = v(t-1) + a(t) dt`` then ``y(t) = y(t-1) + v(t) dt``. Works on a
    single horizon or a stack with leading batch axes.
    """
    a_hat = np.asarray(a_hat, dtype=np.float64)
    v0 = np.asarray(v0, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    if not dt > 0:
        raise ContractError("dt must be positive")
    if not (np.all(np.isfinite(a_hat)) and np.all(np.isfinite(v0)) and np.all(np.isfinite(y0))):
        raise ContractError("non-finite input to integration")
    v = np.empty_like(a_hat)
    y = np.empty_like(a_hat)
    vp, yp = v0, y0
    for t in range(a_hat.shape[-1]):
        vp = vp + a_hat[..., t] * dt
        yp = yp + vp * dt
        v[..., t] = vp
        y[..., t] = yp
    return v, y


def reconstruct_lateral(x_dev_hat, target_lane, geom: LaneGeometry):
    x_dev_hat = np.asarray(x_dev_hat, dtype=np.float64)
    center = geom.centerline(target_lane)
    return x_dev_hat + np.asarray(center)[..., None] if np.ndim(center) else x_dev_hat + center


def clamp_lateral(x_dev_hat, lane_width: float):
    """Clip deviations to one lane width; returns (clipped, number of clipped values)."""
    clipped = np.clip(x_dev_hat, -lane_width, lane_width)
    return clipped, int(np.count_nonzero(clipped != x_dev_hat))


@dataclass
class PredictionOutput:
    a_hat: np.ndarray
    x_dev_hat: np.ndarray
    v_hat: np.ndarray
    y_hat: np.ndarray
    x_hat: np.ndarray
    intention: np.ndarray
    target_lane: np.ndarray
    clamped: int = 0
    negative_speed: int = 0


def predict_batch(intent_model: SequenceModel, traj_model: SequenceModel, samples: SampleSet,
                  intentions=None) -> PredictionOutput:
    """Full pipeline over a sample set; arrays carry a leading sample axis.

    The intention is recognised from features relative to the current lane,
    the target lane follows from its argmax (ties go to LK), x_dev is
    recomputed against that lane, and the trajectory head output is
    integrated. Pass ``intentions`` to override the recognised probabilities.
    """
    geom = samples.geom
    probs = classify(intent_model, samples.features) if intentions is None else np.asarray(intentions)
    lanes = G.target_lanes(samples.current_lane, np.argmax(probs, axis=1), geom)
    feats = samples.target_features(lanes)
    a_hat, x_dev_hat = predict_raw(traj_model, feats)
    x_dev_hat, clamped = clamp_lateral(x_dev_hat, geom.lane_width)
    if clamped:
        log.info("clamped %d lateral deviations to +-%.2f m", clamped, geom.lane_width)
    v_hat, y_hat = integrate_longitudinal(samples.v0, samples.y0, a_hat)
    negative = int(np.count_nonzero(v_hat < 0))
    x_hat = x_dev_hat + geom.centerline(lanes)[:, None]
    return PredictionOutput(a_hat, x_dev_hat, v_hat, y_hat, x_hat, probs, lanes, clamped, negative)


def predict(intent_model: SequenceModel, traj_model: SequenceModel, window: FeatureWindow,
            geom: LaneGeometry | None = None) -> PredictionOutput:
    """Single-window pipeline; ``window.features`` x_dev must be relative to the current lane."""
    geom = geom or window.geom
    probs = classify(intent_model, window.features)
    lane = G.target_lane(window.current_lane, int(np.argmax(probs)), geom)
    feats = G.retarget(window.features, window.lateral, geom.centerline(lane))
    a_hat, x_dev_hat = predict_raw(traj_model, feats)
    x_dev_hat, clamped = clamp_lateral(x_dev_hat, geom.lane_width)
    v_hat, y_hat = integrate_longitudinal(window.v0, window.y0, a_hat)
    x_hat = reconstruct_lateral(x_dev_hat, lane, geom)
    return PredictionOutput(a_hat, x_dev_hat, v_hat, y_hat, x_hat, probs, np.asarray(lane),
                            clamped, int(np.count_nonzero(v_hat < 0)))


def format_prediction(vehicle_id: int, frame: int, out: PredictionOutput, i: int | None = None,
                      dt: float = DT) -> str:
    """One text record: a header line then ``t,x_hat,y_hat,v_hat,a_hat,x_dev_hat`` rows."""
    sel = (lambda a: a[i]) if i is not None else (lambda a: a)
    p = sel(out.intention)
    lines = [f"RECORD vehicle_id={vehicle_id} anchor_frame={frame} "
             f"p_LK={p[0]:.17g} p_LLC={p[1]:.17g} p_RLC={p[2]:.17g} "
             f"target_lane={int(sel(out.target_lane))}"]
    cols = [sel(out.x_hat), sel(out.y_hat), sel(out.v_hat), sel(out.a_hat), sel(out.x_dev_hat)]
    for t in range(len(cols[0])):
        vals = ",".join(f"{c[t]:.17g}" for c in cols)
        lines.append(f"{(t + 1) * dt:.1f},{vals}")
    return "\n".join(lines) + "\n"
