"""Intention network: a 64-cell LSTM with a softmax head over {LK, LLC, RLC}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as G
from .dataset import (LABEL_FRAMES, LaneChangeEvent, Track, detect_lane_changes,
                      label_anchors, window_arrays)
from .geometry import LaneGeometry
from .lstm import ContractError, DenseParams, LstmParams, SequenceModel, forward_final, softmax

HIDDEN = 64
N_CLASSES = 3
SCAN_FRAMES = 80


@dataclass(frozen=True)
class IntentionLabel:
    cls: int

    @property
    def one_hot(self) -> np.ndarray:
        v = np.zeros(N_CLASSES)
        v[self.cls] = 1.0
        return v

    @property
    def name(self) -> str:
        return G.INTENTIONS[self.cls]


def init_intention_model(rng: np.random.Generator, hidden: int = HIDDEN,
                         input_dim: int = len(G.FEATURE_NAMES), forget_bias: float = 1.0) -> SequenceModel:
    return SequenceModel(LstmParams.init(input_dim, hidden, rng, forget_bias),
                         DenseParams.init(hidden, N_CLASSES, rng))


def _batched(xs):
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 2:
        return xs[None], True
    return xs, False


def classify(model: SequenceModel, features, chunk: int = 2000) -> np.ndarray:
    """Class probabilities from the final hidden state.

    ``features`` is one ``(50, 8)`` window or a stack ``(N, 50, 8)``; x_dev
    must be relative to the current lane.
    """
    xs, single = _batched(features)
    if xs.shape[-1] != model.lstm.input_dim:
        raise ContractError(f"features have {xs.shape[-1]} columns, expected {model.lstm.input_dim}")
    if model.head.out_dim != N_CLASSES:
        raise ContractError("intention head must have 3 outputs")
    out = np.empty((len(xs), N_CLASSES))
    for s in range(0, len(xs), chunk):
        logits = forward_final(model, np.swapaxes(xs[s:s + chunk], 0, 1))
        out[s:s + chunk] = softmax(logits)
    return out[0] if single else out


def label_intention(track: Track, geom: LaneGeometry, anchor: int,
                    events: list[LaneChangeEvent] | None = None) -> IntentionLabel:
    if events is None:
        events = detect_lane_changes(track, geom)
    return IntentionLabel(int(label_anchors([anchor], events)[0]))


def recognition_lead_time(model, track: Track, geom: LaneGeometry, event: LaneChangeEvent,
                          scan_frames: int = SCAN_FRAMES) -> float | None:
    """Seconds between sustained recognition and the crossing; ``None`` if missed.

    Every frame from ``scan_frames`` before the crossing up to the last frame
    before it is classified. Recognition must hold (probability of the
    event's class above 0.5) continuously until the crossing. ``model`` is a
    trained network or any callable mapping ``(track, anchors)`` to
    probabilities.
    """
    first = max(G.WINDOW - 1, event.t_cross - scan_frames)
    anchors = np.arange(first, event.t_cross)
    if len(anchors) == 0:
        return None
    if callable(model):
        probs = np.asarray(model(track, anchors))
    else:
        arr = window_arrays(track, geom, anchors, np.full(len(anchors), G.LK))
        probs = classify(model, arr["features"])
    ok = probs[:, event.intention] > 0.5
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    start = bad[-1] + 1 if len(bad) else 0
    return float((event.t_cross - anchors[start]) * G.DT)


def oracle_classifier(geom: LaneGeometry):
    """Probabilities equal to the ground-truth labels (for harness checks)."""
    def probs(track, anchors):
        labels = label_anchors(anchors, detect_lane_changes(track, geom))
        return np.eye(N_CLASSES)[labels]
    return probs


def constant_classifier(cls: int = G.LK):
    def probs(track, anchors):
        return np.tile(np.eye(N_CLASSES)[cls], (len(anchors), 1))
    return probs


LABEL_INTERVAL_S = LABEL_FRAMES * G.DT
