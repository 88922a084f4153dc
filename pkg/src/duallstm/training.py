"""Two-stage SGD training and the evaluation metrics (RMSE per horizon, lead times)."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import geometry as G
from .config import read_kv, write_kv
from .dataset import SampleSet, Track, detect_lane_changes
from .geometry import LaneGeometry
from .intention import classify, init_intention_model, recognition_lead_time
from .lstm import GradientExplosionError, SequenceModel, bptt, forward_final, sgd_update
from .trajectory import init_trajectory_model, join_targets, predict_batch

log = logging.getLogger(__name__)

HORIZON_STEPS = (10, 20, 30, 40, 50)


@dataclass
class HyperConfig:
    batch_size: int = 100
    epochs: int = 5
    lr_init: float = 1.0
    lr_decay_factor: float = 0.5
    patience: int = 1
    clip_norm: float = 5.0
    seed: int = 0
    class_reweight_cap: float = 10.0
    forget_bias: float = 1.0

    def validate(self) -> None:
        if self.batch_size < 1 or self.epochs < 0 or self.patience < 1:
            raise ValueError("batch_size and patience must be >= 1, epochs >= 0")
        if self.lr_init < 0 or not 0 < self.lr_decay_factor <= 1:
            raise ValueError("need lr_init >= 0 and lr_decay_factor in (0, 1]")
        if self.clip_norm <= 0 or self.class_reweight_cap < 1:
            raise ValueError("need clip_norm > 0 and class_reweight_cap >= 1")

    @classmethod
    def from_file(cls, path) -> "HyperConfig":
        kv = read_kv(path)
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, v in kv.items():
            if k not in types:
                raise ValueError(f"{path}: unknown hyperparameter {k!r}")
            kw[k] = int(v) if types[k] == "int" else float(v)
        hyper = cls(**kw)
        hyper.validate()
        return hyper

    def to_file(self, path) -> None:
        write_kv(path, asdict(self))


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    diverged: bool = False

    def __len__(self):
        return len(self.train_loss)

    def to_table(self) -> str:
        """Delimiter-separated table; wall time is left out so reruns compare equal."""
        rows = ["epoch,train_loss,val_loss,lr"]
        for e, (tr, va, lr) in enumerate(zip(self.train_loss, self.val_loss, self.lr), 1):
            rows.append(f"{e},{tr:.17g},{va:.17g},{lr:.17g}")
        return "\n".join(rows) + "\n"


def class_weights(labels, cap: float) -> np.ndarray:
    """Per-sample weights: inverse class frequency within the batch, capped."""
    counts = np.bincount(labels, minlength=3).astype(np.float64)
    present = counts > 0
    w = np.zeros(3)
    w[present] = np.minimum(counts[present].max() / counts[present], cap)
    return w[labels]


def _sgd_loop(model, n: int, batch_fn, val_loss_fn, loss: str, hyper: HyperConfig, stage: str):
    """Shared epoch loop; ``batch_fn(idx)`` returns ``(xs, targets, weights)``."""
    hyper.validate()
    rng = np.random.default_rng([hyper.seed, 1 if stage == "intent" else 2])
    hist = TrainHistory()
    best = model.copy()
    best_val = val_loss_fn(model)
    lr = hyper.lr_init
    stale = 0
    for epoch in range(hyper.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, hyper.batch_size):
            idx = np.sort(order[s:s + hyper.batch_size])
            xs, ys, w = batch_fn(idx)
            try:
                value, grads = bptt(model, np.swapaxes(xs, 0, 1), ys, loss, w)
            except GradientExplosionError as exc:
                log.error("%s: %s in epoch %d, keeping best checkpoint", stage, exc, epoch + 1)
                hist.diverged = True
                return best, hist
            if not np.isfinite(value):
                log.error("%s: non-finite loss in epoch %d, keeping best checkpoint", stage, epoch + 1)
                hist.diverged = True
                return best, hist
            if lr > 0:
                model = sgd_update(model, grads, lr, hyper.clip_norm)
            total += value * len(idx)
        val = val_loss_fn(model)
        hist.train_loss.append(total / max(n, 1))
        hist.val_loss.append(val)
        hist.lr.append(lr)
        hist.wall_time.append(time.perf_counter() - t0)
        log.info("%s epoch %d: train %.5f val %.5f lr %.4g", stage, epoch + 1,
                 hist.train_loss[-1], val, lr)
        if not np.isfinite(val):
            hist.diverged = True
            return best, hist
        if val < best_val:
            best_val, best, stale = val, model.copy(), 0
        else:
            stale += 1
            if stale >= hyper.patience:
                lr *= hyper.lr_decay_factor
                stale = 0
    return best, hist


def intention_val_loss(model: SequenceModel, samples: SampleSet) -> float:
    if len(samples) == 0:
        return float("nan")
    probs = classify(model, samples.features)
    return float(np.mean(-np.log(np.maximum(probs[np.arange(len(samples)), samples.label], 1e-300))))


def trajectory_targets(samples: SampleSet, idx=None) -> np.ndarray:
    sub = samples if idx is None else samples.subset(idx)
    return join_targets(sub.future_accel, sub.future_x_dev())


def trajectory_val_loss(model: SequenceModel, samples: SampleSet, chunk: int = 2000) -> float:
    if len(samples) == 0:
        return float("nan")
    feats = samples.target_features()
    targets = trajectory_targets(samples)
    total = 0.0
    for s in range(0, len(samples), chunk):
        out = forward_final(model, np.swapaxes(feats[s:s + chunk], 0, 1))
        total += 0.5 * np.sum((out - targets[s:s + chunk]) ** 2)
    return float(total / len(samples))


def train_intention(train: SampleSet, val: SampleSet, hyper: HyperConfig,
                    model: SequenceModel | None = None):
    """Class-reweighted cross-entropy SGD; returns the best-validation model and history."""
    if model is None:
        model = init_intention_model(np.random.default_rng([hyper.seed, 10]),
                                     forget_bias=hyper.forget_bias)
    onehot = np.eye(3)

    def batch(idx):
        labels = train.label[idx]
        return train.features[idx], onehot[labels], class_weights(labels, hyper.class_reweight_cap)

    return _sgd_loop(model, len(train), batch, lambda m: intention_val_loss(m, val),
                     "ce", hyper, "intent")


def train_trajectory(train: SampleSet, val: SampleSet, hyper: HyperConfig,
                     model: SequenceModel | None = None):
    """L2 SGD on acceleration (scaled) and lateral deviation targets.

    x_dev inputs and targets use the ground-truth target lane.
    """
    if model is None:
        model = init_trajectory_model(np.random.default_rng([hyper.seed, 20]),
                                      forget_bias=hyper.forget_bias)
    feats = train.target_features()
    targets = trajectory_targets(train)
    return _sgd_loop(model, len(train), lambda idx: (feats[idx], targets[idx], None),
                     lambda m: trajectory_val_loss(m, val), "l2", hyper, "traj")


# ---------------------------------------------------------------- evaluation

@dataclass
class RmseTable:
    horizons_s: tuple
    longitudinal: np.ndarray
    lateral: np.ndarray
    sample_count: int

    def to_table(self) -> str:
        rows = ["horizon_s,longitudinal_rmse_m,lateral_rmse_m,samples"]
        for h, lon, lat in zip(self.horizons_s, self.longitudinal, self.lateral):
            rows.append(f"{h:g},{lon:.17g},{lat:.17g},{self.sample_count}")
        return "\n".join(rows) + "\n"


def rmse_from_predictions(y_hat, x_hat, y_true, x_true, steps=HORIZON_STEPS) -> RmseTable:
    cols = np.asarray(steps) - 1
    lon = np.sqrt(np.mean((y_hat[:, cols] - y_true[:, cols]) ** 2, axis=0))
    lat = np.sqrt(np.mean((x_hat[:, cols] - x_true[:, cols]) ** 2, axis=0))
    return RmseTable(tuple(s * G.DT for s in steps), lon, lat, len(y_hat))


def evaluate_rmse(intent_model: SequenceModel, traj_model: SequenceModel,
                  samples: SampleSet) -> RmseTable:
    """Position RMSE at 1..5 s using recognised (not labelled) intentions."""
    if len(samples) == 0:
        raise ValueError("no samples to evaluate")
    out = predict_batch(intent_model, traj_model, samples)
    return rmse_from_predictions(out.y_hat, out.x_hat, samples.future_y, samples.future_x)


def intention_accuracy(model: SequenceModel, samples: SampleSet) -> float:
    probs = classify(model, samples.features)
    return float(np.mean(np.argmax(probs, axis=1) == samples.label))


@dataclass
class LeadTimeSummary:
    """Recognition lead times per direction; ``None`` entries are misses."""

    events: list = field(default_factory=list)   # (vehicle_id, direction, t_cross frame, lead or None)

    def lead_times(self, direction: str | None = None) -> np.ndarray:
        return np.array([e[3] for e in self.events
                         if e[3] is not None and (direction is None or e[1] == direction)])

    def missed(self, direction: str | None = None) -> int:
        return sum(1 for e in self.events
                   if e[3] is None and (direction is None or e[1] == direction))

    def recognized_fraction(self) -> float:
        if not self.events:
            return float("nan")
        return 1.0 - self.missed() / len(self.events)

    def histogram(self, direction: str, bin_s: float = 0.5, max_s: float = 8.0):
        edges = np.arange(0.0, max_s + bin_s / 2, bin_s)
        counts, _ = np.histogram(self.lead_times(direction), bins=edges)
        return edges, counts

    def to_table(self) -> str:
        rows = ["vehicle_id,direction,t_cross_frame,lead_time_s"]
        for vid, direction, frame, lead in self.events:
            rows.append(f"{vid},{direction},{frame},{'missed' if lead is None else f'{lead:.1f}'}")
        return "\n".join(rows) + "\n"

    def histogram_table(self) -> str:
        rows = ["direction,bin_start_s,bin_end_s,count"]
        for direction in ("left", "right"):
            edges, counts = self.histogram(direction)
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                rows.append(f"{direction},{lo:.1f},{hi:.1f},{c}")
            rows.append(f"{direction},missed,missed,{self.missed(direction)}")
        return "\n".join(rows) + "\n"


def evaluate_lead_times(intent_model, tracks: list[Track], geom: LaneGeometry) -> LeadTimeSummary:
    summary = LeadTimeSummary()
    for tr in tracks:
        for ev in detect_lane_changes(tr, geom):
            lead = recognition_lead_time(intent_model, tr, geom, ev)
            summary.events.append((tr.vehicle_id, ev.direction, int(tr.frame[ev.t_cross]), lead))
    if not summary.events:
        log.warning("no lane-change events found; lead-time distribution is empty")
    return summary


def constant_velocity_rmse(samples: SampleSet) -> RmseTable:
    """Baseline that holds the anchor speed and lateral position."""
    t = np.arange(1, G.HORIZON + 1) * G.DT
    y_hat = samples.y0[:, None] + samples.v0[:, None] * t
    x_hat = np.repeat(samples.x0[:, None], G.HORIZON, axis=1)
    return rmse_from_predictions(y_hat, x_hat, samples.future_y, samples.future_x)
