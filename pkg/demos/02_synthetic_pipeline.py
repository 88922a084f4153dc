#!/usr/bin/env python3
"""A small end-to-end run: generate tracks, train both networks, evaluate.

The configuration is deliberately small so the script finishes in under a
minute on one core. The networks are far from converged at this size, so
the numbers are rough.
"""

import numpy as np

from duallstm.dataset import SynthConfig, detect_lane_changes, slice_windows, split_train_val, synth_generate
from duallstm.geometry import LaneGeometry
from duallstm.intention import init_intention_model
from duallstm.trajectory import init_trajectory_model, predict
from duallstm.training import (HyperConfig, constant_velocity_rmse, evaluate_lead_times,
                               evaluate_rmse, intention_accuracy, train_intention, train_trajectory)

geom = LaneGeometry()

# %% Tracks and lane-change events
tracks = synth_generate(SynthConfig(n_lk=40, n_llc=15, n_rlc=15, duration_s=120.0), seed=0, geom=geom)
events = [ev for tr in tracks for ev in detect_lane_changes(tr, geom)]
print(f"{len(tracks)} tracks, {len(events)} lane changes "
      f"({sum(e.direction == 'left' for e in events)} left)")

# %% Windows, vehicle-disjoint split
samples = slice_windows(tracks, geom)
train, val = split_train_val(samples, 0.7, seed=0)
print(samples.manifest())

# %% Two-stage training
hyper = HyperConfig(epochs=4)
intent, ih = train_intention(train, val, hyper, init_intention_model(np.random.default_rng([0, 10])))
traj, th = train_trajectory(train, val, hyper, init_trajectory_model(np.random.default_rng([0, 20])))
print(ih.to_table())
print(th.to_table())

# %% Evaluation against the constant-velocity baseline
print(f"intention accuracy: {intention_accuracy(intent, val):.3f}")
print("trained model\n" + evaluate_rmse(intent, traj, val).to_table())
print("constant velocity\n" + constant_velocity_rmse(val).to_table())
val_ids = set(val.vehicle_id.tolist())
leads = evaluate_lead_times(intent, [t for t in tracks if t.vehicle_id in val_ids], geom)
print(leads.to_table())

# %% One prediction, printed as lateral and longitudinal positions
out = predict(intent, traj, val.window(len(val) // 2))
print("intention probabilities:", np.round(out.intention, 3), "target lane:", int(out.target_lane))
print("x_hat at 1..5 s:", np.round(out.x_hat[9::10], 2))
print("y_hat at 1..5 s:", np.round(out.y_hat[9::10], 1))
