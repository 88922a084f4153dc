#!/usr/bin/env python3
"""Walk through the LSTM kernel: one cell step, a sequence, BPTT and a gradient check."""

import numpy as np

from duallstm.lstm import (DenseParams, LstmParams, LstmState, SequenceModel, bptt, grad_check,
                           lstm_forward, lstm_step, sgd_update, softmax)

rng = np.random.default_rng(0)

# %% One step of a 2-input, 3-cell layer from a zero state
params = LstmParams.init(2, 3, rng)
state = lstm_step(params, np.array([0.5, -1.0]), LstmState.zeros(3))
print("h after one step:", np.round(state.h, 4))
print("c after one step:", np.round(state.c, 4))

# %% A 50-step sequence; the hidden state stays inside (-1, 1)
xs = rng.normal(size=(50, 2))
states = lstm_forward(params, xs)
hs = np.array([s.h for s in states])
print("hidden range over 50 steps:", hs.min().round(3), hs.max().round(3))

# %% Softmax on a classification head, including extreme logits
print("softmax([1000, -1000, 0]) =", softmax(np.array([1000.0, -1000.0, 0.0])))

# %% BPTT against central differences on a small model with a 3-way head
model = SequenceModel(LstmParams.init(2, 3, rng), DenseParams.init(3, 3, rng))
target = np.eye(3)[1]
print("max relative gradient error (CE):", f"{grad_check(model, xs[:6], target, 'ce'):.2e}")

# %% A few SGD steps on one sequence drive the cross-entropy down
for step in range(5):
    loss, grads = bptt(model, xs[:6], target, "ce")
    print(f"step {step}: loss {loss:.4f}")
    model = sgd_update(model, grads, lr=0.5, clip_norm=5.0)
