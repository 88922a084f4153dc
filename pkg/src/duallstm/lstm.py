"""Numeric LSTM kernel: cell, dense/softmax heads, losses, BPTT and SGD.

Everything runs in float64. Arrays may carry a leading batch axis:
inputs are ``(T, D)`` for a single sequence or ``(T, B, D)`` for a batch.
Weight matrices follow the ``out x in`` convention, so a gate
pre-activation is ``x @ w_x.T + h @ w_h.T + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

GATES = ("i", "f", "o", "c")


class ContractError(ValueError):
    """Raised when an operation is called with inputs that break its contract."""


class GradientExplosionError(FloatingPointError):
    """Non-finite value found while back-propagating; names the parameter."""

    def __init__(self, name: str):
        super().__init__(f"non-finite gradient for parameter {name!r}")
        self.name = name


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{what} contains non-finite values")


def sigmoid(z):
    # 1/(1+e^-z) via tanh: overflow-free and faster than exp on large arrays
    return 0.5 * np.tanh(0.5 * z) + 0.5


class _ParamSet:
    """Mixin giving dataclasses of arrays a flat, ordered view."""

    def named_arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                yield f.name, value
            elif isinstance(value, _ParamSet):
                for sub, arr in value.named_arrays():
                    yield f"{f.name}.{sub}", arr

    def map(self, fn):
        """Return a new instance with ``fn`` applied to every array."""
        kwargs = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                kwargs[f.name] = fn(value)
            elif isinstance(value, _ParamSet):
                kwargs[f.name] = value.map(fn)
            else:
                kwargs[f.name] = value
        return type(self)(**kwargs)

    def copy(self):
        return self.map(np.array)

    def zeros_like(self):
        return self.map(np.zeros_like)

    def num_params(self) -> int:
        return sum(a.size for _, a in self.named_arrays())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for _, a in self.named_arrays())


@dataclass
class LstmParams(_ParamSet):
    w_xi: np.ndarray
    w_xf: np.ndarray
    w_xo: np.ndarray
    w_xc: np.ndarray
    w_hi: np.ndarray
    w_hf: np.ndarray
    w_ho: np.ndarray
    w_hc: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w_xi.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_xi.shape[0]

    def validate(self) -> None:
        h, d = self.hidden_dim, self.input_dim
        for g in GATES:
            if getattr(self, f"w_x{g}").shape != (h, d):
                raise ContractError(f"w_x{g} must be {h}x{d}")
            if getattr(self, f"w_h{g}").shape != (h, h):
                raise ContractError(f"w_h{g} must be {h}x{h}")
            if getattr(self, f"b_{g}").shape != (h,):
                raise ContractError(f"b_{g} must have length {h}")
        for name, arr in self.named_arrays():
            _check_finite(arr, name)

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LstmParams":
        kw = {}
        for g in GATES:
            kw[f"w_x{g}"] = np.zeros((hidden_dim, input_dim))
            kw[f"w_h{g}"] = np.zeros((hidden_dim, hidden_dim))
            kw[f"b_{g}"] = np.zeros(hidden_dim)
        return cls(**kw)

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator,
             forget_bias: float = 1.0) -> "LstmParams":
        """Glorot-uniform weights, zero biases except ``b_f = forget_bias``."""
        p = cls.zeros(input_dim, hidden_dim)
        for g in GATES:
            for src, fan_in in (("x", input_dim), ("h", hidden_dim)):
                s = np.sqrt(6.0 / (fan_in + hidden_dim))
                setattr(p, f"w_{src}{g}", rng.uniform(-s, s, size=(hidden_dim, fan_in)))
        p.b_f[:] = forget_bias
        return p

    def stacked(self):
        """Gate-stacked ``(4H, D)``, ``(4H, H)``, ``(4H,)`` views in i, f, o, c order."""
        wx = np.concatenate([getattr(self, f"w_x{g}") for g in GATES])
        wh = np.concatenate([getattr(self, f"w_h{g}") for g in GATES])
        b = np.concatenate([getattr(self, f"b_{g}") for g in GATES])
        return wx, wh, b


@dataclass
class DenseParams(_ParamSet):
    w: np.ndarray
    b: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.w.shape[1]

    @property
    def out_dim(self) -> int:
        return self.w.shape[0]

    def validate(self) -> None:
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise ContractError("dense weight/bias shapes are inconsistent")
        _check_finite(self.w, "w")
        _check_finite(self.b, "b")

    @classmethod
    def zeros(cls, in_dim: int, out_dim: int) -> "DenseParams":
        return cls(np.zeros((out_dim, in_dim)), np.zeros(out_dim))

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator) -> "DenseParams":
        s = np.sqrt(6.0 / (in_dim + out_dim))
        return cls(rng.uniform(-s, s, size=(out_dim, in_dim)), np.zeros(out_dim))


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int, batch: int | None = None) -> "LstmState":
        shape = (hidden_dim,) if batch is None else (batch, hidden_dim)
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass
class SequenceModel(_ParamSet):
    """One LSTM layer whose final hidden state feeds a dense head."""

    lstm: LstmParams
    head: DenseParams

    def validate(self) -> None:
        self.lstm.validate()
        self.head.validate()
        if self.head.in_dim != self.lstm.hidden_dim:
            raise ContractError("head input size must equal LSTM hidden size")


# ---------------------------------------------------------------- forward

def _gates(wx, wh, b, x_t, h_prev):
    hd = wh.shape[1]
    a = x_t @ wx.T + h_prev @ wh.T + b
    i = sigmoid(a[..., :hd])
    f = sigmoid(a[..., hd:2 * hd])
    o = sigmoid(a[..., 2 * hd:3 * hd])
    g = np.tanh(a[..., 3 * hd:])
    return i, f, o, g


def lstm_step(params: LstmParams, x_t, prev: LstmState) -> LstmState:
    """Advance the cell by one time step and return the new ``(h, c)``."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape[-1] != params.input_dim:
        raise ContractError(f"x_t has size {x_t.shape[-1]}, expected {params.input_dim}")
    if prev.h.shape[-1] != params.hidden_dim or prev.c.shape != prev.h.shape:
        raise ContractError("previous state does not match hidden_dim")
    _check_finite(x_t, "x_t")
    _check_finite(prev.h, "h_prev")
    _check_finite(prev.c, "c_prev")
    i, f, o, g = _gates(*params.stacked(), x_t, prev.h)
    c = f * prev.c + i * g
    h = o * np.tanh(c)
    return LstmState(h, c)


def lstm_forward(params: LstmParams, xs, init: LstmState | None = None) -> list[LstmState]:
    """Run the cell over ``xs``; ``states[t]`` is the state after input ``t``."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim < 2 or xs.shape[0] == 0:
        raise ContractError("lstm_forward needs a non-empty sequence")
    if init is None:
        batch = xs.shape[1] if xs.ndim == 3 else None
        init = LstmState.zeros(params.hidden_dim, batch)
    states = []
    state = init
    for x_t in xs:
        state = lstm_step(params, x_t, state)
        states.append(state)
    return states


def dense_forward(params: DenseParams, h):
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != params.in_dim:
        raise ContractError(f"input has size {h.shape[-1]}, expected {params.in_dim}")
    return h @ params.w.T + params.b


def softmax(logits):
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape[-1] < 1:
        raise ContractError("softmax needs at least one logit")
    _check_finite(logits, "logits")
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(probs, target) -> float:
    """``-ln p[target]`` for a one-hot ``target``."""
    probs = np.asarray(probs, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if target.shape != probs.shape or np.count_nonzero(target) != 1 or target.sum() != 1.0:
        raise ContractError("target must be a one-hot vector matching probs")
    with np.errstate(divide="ignore"):  # an underflowed probability is an infinite loss
        return float(-np.log(probs[int(np.argmax(target))]))


def l2_loss(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ContractError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(0.5 * np.sum((pred - target) ** 2))


# ---------------------------------------------------------------- training

def _as_batch(xs):
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 2:
        return xs[:, None, :], True
    if xs.ndim != 3:
        raise ContractError("inputs must be (T, D) or (T, B, D)")
    return xs, False


def forward_final(model: SequenceModel, xs):
    """Head output on the last hidden state, without contract checks.

    ``xs`` is ``(T, B, D)``; returns ``(B, out_dim)``.
    """
    wx, wh, b = model.lstm.stacked()
    bsz = xs.shape[1]
    hd = model.lstm.hidden_dim
    h = np.zeros((bsz, hd))
    c = np.zeros((bsz, hd))
    xw = xs @ wx.T + b
    for t in range(xs.shape[0]):
        a = xw[t] + h @ wh.T
        i = sigmoid(a[:, :hd])
        f = sigmoid(a[:, hd:2 * hd])
        o = sigmoid(a[:, 2 * hd:3 * hd])
        g = np.tanh(a[:, 3 * hd:])
        c = f * c + i * g
        h = o * np.tanh(c)
    return h @ model.head.w.T + model.head.b


def bptt(model: SequenceModel, xs, target, loss: str = "l2", weights=None):
    """Loss and exact gradients of a sequence model, unrolled over all steps.

    ``loss`` is ``"ce"`` (softmax + cross-entropy, ``target`` one-hot rows)
    or ``"l2"`` (``target`` regression rows). The batch loss is the
    ``weights``-weighted mean of per-sample losses (plain mean by default).
    Returns ``(loss_value, grads)`` where ``grads`` mirrors ``model``.
    """
    xs, single = _as_batch(xs)
    target = np.asarray(target, dtype=np.float64)
    if single:
        target = target[None, :]
    T, bsz, _ = xs.shape
    if T == 0:
        raise ContractError("empty sequence")
    if xs.shape[2] != model.lstm.input_dim:
        raise ContractError("input size does not match the LSTM")
    if target.shape != (bsz, model.head.out_dim):
        raise ContractError(f"target must be ({bsz}, {model.head.out_dim})")
    w = np.ones(bsz) if weights is None else np.asarray(weights, dtype=np.float64)
    wnorm = w / w.sum()

    wx, wh, b = model.lstm.stacked()
    hd = model.lstm.hidden_dim
    hs = np.zeros((T + 1, bsz, hd))
    cs = np.zeros((T + 1, bsz, hd))
    acts = np.empty((T, bsz, 4 * hd))  # i, f, o, g post-activation
    xw = xs @ wx.T + b
    for t in range(T):
        a = xw[t] + hs[t] @ wh.T
        acts[t, :, :3 * hd] = sigmoid(a[:, :3 * hd])
        acts[t, :, 3 * hd:] = np.tanh(a[:, 3 * hd:])
        i, f = acts[t, :, :hd], acts[t, :, hd:2 * hd]
        o, g = acts[t, :, 2 * hd:3 * hd], acts[t, :, 3 * hd:]
        cs[t + 1] = f * cs[t] + i * g
        hs[t + 1] = o * np.tanh(cs[t + 1])

    out = hs[T] @ model.head.w.T + model.head.b
    if loss == "ce":
        probs = softmax(out)
        per = -np.log(np.maximum(np.sum(probs * target, axis=1), 1e-300))
        dout = (probs - target) * wnorm[:, None]
    elif loss == "l2":
        r = out - target
        per = 0.5 * np.sum(r * r, axis=1)
        dout = r * wnorm[:, None]
    else:
        raise ContractError(f"unknown loss {loss!r}")
    value = float(np.dot(wnorm, per))

    g_head = DenseParams(dout.T @ hs[T], dout.sum(axis=0))
    dh = dout @ model.head.w
    dc = np.zeros((bsz, hd))
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros_like(b)
    da = np.empty((bsz, 4 * hd))
    for t in range(T - 1, -1, -1):
        i, f = acts[t, :, :hd], acts[t, :, hd:2 * hd]
        o, g = acts[t, :, 2 * hd:3 * hd], acts[t, :, 3 * hd:]
        tc = np.tanh(cs[t + 1])
        dc = dc + dh * o * (1.0 - tc * tc)
        da[:, :hd] = dc * g * i * (1.0 - i)
        da[:, hd:2 * hd] = dc * cs[t] * f * (1.0 - f)
        da[:, 2 * hd:3 * hd] = dh * tc * o * (1.0 - o)
        da[:, 3 * hd:] = dc * i * (1.0 - g * g)
        dwx += da.T @ xs[t]
        dwh += da.T @ hs[t]
        db += da.sum(axis=0)
        dh = da @ wh
        dc = dc * f

    kw = {}
    for k, gname in enumerate(GATES):
        sl = slice(k * hd, (k + 1) * hd)
        kw[f"w_x{gname}"] = dwx[sl]
        kw[f"w_h{gname}"] = dwh[sl]
        kw[f"b_{gname}"] = db[sl]
    grads = SequenceModel(LstmParams(**kw), g_head)
    for name, arr in grads.named_arrays():
        if not np.all(np.isfinite(arr)):
            raise GradientExplosionError(name)
    return value, grads


def global_norm(grads: _ParamSet) -> float:
    return float(np.sqrt(sum(np.sum(a * a) for _, a in grads.named_arrays())))


def sgd_update(params: _ParamSet, grads: _ParamSet, lr: float, clip_norm: float = 5.0):
    """One clipped SGD step; returns new parameters and leaves inputs intact."""
    if lr < 0 or clip_norm <= 0:
        raise ContractError("lr must be >= 0 and clip_norm > 0")
    if not grads.is_finite():
        raise ContractError("gradients contain non-finite values")
    gnorm = global_norm(grads)
    scale = clip_norm / gnorm if gnorm > clip_norm else 1.0
    step = lr * scale
    pairs = dict(grads.named_arrays())
    new = params.copy()
    for name, arr in new.named_arrays():
        arr -= step * pairs[name]
    return new


def _loss_difference(zp, zm, target, loss: str, wnorm) -> float:
    """``L(zp) - L(zm)`` formed from per-output differences.

    Subtracting two full loss values loses most significant digits when the
    loss is large and the perturbation tiny; expanding the difference
    algebraically keeps it accurate to a few ulps of the outputs.
    """
    dz = zp - zm
    if loss == "l2":
        per = 0.5 * np.sum(dz * (zp + zm - 2 * target), axis=1)
    else:
        pm = softmax(zm)
        per = np.log1p(np.sum(pm * np.expm1(dz), axis=1)) - np.sum(dz * target, axis=1)
    return float(wnorm @ per)


def grad_check(model: SequenceModel, xs, target, loss: str = "l2", eps: float = 1e-5,
               weights=None) -> float:
    """Maximum relative error between BPTT and central finite differences."""
    if not 1e-7 <= eps <= 1e-3:
        raise ContractError("eps must lie in [1e-7, 1e-3]")
    if model.num_params() > 10_000:
        raise ContractError("grad_check is limited to models with at most 1e4 parameters")
    _, grads = bptt(model, xs, target, loss, weights)
    xs_b, single = _as_batch(xs)
    target = np.asarray(target, dtype=np.float64)
    if single:
        target = target[None, :]
    w = np.ones(xs_b.shape[1]) if weights is None else np.asarray(weights, dtype=np.float64)
    wnorm = w / w.sum()
    analytic = dict(grads.named_arrays())
    probe = model.copy()
    worst = 0.0
    for name, arr in probe.named_arrays():
        flat = arr.reshape(-1)
        gflat = analytic[name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            zp = forward_final(probe, xs_b)
            flat[k] = orig - eps
            zm = forward_final(probe, xs_b)
            flat[k] = orig
            numeric = _loss_difference(zp, zm, target, loss, wnorm) / (2 * eps)
            denom = max(abs(gflat[k]), abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[k] - numeric) / denom)
    return worst
