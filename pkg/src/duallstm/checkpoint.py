"""Line-oriented text checkpoints.

::

    DUALLSTM v1
    TENSOR intent.lstm.w_xi 64 8
    <row-major values, one matrix row per line, 17 significant digits>
    ...
    HYPER
    key=value

Vectors are stored as ``n x 1`` tensors.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import format_value
from .lstm import DenseParams, LstmParams, SequenceModel

HEADER = "DUALLSTM v1"


class CheckpointError(ValueError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def dumps(tensors: dict[str, np.ndarray], hyper: dict) -> str:
    lines = [HEADER]
    for name, arr in tensors.items():
        mat = np.atleast_2d(arr.reshape(arr.shape[0], -1)) if arr.ndim else arr.reshape(1, 1)
        lines.append(f"TENSOR {name} {mat.shape[0]} {mat.shape[1]}")
        for row in mat:
            lines.append(" ".join(_fmt(v) for v in row))
    lines.append("HYPER")
    for k, v in hyper.items():
        lines.append(f"{k}={format_value(v)}")
    return "\n".join(lines) + "\n"


def loads(text: str, source: str = "<checkpoint>"):
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        got = lines[0].strip() if lines else "<empty>"
        raise CheckpointError(f"{source}: unsupported checkpoint header {got!r}, expected {HEADER!r}")
    tensors: dict[str, np.ndarray] = {}
    hyper: dict[str, str] = {}
    k = 1
    while k < len(lines):
        line = lines[k].strip()
        if line.startswith("TENSOR "):
            try:
                _, name, rows, cols = line.split()
                rows, cols = int(rows), int(cols)
                block = lines[k + 1:k + 1 + rows]
                mat = np.array([[float(v) for v in r.split()] for r in block]).reshape(rows, cols)
            except ValueError as exc:
                raise CheckpointError(f"{source}:{k + 1}: bad tensor block ({exc})") from exc
            tensors[name] = mat
            k += 1 + rows
        elif line == "HYPER":
            for h in lines[k + 1:]:
                if h.strip():
                    key, _, value = h.partition("=")
                    hyper[key.strip()] = value.strip()
            break
        elif line:
            raise CheckpointError(f"{source}:{k + 1}: unexpected line {line!r}")
        else:
            k += 1
    return tensors, hyper


def model_tensors(model: SequenceModel, prefix: str) -> dict[str, np.ndarray]:
    return {f"{prefix}.{name}": arr for name, arr in model.named_arrays()}


def model_from_tensors(tensors: dict[str, np.ndarray], prefix: str) -> SequenceModel:
    try:
        lstm = {}
        for name in LstmParams.__dataclass_fields__:
            arr = tensors[f"{prefix}.lstm.{name}"]
            lstm[name] = arr.ravel() if name.startswith("b_") else arr
        head = DenseParams(tensors[f"{prefix}.head.w"], tensors[f"{prefix}.head.b"].ravel())
    except KeyError as exc:
        raise CheckpointError(f"missing tensor {exc.args[0]}") from exc
    model = SequenceModel(LstmParams(**lstm), head)
    model.validate()
    return model


def save(path, models: dict[str, SequenceModel], hyper: dict) -> None:
    tensors = {}
    for prefix, model in models.items():
        tensors.update(model_tensors(model, prefix))
    Path(path).write_text(dumps(tensors, hyper))


def load(path, prefixes=("intent", "traj")):
    tensors, hyper = loads(Path(path).read_text(), str(path))
    return {p: model_from_tensors(tensors, p) for p in prefixes}, hyper
