"""``key=value`` text files used for geometry, hyperparameters and generator configs."""

from __future__ import annotations

from pathlib import Path


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_kv(path) -> dict[str, str]:
    path = Path(path)
    return parse_kv(path.read_text(), str(path))


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_kv(path, values: dict) -> None:
    Path(path).write_text("".join(f"{k}={format_value(v)}\n" for k, v in values.items()))
