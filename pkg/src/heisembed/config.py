"""Run configuration: key=value text files, defaults, and a stable hash."""
from __future__ import annotations

import hashlib

__all__ = ["DEFAULTS", "load_config", "parse_config", "config_hash"]

DEFAULTS = {
    "snowflake.depth": 12,
    "snowflake.theta": 0.7,
    "laakso.planar_scale": 0.7,
    "laakso.edge_samples": 32,
    "harness.buckets": 8,
    "harness.quota": 100,
}


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def parse_config(text: str) -> dict:
    """Parse key=value lines; '#' starts a comment; unknown keys are kept."""
    out = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = _coerce(value.strip())
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return dict(DEFAULTS)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_hash(cfg: dict) -> str:
    """Order-independent short hash of the configuration."""
    canon = "\n".join(f"{k}={cfg[k]!r}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]
