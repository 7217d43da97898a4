"""Service configuration from an optional JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidArgumentError

ENV_PREFIX = "NLPSCOPE_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8137
    resolution_cap: int = 512   # max rows/cols per sampled grid
    cache_size: int = 64        # memoized responses per session
    ui_dir: Optional[str] = None

    @property
    def listen(self) -> str:
        return f"{self.host}:{self.port}"


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise InvalidArgumentError(f"listen address must be host:port, got {value!r}")
    return host, int(port)


def load_config(path: Optional[str] = None, env=None) -> ServiceConfig:
    """File values (if any) are overridden by NLPSCOPE_* environment variables."""
    env = os.environ if env is None else env
    cfg = ServiceConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for key in ("host", "port", "resolution_cap", "cache_size", "ui_dir"):
            if key in doc:
                setattr(cfg, key, doc[key])
        if "listen" in doc:
            cfg.host, cfg.port = _parse_listen(doc["listen"])
    if ENV_PREFIX + "LISTEN" in env:
        cfg.host, cfg.port = _parse_listen(env[ENV_PREFIX + "LISTEN"])
    if ENV_PREFIX + "RESOLUTION_CAP" in env:
        cfg.resolution_cap = int(env[ENV_PREFIX + "RESOLUTION_CAP"])
    if ENV_PREFIX + "CACHE_SIZE" in env:
        cfg.cache_size = int(env[ENV_PREFIX + "CACHE_SIZE"])
    if ENV_PREFIX + "UI_DIR" in env:
        cfg.ui_dir = env[ENV_PREFIX + "UI_DIR"]
    if cfg.resolution_cap < 2 or cfg.cache_size < 0:
        raise InvalidArgumentError("resolution_cap must be >= 2 and cache_size >= 0")
    return cfg
