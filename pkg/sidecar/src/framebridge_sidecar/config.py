"""Sidecar configuration: one model identifier per route, device, port, limits.

A route is enabled by giving it a model identifier and disabled by omitting it
(or setting it to "disabled"). Identifiers use a scheme prefix:

    builtin:<name>   deterministic reference backends shipped in this package
    openai:<model>   chat-completions API for the enhance route (needs
                     OPENAI_API_KEY; optionally OPENAI_BASE_URL)

Unresolvable identifiers fail when the server starts, never at request time.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

ROUTE_NAMES = ("enhance", "detect", "keyframe", "interpolate", "embed", "score")

DEFAULT_MODELS = {
    "enhance": "builtin:keyword-enhancer",
    "detect": "builtin:color-detector",
    "keyframe": "builtin:dither-keyframe",
    "interpolate": "builtin:crossfade",
    "embed": "builtin:grid-embed",
    "score": "builtin:laplacian-sharpness",
}


class SidecarConfigError(Exception):
    """Invalid configuration or an unresolvable model identifier at startup."""


@dataclass(frozen=True)
class SidecarConfig:
    models: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MODELS))
    port: int = 8800
    host: str = "127.0.0.1"
    device: str = "cpu"
    max_concurrent_requests: int = 8

    def __post_init__(self):
        if self.port < 0 or self.port > 65535:
            raise SidecarConfigError(f"port {self.port} outside 0..65535")
        if self.max_concurrent_requests < 1:
            raise SidecarConfigError("max_concurrent_requests must be >= 1")
        models = {}
        for route, identifier in self.models.items():
            if route not in ROUTE_NAMES:
                raise SidecarConfigError(
                    f"unknown route {route!r}; expected one of {ROUTE_NAMES}"
                )
            if identifier and identifier != "disabled":
                if ":" not in identifier:
                    raise SidecarConfigError(
                        f"route {route!r}: identifier {identifier!r} has no scheme "
                        "(use builtin:<name> or openai:<model>)"
                    )
                models[route] = identifier
        object.__setattr__(self, "models", models)

    def enabled_routes(self) -> tuple[str, ...]:
        return tuple(r for r in ROUTE_NAMES if r in self.models)

    @classmethod
    def from_toml(cls, path) -> "SidecarConfig":
        raw = _toml.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            models=raw.get("models", dict(DEFAULT_MODELS)),
            port=int(raw.get("port", 8800)),
            host=str(raw.get("host", "127.0.0.1")),
            device=str(raw.get("device", "cpu")),
            max_concurrent_requests=int(raw.get("max_concurrent_requests", 8)),
        )
