"""Entry point: resolve models, bind the port, serve until interrupted."""

from __future__ import annotations

import argparse
import sys

from .config import SidecarConfig, SidecarConfigError
from .server import serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="framebridge-sidecar",
        description="Reference model-provider server for the framebridge wire protocol.",
    )
    parser.add_argument("--config", default=None, help="sidecar TOML config")
    parser.add_argument("--port", type=int, default=None, help="override the port")
    parser.add_argument("--host", default=None, help="override the bind address")
    args = parser.parse_args(argv)

    try:
        config = SidecarConfig.from_toml(args.config) if args.config else SidecarConfig()
        if args.port is not None or args.host is not None:
            config = SidecarConfig(
                models=dict(config.models),
                port=args.port if args.port is not None else config.port,
                host=args.host if args.host is not None else config.host,
                device=config.device,
                max_concurrent_requests=config.max_concurrent_requests,
            )
        server = serve(config)
    except SidecarConfigError as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1

    print(f"serving on http://{config.host}:{server.port}")
    for route in config.enabled_routes():
        print(f"  {route:<12} {config.models[route]}")
    try:
        import threading
        threading.Event().wait()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
