"""cal-bridge entry point: serve a model (or stub) over the wire protocol."""

from __future__ import annotations

import argparse
import sys

from .models import BridgeConfigError, load_model
from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cal-bridge",
        description="HTTP bridge exposing probe/decode/tokenize for masked-diffusion infilling")
    parser.add_argument("--model", required=True,
                        help="model spec; stub:<curve-file> serves a recorded probe curve")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8476)
    parser.add_argument("--seed", type=int, default=0,
                        help="sampler seed forwarded to the model adapter")
    args = parser.parse_args(argv)
    try:
        model = load_model(args.model, seed=args.seed)
    except BridgeConfigError as exc:
        print(f"cal-bridge: {exc}", file=sys.stderr)
        return 1
    serve(model, args.host, args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
