"""HTTP bridge for masked-diffusion probe/decode/tokenize serving."""

from .models import BridgeConfigError, BridgeError, BridgeRequestError, StubModel, load_model
from .server import make_server, serve

__all__ = [
    "BridgeConfigError",
    "BridgeError",
    "BridgeRequestError",
    "StubModel",
    "load_model",
    "make_server",
    "serve",
]
