"""Gate service: framed TCP transport, configuration, and the operator CLI."""

from sqlgate.gateway.config import GateConfig, load_config, parse_config
from sqlgate.gateway.server import GateClient, GateServer, recv_frame, send_frame, serve

__all__ = [
    "GateClient",
    "GateConfig",
    "GateServer",
    "load_config",
    "parse_config",
    "recv_frame",
    "send_frame",
    "serve",
]
