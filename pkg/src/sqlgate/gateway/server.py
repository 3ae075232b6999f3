"""Framed TCP gate: u32 big-endian length prefix, UTF-8 payloads.

TRAIN mode appends each frame to the training log and replies OK.
ENFORCE mode replies the verdict line.  Malformed frames get an ERR
reply without killing the connection; an oversize frame gets `ERR
oversize` and then the connection closes.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import struct
import threading

from sqlgate.enforcer import EnforceConfig, decide
from sqlgate.errors import ConfigError, SqlGateError
from sqlgate.gateway.config import GateConfig
from sqlgate.phpdal.analyzer import DalSet, load_dal
from sqlgate.profiler import Profile, append_record, load_profile, record_training

log = logging.getLogger(__name__)

_HEADER = struct.Struct(">I")

_VERDICT_CACHE_MAX = 65536


def send_frame(sock: socket.socket, payload: bytes) -> None:
    sock.sendall(_HEADER.pack(len(payload)) + payload)


def recv_frame(sock: socket.socket, max_frame: int) -> bytes | None:
    """Return the payload, None at EOF; raises OversizeFrame for big headers."""
    header = _recv_exact(sock, _HEADER.size)
    if header is None:
        return None
    (length,) = _HEADER.unpack(header)
    if length > max_frame:
        raise OversizeFrame(length)
    payload = _recv_exact(sock, length)
    if payload is None:
        return None
    return payload


class OversizeFrame(Exception):
    def __init__(self, length: int):
        super().__init__(f"frame of {length} bytes exceeds the limit")
        self.length = length


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    chunks = []
    remaining = n
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


class GateServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: GateConfig):
        self.config = config
        self.dal = load_dal(config.dal_path) if config.dal_path else DalSet(frozenset(), frozenset(), frozenset())
        self.profile: Profile | None = None
        if config.mode == "ENFORCE":
            self.profile = load_profile(config.profile_path)
        self.enforce_config = EnforceConfig(
            untagged=config.untagged_policy, parsefail=config.parsefail_policy
        )
        self._log_lock = threading.Lock()
        self._cache: dict[str, bytes] = {}
        self._cache_lock = threading.Lock()
        try:
            super().__init__((config.host, config.port), _GateHandler)
        except OSError as exc:
            raise ConfigError(f"cannot bind {config.listen_addr}: {exc}") from exc

    @property
    def bound_addr(self) -> tuple[str, int]:
        return self.socket.getsockname()[:2]

    # -- request handling ---------------------------------------------

    def handle_payload(self, text: str) -> bytes:
        if not text.strip():
            return b"ERR empty"
        if self.config.mode == "TRAIN":
            return self._train(text)
        return self._enforce(text)

    def _train(self, text: str) -> bytes:
        try:
            rec = record_training(text)
        except SqlGateError as exc:
            return f"ERR {type(exc).__name__}".encode()
        with self._log_lock:
            append_record(self.config.training_log_path, rec)
        return b"OK"

    def _enforce(self, text: str) -> bytes:
        # verdicts are deterministic over an immutable profile, so repeat
        # queries are answered from a bounded cache
        with self._cache_lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached
        verdict = decide(text, self.profile, self.dal, self.enforce_config)
        reply = verdict.line().encode()
        with self._cache_lock:
            if len(self._cache) >= _VERDICT_CACHE_MAX:
                self._cache.clear()
            self._cache[text] = reply
        return reply


class _GateHandler(socketserver.BaseRequestHandler):
    server: GateServer

    def handle(self) -> None:
        sock = self.request
        max_frame = self.server.config.max_frame
        while True:
            try:
                payload = recv_frame(sock, max_frame)
            except OversizeFrame:
                try:
                    send_frame(sock, b"ERR oversize")
                except OSError:
                    pass
                return
            except OSError:
                return
            if payload is None:
                return
            try:
                text = payload.decode()
            except UnicodeDecodeError:
                send_frame(sock, b"ERR encoding")
                continue
            try:
                reply = self.server.handle_payload(text)
            except Exception:  # a bad request must never kill the connection
                log.exception("request failed")
                reply = b"ERR internal"
            try:
                send_frame(sock, reply)
            except OSError:
                return


def serve(config: GateConfig) -> None:
    """Run the gate until interrupted."""
    server = GateServer(config)
    log.info("gate listening on %s:%s in %s mode", *server.bound_addr, config.mode)
    try:
        server.serve_forever()
    finally:
        server.server_close()


class GateClient:
    """Small framed-protocol client, used by tests and the replay tool."""

    def __init__(self, host: str, port: int, max_frame: int = 1 << 20):
        self.sock = socket.create_connection((host, port))
        self.max_frame = max_frame

    def request(self, text: str) -> str:
        send_frame(self.sock, text.encode())
        reply = recv_frame(self.sock, self.max_frame)
        if reply is None:
            raise ConnectionError("gate closed the connection")
        return reply.decode()

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
