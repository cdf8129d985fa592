"""Wire service: WebSocket endpoint for the control panel plus static files.

One listening socket. Requests that upgrade to WebSocket join the message
fan-out; plain GETs are served from the configured static directory so the
control panel can be loaded from the same origin it connects to. The
WebSocket framing below is the server side of RFC 6455 (and the small
masked-client side in WireClient, used by tests and the replay CLI).
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import socket
import struct
import threading
import time
from pathlib import Path

from . import wire
from .errors import BindError, WireSchemaError

logger = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_OP_CONT = 0x0
_OP_TEXT = 0x1
_OP_BINARY = 0x2
_OP_CLOSE = 0x8
_OP_PING = 0x9
_OP_PONG = 0xA

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def _accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


class _BufferedSock:
    """Socket facade that drains handshake leftovers before real recv.

    TCP can coalesce the HTTP upgrade response (or request) with the first
    websocket frame; whoever parses the head must hand the surplus back.
    """

    def __init__(self, sock: socket.socket, residue: bytes = b"") -> None:
        self._sock = sock
        self._buf = residue

    def recv(self, n: int) -> bytes:
        if self._buf:
            piece, self._buf = self._buf[:n], self._buf[n:]
            return piece
        return self._sock.recv(n)

    def sendall(self, data: bytes) -> None:
        self._sock.sendall(data)

    def settimeout(self, timeout) -> None:
        self._sock.settimeout(timeout)

    def close(self) -> None:
        self._sock.close()


def _recv_exact(sock, n: int) -> bytes:
    chunks = b""
    while len(chunks) < n:
        piece = sock.recv(n - len(chunks))
        if not piece:
            raise ConnectionError("peer closed")
        chunks += piece
    return chunks


def _encode_frame(opcode: int, payload: bytes, mask: bool) -> bytes:
    header = bytearray([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask else 0x00
    if n < 126:
        header.append(mask_bit | n)
    elif n < 1 << 16:
        header.append(mask_bit | 126)
        header += struct.pack(">H", n)
    else:
        header.append(mask_bit | 127)
        header += struct.pack(">Q", n)
    if mask:
        key = os.urandom(4)
        header += key
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return bytes(header) + payload


def _read_frame(sock: socket.socket) -> tuple[int, bytes, bool]:
    b0, b1 = _recv_exact(sock, 2)
    fin = bool(b0 & 0x80)
    opcode = b0 & 0x0F
    masked = bool(b1 & 0x80)
    length = b1 & 0x7F
    if length == 126:
        (length,) = struct.unpack(">H", _recv_exact(sock, 2))
    elif length == 127:
        (length,) = struct.unpack(">Q", _recv_exact(sock, 8))
    key = _recv_exact(sock, 4) if masked else None
    payload = _recv_exact(sock, length) if length else b""
    if key:
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return opcode, payload, fin


def _read_message(sock: socket.socket) -> tuple[int, bytes]:
    """Read one complete message, transparently answering pings."""
    opcode_acc: int | None = None
    acc = b""
    while True:
        opcode, payload, fin = _read_frame(sock)
        if opcode == _OP_CLOSE:
            return _OP_CLOSE, payload
        if opcode == _OP_PING:
            sock.sendall(_encode_frame(_OP_PONG, payload, mask=False))
            continue
        if opcode == _OP_PONG:
            continue
        if opcode in (_OP_TEXT, _OP_BINARY):
            opcode_acc, acc = opcode, payload
        elif opcode == _OP_CONT and opcode_acc is not None:
            acc += payload
        else:
            raise ConnectionError(f"unexpected frame opcode {opcode}")
        if fin:
            return opcode_acc, acc


class _ClientConn:
    def __init__(self, sock: _BufferedSock, service: WireService) -> None:
        self.sock = sock
        self.service = service
        self._send_lock = threading.Lock()
        self.open = True

    def send_text(self, text: str) -> None:
        try:
            with self._send_lock:
                self.sock.sendall(_encode_frame(_OP_TEXT, text.encode("utf-8"), mask=False))
        except OSError:
            self.service.drop(self)

    def close(self) -> None:
        if not self.open:
            return
        self.open = False
        try:
            self.sock.sendall(_encode_frame(_OP_CLOSE, b"", mask=False))
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class WireService:
    """Accepts connections, pushes session output, feeds the session inbox."""

    def __init__(
        self,
        session,
        host: str = "127.0.0.1",
        port: int = 8765,
        static_dir: str | Path | None = None,
    ) -> None:
        self.session = session
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        try:
            self._server = socket.create_server((host, port))
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
        self.host = host
        self.port = self._server.getsockname()[1]
        self._clients: list[_ClientConn] = []
        self._lock = threading.Lock()
        self._closing = False
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="wire-accept", daemon=True
        )
        session.add_sink(self.broadcast)

    def start(self) -> None:
        self._accept_thread.start()

    def broadcast(self, message: dict) -> None:
        data = wire.encode(message)
        with self._lock:
            clients = list(self._clients)
        for client in clients:
            client.send_text(data)

    def drop(self, client: _ClientConn) -> None:
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)
        client.close()

    def stop(self) -> None:
        self._closing = True
        try:
            self._server.close()
        except OSError:
            pass
        with self._lock:
            clients = list(self._clients)
            self._clients.clear()
        for client in clients:
            client.close()

    # -- connection handling -------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                sock, _addr = self._server.accept()
            except OSError:
                return
            threading.Thread(
                target=self._serve_connection, args=(sock,), daemon=True
            ).start()

    def _serve_connection(self, sock: socket.socket) -> None:
        try:
            request = self._read_http_request(sock)
            if request is None:
                sock.close()
                return
            method, path, headers, residue = request
            if headers.get("upgrade", "").lower() == "websocket":
                self._serve_websocket(sock, headers, residue)
            else:
                self._serve_static(sock, method, path)
        except (OSError, ConnectionError):
            try:
                sock.close()
            except OSError:
                pass

    @staticmethod
    def _read_http_request(sock: socket.socket):
        data = b""
        while b"\r\n\r\n" not in data:
            piece = sock.recv(4096)
            if not piece:
                return None
            data += piece
            if len(data) > 65536:
                return None
        head, residue = data.split(b"\r\n\r\n", 1)
        lines = head.decode("latin-1").split("\r\n")
        try:
            method, path, _version = lines[0].split(" ", 2)
        except ValueError:
            return None
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                name, value = line.split(":", 1)
                headers[name.strip().lower()] = value.strip()
        return method, path, headers, residue

    def _serve_websocket(self, raw: socket.socket, headers: dict, residue: bytes) -> None:
        key = headers.get("sec-websocket-key")
        if not key:
            raw.sendall(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n")
            raw.close()
            return
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {_accept_key(key)}\r\n"
            "\r\n"
        )
        raw.sendall(response.encode("ascii"))
        sock = _BufferedSock(raw, residue)
        client = _ClientConn(sock, self)
        with self._lock:
            self._clients.append(client)
        # Every connection starts from a full snapshot; reconnects resync.
        client.send_text(wire.encode(self.session.snapshot_dict()))
        try:
            while client.open:
                opcode, payload = _read_message(sock)
                if opcode == _OP_CLOSE:
                    break
                try:
                    parsed = wire.parse_client_message(payload.decode("utf-8"))
                except (WireSchemaError, UnicodeDecodeError) as exc:
                    reason = str(exc) if isinstance(exc, WireSchemaError) else "schema: not utf-8"
                    client.send_text(wire.encode(wire.error_message(reason)))
                    continue
                self.session.enqueue_wire(parsed)
        except (OSError, ConnectionError):
            pass
        finally:
            self.drop(client)

    def _serve_static(self, sock: socket.socket, method: str, path: str) -> None:
        def respond(status: str, body: bytes, content_type: str = "text/plain; charset=utf-8"):
            head = (
                f"HTTP/1.1 {status}\r\n"
                f"Content-Type: {content_type}\r\n"
                f"Content-Length: {len(body)}\r\n"
                "Connection: close\r\n"
                "\r\n"
            )
            sock.sendall(head.encode("ascii") + body)

        try:
            if method != "GET":
                respond("405 Method Not Allowed", b"GET only")
                return
            if self.static_dir is None:
                respond("404 Not Found", b"no static assets configured")
                return
            rel = path.split("?", 1)[0].lstrip("/") or "index.html"
            target = (self.static_dir / rel).resolve()
            if not str(target).startswith(str(self.static_dir)) or not target.is_file():
                respond("404 Not Found", b"not found")
                return
            content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            respond("200 OK", target.read_bytes(), content_type)
        finally:
            sock.close()


class WireClient:
    """Small masked WebSocket client for tests and the replay CLI."""

    def __init__(self, host: str, port: int, timeout_s: float = 5.0) -> None:
        raw = socket.create_connection((host, port), timeout=timeout_s)
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        request = (
            "GET /ws HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n"
            "\r\n"
        )
        raw.sendall(request.encode("ascii"))
        data = b""
        while b"\r\n\r\n" not in data:
            piece = raw.recv(4096)
            if not piece:
                raise ConnectionError("handshake failed: connection closed")
            data += piece
        head, residue = data.split(b"\r\n\r\n", 1)
        head_text = head.decode("latin-1")
        if "101" not in head_text.split("\r\n")[0]:
            raise ConnectionError(f"handshake refused: {head_text.splitlines()[0]}")
        expected = _accept_key(key)
        if f"sec-websocket-accept: {expected.lower()}" not in head_text.lower():
            raise ConnectionError("handshake failed: bad accept key")
        # frames can ride in on the same segment as the 101; keep them
        self.sock = _BufferedSock(raw, residue)

    def send(self, message: dict) -> None:
        payload = wire.encode(message).encode("utf-8")
        self.sock.sendall(_encode_frame(_OP_TEXT, payload, mask=True))

    def send_raw(self, text: str) -> None:
        self.sock.sendall(_encode_frame(_OP_TEXT, text.encode("utf-8"), mask=True))

    def recv(self, timeout_s: float = 5.0) -> dict:
        self.sock.settimeout(timeout_s)
        opcode, payload = _read_message(self.sock)
        if opcode == _OP_CLOSE:
            raise ConnectionError("server closed the connection")
        return json.loads(payload.decode("utf-8"))

    def recv_until(self, predicate, timeout_s: float = 5.0) -> dict:
        """Drain messages until one satisfies the predicate."""
        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("no matching message before timeout")
            message = self.recv(timeout_s=remaining)
            if predicate(message):
                return message

    def close(self) -> None:
        try:
            self.sock.sendall(_encode_frame(_OP_CLOSE, b"", mask=True))
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
