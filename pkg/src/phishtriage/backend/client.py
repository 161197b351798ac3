"""Transports and a thread-safe request/response client for external backends."""

from __future__ import annotations

import itertools
import logging
import queue
from collections import OrderedDict
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from typing import Any, Protocol

from phishtriage.backend.protocol import decode_response, encode_request
from phishtriage.errors import (
    BackendError,
    BackendFailure,
    BackendTimeout,
    BackendUnavailable,
    ProtocolError,
)
from phishtriage.models import BackendRequest, BackendResponse, BackendTask

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
CLOSE_GRACE = 5.0  # seconds a child gets to exit after EOF
MAX_ABANDONED = 1024  # timed-out ids whose late replies are still dropped quietly


class Transport(Protocol):
    """A bidirectional byte stream carrying protocol lines."""

    description: str

    def send(self, data: bytes) -> None: ...

    def readline(self) -> bytes: ...

    def close(self) -> None: ...


class SubprocessTransport:
    """Backend spawned as a child process speaking over stdin/stdout."""

    def __init__(self, argv: list[str], close_grace: float = CLOSE_GRACE):
        self.description = f"stdio:{shlex.join(argv)}"
        self.close_grace = close_grace
        try:
            self._process = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise BackendUnavailable(f"cannot start backend: {exc}", transport=self.description) from exc
        logger.info("spawned backend %s (pid %d)", self.description, self._process.pid)

    def send(self, data: bytes) -> None:
        try:
            self._process.stdin.write(data)
            self._process.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise BackendUnavailable(f"backend input closed: {exc}", transport=self.description) from exc

    def readline(self) -> bytes:
        try:
            return self._process.stdout.readline()
        except (OSError, ValueError):
            return b""

    def close(self) -> None:
        """Send EOF, then kill the child if it outlives ``close_grace``.

        stdout is closed only after the child has exited.
        """
        try:
            self._process.stdin.close()
        except OSError:
            pass
        try:
            self._process.wait(timeout=self.close_grace)
        except subprocess.TimeoutExpired:
            logger.warning("backend %s ignored EOF; killing it", self.description)
            self._process.kill()
            self._process.wait()
        try:
            self._process.stdout.close()
        except OSError:
            pass


class TcpTransport:
    """Backend listening on a TCP port."""

    def __init__(self, host: str, port: int, connect_timeout: float = DEFAULT_TIMEOUT):
        self.description = f"tcp:{host}:{port}"
        try:
            self._socket = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise BackendUnavailable(f"cannot connect to backend: {exc}", transport=self.description) from exc
        self._socket.settimeout(None)
        self._reader = self._socket.makefile("rb")
        logger.info("connected to backend %s", self.description)

    def send(self, data: bytes) -> None:
        try:
            self._socket.sendall(data)
        except OSError as exc:
            raise BackendUnavailable(f"backend connection lost: {exc}", transport=self.description) from exc

    def readline(self) -> bytes:
        try:
            return self._reader.readline()
        except (OSError, ValueError):
            return b""

    def close(self) -> None:
        try:
            self._socket.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._reader.close()
        self._socket.close()


@dataclass(frozen=True)
class TransportSpec:
    """Parsed ``--transport`` value: ``stdio:<command line>`` or ``tcp:<host>:<port>``."""

    kind: str
    argv: tuple[str, ...] = ()
    host: str = ""
    port: int = 0

    @classmethod
    def parse(cls, text: str) -> TransportSpec:
        kind, sep, rest = text.partition(":")
        if not sep or not rest.strip():
            raise ValueError(f"transport must look like stdio:<command> or tcp:<host>:<port>, got {text!r}")
        if kind == "stdio":
            argv = tuple(shlex.split(rest))
            return cls(kind="stdio", argv=argv)
        if kind == "tcp":
            host, sep, port = rest.rpartition(":")
            if not sep or not host or not port.isdigit() or not (0 < int(port) < 65536):
                raise ValueError(f"tcp transport needs host:port, got {rest!r}")
            return cls(kind="tcp", host=host, port=int(port))
        raise ValueError(f"unknown transport kind {kind!r}")

    def __str__(self) -> str:
        if self.kind == "stdio":
            return f"stdio:{shlex.join(self.argv)}"
        return f"tcp:{self.host}:{self.port}"

    def open(self, connect_timeout: float = DEFAULT_TIMEOUT) -> Transport:
        if self.kind == "stdio":
            return SubprocessTransport(list(self.argv))
        return TcpTransport(self.host, self.port, connect_timeout)


class BackendClient:
    """Shared connection to one backend.

    Requests may be issued from several threads; a reader thread matches
    responses to callers by id, so replies may arrive in any order. A
    protocol error or a closed connection fails every outstanding request
    and every later one.

    Settled ids (answered or timed out) below the lowest unsettled one
    collapse into a watermark, so bookkeeping stays bounded on long runs.
    """

    def __init__(self, transport: Transport, timeout: float = DEFAULT_TIMEOUT):
        self.transport = transport
        self.timeout = timeout
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self._send_lock = threading.Lock()
        self._pending: dict[int, queue.Queue] = {}
        self._abandoned: OrderedDict[int, None] = OrderedDict()
        self._settled: set[int] = set()
        self._settled_below = 1
        self._failure: BackendFailure | None = None
        self._reader = threading.Thread(target=self._read_loop, name="backend-reader", daemon=True)
        self._reader.start()

    @classmethod
    def connect(cls, spec: TransportSpec | str, timeout: float = DEFAULT_TIMEOUT) -> BackendClient:
        if isinstance(spec, str):
            spec = TransportSpec.parse(spec)
        return cls(spec.open(timeout), timeout)

    @property
    def description(self) -> str:
        return self.transport.description

    def next_id(self) -> int:
        with self._lock:
            return next(self._ids)

    def _settle(self, request_id: int) -> None:
        # lock held
        self._settled.add(request_id)
        while self._settled_below in self._settled:
            self._settled.remove(self._settled_below)
            self._settled_below += 1

    def _is_settled(self, request_id: int) -> bool:
        return 0 < request_id < self._settled_below or request_id in self._settled

    def _abandon(self, request_id: int) -> None:
        # lock held
        self._abandoned[request_id] = None
        if len(self._abandoned) > MAX_ABANDONED:
            self._abandoned.popitem(last=False)
        self._settle(request_id)

    def _fail(self, error: BackendFailure) -> None:
        with self._lock:
            if self._failure is None:
                self._failure = error
            waiting = list(self._pending.values())
            self._pending.clear()
        for slot in waiting:
            slot.put(error)

    def _read_loop(self) -> None:
        for line_number in itertools.count(1):
            line = self.transport.readline()
            if not line:
                self._fail(BackendUnavailable("backend closed the connection", transport=self.description))
                return
            try:
                response = decode_response(line, line_number)
            except ProtocolError as exc:
                self._fail(exc.at(transport=self.description))
                return

            with self._lock:
                slot = self._pending.pop(response.id, None)
                if slot is None and response.id in self._abandoned:
                    del self._abandoned[response.id]
                    logger.debug("dropping late response %d", response.id)
                    continue
                if slot is None:
                    reason = "duplicate id" if self._is_settled(response.id) else "unknown id"
                    error = ProtocolError(f"{reason} {response.id}", line=line_number, transport=self.description)
                else:
                    self._settle(response.id)
            if slot is None:
                self._fail(error)
                return
            slot.put(response)

    def invoke(self, request: BackendRequest, timeout: float | None = None) -> BackendResponse:
        """Send one request and wait for its response.

        Raises:
            BackendTimeout: If no response arrives in time
            BackendUnavailable: If the connection is gone
            ProtocolError: If the backend broke the wire protocol
        """
        slot: queue.Queue = queue.Queue(maxsize=1)
        with self._lock:
            if self._failure is not None:
                raise self._failure
            if request.id in self._pending or self._is_settled(request.id):
                raise ValueError(f"request id {request.id} already used on this connection")
            self._pending[request.id] = slot

        with self._send_lock:
            self.transport.send(encode_request(request))

        wait = self.timeout if timeout is None else timeout
        try:
            outcome = slot.get(timeout=wait)
        except queue.Empty:
            with self._lock:
                if self._pending.pop(request.id, None) is not None:
                    self._abandon(request.id)
            raise BackendTimeout(
                f"no response within {wait:g}s", id=request.id, transport=self.description
            ) from None
        if isinstance(outcome, BackendFailure):
            raise outcome
        return outcome

    def call(self, task: BackendTask, payload: dict[str, Any], timeout: float | None = None) -> dict[str, Any]:
        """Invoke ``task`` and return its result object.

        Raises:
            BackendError: If the backend answered with an error object
        """
        response = self.invoke(BackendRequest(id=self.next_id(), task=task, payload=payload), timeout)
        if response.error is not None:
            raise BackendError(
                f"{response.error.code}: {response.error.message}",
                task=task.value,
                transport=self.description,
            )
        return response.result or {}

    def close(self) -> None:
        self.transport.close()
        self._reader.join(timeout=5)

    def __enter__(self) -> BackendClient:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
