"""Wire codec for protocol v1: one compact JSON object per LF-terminated line."""

from __future__ import annotations

import json
from typing import Any

from phishtriage.errors import ProtocolError
from phishtriage.models import (
    PROTOCOL_VERSION,
    BackendErrorInfo,
    BackendRequest,
    BackendResponse,
    BackendTask,
)


def _dump_line(obj: dict[str, Any]) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def _load_line(line: bytes | str, line_number: int | None) -> dict[str, Any]:
    where = {} if line_number is None else {"line": line_number}
    try:
        text = line.decode("utf-8") if isinstance(line, bytes) else line
        obj = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"non-JSON line: {exc}", **where) from exc
    if not isinstance(obj, dict):
        raise ProtocolError("message is not a JSON object", **where)
    if obj.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {obj.get('v')!r}", **where)
    message_id = obj.get("id")
    if isinstance(message_id, bool) or not isinstance(message_id, int):
        raise ProtocolError(f"message id must be an integer, got {message_id!r}", **where)
    return obj


def encode_request(request: BackendRequest) -> bytes:
    return _dump_line(
        {"v": PROTOCOL_VERSION, "id": request.id, "task": request.task.value, "payload": request.payload}
    )


def decode_request(line: bytes | str, line_number: int | None = None) -> BackendRequest:
    obj = _load_line(line, line_number)
    try:
        task = BackendTask(obj.get("task"))
    except ValueError:
        raise ProtocolError(f"unknown task {obj.get('task')!r}", id=obj["id"]) from None
    payload = obj.get("payload")
    if not isinstance(payload, dict):
        raise ProtocolError("request payload must be an object", id=obj["id"])
    return BackendRequest(id=obj["id"], task=task, payload=payload)


def encode_response(response: BackendResponse) -> bytes:
    obj: dict[str, Any] = {"v": PROTOCOL_VERSION, "id": response.id}
    if response.error is not None:
        obj["error"] = {"code": response.error.code, "message": response.error.message}
    else:
        obj["result"] = response.result
    return _dump_line(obj)


def decode_response(line: bytes | str, line_number: int | None = None) -> BackendResponse:
    """Decode one response line.

    Raises:
        ProtocolError: If the line is not JSON, has the wrong version or id,
            or carries both or neither of ``result`` and ``error``
    """
    obj = _load_line(line, line_number)
    where = {"id": obj["id"]} if line_number is None else {"line": line_number, "id": obj["id"]}
    has_result, has_error = "result" in obj, "error" in obj
    if has_result == has_error:
        raise ProtocolError("response needs exactly one of result and error", **where)

    if has_error:
        error = obj["error"]
        if not isinstance(error, dict) or not isinstance(error.get("code"), str):
            raise ProtocolError("error must be an object with a string code", **where)
        return BackendResponse(
            id=obj["id"],
            error=BackendErrorInfo(code=error["code"], message=str(error.get("message", ""))),
        )
    if not isinstance(obj["result"], dict):
        raise ProtocolError("result must be an object", **where)
    return BackendResponse(id=obj["id"], result=obj["result"])
