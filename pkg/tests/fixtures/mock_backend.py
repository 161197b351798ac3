"""Scripted protocol v1 backend for tests, speaking over stdin/stdout.

Usage: python mock_backend.py <mode>

Modes:
    echo          well-formed answers (None distributions, click_link spans)
    fixed:<Class> every sentence puts all mass on <Class>
    reorder       answer each pair of requests in reverse order
    bad_sum       distributions summing to 0.8
    near_sum      distributions summing to 1.0005
    out_of_bounds spans ending past the sentence
    unknown_tag   spans with an unregistered tag
    garbage       a non-JSON line
    error         an error object for every request
    silent        read requests, never answer
    duplicate     answer every request twice
    exit          exit before reading anything
    linger        answer like echo, then ignore EOF and keep running
"""

from __future__ import annotations

import json
import sys
import time

CLASSES = ["Reciprocity", "Consistency", "SocialProof", "Authority", "Liking", "Scarcity", "None"]


def _distribution(mode: str) -> list[float]:
    probs = [0.0] * len(CLASSES)
    if mode.startswith("fixed:"):
        probs[CLASSES.index(mode.split(":", 1)[1])] = 1.0
    elif mode == "bad_sum":
        probs[-1] = 0.8
    elif mode == "near_sum":
        probs[-1] = 1.0005
    else:
        probs[-1] = 1.0
    return probs


def _spans(payload: dict, mode: str) -> list[dict]:
    spans = []
    for k, tokens in enumerate(payload["tokens"]):
        # always below the default confidence cutoff
        spans.append({"sentence_index": k, "token_start": 0, "token_end": 1,
                      "tag": "reply_with_info", "confidence": 0.2})
        for i, token in enumerate(tokens):
            if token.lower() != "click":
                continue
            end = i + 1
            tag = "click_link"
            if mode == "out_of_bounds":
                end = len(tokens) + 1
            elif mode == "unknown_tag":
                tag = "wire_money"
            spans.append({"sentence_index": k, "token_start": i, "token_end": end,
                          "tag": tag, "confidence": 0.9})
    return spans


def _summary(payload: dict) -> dict:
    counts = payload["token_counts"]
    budget = payload["budget"]
    selected, used = [], 0
    for index, count in enumerate(counts):
        if used + count <= budget:
            selected.append(index)
            used += count
    if not selected:
        return {"selected": [counts.index(min(counts))], "budget_exceeded": True}
    return {"selected": selected, "budget_exceeded": False}


def answer(request: dict, mode: str) -> dict:
    task, payload = request["task"], request["payload"]
    if mode == "error":
        return {"v": 1, "id": request["id"], "error": {"code": "model_failed", "message": "boom"}}
    if task == "classify_triggers":
        result = {"distributions": [_distribution(mode) for _ in payload["sentences"]]}
    elif task == "tag_intents":
        result = {"spans": _spans(payload, mode)}
    else:
        result = _summary(payload)
    return {"v": 1, "id": request["id"], "result": result}


def send(message: dict) -> None:
    sys.stdout.write(json.dumps(message, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def main() -> None:
    mode = sys.argv[1] if len(sys.argv) > 1 else "echo"
    if mode == "exit":
        return
    held = []
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        if mode == "silent":
            continue
        if mode == "garbage":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        response = answer(request, mode)
        if mode == "reorder":
            held.append(response)
            if len(held) == 2:
                for held_response in reversed(held):
                    send(held_response)
                held.clear()
            continue
        send(response)
        if mode == "duplicate":
            send(response)
    if mode == "linger":
        time.sleep(3600)


if __name__ == "__main__":
    main()
