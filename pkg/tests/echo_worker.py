"""Stdio protocol stub standing in for a real trainer worker.

Reads newline-delimited JSON requests and answers with canned records.
The mode comes from argv[1]:

  ok         progress record then the canned series (default)
  flaky      first request fails with a transient error, later ones pass
  transient  every request fails with a transient error
  permanent  every request fails permanently
  wrong-id   replies to a different request id
"""

import json
import sys

CANNED = [0.1, 0.5, 0.9]


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    seen = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        if msg.get("type") not in ("train_request", "finalize_request"):
            continue
        seen += 1
        rid = msg["id"]
        if mode == "permanent":
            out = {"type": "error", "id": rid, "transient": False, "msg": "boom"}
        elif mode == "transient":
            out = {"type": "error", "id": rid, "transient": True, "msg": "busy"}
        elif mode == "flaky" and seen == 1:
            out = {"type": "error", "id": rid, "transient": True, "msg": "warming up"}
        elif mode == "wrong-id":
            out = {"type": "result", "id": rid + 999, "series": CANNED}
        else:
            sys.stdout.write(json.dumps({"type": "progress", "id": rid, "done": 1}) + "\n")
            out = {"type": "result", "id": rid, "series": CANNED}
        sys.stdout.write(json.dumps(out) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
