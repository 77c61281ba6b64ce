#!/usr/bin/env python3
"""Standalone wire-protocol stub (no package imports, as an independent
counterparty). Modes: persistence | short | nan | error | malformed."""

import json
import sys


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "persistence"
    k_emb = int(sys.argv[2]) if len(sys.argv) > 2 else 512
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if mode == "malformed":
            print("{this is not json", flush=True)
            continue
        req = json.loads(line)
        rid = req.get("id", "")
        if mode == "error":
            print(json.dumps({"id": rid, "error": "stub failure"}), flush=True)
            continue
        if mode == "nan":
            print('{"id": "%s", "matrix": [[NaN]]}' % rid, flush=True)
            continue
        matrix = req["matrix"]
        if req.get("role") == "embed":
            row = [float(matrix[0][0])] * k_emb
            print(json.dumps({"id": rid, "matrix": [row]}), flush=True)
            continue
        targets = req.get("target_indices", [])
        horizon = req.get("horizon", 0)
        last = matrix[-1]
        row = [last[i] for i in targets]
        count = horizon - 1 if mode == "short" else horizon
        print(json.dumps({"id": rid, "matrix": [row] * count}), flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
