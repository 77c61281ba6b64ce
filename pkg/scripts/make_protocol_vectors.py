#!/usr/bin/env python3
"""Generate shared wire-protocol test vectors for sidecar implementations.

Expected forecast responses come from the built-in persistence forecaster,
expected embeddings from the built-in pooled embedder; any conforming
sidecar in stub mode must reproduce the forecasts bit-for-bit and the
embeddings to 1e-12. Error cases must yield error frames without killing
the process.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from rafkit.forecast import ForecastRequest, forecast_persistence
from rafkit.protocol import encode_request
from rafkit.retrieval import embed_builtin

K_EMB = 16
MAX_ROWS = 64


def forecast_case(name, rng, rows, cols, horizon, targets):
    matrix = np.round(rng.normal(size=(rows, cols)) * 3.0, 6)
    request = encode_request(
        f"vec-{name}", "forecast", matrix, horizon, targets,
        [f"v{i}" for i in range(cols)],
    )
    expected = forecast_persistence(
        ForecastRequest(matrix, horizon, tuple(targets))
    ).values
    return {
        "name": name,
        "kind": "forecast",
        "raw": request,
        "id": f"vec-{name}",
        "expect_matrix": expected.tolist(),
    }


def embed_case(name, rng, rows, cols):
    matrix = np.round(rng.normal(size=(rows, cols)) * 2.0, 6)
    request = encode_request(f"vec-{name}", "embed", matrix)
    expected = embed_builtin(matrix, K_EMB)
    return {
        "name": name,
        "kind": "embed",
        "raw": request,
        "id": f"vec-{name}",
        "expect_matrix": [expected.tolist()],
    }


def error_case(name, raw, expect_id=""):
    return {"name": name, "kind": "error", "raw": raw, "id": expect_id}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="bridge/vectors/protocol_vectors.json")
    args = parser.parse_args()

    rng = np.random.default_rng(90210)
    cases = [
        forecast_case("persistence-small", rng, 8, 3, 4, [0, 2]),
        forecast_case("persistence-single-target", rng, 12, 5, 7, [4]),
        forecast_case("persistence-augmented-width", rng, 52, 8, 14, [0, 1, 2]),
        forecast_case("persistence-h1", rng, 5, 2, 1, [0, 1]),
        embed_case("embed-small", rng, 10, 3),
        embed_case("embed-wide", rng, 24, 8),
        error_case("malformed-json", "{this is not json"),
        error_case("not-an-object", "[1, 2, 3]"),
        # a bare NaN token breaks strict JSON parsing, so the frame id is
        # unrecoverable and the error frame must carry id ""
        error_case(
            "nan-literal", '{"id": "vec-nan", "role": "forecast", "horizon": 1, '
            '"target_indices": [0], "matrix": [[NaN]], "variables": []}',
            "",
        ),
        error_case(
            "unknown-role",
            json.dumps(
                {
                    "id": "vec-role",
                    "role": "transmogrify",
                    "horizon": 1,
                    "target_indices": [0],
                    "matrix": [[1.0]],
                    "variables": [],
                }
            ),
            "vec-role",
        ),
        error_case(
            "missing-matrix",
            json.dumps(
                {
                    "id": "vec-missing",
                    "role": "forecast",
                    "horizon": 2,
                    "target_indices": [0],
                    "variables": [],
                }
            ),
            "vec-missing",
        ),
        error_case(
            "bad-target-index",
            json.dumps(
                {
                    "id": "vec-target",
                    "role": "forecast",
                    "horizon": 2,
                    "target_indices": [9],
                    "matrix": [[1.0, 2.0]],
                    "variables": [],
                }
            ),
            "vec-target",
        ),
    ]
    # context longer than the advertised row budget must be refused
    big = np.zeros((MAX_ROWS + 6, 2))
    cases.append(
        error_case(
            "exceeds-max-rows",
            encode_request("vec-big", "forecast", big, 3, [0]),
            "vec-big",
        )
    )

    doc = {
        "k_emb": K_EMB,
        "max_rows": MAX_ROWS,
        "cases": cases,
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
    print(f"wrote {out} ({len(cases)} cases)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
