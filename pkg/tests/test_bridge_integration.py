"""Cross-component checks: the sidecar in stub mode must be
indistinguishable from the built-in persistence forecaster over the wire,
and must answer malformed frames with error frames without dying.

Skipped when node or the compiled sidecar is unavailable (build it with
`npm run build` inside bridge/)."""

import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from rafkit.forecast import ForecastRequest, forecast_external, forecast_persistence
from rafkit.protocol import WireClient
from rafkit.retrieval import embed_builtin

BRIDGE_DIR = Path(__file__).parent.parent / "bridge"
CLI = BRIDGE_DIR / "dist" / "cli.js"
VECTORS = BRIDGE_DIR / "vectors" / "protocol_vectors.json"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not CLI.exists(),
    reason="node or compiled bridge not available",
)


def bridge_endpoint(k_emb: int, max_rows: int) -> str:
    return (
        f"exec:node {CLI} --stub persistence --k-emb {k_emb} --max-rows {max_rows}"
    )


@pytest.fixture(scope="module")
def vectors():
    return json.loads(VECTORS.read_text(encoding="utf-8"))


class TestBridgeConformance:
    def test_forecast_matches_persistence_bitwise(self, rng):
        client = WireClient(bridge_endpoint(512, 2048))
        try:
            for _ in range(10):
                rows = int(rng.integers(3, 40))
                cols = int(rng.integers(1, 6))
                targets = tuple(
                    sorted(
                        rng.choice(cols, size=int(rng.integers(1, cols + 1)), replace=False)
                    )
                )
                req = ForecastRequest(
                    rng.normal(size=(rows, cols)), int(rng.integers(1, 9)), targets
                )
                remote = forecast_external(req, client)
                local = forecast_persistence(req)
                assert np.array_equal(remote.values, local.values)
        finally:
            client.close()

    def test_embed_matches_builtin(self, rng):
        client = WireClient(bridge_endpoint(16, 2048))
        try:
            window = rng.normal(size=(12, 3))
            remote = client.embed(window, 16)
            local = embed_builtin(window, 16)
            np.testing.assert_allclose(remote, local, rtol=1e-12, atol=1e-15)
        finally:
            client.close()

    def test_shared_vectors_over_the_wire(self, vectors):
        proc = subprocess.Popen(
            [
                "node",
                str(CLI),
                "--stub",
                "persistence",
                "--k-emb",
                str(vectors["k_emb"]),
                "--max-rows",
                str(vectors["max_rows"]),
            ],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        try:
            for case in vectors["cases"]:
                proc.stdin.write(case["raw"] + "\n")
                proc.stdin.flush()
                reply = json.loads(proc.stdout.readline())
                if case["kind"] == "error":
                    assert reply.get("error"), case["name"]
                    assert reply["id"] == case["id"], case["name"]
                elif case["kind"] == "forecast":
                    assert reply["matrix"] == case["expect_matrix"], case["name"]
                else:
                    got = np.array(reply["matrix"][0])
                    want = np.array(case["expect_matrix"][0])
                    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-15)
            assert proc.poll() is None, "bridge died during the vector run"
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)

    def test_malformed_then_healthy(self, rng):
        # a garbage frame must not poison the next request
        proc = subprocess.Popen(
            ["node", str(CLI), "--stub", "persistence"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        try:
            proc.stdin.write("{never valid json\n")
            proc.stdin.flush()
            reply = json.loads(proc.stdout.readline())
            assert reply["error"] and reply["id"] == ""

            from rafkit.protocol import encode_request

            matrix = rng.normal(size=(5, 2))
            proc.stdin.write(encode_request("ok-1", "forecast", matrix, 2, (0,)) + "\n")
            proc.stdin.flush()
            reply = json.loads(proc.stdout.readline())
            assert reply["id"] == "ok-1"
            assert reply["matrix"] == [[matrix[-1, 0]]] * 2
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)
