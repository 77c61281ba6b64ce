import json

import numpy as np
import pytest

from rafkit.protocol import (
    ContractViolationError,
    ProtocolError,
    decode_response,
    encode_request,
    open_endpoint,
    parse_frame,
)


class TestEncodeRequest:
    def test_frame_fields(self, rng):
        matrix = rng.normal(size=(4, 2))
        line = encode_request("r1", "forecast", matrix, 3, (0, 1), ("a", "b"))
        frame = json.loads(line)
        assert frame["id"] == "r1"
        assert frame["role"] == "forecast"
        assert frame["horizon"] == 3
        assert frame["target_indices"] == [0, 1]
        assert frame["variables"] == ["a", "b"]
        np.testing.assert_array_equal(np.array(frame["matrix"]), matrix)

    def test_row_major_oldest_first(self):
        line = encode_request("r", "forecast", np.array([[1.0, 2.0], [3.0, 4.0]]), 1, (0,))
        assert json.loads(line)["matrix"] == [[1.0, 2.0], [3.0, 4.0]]

    def test_non_finite_rejected(self):
        with pytest.raises(ProtocolError, match="non-finite"):
            encode_request("r", "forecast", np.array([[np.nan]]), 1, (0,))
        with pytest.raises(ProtocolError, match="non-finite"):
            encode_request("r", "forecast", np.array([[np.inf]]), 1, (0,))

    def test_round_trip_bit_faithful_strategy_c_size(self, rng):
        # 484 x 38 matrix (3 contexts of 128 rows + 100-row query, 38 vars)
        matrix = rng.normal(size=(484, 38))
        line = encode_request("rt", "forecast", matrix, 28, range(5))
        decoded = np.asarray(parse_frame(line)["matrix"], dtype=float)
        np.testing.assert_array_equal(decoded, matrix)


class TestParseFrame:
    def test_rejects_nan_literal(self):
        with pytest.raises(ProtocolError, match="malformed"):
            parse_frame('{"id": "x", "matrix": [[NaN]]}')

    def test_rejects_infinity_literal(self):
        with pytest.raises(ProtocolError, match="malformed"):
            parse_frame('{"id": "x", "matrix": [[Infinity]]}')

    def test_rejects_non_object(self):
        with pytest.raises(ProtocolError, match="not a JSON object"):
            parse_frame("[1, 2, 3]")

    def test_includes_payload_excerpt(self):
        with pytest.raises(ProtocolError, match="oops"):
            parse_frame("oops not json")


class TestDecodeResponse:
    def ok_line(self, rid="r1", rows=2, cols=2):
        return json.dumps({"id": rid, "matrix": [[1.0] * cols] * rows})

    def test_valid(self):
        out = decode_response(self.ok_line(), "r1", 2, 2)
        np.testing.assert_array_equal(out, np.ones((2, 2)))

    def test_id_mismatch(self):
        with pytest.raises(ProtocolError, match="does not match"):
            decode_response(self.ok_line("other"), "r1", 2, 2)

    def test_error_frame(self):
        line = json.dumps({"id": "r1", "error": "kaput"})
        with pytest.raises(ProtocolError, match="kaput"):
            decode_response(line, "r1", 2, 2)

    def test_missing_matrix(self):
        with pytest.raises(ProtocolError, match="lacks 'matrix'"):
            decode_response(json.dumps({"id": "r1"}), "r1", 2, 2)

    def test_wrong_shape(self):
        with pytest.raises(ContractViolationError, match="2x3"):
            decode_response(self.ok_line(rows=2, cols=2), "r1", 2, 3)

    def test_overflow_to_inf_rejected(self):
        line = '{"id": "r1", "matrix": [[1e999, 0.0]]}'
        with pytest.raises(ContractViolationError, match="non-finite"):
            decode_response(line, "r1", 1, 2)

    def test_ragged_matrix_rejected(self):
        line = json.dumps({"id": "r1", "matrix": [[1.0, 2.0], [3.0]]})
        with pytest.raises(ProtocolError, match="not numeric"):
            decode_response(line, "r1", 2, 2)


class TestOpenEndpoint:
    def test_exec_prefix(self):
        ep = open_endpoint("exec:cat -u")
        assert ep.command == ["cat", "-u"]

    def test_http_prefix(self):
        ep = open_endpoint("http://localhost:9/x")
        assert ep.url.endswith("/x")

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="endpoint"):
            open_endpoint("ftp://nope")
