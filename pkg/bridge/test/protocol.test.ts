import { describe, expect, it } from "vitest";

import {
  ProtocolError,
  encodeError,
  encodeResponse,
  parseRequest,
} from "../src/protocol.js";

describe("parseRequest", () => {
  const valid = {
    id: "r1",
    role: "forecast",
    horizon: 3,
    target_indices: [0, 1],
    matrix: [
      [1.5, 2.5],
      [3.5, 4.5],
    ],
    variables: ["a", "b"],
  };

  it("accepts a conforming forecast frame", () => {
    const req = parseRequest(JSON.stringify(valid));
    expect(req.id).toBe("r1");
    expect(req.horizon).toBe(3);
    expect(req.targetIndices).toEqual([0, 1]);
    expect(req.matrix[1][0]).toBe(3.5);
  });

  it("accepts an embed frame without horizon", () => {
    const req = parseRequest(
      JSON.stringify({ id: "e", role: "embed", matrix: [[1]], variables: [] }),
    );
    expect(req.role).toBe("embed");
  });

  it("rejects broken JSON without an id", () => {
    expect(() => parseRequest("{nope")).toThrowError(ProtocolError);
    try {
      parseRequest("{nope");
    } catch (err) {
      expect((err as ProtocolError).frameId).toBe("");
    }
  });

  it("rejects unknown roles but keeps the id", () => {
    const bad = { ...valid, role: "transmogrify" };
    try {
      parseRequest(JSON.stringify(bad));
      expect.unreachable();
    } catch (err) {
      expect((err as ProtocolError).frameId).toBe("r1");
      expect((err as ProtocolError).message).toContain("role");
    }
  });

  it("rejects ragged and non-numeric matrices", () => {
    expect(() =>
      parseRequest(JSON.stringify({ ...valid, matrix: [[1, 2], [3]] })),
    ).toThrowError(/matrix/);
    expect(() =>
      parseRequest(JSON.stringify({ ...valid, matrix: [["x", 2]] })),
    ).toThrowError(/matrix/);
  });

  it("rejects out-of-range target indices", () => {
    expect(() =>
      parseRequest(JSON.stringify({ ...valid, target_indices: [7] })),
    ).toThrowError(/out of range/);
  });

  it("rejects missing horizon on forecasts", () => {
    const bad: Record<string, unknown> = { ...valid };
    delete bad.horizon;
    expect(() => parseRequest(JSON.stringify(bad))).toThrowError(/horizon/);
  });
});

describe("encoders", () => {
  it("round-trips a response frame", () => {
    const line = encodeResponse("r9", [[1.25, -2.5]]);
    expect(JSON.parse(line)).toEqual({ id: "r9", matrix: [[1.25, -2.5]] });
  });

  it("refuses non-finite output", () => {
    expect(() => encodeResponse("r", [[Number.NaN]])).toThrowError(/non-finite/);
    expect(() => encodeResponse("r", [[Infinity]])).toThrowError(/non-finite/);
  });

  it("emits error frames", () => {
    expect(JSON.parse(encodeError("x", "boom"))).toEqual({ id: "x", error: "boom" });
  });
});
