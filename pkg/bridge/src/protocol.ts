/**
 * Wire protocol frames: newline-delimited JSON, one frame per line.
 *
 * Request  {"id", "role": "forecast"|"embed", "horizon", "target_indices",
 *           "matrix", "variables"}   (matrix row-major, oldest row first)
 * Response {"id", "matrix"}
 * Error    {"id", "error"}
 *
 * Every number must be a finite IEEE-754 double; NaN/Infinity anywhere is
 * a protocol violation.
 */

export type Role = "forecast" | "embed";

export interface WireRequest {
  id: string;
  role: Role;
  horizon: number;
  targetIndices: number[];
  matrix: number[][];
  variables: string[];
}

export class ProtocolError extends Error {
  /** id to echo in the error frame ("" when the frame was unreadable) */
  readonly frameId: string;

  constructor(message: string, frameId = "") {
    super(message);
    this.frameId = frameId;
  }
}

function isFiniteMatrix(value: unknown): value is number[][] {
  if (!Array.isArray(value) || value.length === 0) return false;
  const width = Array.isArray(value[0]) ? (value[0] as unknown[]).length : -1;
  if (width < 1) return false;
  for (const row of value) {
    if (!Array.isArray(row) || row.length !== width) return false;
    for (const cell of row) {
      if (typeof cell !== "number" || !Number.isFinite(cell)) return false;
    }
  }
  return true;
}

export function parseRequest(line: string): WireRequest {
  let frame: unknown;
  try {
    frame = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`malformed frame: ${(err as Error).message}`);
  }
  if (typeof frame !== "object" || frame === null || Array.isArray(frame)) {
    throw new ProtocolError("frame is not a JSON object");
  }
  const obj = frame as Record<string, unknown>;
  const id = typeof obj.id === "string" ? obj.id : "";
  const role = obj.role;
  if (role !== "forecast" && role !== "embed") {
    throw new ProtocolError(`unknown role ${JSON.stringify(role)}`, id);
  }
  if (!isFiniteMatrix(obj.matrix)) {
    throw new ProtocolError("request needs a finite, rectangular 'matrix'", id);
  }
  const matrix = obj.matrix as number[][];
  const width = matrix[0].length;

  let horizon = 0;
  let targetIndices: number[] = [];
  if (role === "forecast") {
    if (typeof obj.horizon !== "number" || !Number.isInteger(obj.horizon) || obj.horizon < 1) {
      throw new ProtocolError("forecast requests need a positive integer 'horizon'", id);
    }
    horizon = obj.horizon;
    if (!Array.isArray(obj.target_indices) || obj.target_indices.length === 0) {
      throw new ProtocolError("forecast requests need non-empty 'target_indices'", id);
    }
    for (const t of obj.target_indices) {
      if (typeof t !== "number" || !Number.isInteger(t) || t < 0 || t >= width) {
        throw new ProtocolError(`target index ${JSON.stringify(t)} out of range for ${width} columns`, id);
      }
    }
    targetIndices = obj.target_indices as number[];
  }
  const variables = Array.isArray(obj.variables)
    ? (obj.variables as unknown[]).map(String)
    : [];
  return { id, role, horizon, targetIndices, matrix, variables };
}

export function encodeResponse(id: string, matrix: number[][]): string {
  for (const row of matrix) {
    for (const cell of row) {
      if (!Number.isFinite(cell)) {
        throw new ProtocolError("refusing to emit a non-finite value", id);
      }
    }
  }
  return JSON.stringify({ id, matrix });
}

export function encodeError(id: string, message: string): string {
  return JSON.stringify({ id, error: message });
}
