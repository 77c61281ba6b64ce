/**
 * Request handling and the two transports.
 *
 * One frame in, one frame out; malformed or failing requests produce an
 * error frame and never kill the serving loop. HTTP always answers 200
 * with a protocol frame so that clients treat only transport-level
 * failures as retriable.
 */

import http from "node:http";
import readline from "node:readline";

import { BridgeConfig, TrajectorySampler, reduceTrajectories } from "./model.js";
import {
  ProtocolError,
  WireRequest,
  encodeError,
  encodeResponse,
  parseRequest,
} from "./protocol.js";
import { pooledEmbedding } from "./stub.js";

export function forecastMatrix(
  request: WireRequest,
  sampler: TrajectorySampler,
  config: BridgeConfig,
): number[][] {
  const out: number[][] = Array.from({ length: request.horizon }, () =>
    new Array<number>(request.targetIndices.length).fill(0),
  );
  request.targetIndices.forEach((target, column) => {
    const channel = request.matrix.map((row) => row[target]);
    const trajectories = sampler.sampleChannel(channel, request.horizon);
    const point = reduceTrajectories(trajectories, request.horizon, config.reduction);
    for (let step = 0; step < request.horizon; step++) {
      out[step][column] = point[step];
    }
  });
  return out;
}

export function handleLine(
  line: string,
  sampler: TrajectorySampler,
  config: BridgeConfig,
): string {
  let request: WireRequest;
  try {
    request = parseRequest(line);
  } catch (err) {
    if (err instanceof ProtocolError) return encodeError(err.frameId, err.message);
    return encodeError("", String(err));
  }
  try {
    if (request.matrix.length > config.maxRows) {
      return encodeError(
        request.id,
        `context of ${request.matrix.length} rows exceeds max ${config.maxRows}`,
      );
    }
    if (request.role === "embed") {
      const embed = sampler.embed
        ? sampler.embed(request.matrix, config.kEmb)
        : pooledEmbedding(request.matrix, config.kEmb);
      return encodeResponse(request.id, [embed]);
    }
    return encodeResponse(request.id, forecastMatrix(request, sampler, config));
  } catch (err) {
    // per-request failures answer in-band; the loop must survive
    return encodeError(request.id, String(err instanceof Error ? err.message : err));
  }
}

export function serveStdio(sampler: TrajectorySampler, config: BridgeConfig): Promise<void> {
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  return new Promise((resolve) => {
    rl.on("line", (line) => {
      if (!line.trim()) return;
      process.stdout.write(handleLine(line, sampler, config) + "\n");
    });
    rl.on("close", resolve);
  });
}

export function serveHttp(
  sampler: TrajectorySampler,
  config: BridgeConfig,
): Promise<http.Server> {
  const server = http.createServer((req, res) => {
    if (req.method !== "POST") {
      res.writeHead(405).end();
      return;
    }
    const chunks: Buffer[] = [];
    req.on("data", (c) => chunks.push(c));
    req.on("end", () => {
      const body = Buffer.concat(chunks).toString("utf-8");
      const reply = handleLine(body, sampler, config);
      res.writeHead(200, { "Content-Type": "application/json" });
      res.end(reply);
    });
  });
  return new Promise((resolve) => {
    server.listen(config.port, "127.0.0.1", () => resolve(server));
  });
}
