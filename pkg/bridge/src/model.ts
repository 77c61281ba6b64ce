/**
 * Model attachment point. A sampler produces one or more sampled future
 * trajectories per target channel; the bridge reduces them to the point
 * forecast (median by default, mean optionally).
 *
 * Real pretrained models plug in as an ES module passed via --model, which
 * must export `createSampler(config)`; the bundled "persistence" stub keeps
 * everything runnable without weights.
 */

import { persistenceTrajectory } from "./stub.js";

export interface BridgeConfig {
  model: string | null;
  stub: string | null;
  transport: "stdio" | "http";
  port: number;
  maxRows: number;
  kEmb: number;
  reduction: "median" | "mean";
}

export interface TrajectorySampler {
  /** sampled trajectories for one channel: S arrays of length horizon */
  sampleChannel(channel: number[], horizon: number): number[][];
  /** optional encoder; falls back to the pooled stub embedding */
  embed?(matrix: number[][], kEmb: number): number[];
  readonly id: string;
}

export function defaultConfig(): BridgeConfig {
  return {
    model: null,
    stub: null,
    transport: "stdio",
    port: 8787,
    maxRows: 2048,
    kEmb: 512,
    reduction: "median",
  };
}

export function median(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

export function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

export function reduceTrajectories(
  trajectories: number[][],
  horizon: number,
  reduction: "median" | "mean",
): number[] {
  const out = new Array<number>(horizon);
  const reduce = reduction === "median" ? median : mean;
  for (let step = 0; step < horizon; step++) {
    out[step] = reduce(trajectories.map((t) => t[step]));
  }
  return out;
}

export function persistenceSampler(): TrajectorySampler {
  return {
    id: "stub:persistence",
    sampleChannel(channel, horizon) {
      return [persistenceTrajectory(channel, horizon)];
    },
  };
}

export async function loadSampler(config: BridgeConfig): Promise<TrajectorySampler> {
  if (config.stub) {
    if (config.stub !== "persistence") {
      throw new Error(`unknown stub ${JSON.stringify(config.stub)}`);
    }
    return persistenceSampler();
  }
  if (!config.model) {
    throw new Error("no model configured: pass --model <module> or --stub persistence");
  }
  const mod = await import(config.model);
  if (typeof mod.createSampler !== "function") {
    throw new Error(`model module ${config.model} does not export createSampler()`);
  }
  const sampler = await mod.createSampler(config);
  if (typeof sampler?.sampleChannel !== "function") {
    throw new Error(`model module ${config.model} returned an invalid sampler`);
  }
  return sampler as TrajectorySampler;
}
