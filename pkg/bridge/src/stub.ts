/**
 * Dependency-free stand-ins used when no model is attached.
 *
 * The persistence forecast copies input values verbatim, so conforming
 * counterparts agree with it bit-for-bit across the wire. The pooled
 * embedding mirrors the reference embedder (z-score per column with the
 * population convention, average-pool into floor(kEmb/m) segments, last
 * segment absorbs remainder rows, concatenate column-by-column, zero-pad).
 */

export function persistenceTrajectory(channel: number[], horizon: number): number[] {
  const last = channel[channel.length - 1];
  return new Array<number>(horizon).fill(last);
}

function zscoreColumn(column: number[]): number[] {
  const n = column.length;
  const first = column[0];
  if (column.every((v) => v === first)) {
    return new Array<number>(n).fill(0);
  }
  let mean = column.reduce((a, b) => a + b, 0) / n;
  const centered = column.map((v) => v - mean);
  // compensated second pass, mirroring the reference implementation
  const residual = centered.reduce((a, b) => a + b, 0) / n;
  for (let i = 0; i < n; i++) centered[i] -= residual;
  const scale = centered.reduce((a, b) => Math.max(a, Math.abs(b)), 0) || 1;
  const varSum = centered.reduce((a, b) => a + (b / scale) * (b / scale), 0);
  const std = scale * Math.sqrt(varSum / n);
  return centered.map((v) => v / std);
}

export function pooledEmbedding(matrix: number[][], kEmb: number): number[] {
  const rows = matrix.length;
  const cols = matrix[0].length;
  if (kEmb < cols) {
    throw new Error(`kEmb=${kEmb} too small for ${cols} columns`);
  }
  const segments = Math.min(Math.floor(kEmb / cols), rows);
  const base = Math.floor(rows / segments);
  const out = new Array<number>(kEmb).fill(0);
  let cursor = 0;
  for (let c = 0; c < cols; c++) {
    const z = zscoreColumn(matrix.map((row) => row[c]));
    for (let s = 0; s < segments; s++) {
      const start = s * base;
      const stop = s === segments - 1 ? rows : start + base;
      let sum = 0;
      for (let i = start; i < stop; i++) sum += z[i];
      out[cursor++] = sum / (stop - start);
    }
  }
  return out;
}
