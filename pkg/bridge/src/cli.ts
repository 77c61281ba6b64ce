/**
 * Entry point.
 *
 *   node dist/cli.js --stub persistence --transport stdio
 *   node dist/cli.js --model ./my_model.mjs --transport http --port 8787
 *
 * Flags: --model, --transport stdio|http, --port, --max-rows, --stub,
 * --k-emb, --reduction median|mean. A model that fails to load is a
 * startup error (non-zero exit); per-request failures answer in-band.
 */

import { defaultConfig, loadSampler } from "./model.js";
import { serveHttp, serveStdio } from "./server.js";

function usage(): never {
  process.stderr.write(
    "usage: cli.js [--stub persistence | --model MODULE] " +
      "[--transport stdio|http] [--port N] [--max-rows N] " +
      "[--k-emb N] [--reduction median|mean]\n",
  );
  process.exit(2);
}

export function parseArgs(argv: string[]) {
  const config = defaultConfig();
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) usage();
      return argv[i];
    };
    switch (flag) {
      case "--model":
        config.model = next();
        break;
      case "--stub":
        config.stub = next();
        break;
      case "--transport": {
        const value = next();
        if (value !== "stdio" && value !== "http") usage();
        config.transport = value;
        break;
      }
      case "--port":
        config.port = Number(next());
        break;
      case "--max-rows":
        config.maxRows = Number(next());
        break;
      case "--k-emb":
        config.kEmb = Number(next());
        break;
      case "--reduction": {
        const value = next();
        if (value !== "median" && value !== "mean") usage();
        config.reduction = value;
        break;
      }
      default:
        usage();
    }
  }
  if (config.maxRows < 1 || config.kEmb < 1 || !Number.isFinite(config.port)) usage();
  return config;
}

async function main() {
  const config = parseArgs(process.argv.slice(2));
  let sampler;
  try {
    sampler = await loadSampler(config);
  } catch (err) {
    process.stderr.write(`startup failure: ${String(err instanceof Error ? err.message : err)}\n`);
    process.exit(1);
  }
  if (config.transport === "http") {
    const server = await serveHttp(sampler, config);
    const address = server.address();
    const port = typeof address === "object" && address ? address.port : config.port;
    process.stderr.write(`serving ${sampler.id} on http://127.0.0.1:${port}\n`);
  } else {
    await serveStdio(sampler, config);
  }
}

main();
