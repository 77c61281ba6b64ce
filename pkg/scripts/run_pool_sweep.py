#!/usr/bin/env python3
"""Reproduce the pool-size study on the synthetic benchmark: MAE at
coverages 0/25/45/65/85% for every configured horizon and retriever.

Usage: python scripts/run_pool_sweep.py --config data/benchmark_config.yaml
"""

import argparse

from rafkit.config import load_config
from rafkit.harness import sweep_pool_size

COVERAGES = (0.0, 0.25, 0.45, 0.65, 0.85)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", required=True)
    parser.add_argument(
        "--coverages",
        default=",".join(str(c) for c in COVERAGES),
        help="comma-separated dataset fractions",
    )
    args = parser.parse_args()

    cfg = load_config(args.config)
    coverages = tuple(float(c) for c in args.coverages.split(","))
    rows = sweep_pool_size(cfg, coverages)
    print(f"wrote {cfg.out_dir / 'sweep.csv'}")
    by_key = {}
    for row in rows:
        key = (row["lead_time"], row["retriever"])
        by_key.setdefault(key, []).append((row["coverage"], row["mae"]))
    for (lead, retriever), curve in sorted(by_key.items()):
        pts = "  ".join(f"{c:g}:{m:.4f}" for c, m in sorted(curve))
        print(f"h={lead:>2} {retriever:<20} {pts}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
