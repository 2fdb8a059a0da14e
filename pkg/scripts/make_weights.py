#!/usr/bin/env python3
"""Write a weight file for the detection network.

The network ships without trained parameters; this produces either a
seeded random store (uniform(-0.05, 0.05) conv/fc entries, mildly
perturbed batch-norm statistics) for exercising the forward path, or an
all-zero store with identity normalization for the constant-0.5 check.

    python3 scripts/make_weights.py --out weights.cspw --channels 16 --seed 7
    python3 scripts/make_weights.py --out zero.cspw --channels 8 --zero
"""

import argparse

from istdkit.network import NetworkConfig, init_random_store, init_zero_store
from istdkit.weights import save_weights


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--channels", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--zero", action="store_true",
                    help="all-zero weights with identity batch norm")
    args = ap.parse_args()

    cfg = NetworkConfig(base_channels=args.channels)
    store = init_zero_store(cfg) if args.zero else init_random_store(cfg, args.seed)
    save_weights(store, args.out)
    print(f"wrote {len(store.entries)} tensors (C={args.channels}) to {args.out}")


if __name__ == "__main__":
    main()
