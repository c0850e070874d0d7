"""Generate random strict-valid parameter files (and their inverses) for CLI checks."""

import argparse
import json
from pathlib import Path

import numpy as np

from bltinv import invert_params
from bltinv.poly import Regime
from bltinv.sampling import random_params

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--count", type=int, default=1)
    ap.add_argument("--regime", choices=[r.value for r in Regime], default="LT1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("vectors"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        p = random_params(rng, args.d, Regime(args.regime))
        stem = args.out / f"d{args.d}_{args.regime.lower()}_{k:03d}"
        Path(f"{stem}.json").write_text(json.dumps(p.to_dict()))
        Path(f"{stem}.inverse.json").write_text(json.dumps(invert_params(p).to_dict()))
        print(f"{stem}.json")
