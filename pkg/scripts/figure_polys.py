"""Write p, q, r curves and root markers for the three reference parameter sets as CSV files."""

import argparse
import json
import sys
from pathlib import Path

from bltinv.cli import main

SETS = {
    "d5_lt1": {"alpha": [0.2, 0.15, 0.1, 0.1, 0.1], "lambda": [0.9, 0.8, 0.7, 0.6, 0.5]},
    "d5_gt1": {"alpha": [0.2, 0.15, 0.2, 0.2, 0.2], "lambda": [0.9, 0.8, 0.7, 0.6, 0.5]},
    "d4_lt1": {"alpha": [0.25, 0.2, 0.15, 0.1], "lambda": [0.9, 0.8, 0.7, 0.6]},
}


def run(out_dir: Path, grid: str) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, params in SETS.items():
        src = out_dir / f"{name}.json"
        src.write_text(json.dumps(params))
        with open(out_dir / f"{name}.csv", "w") as fh:
            code = main(["plot-polys", "--input", str(src), f"--grid={grid}"], stdout=fh)
        if code:
            return code
        print(f"wrote {out_dir / (name + '.csv')}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("figure_data"))
    ap.add_argument("--grid", default="-3:6:361")
    args = ap.parse_args()
    sys.exit(run(args.out, args.grid))
