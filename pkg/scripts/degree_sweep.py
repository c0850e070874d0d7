"""Optimize the max loss for several degrees at one horizon and print the best losses."""

import argparse
import time

from bltinv.opt import OptConfig, optimize

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--degrees", default="1,2,3,4")
    ap.add_argument("--steps", type=int, default=1500)
    ap.add_argument("--lr", type=float, default=0.02)
    ap.add_argument("--objective", default="max")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("d,loss,grad_norm,best_step,seconds")
    for d in (int(v) for v in args.degrees.split(",")):
        t0 = time.perf_counter()
        cfg = OptConfig(d=d, n=args.n, steps=args.steps, learning_rate=args.lr,
                        objective=args.objective, seed=args.seed)
        best, inv, trace = optimize(cfg)
        print(f"{d},{trace.best_loss:.6f},{trace.best_grad_norm:.3e},{trace.best_step},"
              f"{time.perf_counter() - t0:.1f}")
