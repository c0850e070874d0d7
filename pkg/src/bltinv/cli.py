"""Command-line front end.

Every command reads parameter JSON ({"alpha": [...], "lambda": [...]}) from
--input (a file, or - for stdin) and writes only its payload to stdout.
Exit codes: 0 ok, 1 unparseable input or flags, 2 invalid parameters,
3 numerical failure or failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import blt, genfun, loss, poly, stream
from .blt import BltParams, InverseBltParams
from .errors import BltError, InvalidParams, InversionFailure
from .poly import Regime

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}", EXIT_PARSE)


def _read_json(path: str, stdin=None):
    try:
        if path == "-":
            text = (stdin or sys.stdin).read()
        else:
            with open(path) as fh:
                text = fh.read()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read JSON from {path}: {exc}", EXIT_PARSE) from exc


def _load_params(args, stdin=None) -> BltParams:
    obj = _read_json(args.input, stdin)
    try:
        return BltParams.from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"parameter JSON needs numeric 'alpha' and 'lambda' lists of equal length: {exc}",
                       EXIT_PARSE) from exc


def _require_strict(params: BltParams) -> Regime:
    rep = blt.validate(params, "strict")
    if not rep.valid:
        raise CliError("invalid parameters: " + "; ".join(rep.violations), EXIT_INVALID)
    return rep.regime


def _invert(params: BltParams) -> InverseBltParams:
    _require_strict(params)
    try:
        return blt.invert_params(params)
    except InvalidParams as exc:
        raise CliError(f"invalid parameters: {exc}", EXIT_INVALID) from exc
    except InversionFailure as exc:
        raise CliError(f"inversion failed: {exc}", EXIT_NUMERIC) from exc


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"--n expects a comma separated list of integers, got {text!r}", EXIT_PARSE) from exc
    if not vals or min(vals) < 1:
        raise CliError("--n values must be positive", EXIT_PARSE)
    return vals


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError as exc:
        raise CliError(f"--grid expects LO:HI:STEPS, got {text!r}", EXIT_PARSE) from exc
    if steps < 2 or not hi > lo:
        raise CliError("--grid needs HI > LO and STEPS >= 2", EXIT_PARSE)
    return np.linspace(lo, hi, steps)


def _emit(payload, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    for key, val in payload.items():
        w.writerow([key, *val] if isinstance(val, list) else [key, val])


def cmd_invert(args, out, stdin=None) -> int:
    inv = _invert(_load_params(args, stdin))
    _emit(inv.to_dict(), args.format, out)
    return EXIT_OK


def verify_report(params: BltParams, inv: InverseBltParams, sizes, tol: float) -> dict:
    """Residuals of the claimed inverse plus the structural checks on it."""
    p = params.canonical()
    report = {"regime": blt.regime_of(p).value, "tol": tol, "product_residual": {}}
    for n in sizes:
        e = np.zeros(n)
        e[0] = 1.0
        report["product_residual"][str(n)] = genfun.series_product_check(
            blt.toeplitz_coeffs(p, n), blt.toeplitz_coeffs(inv, n), e)
    lh = np.sort(inv.lambda_hat)[::-1]
    chain = np.empty(2 * p.d)
    chain[0::2], chain[1::2] = p.lam, lh
    report["interlacing"] = bool(np.all(np.diff(chain) < 0))
    regime = Regime(report["regime"])
    if regime is Regime.LT1:
        placed = bool(np.all((lh > 0) & (lh < 1)))
    elif regime is Regime.EQ1:
        placed = bool(abs(lh[-1]) <= 1e-9 and np.all((lh[:-1] > 0) & (lh[:-1] < 1)))
    else:
        placed = bool(np.sum((lh > -1) & (lh < 0)) == 1 and np.all((lh[:-1] > 0) & (lh[:-1] < 1)))
    report["decay_placement"] = placed
    report["negative_scales"] = bool(np.all(inv.alpha_hat < 0))
    report["scale_sum_residual"] = float(abs(inv.alpha_hat.sum() + p.alpha.sum()))
    if np.all(inv.lambda_hat != 0):
        report["identity_residual"] = float(abs(np.sum(inv.alpha_hat / inv.lambda_hat)
                                                 + np.prod(p.lam) / np.prod(inv.lambda_hat) - 1.0))
    else:
        report["identity_residual"] = None
    residuals = list(report["product_residual"].values()) + [report["scale_sum_residual"]]
    if report["identity_residual"] is not None:
        residuals.append(report["identity_residual"])
    report["ok"] = bool(max(residuals) <= tol and report["interlacing"] and placed and report["negative_scales"])
    return report


def cmd_verify(args, out, stdin=None) -> int:
    params = _load_params(args, stdin)
    inv = _invert(params)
    if args.expect:
        try:
            inv = InverseBltParams.from_dict(_read_json(args.expect))
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"--expect needs 'alpha_hat' and 'lambda_hat' lists: {exc}", EXIT_PARSE) from exc
        if inv.d != params.d:
            raise CliError(f"--expect has degree {inv.d}, parameters have {params.d}", EXIT_PARSE)
    report = verify_report(params, inv, _int_list(args.n), args.tol)
    _emit(report, "json", out)
    return EXIT_OK if report["ok"] else EXIT_NUMERIC


def cmd_coeffs(args, out, stdin=None) -> int:
    params = _load_params(args, stdin)
    n = max(_int_list(args.n))
    payload = {"c": blt.toeplitz_coeffs(params, n).tolist()}
    if blt.validate(params, "strict").valid:
        payload["c_inv"] = blt.toeplitz_coeffs(_invert(params), n).tolist()
    else:
        if not blt.validate(params, "lenient").valid:
            raise CliError("invalid parameters: " + "; ".join(blt.validate(params, "lenient").violations),
                           EXIT_INVALID)
        payload["c_inv"] = loss.inverse_column(params, n).tolist()
    _emit(payload, args.format, out)
    return EXIT_OK


def _load_workload(path: str | None, n: int) -> loss.WorkloadSpec:
    if path is None:
        return loss.WorkloadSpec.prefix_sum(n)
    try:
        return loss.WorkloadSpec.explicit(np.array(_read_json(path), dtype=float))
    except (TypeError, ValueError) as exc:
        raise CliError(f"workload file must hold a square lower-triangular matrix: {exc}", EXIT_INVALID) from exc


def cmd_loss(args, out, stdin=None) -> int:
    params = _load_params(args, stdin)
    rep = blt.validate(params, "lenient")
    if not rep.valid:
        raise CliError("invalid parameters: " + "; ".join(rep.violations), EXIT_INVALID)
    n = max(_int_list(args.n))
    wl = _load_workload(args.workload, n)
    _emit(loss.max_loss(params, wl).to_dict(), args.format, out)
    return EXIT_OK


def cmd_optimize(args, out, stdin=None) -> int:
    from .opt import OptConfig, optimize

    cfg = OptConfig(d=args.d, n=max(_int_list(args.n)), objective=args.objective, steps=args.steps,
                    learning_rate=args.lr, seed=args.seed, method=args.method)
    best, inv, trace = optimize(cfg)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_jsonl() + "\n")
    payload = {**best.to_dict(), **inv.to_dict(), "loss": trace.best_loss, "grad_norm": trace.best_grad_norm,
               "best_step": trace.best_step}
    _emit(payload, "json", out)
    return EXIT_OK


def cmd_stream_demo(args, out, stdin=None) -> int:
    params = _load_params(args, stdin)
    inv = _invert(params)
    n = max(_int_list(args.n))
    cfg = stream.NoiseConfig(sigma=args.sigma, sensitivity=loss.sensitivity(params, n), seed=args.seed, m=args.m)
    rows = np.array(list(stream.noise_rows(inv, cfg, n)))
    if args.dump:
        stream.write_rows(args.dump, rows)
    if args.format == "json":
        out.write(json.dumps({"rows": rows.tolist()}) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"z{j}" for j in range(args.m)])
        w.writerows(rows.tolist())
    return EXIT_OK


def poly_markers(params: BltParams) -> list[tuple[str, int, float, float]]:
    """(kind, index, location, value) rows: mu_i with beta_i = p(mu_i), and the roots nu_i of r."""
    p = params.canonical()
    regime = blt.regime_of(p)
    pp = poly.build_p(p.alpha, p.lam)
    q = poly.build_q(p.lam)
    r = poly.build_r(pp, q, trim=False)
    if regime is Regime.EQ1:
        r = poly.Polynomial(r.coeffs[:-1])
    mu = np.sort(1.0 / p.lam)
    rows = [("mu", i + 1, float(m), float(pp(m))) for i, m in enumerate(mu)]
    lh = blt.invert_params(p).lambda_hat
    nu = np.sort(1.0 / lh[lh != 0])
    rows += [("nu", i + 1, float(v), float(poly.evaluate_compensated(r, v))) for i, v in enumerate(nu)]
    return rows


def cmd_plot_polys(args, out, stdin=None) -> int:
    params = _load_params(args, stdin)
    _require_strict(params)
    p = params.canonical()
    xs = _grid(args.grid)
    pp = poly.build_p(p.alpha, p.lam)
    q = poly.build_q(p.lam)
    r = poly.build_r(pp, q)
    try:
        markers = poly_markers(p)
    except InversionFailure as exc:
        raise CliError(f"root finding failed: {exc}", EXIT_NUMERIC) from exc
    if args.format == "json":
        payload = {"x": xs.tolist(), "p": pp(xs).tolist(), "q": q(xs).tolist(), "r": r(xs).tolist(),
                   "markers": [{"kind": k, "index": i, "x": x, "value": v, "sign": int(np.sign(v)) if k == "mu" else None}
                               for k, i, x, v in markers]}
        out.write(json.dumps(payload) + "\n")
        return EXIT_OK
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "p", "q", "r"])
    for row in zip(xs, pp(xs), q(xs), r(xs)):
        w.writerow([repr(float(v)) for v in row])
    out.write("\n")
    w.writerow(["kind", "index", "x", "value", "sign"])
    for k, i, x, v in markers:
        # mu rows carry beta_i = p(mu_i) and its sign; nu rows carry the residual r(nu_i)
        sign = ("+" if v > 0 else "-" if v < 0 else "0") if k == "mu" else ""
        w.writerow([k, i, repr(x), repr(v), sign])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bltinv", description="Invert, check and optimize buffered linear Toeplitz matrices.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, n_default="64", fmt=("json", "csv")):
        sp.add_argument("--input", default="-", help="parameter JSON file, or - for stdin")
        sp.add_argument("--n", default=n_default, help="size or comma separated sizes")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        return sp

    sp = common(sub.add_parser("invert", help="print the inverse parameters"))
    sp.set_defaults(func=cmd_invert)
    sp = common(sub.add_parser("verify", help="check an inverse against the identity and structure"),
                n_default="1,2,7,64,512", fmt=("json",))
    sp.add_argument("--expect", help="inverse JSON to verify instead of the computed one")
    sp.set_defaults(func=cmd_verify)
    sp = common(sub.add_parser("coeffs", help="first column of C and of its inverse"))
    sp.set_defaults(func=cmd_coeffs)
    sp = common(sub.add_parser("loss", help="sensitivity and max/Frobenius loss"))
    sp.add_argument("--workload", help="JSON square lower-triangular matrix (default: prefix sums)")
    sp.set_defaults(func=cmd_loss)
    sp = common(sub.add_parser("optimize", help="optimize parameters for a horizon"), fmt=("json",))
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--lr", type=float, default=0.02)
    sp.add_argument("--objective", choices=("max", "frobenius", "softmax"), default="max")
    sp.add_argument("--method", choices=("momentum", "adam"), default="momentum")
    sp.add_argument("--trace", help="write the per-iteration trace as JSON lines")
    sp.set_defaults(func=cmd_optimize)
    sp = common(sub.add_parser("stream-demo", help="stream correlated noise rows"), n_default="8",
                fmt=("csv", "json"))
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--dump", help="also write the rows as a binary dump")
    sp.set_defaults(func=cmd_stream_demo)
    sp = common(sub.add_parser("plot-polys", help="p, q, r on a grid plus root markers"), fmt=("csv", "json"))
    sp.add_argument("--grid", default="-3:6:181")
    sp.set_defaults(func=cmd_plot_polys)
    return ap


def main(argv=None, stdout=None, stdin=None) -> int:
    out = stdout or sys.stdout
    buf = io.StringIO()
    try:
        args = build_parser().parse_args(argv)
        code = args.func(args, buf, stdin)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except InvalidParams as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BltError as exc:
        code = EXIT_INVALID if isinstance(exc, ValueError) else EXIT_NUMERIC
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    # nothing reaches stdout unless the command finished
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
