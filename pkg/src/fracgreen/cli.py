"""Command-line front end: ``fracgreen {eval,solve,verify,scan} ...``.

Exit codes: 0 success, 1 a verification failed, 2 the Picard iteration
diverged, 64 bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Sequence

import numpy as np

from .bounds import check_two_sided_bound, g3_positivity_threshold
from .errors import DivergenceError, FracGreenError
from .greens import BcCoeffs, Family, KernelSpec, OrderSet
from .solver import (RhsFn, ThreePointParams, ThreePointSpec, solve_linear,
                     solve_nonlinear_picard, solve_threepoint)
from .verify import (FAULTS, check_positivity, check_symmetry_lidstone, nonlinear_forcing,
                     run_suite, verify_bcs, verify_residual)

EXIT_OK, EXIT_FAIL, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2, 64

FAMILIES = [f.value for f in Family] + ["threepoint"]
NONLINEAR = {
    "one": lambda t, x: np.ones_like(np.asarray(x, float)),
    "x": lambda t, x: np.asarray(x, float),
    "onepluxsq": lambda t, x: 1.0 + np.asarray(x, float) ** 2,
}
SCAN_PARAMS = ("alpha", "beta", "gamma", "delta", "tau")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    return "%.17g" % v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=FAMILIES, required=True)
    for name in ("alpha", "beta", "gamma", "delta"):
        common.add_argument(f"--{name}", type=float, default=1.0, help=f"order {name} in (0, 1]")
    common.add_argument("--tau", type=float, help="interior point of rightfocal3")
    for name in ("gamma-bc", "delta-bc", "eta-bc", "zeta-bc"):
        common.add_argument(f"--{name}", type=float, help="sl2 boundary coefficient")
    common.add_argument("--delta3p", type=float, help="threepoint: delta in delta*x(eta) = x(1)")
    common.add_argument("--eta3p", type=float, help="threepoint: eta in (0, 1)")
    common.add_argument("--n", type=int, help="grid or mesh size (>= 3)")
    common.add_argument("--tol", type=float, default=1e-4, help="verification tolerance")
    common.add_argument("--out", help="write to this path instead of stdout")

    p = _Parser(prog="fracgreen", description="Green's functions of conformable boundary value problems.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("eval", parents=[common], help="kernel values on an n x n grid")

    s = sub.add_parser("solve", parents=[common], help="solve on a mesh, CSV t,x")
    s.add_argument("--h", default="one", help="forcing: one | poly:c0,c1,...")
    s.add_argument("--nonlinear", action="store_true", help="Picard iteration on lambda*f(t,x)")
    s.add_argument("--f", choices=sorted(NONLINEAR), default="x")
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--picard-tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=100)

    v = sub.add_parser("verify", parents=[common], help="run the check suite")
    v.add_argument("--h", default="one", help="forcing: one | poly:c0,c1,...")
    v.add_argument("--fault", choices=FAULTS, help="inject a deliberate error")

    c = sub.add_parser("scan", parents=[common], help="kernel checks while sweeping one parameter")
    c.add_argument("--param", choices=SCAN_PARAMS, required=True)
    c.add_argument("--start", type=float, required=True)
    c.add_argument("--stop", type=float, required=True)
    c.add_argument("--steps", type=int, default=11)
    return p


def parse_forcing(text: str):
    if text == "one":
        return lambda s: np.ones_like(np.asarray(s, float))
    if text.startswith("poly:"):
        try:
            coef = [float(c) for c in text[5:].split(",") if c.strip()]
        except ValueError:
            raise UsageError(f"bad polynomial coefficients in {text!r}") from None
        if not coef:
            raise UsageError("poly: needs at least one coefficient")
        return lambda s: np.polynomial.polynomial.polyval(np.asarray(s, float), coef)
    raise UsageError(f"unknown forcing {text!r}; use one or poly:c0,c1,...")


def make_spec(args, **override) -> KernelSpec | ThreePointSpec:
    vals = {k: getattr(args, k) for k in ("alpha", "beta", "gamma", "delta", "tau")}
    vals.update(override)
    if args.family == "threepoint":
        if args.delta3p is None or args.eta3p is None:
            raise UsageError("threepoint needs --delta3p and --eta3p")
        return ThreePointSpec(vals["alpha"], vals["beta"], ThreePointParams(args.delta3p, args.eta3p))
    bc = None
    if args.family == Family.SL2.value:
        raw = [args.gamma_bc, args.delta_bc, args.eta_bc, args.zeta_bc]
        if any(v is None for v in raw):
            raise UsageError("sl2 needs --gamma-bc --delta-bc --eta-bc --zeta-bc")
        bc = BcCoeffs(*raw)
    if args.family == Family.RIGHTFOCAL3.value and vals["tau"] is None:
        raise UsageError("rightfocal3 needs --tau")
    orders = OrderSet(vals["alpha"], vals["beta"], vals["gamma"], vals["delta"])
    return KernelSpec(args.family, orders, tau=vals["tau"], bc=bc)


def _size(args, default: int) -> int:
    n = default if args.n is None else args.n
    if n < 3:
        raise UsageError("--n must be at least 3")
    return n


def _warn_tau(spec) -> None:
    if isinstance(spec, KernelSpec) and spec.family is Family.RIGHTFOCAL3:
        thr = g3_positivity_threshold(spec.orders.alpha, spec.orders.beta)
        if spec.tau <= thr:
            print(f"warning: tau={spec.tau:g} is below the positivity threshold {thr:.6g}",
                  file=sys.stderr)


def cmd_eval(args, out) -> int:
    spec = make_spec(args)
    if isinstance(spec, ThreePointSpec):
        raise UsageError("threepoint has no kernel to evaluate; use solve")
    _warn_tau(spec)
    grid = np.linspace(0.0, 1.0, _size(args, 11))
    T, S = np.meshgrid(grid, grid, indexing="ij")
    G = np.asarray(spec(T, S), float)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "s", "G"])
    for t, s, g in zip(T.ravel(), S.ravel(), G.ravel()):
        w.writerow([_fmt(t), _fmt(s), _fmt(g)])
    return EXIT_OK


def cmd_solve(args, out) -> int:
    spec = make_spec(args)
    mesh = np.linspace(0.0, 1.0, _size(args, 257))
    if args.nonlinear:
        if isinstance(spec, ThreePointSpec):
            raise UsageError("the nonlinear solve needs a kernel family")
        rhs = RhsFn(NONLINEAR[args.f], args.lam)
        rep = solve_nonlinear_picard(spec, rhs, tol=args.picard_tol,
                                     max_iter=args.max_iter, mesh=mesh)
        x = rep.solution
        h = nonlinear_forcing(rhs, x)
        note = f"iterations={rep.iterations} converged={rep.converged}"
    else:
        h = parse_forcing(args.h)
        if isinstance(spec, ThreePointSpec):
            x = solve_threepoint(h, spec.alpha, spec.beta, spec.params, mesh)
        else:
            x = solve_linear(spec, h, mesh)
        note = "linear"
    res = verify_residual(x, h, spec, tol=args.tol)
    bcs = verify_bcs(x, spec, tol=args.tol)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "x"])
    for t, v in zip(x.mesh, x.values):
        w.writerow([_fmt(t), _fmt(v)])
    out.write(f"# {note} residual={res.worst_magnitude:.3e} "
              f"boundary={bcs.worst_magnitude:.3e} tol={args.tol:.1e} "
              f"{'pass' if res.passed and bcs.passed else 'fail'}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    spec = make_spec(args)
    _warn_tau(spec)
    reports = run_suite(spec, parse_forcing(args.h), tol=args.tol, fault=args.fault)
    for r in reports:
        out.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _kernel_reports(spec: KernelSpec):
    reps = [check_positivity(spec)]
    if spec.family.second_order or spec.family is Family.RIGHTFOCAL3:
        reps.append(check_two_sided_bound(spec))
    if spec.family is Family.LIDSTONE4:
        reps.append(check_symmetry_lidstone(spec.orders.alpha, spec.orders.beta))
    return reps


def cmd_scan(args, out) -> int:
    if args.family == "threepoint":
        raise UsageError("scan sweeps kernel checks; threepoint has no kernel")
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    w = csv.writer(out, lineterminator="\n")
    w.writerow([args.param, "property", "pass", "magnitude", "tolerance"])
    ok = True
    for value in np.linspace(args.start, args.stop, args.steps):
        spec = make_spec(args, **{args.param: float(value)})
        for r in _kernel_reports(spec):
            ok &= r.passed
            w.writerow([_fmt(value), r.property_name, "pass" if r.passed else "fail",
                        _fmt(r.worst_magnitude), _fmt(r.tolerance_used)])
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"eval": cmd_eval, "solve": cmd_solve, "verify": cmd_verify, "scan": cmd_scan}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.tol > 0:
        parser.error("--tol must be positive")
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except DivergenceError as e:
        print(f"fracgreen: diverged after {e.history_length} iterations: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (UsageError, FracGreenError) as e:
        print(f"fracgreen: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
