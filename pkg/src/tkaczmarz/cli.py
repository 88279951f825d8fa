"""Command-line entry point.

Exit status: 0 on success, 1 on invalid arguments or validation errors,
2 on I/O errors (including malformed tensor files).
"""
import argparse
import logging
import sys

from . import io
from .harness import ExperimentSpec, run_experiment
from .objectives import elastic_net_objective, frobenius_objective
from .selftest import oracle_agreement
from .solvers import default_stepsizes, theoretical_rates
from .spectral import pinv_apply

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _experiment_flags(p, kind):
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--n3", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-factor", type=float, default=1.5)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="elastic-net weight (sparse only)")
    p.add_argument("--noise-scale", type=float, default=0.1)
    p.add_argument("--algos", help="comma-separated subset of trk,trek,rrk,rrek")
    p.add_argument("--log-every", type=int)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--dump-dir", help="write A, B, reference and final iterates as .tt3 files")
    p.set_defaults(kind=kind)


def build_parser():
    parser = _Parser(prog="tkaczmarz",
                     description="Randomized Kaczmarz solvers for tensor t-product systems.",
                     epilog="exit status: 0 ok, 1 invalid input, 2 I/O error")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _experiment_flags(sub.add_parser("lsq", help="tensor least-squares experiment (TRK vs TREK)"),
                      "least_squares")
    _experiment_flags(sub.add_parser("sparse", help="sparse recovery experiment (RRK vs RREK)"),
                      "sparse_recovery")

    rates = sub.add_parser("rates", help="print step-size constants and convergence rates")
    rates.add_argument("tensor", help=".tt3 file holding A")
    rates.add_argument("--alpha-r", type=float)
    rates.add_argument("--alpha-c", type=float)
    rates.add_argument("--step-factor", type=float, default=1.5)
    rates.add_argument("--lambda", dest="lam", type=float,
                       help="use the elastic-net objective with this weight")
    rates.add_argument("--nu", type=float, help="error-bound constant (elastic net only)")
    rates.add_argument("--delta", type=float)

    pinv = sub.add_parser("pinv", help="apply the t-pseudoinverse of A to B")
    pinv.add_argument("a", help=".tt3 file holding A")
    pinv.add_argument("b", help=".tt3 file holding B")
    pinv.add_argument("--out", required=True)
    pinv.add_argument("--rel-tol", type=float, default=1e-10)

    st = sub.add_parser("selftest", help="check fast routes against the dense oracle")
    st.add_argument("--instances", type=int, default=100)
    st.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_experiment(args, out):
    algos = tuple(a.strip() for a in args.algos.split(",")) if args.algos else None
    spec = ExperimentSpec(
        args.kind, n1=args.n1, n2=args.n2, n3=args.n3, k=args.k, noise_scale=args.noise_scale,
        lam=args.lam, trials=args.trials, max_iters=args.max_iters, seed=args.seed,
        step_factor=args.step_factor, algorithms=algos, tol=args.tol, log_every=args.log_every,
    )
    result = run_experiment(spec, out=args.out, dump_dir=args.dump_dir)
    if not args.out:
        out.write(result.csv_text())
    for algo in spec.algorithms:
        print(f"{algo}: final mean relative error {result.mean_relerr[algo][-1]:.6e}", file=sys.stderr)
    return EXIT_OK


def _cmd_rates(args, out):
    a = io.read_tensor(args.tensor)
    obj = frobenius_objective() if args.lam is None else elastic_net_objective(args.lam)
    if args.alpha_r is None or args.alpha_c is None:
        ar, ac = default_stepsizes(a, obj, args.step_factor)
    alpha_r = ar if args.alpha_r is None else args.alpha_r
    alpha_c = ac if args.alpha_c is None else args.alpha_c
    rep = theoretical_rates(a, obj, alpha_r, alpha_c, nu=args.nu, delta=args.delta)
    for name in ("lambda_r", "lambda_c", "sigma_min", "fro_norm_sq", "alpha_r", "alpha_c",
                 "gamma", "nu", "rho_c", "rho_r", "delta", "combined_rate"):
        val = getattr(rep, name)
        out.write(f"{name} = {'n/a' if val is None else format(val, '.17g')}\n")
    return EXIT_OK


def _cmd_pinv(args, out):
    x = pinv_apply(io.read_tensor(args.a), io.read_tensor(args.b), args.rel_tol)
    io.write_tensor(args.out, x)
    return EXIT_OK


def _cmd_selftest(args, out):
    checks = oracle_agreement(args.instances, args.seed)
    for c in checks:
        out.write(c.line() + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


_COMMANDS = {"lsq": _cmd_experiment, "sparse": _cmd_experiment, "rates": _cmd_rates,
             "pinv": _cmd_pinv, "selftest": _cmd_selftest}


def main(argv=None, out=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = out or sys.stdout
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args, out)
    except io.TensorFileError as exc:
        print(f"tkaczmarz: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"tkaczmarz: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"tkaczmarz: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
