"""Command-line entry point: ``extremal-gamma {norming,cdf,moments,simulate,verify}``.

Data goes to stdout (or ``--output``), logs to stderr. Exit codes: 0 success,
1 verification failed, 2 numeric or regime error, 3 resource budget
exceeded, 64 usage error.
"""

import argparse
import contextlib
import json
import logging
import math
import os
import sys

from .errors import (
    ConvergenceError,
    DomainError,
    RegimeError,
    ResourceError,
    UnsupportedOperation,
    UsageError,
)
from .family import parse_family
from .limits import cdf, moment, parse_law
from .norming import dirichlet_norming, gamma_norming
from .sampling import check_budget, simulate_batch, write_batch_csv
from .verify import SuiteSpec, convergence_suite

EXIT_OK, EXIT_FAIL, EXIT_NUMERIC, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 3, 64

log = logging.getLogger("extremal_gamma")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    return format(float(v), ".17g")


def _clean(obj):
    """Make an object JSON-safe: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _dump_json(obj):
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _flatten(obj, prefix=""):
    """Nested dict to ``(dotted.key, value)`` pairs for key,value CSV output."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _cell(v):
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, float)):
        return _fmt(v) if isinstance(v, float) else str(v)
    text = str(v)
    return f'"{text.replace(chr(34), chr(34) * 2)}"' if any(ch in text for ch in ',"\n') else text


def _write_record(out, record, fmt):
    if fmt == "csv":
        out.write("key,value\n")
        for key, value in _flatten(_clean(record)):
            out.write(f"{_cell(key)},{_cell(value)}\n")
    else:
        out.write(_dump_json(record))


def _write_table(out, header, rows, fmt):
    if fmt == "json":
        out.write(_dump_json([dict(zip(header, row)) for row in rows]))
        return
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_cell(v) for v in row) + "\n")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _int_list(text):
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_common(p, with_n=True):
    p.add_argument("--config", help="JSON file with defaults for any of these flags")
    p.add_argument("--model", choices=("gamma", "dirichlet"))
    p.add_argument("--family", help="shape family: 'c,p,q', 'c*n^p*logn^q' or JSON")
    p.add_argument("--beta", help="Dirichlet remainder family, same formats as --family")
    if with_n:
        p.add_argument("--n", type=float)
    p.add_argument("--output", "-o", help="write data here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser():
    parser = _Parser(prog="extremal-gamma", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norming", help="norming constants and limit law for a family")
    _add_common(p)

    p = sub.add_parser("cdf", help="evaluate a limit-law CDF")
    p.add_argument("--config")
    p.add_argument("--law", help="gumbel | falpha:A | uniform01 | ulambda:L | h:A,B")
    p.add_argument("--x", action="append", help="evaluation point(s), repeatable or comma-separated")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("moments", help="raw moments of a limit law (the way to query H)")
    p.add_argument("--config")
    p.add_argument("--law")
    p.add_argument("--k-max", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("simulate", help="Monte Carlo batch of normalized maxima (CSV)")
    _add_common(p)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("verify", help="run a convergence suite and report")
    _add_common(p)
    p.add_argument("--n-grid", help="comma-separated n values")
    p.add_argument("--grid", help="comma-separated evaluation points for the limit CDF")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--track", choices=("exact", "mc"))
    p.add_argument("--k-max", type=int)
    p.add_argument("--exact-tol", type=float)
    p.add_argument("--ks-tol", type=float)
    p.add_argument("--z-tol", type=float)
    p.add_argument("--monotone-slack", type=float)
    p.add_argument("--emit-plot-data", metavar="DIR")
    return parser


def _apply_config(args):
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest) is None:
            if dest in ("family", "beta", "law") and isinstance(value, dict):
                value = json.dumps(value)
            elif dest in ("n_grid", "grid", "x") and isinstance(value, list):
                value = ",".join(str(v) for v in value)
                if dest == "x":
                    value = [value]
            setattr(args, dest, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _check_n(n):
    if n is None or n != int(n) or n < 3:
        raise UsageError(f"n must be an integer >= 3, got {n!r}")
    return int(n)


def _families(args):
    _require(args, "family")
    shape = parse_family(args.family)
    beta = parse_family(args.beta) if args.beta is not None else None
    model = args.model or ("dirichlet" if beta is not None else "gamma")
    if model == "dirichlet" and beta is None:
        raise UsageError("--beta is required for the Dirichlet model")
    if model == "gamma" and beta is not None:
        raise UsageError("--beta only applies to the Dirichlet model")
    return model, shape, beta


def cmd_norming(args):
    model, shape, beta = _families(args)
    n = _check_n(args.n)
    result = gamma_norming(n, shape) if model == "gamma" else dirichlet_norming(n, shape, beta)
    with _output(args.output) as out:
        _write_record(out, result.to_dict(), args.format or "json")
    return EXIT_OK


def cmd_cdf(args):
    _require(args, "law", "x")
    law = parse_law(args.law)
    xs = [v for chunk in args.x for v in _float_list(chunk)]
    rows = [(x, cdf(law, x)) for x in xs]
    with _output(args.output) as out:
        _write_table(out, ("x", "cdf"), rows, args.format or "csv")
    return EXIT_OK


def cmd_moments(args):
    _require(args, "law")
    law = parse_law(args.law)
    k_max = args.k_max or 3
    if k_max < 1:
        raise UsageError("--k-max must be >= 1")
    rows = [(k, moment(law, k)) for k in range(1, k_max + 1)]
    with _output(args.output) as out:
        _write_table(out, ("k", "moment"), rows, args.format or "csv")
    return EXIT_OK


def cmd_simulate(args):
    model, shape, beta = _families(args)
    _require(args, "seed")
    n = _check_n(args.n)
    replicates = args.replicates if args.replicates is not None else 1000
    workers = args.workers or 1
    if replicates < 1 or workers < 1:
        raise UsageError("--replicates and --workers must be >= 1")
    check_budget(n, replicates)
    norming = gamma_norming(n, shape) if model == "gamma" else dirichlet_norming(n, shape, beta)
    values = simulate_batch(model, shape, beta, n, replicates, args.seed, workers, norming)
    # workers is left out of the echo: it must not change the output bytes.
    meta = {
        "model": model,
        "family": shape.to_string(),
        "beta": beta.to_string() if beta is not None else None,
        "n": n,
        "replicates": replicates,
        "seed": args.seed,
        "transform": json.dumps(norming.transform.to_dict(), sort_keys=True),
        "c_n": _fmt(norming.c_n),
        "d_n": _fmt(norming.d_n),
        "limit": json.dumps(_clean(norming.limit.to_dict()), sort_keys=True),
    }
    with _output(args.output) as out:
        if (args.format or "csv") == "json":
            out.write(_dump_json({"config": meta, "statistic": [float(v) for v in values]}))
        else:
            for key, value in meta.items():
                out.write(f"# {key}: {value}\n")
            write_batch_csv(out, values)
    return EXIT_OK


def cmd_verify(args):
    model, shape, beta = _families(args)
    if args.n_grid is not None:
        n_grid = _int_list(args.n_grid)
    elif args.n is not None:
        n_grid = [args.n]
    else:
        raise UsageError("--n-grid or --n is required")
    if not n_grid:
        raise UsageError("n grid must not be empty")
    n_grid = [_check_n(n) for n in n_grid]
    track = args.track or ("exact" if model == "gamma" else "mc")
    if track == "mc":
        _require(args, "seed")
        replicates = args.replicates if args.replicates is not None else 10_000
        for n in n_grid:
            check_budget(n, replicates)
    else:
        replicates = args.replicates
    tolerances = {
        key: getattr(args, key)
        for key in ("exact_tol", "ks_tol", "z_tol", "monotone_slack")
        if getattr(args, key) is not None
    }
    spec = SuiteSpec(
        model=model,
        shape=shape,
        beta=beta,
        n_grid=n_grid,
        grid=_float_list(args.grid) if args.grid else None,
        replicates=replicates,
        seed=args.seed,
        workers=args.workers or 1,
        track=track,
        k_max=args.k_max or 3,
        tolerances=tolerances,
    )
    plot_rows = {} if args.emit_plot_data else None
    report = convergence_suite(spec, plot_rows)
    if plot_rows:
        os.makedirs(args.emit_plot_data, exist_ok=True)
        for n, rows in plot_rows.items():
            with open(os.path.join(args.emit_plot_data, f"n_{n}.csv"), "w", newline="") as fh:
                fh.write("x,ecdf,limit_cdf\n")
                for x, e, f in rows:
                    fh.write(f"{_fmt(x)},{_fmt(e)},{_fmt(f)}\n")
    with _output(args.output) as out:
        _write_record(out, report.to_dict(), args.format or "json")
    return EXIT_OK if report.monotone_pass and report.final_pass else EXIT_FAIL


COMMANDS = {
    "norming": cmd_norming,
    "cdf": cmd_cdf,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except UnsupportedOperation as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RegimeError, ConvergenceError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
