"""Command-line front end: ``walklab <command> ...``.

Exit codes: 0 success, 1 usage or parse error, 2 refusal (periodic step set,
unsupported statistic, wrong regime), 3 numerical failure.  Results go to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .compare import convergence_report
from .dist_exact import STATISTICS, distribution
from .errors import (
    DomainError,
    NumericError,
    PeriodicStepSetError,
    RegimeError,
    SingularityError,
    StepSetError,
    UnsupportedStatisticError,
    WalkLabError,
)
from .kernel import kernel_roots
from .limits import REGIME_NAMES, predict
from .montecarlo import simulate
from .scheme import APPS, ZERO_TOL, check_hypothesis
from .series import FAMILIES, coeffs
from .steps import StepSet, drift_sign, format_number, motzkin, structural_constants

EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_NUMERIC = 0, 1, 2, 3

RELATIONS = {
    "returns": {
        "bgf": "W(z,u) = W(z) / (u + (1-u) B(z))",
        "u=1": "W(z) = 1 / (1 - z P(1))",
        "inverse": "1/W(z,u) = (u + (1-u) B(z)) (1 - z P(1))",
    },
    "height": {
        "bgf": "H(z,u) = W(z) M(z,u) / M(z) = -1/(p_d z) prod_i 1/(1 - u_i(z)) prod_l 1/(u - v_l(z))",
        "u=1": "W(z)",
        "inverse": "1/H(z,u) = -p_d z prod_i (1 - u_i(z)) prod_l (u - v_l(z))",
    },
    "signchanges": {
        "bgf": "S(z,u) = B(z,u) T(z) + B+(z,u) (T(z) - 1) (u - 1), B+ = (B(z,u) - C(z)) / 2, T = W/B",
        "u=1": "W(z)",
        "inverse": "1/S(z,u)",
    },
    "bridge_signchanges": {
        "bgf": "B(z,u) = C(z) (1 + 2 E1(z) / (1 - u E1(z))), E1 = E/C - 1",
        "u=1": "B(z)",
        "inverse": "1/B(z,u)",
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_number(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (Fraction, float, np.floating)):
        return format_number(x if isinstance(x, Fraction) else float(x))
    return str(x)


def emit_json(obj, out) -> None:
    out.write(json.dumps(_jsonable(obj), indent=2) + "\n")


def emit_csv(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    for row in rows:
        writer.writerow([_cell(x) for x in row])


def _emit(args, rows, obj, out) -> None:
    if args.out == "csv":
        emit_csv(rows, out)
    else:
        emit_json(obj, out)


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------


def load_steps(args) -> StepSet:
    if args.motzkin:
        parts = [p.strip() for p in args.motzkin.split(",")]
        if len(parts) != 3:
            raise UsageError("--motzkin expects three weights p_-1,p_0,p_+1")
        steps = motzkin(*parts)
    elif args.steps:
        source = sys.stdin.read() if args.steps == "-" else Path(args.steps).read_text()
        try:
            steps = StepSet.from_json(source)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.steps}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    else:
        raise UsageError("give a step set with --steps FILE or --motzkin a,b,c")
    if getattr(args, "exact", False):
        if not steps.exact:
            raise StepSetError("--exact needs rational weights (integers or 'p/q' strings)")
        return steps
    return steps.as_float()


def _add_steps(p: argparse.ArgumentParser, exact: bool = True) -> None:
    p.add_argument("--steps", help="step-set JSON file ('-' for stdin)")
    p.add_argument("--motzkin", help="shortcut for Motzkin weights p_-1,p_0,p_+1")
    if exact:
        p.add_argument("--exact", action="store_true", help="rational arithmetic")


def _add_out(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--out", choices=("json", "csv"), default=default)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def build_report(steps: StepSet) -> tuple[dict, int]:
    """The analysis report and the exit code it warrants."""
    mode = "exact" if steps.exact else "float"
    consts = structural_constants(steps)
    regime = drift_sign(consts.drift)
    report = {
        "steps": steps.to_dict()["steps"],
        "constants": consts.to_dict(),
        "regime": REGIME_NAMES[regime],
        "predictions": {},
        "relations": {},
        "warnings": [],
        "provenance": {"package": "walklab", "version": __version__, "arithmetic": mode},
    }
    stats = ["returns", "height"]
    if steps.is_motzkin:
        stats += ["signchanges", "bridge_signchanges"]
    else:
        report["warnings"].append("sign changes are only defined for Motzkin step sets; omitted")
    if not consts.aperiodic:
        report["warnings"].append(
            f"step set is periodic (period {consts.period}); limit laws are not predicted"
        )
        return report, EXIT_REFUSED
    for stat in stats:
        law = predict(steps, consts, stat)
        report["predictions"][stat] = law.to_dict()
        report["relations"][stat] = RELATIONS[stat]
    return report, EXIT_OK


def cmd_analyze(args, out) -> int:
    report, code = build_report(load_steps(args))
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if args.out == "csv":
        rows = [("key", "value")]
        rows += [(f"constants.{k}", v) for k, v in report["constants"].items()]
        rows.append(("regime", report["regime"]))
        for stat, law in report["predictions"].items():
            rows.append((f"{stat}.law", law["law"]))
            rows += [(f"{stat}.{k}", json.dumps(_jsonable(v)) if isinstance(v, list) else v) for k, v in law["params"].items()]
        emit_csv(rows, out)
    else:
        emit_json(report, out)
    return code


def cmd_dist(args, out) -> int:
    steps = load_steps(args)
    d = distribution(steps, args.stat, args.n, exact=steps.exact)
    rows = [("k", "probability")] + [(k, p) for k, p in enumerate(d.probs)]
    obj = {
        "n": d.n,
        "statistic": d.statistic,
        "exact": d.exact,
        "probs": list(d.probs),
        "mean": d.mean,
        "variance": d.variance,
    }
    _emit(args, rows, obj, out)
    return EXIT_OK


def cmd_predict(args, out) -> int:
    steps = load_steps(args)
    consts = structural_constants(steps)
    law = predict(steps, consts, args.stat)
    obj = law.to_dict()
    obj["regime"] = REGIME_NAMES[drift_sign(consts.drift)]
    rows = [("key", "value"), ("law", obj["law"]), ("scaling", obj["scaling"]), ("regime", obj["regime"])]
    rows += [(k, json.dumps(_jsonable(v)) if isinstance(v, list) else v) for k, v in obj["params"].items()]
    _emit(args, rows, obj, out)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def cmd_converge(args, out) -> int:
    steps = load_steps(args)
    report = convergence_report(steps, args.stat, _int_list(args.n_list), args.threshold)
    _emit(args, report.csv_rows(), report.to_dict(), out)
    return EXIT_OK


def cmd_scheme(args, out) -> int:
    steps = load_steps(args)
    report = check_hypothesis(args.app, steps, structural_constants(steps), args.tol)
    emit_json(report.to_dict(), out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    steps = load_steps(args)
    summary = simulate(steps, args.n, args.trials, args.seed)
    if args.stat not in summary.counts:
        raise UnsupportedStatisticError(f"statistic {args.stat!r} is not sampled for this step set")
    counts = summary.counts[args.stat]
    freqs = summary.distribution(args.stat)
    rows = [("k", "count", "frequency")] + [(k, c, float(f)) for k, (c, f) in enumerate(zip(counts, freqs))]
    obj = {
        "n": summary.n,
        "trials": summary.trials,
        "seed": summary.seed,
        "generator": summary.generator,
        "statistic": args.stat,
        "samples": summary.sample_sizes[args.stat],
        "counts": list(counts),
        "frequencies": freqs.tolist(),
    }
    _emit(args, rows, obj, out)
    return EXIT_OK


def cmd_coeffs(args, out) -> int:
    steps = load_steps(args)
    table = coeffs(steps, args.family, args.n_max, exact=steps.exact)
    rows = [("n", "coefficient")] + [(n, c) for n, c in enumerate(table.coeffs)]
    _emit(args, rows, {"family": table.family, "coefficients": list(table.coeffs)}, out)
    return EXIT_OK


def _parse_z(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"--z expects re or re,im, got {text!r}")


def cmd_branches(args, out) -> int:
    steps = load_steps(args)
    consts = structural_constants(steps)
    z = _parse_z(args.z)
    roots = kernel_roots(steps, consts, z.real if z.imag == 0 else z)
    obj = {
        "z": {"re": z.real, "im": z.imag},
        "small": [{"re": complex(r).real, "im": complex(r).imag} for r in roots.small],
        "large": [{"re": complex(r).real, "im": complex(r).imag} for r in roots.large],
        "residuals": list(roots.residuals),
        "principal_small_index": roots.principal_small_index,
        "principal_large_index": roots.principal_large_index,
        "collided": roots.collided,
    }
    rows = [("kind", "index", "re", "im", "residual")]
    rc = len(roots.small)
    for i, r in enumerate(roots.small):
        rows.append(("small", i, complex(r).real, complex(r).imag, roots.residuals[i]))
    for i, r in enumerate(roots.large):
        rows.append(("large", i, complex(r).real, complex(r).imag, roots.residuals[rc + i]))
    _emit(args, rows, obj, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="walklab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"walklab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("analyze", help="constants, regime and predicted limit laws")
    _add_steps(p)
    _add_out(p, "json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dist", help="exact law of a statistic at length n")
    _add_steps(p)
    p.add_argument("--stat", required=True, choices=STATISTICS)
    p.add_argument("--n", required=True, type=int)
    _add_out(p, "csv")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("predict", help="predicted limit law of a statistic")
    _add_steps(p)
    p.add_argument("--stat", required=True, choices=STATISTICS)
    _add_out(p, "json")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("converge", help="distances between exact laws and the limit")
    _add_steps(p, exact=False)
    p.add_argument("--stat", required=True, choices=STATISTICS)
    p.add_argument("--n-list", required=True, help="comma-separated increasing lengths")
    p.add_argument("--threshold", type=float, default=None)
    _add_out(p, "csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("scheme-check", help="check the square-root scheme at (rho, 1)")
    _add_steps(p, exact=False)
    p.add_argument("--app", required=True, choices=tuple(APPS))
    p.add_argument("--tol", type=float, default=ZERO_TOL)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("simulate", help="Monte Carlo histogram of a statistic")
    _add_steps(p, exact=False)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--trials", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--stat", required=True, choices=STATISTICS)
    _add_out(p, "csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coeffs", help="series coefficients of a counting family")
    _add_steps(p)
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n-max", required=True, type=int)
    _add_out(p, "csv")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("branches", help="kernel roots at a point z")
    _add_steps(p, exact=False)
    p.add_argument("--z", required=True, help="re or re,im")
    _add_out(p, "json")
    p.set_defaults(func=cmd_branches)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        if not argv:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        if not hasattr(args, "out"):
            args.out = "json"
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (StepSetError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PeriodicStepSetError, UnsupportedStatisticError, RegimeError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (NumericError, SingularityError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        details = getattr(exc, "details", None)
        if details:
            print(json.dumps(_jsonable(details)), file=sys.stderr)
        return EXIT_NUMERIC
    except WalkLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
