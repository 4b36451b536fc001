"""Command-line interface.

    kernelafa attribute --game g.json --kernel shap
    kernelafa compare   --data d.csv --model m.json --instance 0 --kernels shap,es
    kernelafa verify    --seed 42 --trials 100 --n-max 6
    kernelafa kernels   --n 4 --kernels shap,exp,concave

Exit codes: 0 success, 1 usage, 2 validation or parse error, 3 numerical
failure (including a failed ``verify``).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import kernels as kern
from .errors import KernelAFAError, NumericalError, UsageError, ValidationError
from .game import CoalitionGame
from .models import (
    Dataset,
    LinearModel,
    estimate_value_function,
    feature_means,
    load_dataset_csv,
    load_game_json,
    load_model_json,
    resolve_instance,
)
from .reference import es, fesp_raw, linear_model_attribution, ls_prenucleolus_oracle, shapley
from .solver import (
    Attribution,
    solve_constrained,
    solve_unconstrained,
    wls_oracle_constrained,
    wls_oracle_unconstrained,
)
from .verify import DEFAULT_REL_TOL, run_all

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

REFERENCE_METHODS = ("shapley", "es", "fesp-raw:<w>", "lsprenucleolus", "lm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- number and document rendering -----------------------------------------------


def _num(x: float, digits: int = 17) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return f"{x:.{digits}g}"


def _json(obj) -> str:
    """Compact JSON with floats written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_json(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return _num(obj)


def _table(header: list, rows: list) -> str:
    cells = [header] + rows
    widths = [max(len(str(r[c])) for r in cells) for c in range(len(header))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(str(v).rjust(w) if j else str(v).ljust(w)
                               for j, (v, w) in enumerate(zip(row, widths))).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(rows: list) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# -- inputs ------------------------------------------------------------------------


@dataclass
class Problem:
    game: CoalitionGame
    names: list
    dataset: Dataset | None = None
    model: object = None
    instance: np.ndarray | None = None


def _load_problem(args) -> Problem:
    has_game = args.game is not None
    has_data = args.data is not None or args.model is not None
    if has_game == has_data:
        raise UsageError("give exactly one input: --game, or --data with --model")
    if has_game:
        if args.instance is not None or args.x is not None:
            raise UsageError("--instance/--x only apply to --data input")
        game = load_game_json(args.game)
        return Problem(game, [f"x{j}" for j in range(1, game.n + 1)])
    if args.data is None or args.model is None:
        raise UsageError("--data and --model must be given together")
    if (args.instance is None) == (args.x is None):
        raise UsageError("dataset input needs exactly one of --instance or --x")
    data = load_dataset_csv(args.data)
    model = load_model_json(args.model)
    if args.instance is not None:
        x = resolve_instance(args.instance, data)
    else:
        try:
            x = resolve_instance([float(v) for v in args.x.split(",")], data)
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise UsageError(f"--x must be a comma-separated list of numbers: {args.x!r}") from None
    game = estimate_value_function(model, data, x)
    names = list(data.names) if data.names else [f"x{j}" for j in range(1, data.n + 1)]
    return Problem(game, names, data, model, x)


def split_specs(text: str) -> list:
    """Split a comma list of specs, keeping ``custom:a,b,c`` weights together."""
    out = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            raise UsageError(f"empty entry in spec list {text!r}")
        try:
            float(token)
            numeric = True
        except ValueError:
            numeric = False
        if numeric and out and out[-1].startswith("custom:"):
            out[-1] += "," + token
        elif numeric:
            raise UsageError(f"stray number {token!r} in spec list {text!r}")
        else:
            out.append(token)
    return out


def _reference(spec: str, problem: Problem) -> Attribution:
    game = problem.game
    name, _, arg = spec.partition(":")
    if name == "shapley" and not arg:
        return shapley(game)
    if name == "es" and not arg:
        return es(game)
    if name == "lsprenucleolus" and not arg:
        return ls_prenucleolus_oracle(game)
    if name == "fesp-raw" and arg:
        try:
            w = float(arg)
        except ValueError:
            raise UsageError(f"bad weight in {spec!r}") from None
        return fesp_raw(game, w)
    if name == "lm" and not arg:
        if not isinstance(problem.model, LinearModel):
            raise UsageError("method 'lm' needs --data with a linear --model")
        m = problem.model
        return linear_model_attribution(m.beta0, m.beta, feature_means(problem.dataset),
                                        problem.instance)
    raise UsageError(f"unknown method {spec!r}; expected one of {', '.join(REFERENCE_METHODS)}")


def _attribute(problem: Problem, spec: str, method: str, constrained: bool, reference: bool):
    """Returns ``(label, Attribution, extras)``."""
    if reference:
        return spec, _reference(spec, problem), {}
    game = problem.game
    if game.n == 1:
        if not constrained:
            raise UsageError("the unconstrained problem needs at least two features")
        return spec, solve_constrained(game, None), {}
    k = kern.parse_kernel(spec, game.n)
    if constrained and method == "closed":
        return spec, solve_constrained(game, k), {}
    if constrained:
        attr, diag = wls_oracle_constrained(game, k)
        return spec, attr, {"lambda": diag.lam}
    solve = solve_unconstrained if method == "closed" else wls_oracle_unconstrained
    attr, diag = solve(game, k)
    return spec, attr, {"T": diag.T, "A": diag.A, "B": diag.B}


# -- commands ----------------------------------------------------------------------


def run_attribute(args, out) -> int:
    if (args.kernel is None) == (args.reference is None):
        raise UsageError("give exactly one of --kernel or --reference")
    problem = _load_problem(args)
    reference = args.reference is not None
    spec = args.reference if reference else args.kernel
    label, attr, extras = _attribute(problem, spec, args.method, not args.unconstrained, reference)
    if args.format == "json":
        doc = {"method": label, "features": problem.names, "phi": list(attr.phi),
               "grand_gap": attr.grand_gap, "efficiency_gap": attr.efficiency_gap}
        doc.update(extras)
        out.write(_json(doc) + "\n")
    elif args.format == "csv":
        rows = [["feature", label]] + [[nm, _num(p)] for nm, p in zip(problem.names, attr.phi)]
        rows += [["grand_gap", _num(attr.grand_gap)], ["efficiency_gap", _num(attr.efficiency_gap)]]
        rows += [[key, _num(val)] for key, val in extras.items()]
        out.write(_csv(rows))
    else:
        rows = [[nm, _num(p, 4)] for nm, p in zip(problem.names, attr.phi)]
        out.write(_table(["feature", label], rows))
        out.write(f"grand gap: {_num(attr.grand_gap, 4)}\n")
        out.write(f"efficiency gap: {_num(attr.efficiency_gap, 4)}\n")
        for key, val in extras.items():
            out.write(f"{key}: {_num(val, 4)}\n")
    return EXIT_OK


def run_compare(args, out) -> int:
    specs = [(s, False) for s in split_specs(args.kernels)] if args.kernels else []
    specs += [(s, True) for s in split_specs(args.references)] if args.references else []
    if len(specs) < 2:
        raise UsageError("compare needs at least two kernels/methods")
    problem = _load_problem(args)
    results = [_attribute(problem, s, args.method, not args.unconstrained, ref)
               for s, ref in specs]
    labels = [r[0] for r in results]
    phis = [r[1].phi for r in results]
    gaps = [r[1].efficiency_gap for r in results]
    pairs = [(labels[a], labels[b], float(np.max(np.abs(phis[a] - phis[b]))))
             for a, b in itertools.combinations(range(len(results)), 2)]
    if args.format == "json":
        doc = {
            "features": problem.names,
            "methods": labels,
            "phi": {lab: list(p) for lab, p in zip(labels, phis)},
            "grand_gap": results[0][1].grand_gap,
            "efficiency_gap": dict(zip(labels, gaps)),
            "pairwise_max_abs_diff": [{"a": a, "b": b, "value": v} for a, b, v in pairs],
        }
        out.write(_json(doc) + "\n")
    elif args.format == "csv":
        rows = [["feature"] + labels]
        rows += [[nm] + [_num(p[j]) for p in phis] for j, nm in enumerate(problem.names)]
        rows.append(["efficiency_gap"] + [_num(g) for g in gaps])
        rows += [[f"maxdiff({a}|{b})", _num(v)] for a, b, v in pairs]
        out.write(_csv(rows))
    else:
        rows = [[nm] + [_num(p[j], 4) for p in phis] for j, nm in enumerate(problem.names)]
        rows.append(["efficiency gap"] + [_num(g, 4) for g in gaps])
        out.write(_table(["feature"] + labels, rows))
        out.write("\n")
        out.write(_table(["method a", "method b", "max |diff|"],
                         [[a, b, _num(v, 4)] for a, b, v in pairs]))
    return EXIT_OK


def run_verify(args, out) -> int:
    if not 2 <= args.n_max <= 8:
        raise UsageError("--n-max must lie in [2, 8]")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    rel = DEFAULT_REL_TOL if args.tolerance is None else args.tolerance
    if not rel > 0:
        raise UsageError("--tolerance must be positive")
    results = run_all(args.seed, args.trials, args.n_max, rel)
    ok = all(r.passed for r in results)
    if args.format == "json":
        doc = {"seed": args.seed, "trials": args.trials, "n_max": args.n_max, "passed": ok,
               "checks": [{"name": r.name, "passed": r.passed, "trials": r.trials,
                           "failures": r.failures, "worst": r.worst, "tolerance": r.tolerance,
                           "description": r.description} for r in results]}
        out.write(_json(doc) + "\n")
    elif args.format == "csv":
        rows = [["check", "passed", "trials", "failures", "worst", "tolerance"]]
        rows += [[r.name, r.passed, r.trials, r.failures, _num(r.worst), _num(r.tolerance)]
                 for r in results]
        out.write(_csv(rows))
    else:
        out.write(f"seed={args.seed} trials={args.trials} n-max={args.n_max} rel-tol={rel:g}\n")
        rows = [["PASS" if r.passed else "FAIL", r.name, r.trials, r.failures,
                 _num(r.worst, 4), _num(r.tolerance, 4), r.description] for r in results]
        out.write(_table(["status", "check", "trials", "failures", "worst", "tol", "property"], rows))
        out.write(f"{sum(r.passed for r in results)}/{len(results)} checks passed\n")
    return EXIT_OK if ok else EXIT_NUMERICAL


def run_kernels(args, out) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    specs = split_specs(args.kernels) if args.kernels else [
        "shap", "shap-orig", "es", "fesp:0.5", "uniform", "linear", "exp", "concave"]
    if args.n == 2 and not args.kernels:
        specs.remove("fesp:0.5")
    ks = [kern.parse_kernel(s, args.n) for s in specs]
    if args.normalize:
        ks = [kern.display_normalized(k) for k in ks]
    sizes = range(1, args.n + 1)
    if args.format == "json":
        doc = {"n": args.n, "normalized": args.normalize,
               "weights": {s: list(k.w[1:]) for s, k in zip(specs, ks)}}
        out.write(_json(doc) + "\n")
    elif args.format == "csv":
        rows = [["size"] + specs] + [[s] + [_num(k.w[s]) for k in ks] for s in sizes]
        out.write(_csv(rows))
    else:
        rows = [[s] + [_num(k.w[s], 4) for k in ks] for s in sizes]
        out.write(_table(["|S|"] + specs, rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kernelafa",
                     description="Additive feature attributions from symmetric LIME kernels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def inputs(p):
        p.add_argument("--game", help="game JSON {n, values}")
        p.add_argument("--data", help="background dataset CSV")
        p.add_argument("--model", help="model JSON (linear, additive, interaction)")
        p.add_argument("--instance", type=int, help="0-based row of --data to explain")
        p.add_argument("--x", help="explicit instance, comma-separated")
        p.add_argument("--method", choices=("closed", "oracle"), default="closed",
                       help="closed form (default) or numerical least-squares oracle")
        p.add_argument("--unconstrained", action="store_true",
                       help="drop the efficiency constraint")
        p.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p = sub.add_parser("attribute", help="attribution for one kernel or reference method")
    inputs(p)
    p.add_argument("--kernel", help=f"kernel spec: {', '.join(kern.KERNEL_NAMES)}")
    p.add_argument("--reference", help=f"reference method: {', '.join(REFERENCE_METHODS)}")

    p = sub.add_parser("compare", help="several kernels/methods side by side")
    inputs(p)
    p.add_argument("--kernels", help="comma-separated kernel specs")
    p.add_argument("--references", help="comma-separated reference methods")

    p = sub.add_parser("verify", help="run the invariant suites on seeded random games")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--tolerance", type=float, help=f"relative tolerance (default {DEFAULT_REL_TOL:g})")
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p = sub.add_parser("kernels", help="print kernel weights by coalition size")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kernels", help="comma-separated kernel specs (default: all built-ins)")
    p.add_argument("--normalize", action="store_true",
                   help="rescale so that sum_{s<n} C(n,s) w[s] = 1 (display only)")
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    return parser


COMMANDS = {"attribute": run_attribute, "compare": run_compare,
            "verify": run_verify, "kernels": run_kernels}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        buf = io.StringIO()
        code = COMMANDS[args.command](args, buf)
        out.write(buf.getvalue())
        return code
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:
        err.write(f"invalid input ({type(exc).__name__}): {exc}\n")
        return EXIT_VALIDATION
    except NumericalError as exc:
        err.write(f"numerical failure ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERICAL
    except KernelAFAError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
