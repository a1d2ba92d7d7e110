"""Command-line front end.

Every subcommand reads the JSON formats of the owning module: spectral
measures ``{"d", "symmetric", "atoms": [{"q": [...], "p"}]}``, Q laws
``{"atoms": [{"q": float, "p"}]}``, Pickands functions ``{"kinks", "values"}``,
distribution functions ``{"atoms": [{"x", "p"}]}`` and conditionally iid specs
``{"b", "lambda": [{"w", "F"}]}``.

Exit codes: 0 success or PASS, 1 FAIL verdict, 2 parse error, 3 invariant
violation, 4 sampler error, 5 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import InvariantError, QuadratureError, SamplerError
from .estimation import estimate_pickands, singular_frequency, singular_paths
from .extendibility import (CondIIDSpec, ContinuousUnitMeanDF, DiscreteUnitMeanDF,
                            check_necessary_continuous, check_necessary_discrete,
                            ell_from_condiid, qf_density, qf_discrete)
from .sampling import RngStream, SampleBatch, sample_maxlinear, sample_model
from .spectral import (DiscreteSpectralMeasure, PiecewiseLinearPickands, QLaw, copula_value,
                       eval_ell, margin_measure, q_from_A, simplex_decompose,
                       symmetrize)

DEFAULT_SEED = 20240611
FIGURE_N = 2500
FIGURE_ATOM = (1 / 6, 1 / 3, 1 / 2)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_SAMPLER = 4
EXIT_IO = 5


class ParseError(Exception):
    """Input that is not valid JSON or matches no known document type."""


def fmt(v):
    return f"{float(v):.15g}"


def _vector(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


# ---------------------------------------------------------------------------
# document loading
# ---------------------------------------------------------------------------

def read_json(path):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def document_kind(doc):
    """Classify a parsed JSON document by its keys."""
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    if "lambda" in doc and "b" in doc:
        return "condiid"
    if "kinks" in doc and "values" in doc:
        return "pickands"
    if "nu" in doc:
        return "nu"
    atoms = doc.get("atoms")
    if isinstance(atoms, list) and atoms and isinstance(atoms[0], dict):
        first = atoms[0]
        if "x" in first:
            return "df"
        if "q" in first:
            return "measure" if isinstance(first["q"], list) else "qlaw"
    raise ParseError("unrecognised document: expected a measure, Q law, Pickands function, "
                     "distribution function or condiid spec")


_LOADERS = {
    "condiid": CondIIDSpec.from_dict,
    "pickands": PiecewiseLinearPickands.from_dict,
    "df": DiscreteUnitMeanDF.from_dict,
    "measure": DiscreteSpectralMeasure.from_dict,
    "qlaw": QLaw.from_dict,
}


def load_model(path, allowed=None):
    doc = read_json(path)
    kind = document_kind(doc)
    if allowed is not None and kind not in allowed:
        raise ParseError(f"{path}: a {kind} document is not accepted here "
                         f"(expected one of {', '.join(allowed)})")
    if kind not in _LOADERS:
        raise ParseError(f"{path}: {kind} documents are output-only")
    try:
        return kind, _LOADERS[kind](doc)
    except InvariantError as exc:
        if exc.invariant == "schema":
            raise ParseError(str(exc)) from exc
        raise


def emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _dump(doc):
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args):
    kind, model = load_model(args.model)
    lines = []
    if kind in ("qlaw", "pickands"):
        if args.x is None:
            raise ParseError("eval on a bivariate Pickands input needs --x")
        A = model.pickands() if kind == "qlaw" else model
        for x in args.x:
            lines.append(f"A({fmt(x)})={fmt(A(x))}")
    elif kind == "df":
        raise ParseError("eval needs a measure, Q law, Pickands or condiid document")
    else:
        if kind == "measure":
            ell = lambda v: eval_ell(model, v)
            cop = lambda u: copula_value(model, u)
            d = model.d
        else:
            ell = lambda v: ell_from_condiid(model, v)
            cop = lambda u: float(np.exp(-ell_from_condiid(model, -np.log(u)))) if min(u) > 0 else 0.0
            d = len(args.x) if args.x is not None else len(args.u or [0, 0])
        if args.x is None and args.u is None:
            raise ParseError("eval needs --x and/or --u")
        if args.x is not None:
            if len(args.x) != d:
                raise InvariantError("dimension", f"--x needs {d} coordinates")
            lines.append(f"ell={fmt(ell(np.array(args.x)))}")
        if args.u is not None:
            if len(args.u) != d:
                raise InvariantError("dimension", f"--u needs {d} coordinates")
            if any(not (0.0 <= v <= 1.0) for v in args.u):
                raise InvariantError("domain", "copula arguments must lie in [0, 1]")
            lines.append(f"C={fmt(cop(np.array(args.u)))}")
        if args.pickands is not None:
            if d != 2:
                raise InvariantError("dimension", "--pickands needs a bivariate model")
            for x in args.pickands:
                lines.append(f"A({fmt(x)})={fmt(ell(np.array([x, 1.0 - x])))}")
    emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _continuous_family(name, shape):
    if name == "exponential":
        return ContinuousUnitMeanDF.exponential()
    if name == "gamma":
        return ContinuousUnitMeanDF.gamma(shape)
    if name == "uniform":
        return ContinuousUnitMeanDF.uniform()
    raise ParseError(f"unknown family {name!r}")


def cmd_check(args):
    if args.family is not None:
        F = _continuous_family(args.family, args.shape)
        n = args.grid_n
        grid = np.union1d(np.arange(1, n) / n, [0.5])
        verdict = check_necessary_continuous(grid, np.array([qf_density(F, q) for q in grid]))
    else:
        if args.model is None:
            raise ParseError("check needs an input file or --family")
        kind, model = load_model(args.model, allowed=("pickands", "qlaw", "df"))
        if kind == "pickands":
            if not model.is_symmetric():
                raise InvariantError("symmetry", "check needs a symmetric A")
            law = q_from_A(model)
        elif kind == "df":
            law = qf_discrete(model)
        else:
            law = model
        verdict = check_necessary_discrete(law)
    emit(verdict.to_json(extended=args.verbose) + "\n", args.out)
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_decompose(args):
    kind, model = load_model(args.model, allowed=("pickands", "qlaw", "df"))
    if kind == "pickands":
        A = model
    elif kind == "qlaw":
        A = model.pickands()
    else:
        A = qf_discrete(model).pickands()
    nu = simplex_decompose(A)
    emit(_dump(nu.to_dict()), args.out)
    return EXIT_OK


def cmd_margin(args):
    kind, model = load_model(args.model, allowed=("measure", "condiid"))
    if kind == "condiid":
        raise ParseError("margin needs a spectral measure document")
    m = margin_measure(model, args.dim, auto_symmetrize=args.symmetrize)
    emit(_dump(m.to_dict()), args.out)
    return EXIT_OK


def _batch_csv_text(batch):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"u{k + 1}" for k in range(batch.d)])
    for row in batch.rows:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def cmd_simulate(args):
    kind, model = load_model(args.model, allowed=("measure", "condiid", "qlaw"))
    if kind == "qlaw":
        model = DiscreteSpectralMeasure.from_qlaw(model)
    if kind == "condiid" and args.d is None:
        raise ParseError("simulating a condiid spec needs --d")
    rng = RngStream(args.seed, args.stream)
    batch = sample_model(model, args.n, rng, d=args.d, backend=args.backend)
    if args.out is None:
        sys.stdout.write(_batch_csv_text(batch))
    else:
        batch.to_csv(args.out)
    return EXIT_OK


def _grid_from_args(args):
    if args.grid is not None:
        return np.asarray(args.grid, dtype=float)
    return np.arange(1, args.grid_n) / args.grid_n


def cmd_estimate(args):
    try:
        batch = SampleBatch.from_csv(args.batch)
    except ValueError as exc:
        if isinstance(exc, InvariantError):
            raise
        raise ParseError(f"{args.batch}: {exc}") from exc
    i, j = args.i - 1, args.j - 1
    est = estimate_pickands(batch, i, j, _grid_from_args(args))
    if args.format == "json":
        paths = singular_paths(batch, i, j)
        doc = {"n": est.n, "grid": est.grid.tolist(), "A_hat_raw": est.raw.tolist(),
               "A_hat_clipped": est.clipped.tolist(), "singular_paths": paths}
        emit(_dump(doc), args.out)
    else:
        buf = io.StringIO(newline="")
        est.to_csv(buf)
        emit(buf.getvalue(), args.out)
    return EXIT_OK


def scatter_svg(points, size=500, margin=20, radius=1.2):
    """Bare SVG scatter of points in the unit square (origin bottom left)."""
    span = size - 2 * margin
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for u, v in points:
        cx = margin + u * span
        cy = margin + (1.0 - v) * span
        lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{radius}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def figure_data(n=FIGURE_N, seed=DEFAULT_SEED, backend=None):
    """Trivariate batch of the extremal measure at (1/6, 1/3, 1/2) and its
    singular-path report on the first two coordinates."""
    m = symmetrize(np.array(FIGURE_ATOM))
    batch = sample_maxlinear(m, n, RngStream(seed), backend=backend)
    paths = singular_paths(batch, 0, 1) if n > 1 else []
    return batch, paths


def cmd_figure(args):
    n = FIGURE_N if args.n is None else args.n
    batch, paths = figure_data(n, args.seed, args.backend)
    prefix = args.out or "figure"
    batch.to_csv(f"{prefix}_u123.csv")
    pair = SampleBatch(batch.rows[:, :2], seed=batch.seed, stream=batch.stream,
                       model={**batch.model, "projection": [1, 2]})
    pair.to_csv(f"{prefix}_u12.csv")
    with open(f"{prefix}_paths.json", "w") as fh:
        fh.write(_dump(paths))
    if args.format in (None, "svg"):
        with open(f"{prefix}_u12.svg", "w") as fh:
            fh.write(scatter_svg(batch.rows[:, :2]))
    lines = [f"n={n}", f"clusters={len(paths)}",
             f"singular_frequency={fmt(singular_frequency(paths))}"]
    lines += [f"ratio={fmt(p['ratio'])} count={p['count']}" for p in paths]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="64-bit RNG seed (default: %(default)s)")
    common.add_argument("--n", type=int, default=None,
                        help=f"sample size (simulate uses 1000, figure uses {FIGURE_N})")
    common.add_argument("--out", default=None,
                        help="output path or prefix (default: stdout, figure uses 'figure')")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None,
                        help="output format where a choice exists")
    common.add_argument("--backend", choices=("python", "cython"), default=None,
                        help="sampling kernel override (default: import-time choice)")

    parser = argparse.ArgumentParser(
        prog="exchev",
        description="Exchangeable extreme-value copulas: evaluation, diagnostics, simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common],
                       help="evaluate ell, C or A")
    p.add_argument("model", help="measure, Q law, Pickands or condiid JSON")
    p.add_argument("--x", type=_vector, help="point for ell, or abscissae for A")
    p.add_argument("--u", type=_vector, help="point for the copula C")
    p.add_argument("--pickands", type=_vector, help="abscissae for A of a bivariate model")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common],
                       help="necessary condition for conditionally iid extendibility")
    p.add_argument("model", nargs="?", help="Pickands, Q law or distribution JSON")
    p.add_argument("--family", choices=("exponential", "gamma", "uniform"),
                   help="continuous unit-mean family instead of a file")
    p.add_argument("--shape", type=float, default=2.0, help="gamma shape (default: %(default)s)")
    p.add_argument("--grid-n", type=int, default=40, help="density grid is q = k/grid_n (default: %(default)s)")
    p.add_argument("--verbose", action="store_true", help="include diagnostic fields")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decompose", parents=[common],
                       help="mixing measure over the extremal BC2 functions")
    p.add_argument("model", help="symmetric Pickands, Q law or distribution JSON")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("margin", parents=[common],
                       help="spectral measure of a lower-dimensional margin")
    p.add_argument("model", help="exchangeable spectral measure JSON")
    p.add_argument("--dim", type=int, default=2, help="margin dimension (default: %(default)s)")
    p.add_argument("--symmetrize", action="store_true",
                   help="symmetrize a non-exchangeable input first")
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("simulate", parents=[common],
                       help="draw a sample batch")
    p.add_argument("model", help="measure, Q law or condiid JSON")
    p.add_argument("--d", type=int, default=None, help="dimension for condiid specs")
    p.add_argument("--stream", type=int, default=0, help="RNG stream index (default: %(default)s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common],
                       help="empirical Pickands function of a batch")
    p.add_argument("batch", help="CSV batch with header u1,...,ud")
    p.add_argument("--i", type=int, default=1, help="first coordinate, 1-based (default: %(default)s)")
    p.add_argument("--j", type=int, default=2, help="second coordinate, 1-based (default: %(default)s)")
    p.add_argument("--grid", type=_vector, default=None, help="explicit abscissae")
    p.add_argument("--grid-n", type=int, default=10, help="grid is k/grid_n for 0 < k < grid_n (default: %(default)s)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("figure", parents=[common],
                       help="trivariate scatter of the (1/6, 1/3, 1/2) extremal measure")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.n is None:
        args.n = 1000
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"exchev: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"exchev: invariant violated {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except QuadratureError as exc:
        print(f"exchev: invariant violated [quadrature]: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SamplerError as exc:
        print(f"exchev: sampler error: {exc}", file=sys.stderr)
        return EXIT_SAMPLER
    except OSError as exc:
        print(f"exchev: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
