"""Command-line front end: ``brackets run | compare | list-reps``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bracket_core import BracketError
from .exact_algebra import DIVERGENT, fraction_to_str
from .numerics.verify import closed_form_value, quad_2d_main_integral
from .pipelines import ALPHA, BETA, DEFAULT_MELLIN_PARAMS, PIPELINES, run
from .representations import CATALOG, catalog_get
from .series_eval import NoAssignment

SCHEMA = "brackets-report/1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_ASSIGNMENT = 2
EXIT_DIVERGENT = 3
EXIT_MISMATCH = 4


class ConfigError(ValueError):
    pass


def in_validated_region(alpha, beta) -> bool:
    """Pairs for which the double integral converges (checked empirically)."""
    return alpha + beta > 0 and alpha - 2 * beta > 0


@dataclass(frozen=True)
class RunConfig:
    pipeline: str
    alpha: Fraction | None = None      # None means symbolic
    beta: Fraction | None = None
    verify: bool = False
    tol: float = 1e-3
    mellin_params: tuple = DEFAULT_MELLIN_PARAMS
    output_format: str = "text"
    explain: bool = False

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline {self.pipeline!r}")
        if (self.alpha is None) != (self.beta is None):
            raise ConfigError("give both --alpha and --beta, or neither")
        if self.verify and self.alpha is None:
            raise ConfigError("--verify needs concrete --alpha and --beta")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.output_format not in ("text", "json"):
            raise ConfigError("output format is text or json")

    @property
    def symbolic(self) -> bool:
        return self.alpha is None


def _point(alpha, beta) -> dict:
    return {ALPHA: float(alpha), BETA: float(beta)}


def _num(v):
    if v is DIVERGENT or v is None:
        return None
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _verification(value: float, alpha, beta, tol: float) -> dict:
    q = quad_2d_main_integral(float(alpha), float(beta), tol=0.1 * tol * max(abs(value), 1e-12))
    rel = abs(q.value - value) / abs(value) if value else abs(q.value)
    return {"quadrature": q.to_json(), "relative_difference": rel,
            "tolerance": tol, "agrees": bool(q.converged and rel <= tol)}


def run_pipeline(cfg: RunConfig) -> tuple[dict, int]:
    """Execute one pipeline and assemble its report and exit code."""
    report = {
        "schema": SCHEMA,
        "pipeline": cfg.pipeline,
        "alpha": "symbolic" if cfg.symbolic else fraction_to_str(cfg.alpha),
        "beta": "symbolic" if cfg.symbolic else fraction_to_str(cfg.beta),
    }
    if cfg.pipeline == "mellin-param":
        report["mellin_params"] = [str(p) for p in cfg.mellin_params]
    try:
        result = run(cfg.pipeline, cfg.mellin_params)
    except NoAssignment as exc:
        report["error"] = {"type": "NoAssignment", "message": str(exc),
                           "system": exc.system.to_json() if exc.system else None}
        return report, EXIT_NO_ASSIGNMENT
    cf = result.closed_form
    report["closed_form"] = cf.to_json()
    if cfg.explain:
        report["trace"] = result.trace
    code = EXIT_DIVERGENT if cf.divergent else EXIT_OK
    if not cfg.symbolic:
        value = closed_form_value(cf, _point(cfg.alpha, cfg.beta))
        report["value"] = _num(value)
        if value is DIVERGENT:
            code = EXIT_DIVERGENT
        elif cfg.verify:
            if not in_validated_region(cfg.alpha, cfg.beta):
                raise ConfigError("--verify needs alpha + beta > 0 and alpha - 2 beta > 0")
            report["verification"] = _verification(value, cfg.alpha, cfg.beta, cfg.tol)
            if not report["verification"]["agrees"] and code == EXIT_OK:
                code = EXIT_MISMATCH
    return report, code


def compare_all(alpha=None, beta=None, tol: float = 1e-3, pipelines: Sequence[str] = PIPELINES,
                quadrature: bool = True, agreement: float = 1e-10) -> dict:
    """Run several pipelines and cross-compare their closed forms.

    With concrete (alpha, beta) the matrix holds pairwise relative
    differences; in symbolic mode it holds structural equality.
    """
    pipelines = [p for p in PIPELINES if p in set(pipelines)]
    if not pipelines:
        raise ConfigError("at least one pipeline is required")
    symbolic = alpha is None
    rows = {}
    for p in pipelines:
        try:
            cf = run(p).closed_form
            rows[p] = {"closed_form": str(cf), "expr": cf.expr, "divergent": cf.divergent}
            if not symbolic:
                rows[p]["value"] = _num(closed_form_value(cf, _point(alpha, beta)))
        except Exception as exc:  # isolate per-row failures
            rows[p] = {"error": f"{type(exc).__name__}: {exc}"}
    ok = [p for p in pipelines if "error" not in rows[p]]
    matrix = []
    for p in pipelines:
        line = []
        for q in pipelines:
            if p not in ok or q not in ok:
                line.append(None)
            elif symbolic:
                line.append(rows[p]["expr"] == rows[q]["expr"])
            else:
                a, b = rows[p]["value"], rows[q]["value"]
                line.append(None if a is None or b is None else abs(a - b) / max(abs(a), abs(b), 1e-300))
        matrix.append(line)
    report = {
        "schema": SCHEMA,
        "alpha": "symbolic" if symbolic else fraction_to_str(Fraction(alpha)),
        "beta": "symbolic" if symbolic else fraction_to_str(Fraction(beta)),
        "pipelines": pipelines,
        "rows": {p: {k: v for k, v in rows[p].items() if k != "expr"} for p in pipelines},
        "matrix": matrix,
    }
    if symbolic:
        report["all_agree"] = bool(ok) and len(ok) == len(pipelines) and all(all(r) for r in matrix)
        return report
    report["all_agree"] = len(ok) == len(pipelines) and all(
        v is not None and v <= agreement for r in matrix for v in r)
    if quadrature and in_validated_region(Fraction(alpha), Fraction(beta)) and ok:
        ref = rows[ok[0]]["value"]
        q = quad_2d_main_integral(float(alpha), float(beta), tol=0.1 * tol * max(abs(ref), 1e-12))
        report["quadrature"] = q.to_json()
        column = {}
        for p in ok:
            v = rows[p]["value"]
            column[p] = None if v is None else abs(q.value - v) / abs(v)
        report["quadrature_column"] = column
        report["quadrature_agrees"] = bool(q.converged) and all(
            c is not None and c <= tol for c in column.values())
    return report


def list_reps() -> list[dict]:
    out = []
    for name, kind in sorted(CATALOG, key=lambda t: (t[0], t[1].value)):
        rep = catalog_get(name, kind)
        out.append({"function": name, "kind": kind.value, "display": str(rep.series),
                    "series": rep.series.to_json()})
    return out


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _mellin_params(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected a,b,A,B")
    return tuple(_rational(p.strip()) for p in parts)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brackets", description="Method-of-brackets integration engine.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one evaluation pipeline")
    p.add_argument("pipeline", choices=PIPELINES)
    p.add_argument("--alpha", type=_rational, help="rational value, e.g. 5 or 7/2 (default: symbolic)")
    p.add_argument("--beta", type=_rational, help="rational value (default: symbolic)")
    p.add_argument("--verify", action="store_true", help="check against 2D quadrature")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="relative tolerance for --verify (default: 1e-3)")
    p.add_argument("--mellin-params", type=_mellin_params, default=DEFAULT_MELLIN_PARAMS,
                   metavar="a,b,A,B", help="Mellin series parameters for mellin-param (default: 1,0,2,0)")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--explain", action="store_true", help="include the rule trace")

    c = sub.add_parser("compare", help="run all pipelines and compare")
    c.add_argument("--alpha", type=_rational, help="rational value (default: symbolic comparison)")
    c.add_argument("--beta", type=_rational, help="rational value (default: symbolic comparison)")
    c.add_argument("--tol", type=float, default=1e-3, help="quadrature relative tolerance")
    c.add_argument("--pipelines", default=",".join(PIPELINES),
                   help="comma-separated subset (default: all)")
    c.add_argument("--no-quadrature", action="store_true", help="skip the quadrature column")
    c.add_argument("--json", action="store_true", help="emit a JSON report")

    r = sub.add_parser("list-reps", help="list catalogued representations")
    r.add_argument("--json", action="store_true")
    return parser


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _text_run(report: dict) -> str:
    lines = [f"pipeline: {report['pipeline']}  (alpha={report['alpha']}, beta={report['beta']})"]
    if "error" in report:
        lines.append(f"error: {report['error']['type']}: {report['error']['message']}")
        return "\n".join(lines)
    cf = report["closed_form"]
    lines.append(f"closed form: {cf['text']}" + ("  [divergent]" if cf["divergent"] else ""))
    if "value" in report:
        lines.append(f"value: {report['value']!r}")
    if "verification" in report:
        v = report["verification"]
        q = v["quadrature"]
        lines.append(f"quadrature: {q['value']!r} +- {q['error']:.2e} ({q['evals']} evals, "
                     f"converged={q['converged']})")
        lines.append(f"relative difference: {v['relative_difference']:.3e} -> "
                     f"{'agrees' if v['agrees'] else 'MISMATCH'}")
    for rec in report.get("trace", []):
        line = f"  {rec['rule']}"
        if "note" in rec:
            line += f" ({rec['note']})"
        d = rec.get("details")
        if d:
            starred = ", ".join(f"{k}* = {v}" for k, v in d["starred"].items())
            line += f": |det| = {d['abs_determinant']}; {starred}"
        lines.append(line)
    return "\n".join(lines)


def _text_compare(report: dict) -> str:
    lines = [f"alpha={report['alpha']}, beta={report['beta']}"]
    width = max(len(p) for p in report["pipelines"])
    for p in report["pipelines"]:
        row = report["rows"][p]
        body = row.get("error") or row["closed_form"]
        if "value" in row:
            body = f"{row['value']!r}   {body}"
        lines.append(f"{p:<{width}}  {body}")
    lines.append("pairwise:")
    for p, line in zip(report["pipelines"], report["matrix"]):
        cells = []
        for v in line:
            if v is None:
                cells.append("   --   ")
            elif isinstance(v, bool):
                cells.append("   ==   " if v else "   !=   ")
            else:
                cells.append(f"{v:8.1e}")
        lines.append(f"  {p:<{width}} " + " ".join(cells))
    if "quadrature" in report:
        q = report["quadrature"]
        lines.append(f"quadrature: {q['value']!r} +- {q['error']:.2e}; "
                     f"agrees={report['quadrature_agrees']}")
    lines.append(f"all agree: {report['all_agree']}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # keep argparse's message but return the code so callers can embed main()
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "run":
            cfg = RunConfig(args.pipeline, args.alpha, args.beta, args.verify, args.tol,
                            args.mellin_params, "json" if args.json else "text", args.explain)
            report, code = run_pipeline(cfg)
            print(_dump(report) if args.json else _text_run(report))
            return code
        if args.command == "compare":
            if (args.alpha is None) != (args.beta is None):
                raise ConfigError("give both --alpha and --beta, or neither")
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            subset = [p.strip() for p in args.pipelines.split(",") if p.strip()]
            unknown = [p for p in subset if p not in PIPELINES]
            if unknown:
                raise ConfigError(f"unknown pipelines: {', '.join(unknown)}")
            report = compare_all(args.alpha, args.beta, args.tol, subset,
                                 quadrature=not args.no_quadrature)
            print(_dump(report) if args.json else _text_compare(report))
            return EXIT_OK if report["all_agree"] and report.get("quadrature_agrees", True) \
                else EXIT_MISMATCH
        reps = list_reps()
        if args.json:
            print(_dump(reps))
        else:
            for r in reps:
                print(f"{r['function']:<3} {r['kind']:<22} {r['display']}")
        return EXIT_OK
    except (ConfigError, BracketError) as exc:
        print(f"brackets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
