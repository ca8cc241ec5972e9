"""Command-line front end.

Three commands: ``eval`` (evaluate a function at a point, exact or
floating), ``verify`` (run a verification scope and write JSON/Markdown
reports), and ``catalogue`` (print the identity and operator listings).
All math lives in the library modules; this file only parses arguments,
dispatches, and formats.

Exit codes: 0 success, 1 verification failure / no convergence, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .exactnum import DegenerateParameter, parse_rational
from .hypfun import (
    NoConvergence,
    Params1F1,
    ParamsPsi2,
    f11_eval_exact,
    f11_eval_float,
    psi2_3var_eval_float,
    psi2_3var_series,
    psi2_eval_exact,
    psi2_eval_float,
    recursion_suite,
)
from .identities import (
    SuiteFailure,
    catalogue as identity_catalogue,
    report_to_json,
    report_to_markdown,
    run_suite,
)
from .liealg import (
    FLOW_IDS,
    OPERATOR_NOTES,
    action_suite,
    build_catalogue,
    commutator_suite,
    flow_suite,
)

SCOPES = ("identities", "actions", "recursions", "flows", "commutators", "all")


class SystemExit2(Exception):
    """Usage error carrying a message; mapped to exit code 2."""


@dataclass
class RunConfig:
    points: str = ";".join(",".join(p) for p in (
        ("1/2", "4/3", "5/7"), ("3/2", "7/3", "11/6"), ("2/5", "9/4", "5/7")
    ))
    orders_f11: str = "6,12"
    orders_psi2: str = "4,6"
    action_order: int = 12
    recursion_order: int = 12
    mode: str = "formal"
    chi: str = "0.1,0.25"
    tol: float = 1e-8
    flow_tol: float = 1e-8
    alpha: float = 0.1
    step: float = 1e-3
    start: str = "x=1,y=2,z=3,u=1/2,t=1/3"
    span_check: bool = True
    seed: int = 42
    term_cap: int = 10000
    out: str = "reports"
    format: str = "both"

    def param_points(self) -> list[ParamsPsi2]:
        pts = []
        for chunk in self.points.split(";"):
            a, b, c = (parse_rational(v) for v in chunk.split(","))
            pts.append(ParamsPsi2(a, b, c))
        if not pts:
            raise ValueError("no parameter points")
        return pts

    def orders(self) -> dict[str, tuple[int, int]]:
        out = {}
        for fam, text in (("f11", self.orders_f11), ("psi2", self.orders_psi2)):
            n, m = (int(v) for v in text.split(","))
            if n < 1 or m < 1:
                raise ValueError(f"orders for {fam} must be >= 1")
            out[fam] = (n, m)
        return out

    def chi_grid(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.chi.split(","))

    def start_point(self) -> dict[str, Fraction]:
        point = {}
        for item in self.start.split(","):
            name, _, value = item.partition("=")
            point[name.strip()] = parse_rational(value)
        return point

    def validate(self) -> None:
        self.param_points()
        self.orders()
        self.start_point()
        if self.tol <= 0 or self.flow_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.mode not in ("formal", "numeric", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.format not in ("json", "md", "both"):
            raise ValueError(f"unknown format {self.format!r}")


def _config_from(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        for key, value in loaded.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key in vars(cfg):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


# -- eval -----------------------------------------------------------------------

def _is_exact_literal(text: str) -> bool:
    try:
        parse_rational(text)
        return True
    except ValueError:
        return False


def cmd_eval(args: argparse.Namespace) -> int:
    coords = [args.x]
    if args.fn in ("psi2", "psi2x3"):
        coords.append(args.y if args.y is not None else "0")
    if args.fn == "psi2x3":
        coords.append(args.z if args.z is not None else "0")
    exact = args.exact or (not args.float and all(_is_exact_literal(c) for c in coords))

    if args.fn == "f11":
        p = Params1F1(parse_rational(args.a), parse_rational(args.b))
        if exact:
            value = f11_eval_exact(p, parse_rational(args.x), args.terms)
            print(value)
        else:
            value, used = f11_eval_float(p, float(args.x), args.tol, args.term_cap)
            print(f"{value!r} terms={used}")
        return 0

    if args.c is None:
        raise SystemExit2("--c is required for psi2/psi2x3")
    p = ParamsPsi2(parse_rational(args.a), parse_rational(args.b), parse_rational(args.c))
    if args.fn == "psi2":
        if exact:
            value = psi2_eval_exact(
                p, parse_rational(coords[0]), parse_rational(coords[1]),
                args.terms, args.terms,
            )
            print(value)
        else:
            value = psi2_eval_float(
                p, float(coords[0]), float(coords[1]), args.tol, term_cap=args.term_cap
            )
            print(repr(value))
        return 0

    if exact:
        series = psi2_3var_series(p, args.terms, args.terms, args.terms)
        value = series.evaluate({
            "x": parse_rational(coords[0]),
            "y": parse_rational(coords[1]),
            "z": parse_rational(coords[2]),
        })
        print(value)
    else:
        value = psi2_3var_eval_float(
            p, float(coords[0]), float(coords[1]), float(coords[2]),
            args.tol, term_cap=args.term_cap,
        )
        print(repr(value))
    return 0


# -- verify ----------------------------------------------------------------------

def _f11_points(points: list[ParamsPsi2]) -> list[Params1F1]:
    return [Params1F1(p.a, p.b) for p in points]


def _scope_recursions(cfg: RunConfig) -> tuple[list[dict], bool]:
    rows = recursion_suite(_f11_points(cfg.param_points()), cfg.recursion_order)
    return rows, all(r["status"] == "PASS" for r in rows)


def _scope_actions(cfg: RunConfig) -> tuple[list[dict], bool]:
    points = cfg.param_points()
    rows = action_suite(_f11_points(points), points, cfg.action_order)
    return rows, all(r["status"] == "PASS" for r in rows)


def _scope_flows(cfg: RunConfig) -> tuple[list[dict], bool]:
    rows = flow_suite(cfg.start_point(), cfg.alpha, cfg.step)
    ok = all(r["max_deviation"] <= cfg.flow_tol for r in rows)
    for r in rows:
        r["status"] = "PASS" if r["max_deviation"] <= cfg.flow_tol else "FAIL"
    return rows, ok


def _scope_commutators(cfg: RunConfig) -> tuple[dict, bool]:
    result = commutator_suite(cfg.span_check, cfg.seed)
    ok = result["antisymmetry_ok"] and result["jacobi_ok"] and result["bilinearity_ok"]
    return result, ok


def _rows_markdown(title: str, rows: list[dict]) -> str:
    if not rows:
        return f"## {title}\n\n(no rows)\n"
    keys = sorted({k for r in rows for k in r})
    lines = [f"## {title}", "", "| " + " | ".join(keys) + " |",
             "|" + "---|" * len(keys)]
    for r in rows:
        lines.append("| " + " | ".join(str(r.get(k, "")) for k in keys) + " |")
    return "\n".join(lines) + "\n"


def _write_reports(cfg: RunConfig, scope: str, payload: dict, markdown: str) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.format in ("json", "both"):
        (out / f"verify_{scope}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    if cfg.format in ("md", "both"):
        (out / f"verify_{scope}.md").write_text(markdown)


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    scope = args.scope
    all_ok = True
    payload: dict = {"engine_version": __version__, "scope": scope, "scopes": {}}
    md_parts = [f"# Verification report: {scope}\n"]

    wanted = SCOPES[:-1] if scope == "all" else (scope,)

    if "identities" in wanted:
        try:
            report = run_suite(
                param_points=cfg.param_points(),
                orders=cfg.orders(),
                mode=cfg.mode,
                chi_grid=cfg.chi_grid(),
                tol=cfg.tol,
            )
            ok = True
        except SuiteFailure as failure:
            report = failure.report
            ok = False
        except DegenerateParameter as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        all_ok &= ok
        payload["scopes"]["identities"] = json.loads(report_to_json(report))
        md_parts.append(report_to_markdown(report))

    if "actions" in wanted:
        rows, ok = _scope_actions(cfg)
        all_ok &= ok
        payload["scopes"]["actions"] = {"rows": rows, "ok": ok}
        md_parts.append(_rows_markdown("Operator actions", rows))

    if "recursions" in wanted:
        rows, ok = _scope_recursions(cfg)
        all_ok &= ok
        payload["scopes"]["recursions"] = {"rows": rows, "ok": ok}
        md_parts.append(_rows_markdown("Differential recursions", rows))

    if "flows" in wanted:
        rows, ok = _scope_flows(cfg)
        all_ok &= ok
        payload["scopes"]["flows"] = {"rows": rows, "ok": ok}
        md_parts.append(_rows_markdown("One-parameter flows", rows))

    if "commutators" in wanted:
        result, ok = _scope_commutators(cfg)
        all_ok &= ok
        payload["scopes"]["commutators"] = {"result": result, "ok": ok}
        for fam, rows in result["families"].items():
            md_parts.append(_rows_markdown(f"Commutators ({fam})", rows))

    payload["ok"] = all_ok
    _write_reports(cfg, scope, payload, "\n".join(md_parts))
    print(f"scope={scope} ok={all_ok} reports written to {cfg.out}/")
    return 0 if all_ok else 1


# -- catalogue ---------------------------------------------------------------------

def cmd_catalogue(_args: argparse.Namespace) -> int:
    print(f"hypersym {__version__}")
    print()
    print("identity records:")
    for rec in identity_catalogue():
        marks = "+corrected" if rec.has_correction() else ""
        print(f"  {rec.rec_id:<18} [{rec.family}] {marks}")
        print(f"      {rec.statement}")
        print(f"      validity: {rec.validity}")
    print()
    print("operators:")
    for op_id, op in build_catalogue().items():
        note = " (see notes)" if op_id in OPERATOR_NOTES else ""
        print(f"  {op_id:<12} {op.pretty()}{note}")
    print()
    print("flows:", ", ".join(FLOW_IDS))
    for op_id, note in OPERATOR_NOTES.items():
        print(f"note [{op_id}]: {note}")
    return 0


# -- entry point --------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypersym",
        description="exact verification engine for hypergeometric shift identities",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate a function at a point")
    ev.add_argument("--fn", required=True, choices=("f11", "psi2", "psi2x3"))
    ev.add_argument("--a", required=True)
    ev.add_argument("--b", required=True)
    ev.add_argument("--c")
    ev.add_argument("--x", required=True)
    ev.add_argument("--y")
    ev.add_argument("--z")
    ev.add_argument("--exact", action="store_true", help="force exact mode")
    ev.add_argument("--float", action="store_true", help="force floating mode")
    ev.add_argument("--terms", type=int, default=30,
                    help="truncation order for exact mode")
    ev.add_argument("--tol", type=float, default=1e-12,
                    help="relative tolerance for floating mode")
    ev.add_argument("--term-cap", dest="term_cap", type=int, default=10000)
    ev.set_defaults(func=cmd_eval)

    vf = sub.add_parser("verify", help="run a verification scope, write reports")
    vf.add_argument("--scope", default="all", choices=SCOPES)
    vf.add_argument("--config", help="flat JSON config file; flags override")
    vf.add_argument("--points", default=None,
                    help="semicolon-separated a,b,c rational triples")
    vf.add_argument("--orders-f11", dest="orders_f11", default=None,
                    help="N,M orders for one-argument records")
    vf.add_argument("--orders-psi2", dest="orders_psi2", default=None,
                    help="N,M orders for two-argument records")
    vf.add_argument("--action-order", dest="action_order", type=int, default=None)
    vf.add_argument("--recursion-order", dest="recursion_order", type=int, default=None)
    vf.add_argument("--mode", default=None, choices=("formal", "numeric", "both"))
    vf.add_argument("--chi", default=None, help="comma-separated chi grid")
    vf.add_argument("--tol", type=float, default=None)
    vf.add_argument("--flow-tol", dest="flow_tol", type=float, default=None)
    vf.add_argument("--alpha", type=float, default=None)
    vf.add_argument("--step", type=float, default=None)
    vf.add_argument("--start", default=None,
                    help="flow start point, e.g. x=1,y=2,z=3,u=1/2,t=1/3")
    vf.add_argument("--span-check", dest="span_check", action="store_true",
                    default=None)
    vf.add_argument("--no-span-check", dest="span_check", action="store_false")
    vf.add_argument("--seed", type=int, default=None)
    vf.add_argument("--out", default=None, help="report output directory")
    vf.add_argument("--format", default=None, choices=("json", "md", "both"))
    vf.set_defaults(func=cmd_verify)

    ct = sub.add_parser("catalogue", help="print identity and operator listings")
    ct.set_defaults(func=cmd_catalogue)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep its codes
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (SystemExit2, ValueError, KeyError, DegenerateParameter, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
