"""Command-line entry point: ``charwave symmetry|riemann|associate``.

Exit status: 0 when every verdict passes, 1 when one fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import association, groups, riemann, symmetry
from .jets import VectorField
from .symbolic import ExprError
from .systems import BUILTIN_SYSTEMS, load_system

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _state(text: str) -> tuple[float, float]:
    try:
        u, v = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'u,v', got {text!r}") from None
    return u, v


def _eps_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(args) -> int:
    env = os.environ.get("CHARWAVE_SEED")
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CHARWAVE_SEED must be an integer, got {env!r}") from None


def _family(system_name: str) -> str:
    if system_name == "system1":
        return "system1"
    if system_name.startswith("gas"):
        return "gas"
    raise UsageError(f"no builtin group catalog for system {system_name!r}")


# symmetry ----------------------------------------------------------------

def cmd_symmetry_find(args) -> int:
    if args.deg_xt < 0 or args.deg_uv < 0:
        raise UsageError("degrees must be non-negative")
    pde = load_system(args.system)
    basis = symmetry.find_symmetries(pde, args.deg_xt, args.deg_uv)
    if args.product_filter:
        basis = symmetry.product_filter(basis, pde)
    fields = [f.to_string() for f in basis]
    if args.json:
        _emit(_dump({"provenance": basis.provenance, "dimension": len(fields), "generators": fields}), args.json)
    if args.json != "-":
        print(f"{pde.name}: nullspace dimension {len(fields)}")
        for k, text in enumerate(fields, 1):
            print(f"  v{k} = {text}")
    return EXIT_OK


def cmd_symmetry_verify(args) -> int:
    pde = load_system(args.system)
    named: list[tuple[str, VectorField]] = []
    for spec in args.builtin or []:
        named += [(n, VectorField.parse(v.to_string(), pde.alphabet)) for n, v in groups.generator_list(spec)]
    for text in args.generator or []:
        named.append((text, VectorField.parse(text, pde.alphabet)))
    if not named:
        print("warning: no generators given; nothing to verify", file=sys.stderr)
    verdicts = {}
    for name, v in named:
        residual = symmetry.criterion_residual(pde, v)
        ok = all(r.is_zero() for r in residual)
        verdicts[name] = {"generator": v.to_string(), "pass": ok,
                          "residual": [r.to_string() for r in residual]}
        if args.json != "-":
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {v.to_string()}")
    if args.json:
        _emit(_dump({"system": pde.name, "verdicts": verdicts}), args.json)
    return EXIT_OK if all(v["pass"] for v in verdicts.values()) else EXIT_FAIL


def cmd_symmetry_factorize(args) -> int:
    pde = load_system(args.system)
    catalog = groups.groups_for(_family(pde.name))
    names = args.group or [n for n, g in catalog.items() if g.q is not None]
    rng = np.random.default_rng(_seed(args))
    etas = args.eta if args.eta else [0.0, 0.1, 0.3]
    out, ok = [], True
    for name in names:
        if name not in catalog:
            raise UsageError(f"unknown group {name!r}; choose from {sorted(catalog)}")
        g = catalog[name]
        check_sys = load_system(g.q_system) if g.q_system and g.q_system != pde.name else pde
        for eta in etas:
            if g.semigroup and eta < 0:
                continue
            rep = groups.factorization_check(check_sys, g, eta, trials=args.trials, rng=rng)
            tol = args.identity_tol if eta == 0 else args.tol
            passed = rep.passed(tol)
            ok &= passed
            out.append({"group": name, "eta": eta, "system": check_sys.name, "trials": rep.trials,
                        "max_residual": rep.max_residual, "tolerance": tol, "pass": passed})
            if args.json != "-":
                print(f"{'PASS' if passed else 'FAIL'}  {name} eta={eta:g} on {check_sys.name}: "
                      f"max residual {rep.max_residual:.3e} (tol {tol:g})")
    if args.json:
        _emit(_dump({"seed": _seed(args), "checks": out}), args.json)
    return EXIT_OK if ok else EXIT_FAIL


# riemann -----------------------------------------------------------------

def cmd_riemann(args) -> int:
    fan = riemann.solve(args.system, args.left, args.right)
    data = fan.to_json()
    data["rh_residuals"] = riemann.fan_rh_residuals(fan)
    _emit(_dump(data), args.json)
    if args.csv:
        xi = np.linspace(args.xi_min, args.xi_max, args.samples)
        u, v = fan.sample(xi)
        lines = ["xi,u,v"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(xi.tolist(), u.tolist(), v.tolist())]
        Path(args.csv).write_text("\n".join(lines) + "\n")
    if fan.singular is not None and args.json != "-":
        for k, r in sorted(fan.singular.residuals().items()):
            print(f"  {k}: {r:.3e}", file=sys.stderr)
    return EXIT_OK


# associate ---------------------------------------------------------------

def cmd_associate(args) -> int:
    fan_system = "system1" if args.system == "system1" else "gas"
    if fan_system == "system1":
        params = riemann.singular_params_system1(args.left, args.right)
    else:
        params = riemann.singular_params_gas(args.left, args.right)
    quad = association.QuadratureSpec(t_slices=args.t_slices, x_nodes=args.x_nodes)
    criteria = {"min_slope": args.min_slope, "gap_tol": args.gap_tol, "floor": args.floor}
    common = dict(eps_list=args.eps, quad=quad, jobs=args.jobs, family_label=args.family, **criteria)
    if args.group:
        g = groups.get_group(fan_system, args.group)
        report = association.symmetry_association_check(None, g, params, eta=args.eta, **common)
    else:
        report = association.association_sweep(None, params, **common)
    data = report.to_json()
    if args.csv:
        Path(args.csv).write_text(association.report_csv(report))
    if args.svg:
        Path(args.svg).write_text(association.report_svg(report))
    _emit(_dump(data), args.json)
    return EXIT_OK if report.passed else EXIT_FAIL


# parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    systems = ", ".join(BUILTIN_SYSTEMS)
    p = argparse.ArgumentParser(prog="charwave", description="Symmetries, Riemann problems and "
                                "singular-shock association checks for 2x2 systems.")
    sub = p.add_subparsers(dest="command", required=True)

    sym = sub.add_parser("symmetry", help="Lie point symmetries")
    ssub = sym.add_subparsers(dest="action", required=True)

    find = ssub.add_parser("find", help="solve the determining system for a polynomial ansatz")
    find.add_argument("--system", required=True, help=f"builtin ({systems}) or JSON path")
    find.add_argument("--deg-xt", type=int, default=1, help="degree of xi, tau in x, t (default 1)")
    find.add_argument("--deg-uv", type=int, default=1, help="degree of phi in u, v (default 1)")
    find.add_argument("--product-filter", action="store_true", help="keep fields with phi_u = 0 at u = 0")
    find.add_argument("--json", help="write the basis as JSON ('-' for stdout)")
    find.set_defaults(func=cmd_symmetry_find)

    ver = ssub.add_parser("verify", help="exact infinitesimal-criterion check")
    ver.add_argument("--system", required=True)
    ver.add_argument("--generator", action="append", help="generator text, e.g. 't*Dx + Du + u*Dv'")
    ver.add_argument("--builtin", action="append", help="named list, e.g. system1:w1..w5 or gas:w1..w8,uDu")
    ver.add_argument("--json")
    ver.set_defaults(func=cmd_symmetry_verify)

    fac = ssub.add_parser("factorize", help="random-probe check of Delta(g.u) = Q Delta(u)")
    fac.add_argument("--system", required=True)
    fac.add_argument("--group", action="append", help="group name (repeatable; default all)")
    fac.add_argument("--eta", type=float, action="append", help="group parameter (default 0, 0.1, 0.3)")
    fac.add_argument("--trials", type=int, default=100)
    fac.add_argument("--tol", type=float, default=1e-6)
    fac.add_argument("--identity-tol", type=float, default=1e-8, help="tolerance at eta = 0")
    fac.add_argument("--seed", type=int, default=42, help="probe seed (CHARWAVE_SEED overrides)")
    fac.add_argument("--json")
    fac.set_defaults(func=cmd_symmetry_factorize)

    rie = sub.add_parser("riemann", help="solve a Riemann problem")
    rie.add_argument("--system", required=True, choices=["system1", "gas-full", "gas-reduced"])
    rie.add_argument("--left", type=_state, required=True, help="u,v")
    rie.add_argument("--right", type=_state, required=True, help="u,v")
    rie.add_argument("--json", default="-", help="fan JSON path (default stdout)")
    rie.add_argument("--csv", help="sampled self-similar profile (xi, u, v)")
    rie.add_argument("--samples", type=int, default=201)
    rie.add_argument("--xi-min", type=float, default=-10.0)
    rie.add_argument("--xi-max", type=float, default=10.0)
    rie.set_defaults(func=cmd_riemann)

    asc = sub.add_parser("associate", help="weak-residual sweep of a regularized singular shock")
    asc.add_argument("--system", required=True, choices=["system1", "gas-full", "gas-reduced"])
    asc.add_argument("--left", type=_state, required=True)
    asc.add_argument("--right", type=_state, required=True)
    asc.add_argument("--group", help="transform by this builtin group first")
    asc.add_argument("--eta", type=float, default=0.2)
    asc.add_argument("--family", default="default", choices=["default", "off-shock"])
    asc.add_argument("--eps", type=_eps_list, default=list(association.DEFAULT_EPS),
                     help="decreasing comma-separated widths (default 0.2*2^-k, k=0..5)")
    asc.add_argument("--t-slices", type=int, default=association.QuadratureSpec.t_slices)
    asc.add_argument("--x-nodes", type=int, default=association.QuadratureSpec.x_nodes)
    asc.add_argument("--min-slope", type=float, default=0.4)
    asc.add_argument("--gap-tol", type=float, default=1e-8, help="direct vs by-parts tolerance")
    asc.add_argument("--floor", type=float, default=1e-11, help="residuals below count as zero")
    asc.add_argument("--jobs", type=int, default=1)
    asc.add_argument("--json", default="-")
    asc.add_argument("--csv")
    asc.add_argument("--svg")
    asc.set_defaults(func=cmd_associate)
    return p


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--left -4,0`` into ``--left=-4,0`` so argparse accepts it."""
    out = []
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok in ("--left", "--right", "--eps", "--eta") and i + 1 < len(argv) \
                and argv[i + 1].startswith("-") and argv[i + 1][1:2].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ExprError, KeyError, ValueError, OSError) as exc:
        # RiemannError and DomainError are ValueErrors: bad data is a config error
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
