"""Determining equations, exact symmetry algebras, flows and filters."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .jets import VectorField, apply, prolong
from .linalg import nullspace, rank
from .symbolic import Expr
from .systems import PdeSystem


class FlowError(RuntimeError):
    """Integration left the local group domain."""


def criterion_residual(sys: PdeSystem, v: VectorField) -> list[Expr]:
    """``pr v (Delta)`` restricted to the solution manifold, per equation."""
    pv = prolong(v, 1)
    return [apply(pv, eq).subs(sys.solved) for eq in sys.equations]


def verify_generator(sys: PdeSystem, v: VectorField) -> bool:
    return all(r.is_zero() for r in criterion_residual(sys, v))


def _monomials(names: Sequence[str], degree: int) -> list[Expr]:
    out = []
    for exps in product(range(degree + 1), repeat=len(names)):
        if sum(exps) <= degree:
            m = Expr.const(1)
            for n, e in zip(names, exps):
                m = m * Expr.symbol(n, e)
            out.append(m)
    # lowest degree first, deterministic
    return sorted(out, key=lambda m: (m.degree(), m.to_string()))


@dataclass(frozen=True)
class Ansatz:
    """Polynomial ansatz for a projectable field.

    Base components are polynomials in the independent variables of degree
    ``deg_xt``; fibre components have degree ``deg_xt`` in the independent
    and ``deg_uv`` in the dependent variables.
    """

    deg_xt: int
    deg_uv: int

    def basis(self, sys: PdeSystem) -> list[tuple[str, Expr]]:
        """(component, monomial) pairs, one per unknown coefficient."""
        a = sys.alphabet
        xt = _monomials(a.independent, self.deg_xt)
        uv = _monomials(a.dependent, self.deg_uv)
        out = [(x, m) for x in a.independent for m in xt]
        fibre = sorted((p * q for p in xt for q in uv), key=lambda m: (m.degree(), m.to_string(a)))
        out += [(d, m) for d in a.dependent for m in fibre]
        return out


@dataclass
class DeterminingSystem:
    sys: PdeSystem
    ansatz: Ansatz
    unknowns: list[tuple[str, Expr]]
    rows: list[list[Fraction]]
    labels: list[tuple[int, Expr]]  # (equation index, monomial) per row

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.unknowns)

    def field(self, coeffs: Sequence[Fraction]) -> VectorField:
        comps: dict[str, Expr] = {}
        for c, (name, mono) in zip(coeffs, self.unknowns):
            if c:
                comps[name] = comps.get(name, Expr()) + mono * c
        return VectorField.from_components(self.sys.alphabet, comps)


def determining_system(sys: PdeSystem, ansatz: Ansatz) -> DeterminingSystem:
    """Homogeneous linear equations for the unknown ansatz coefficients.

    The criterion is linear in the field, so each unknown contributes one
    column: the residual of its single-monomial field, collected over all
    remaining symbols.
    """
    unknowns = ansatz.basis(sys)
    columns = []
    for name, mono in unknowns:
        v = VectorField.from_components(sys.alphabet, {name: mono})
        col = {}
        for nu, r in enumerate(criterion_residual(sys, v)):
            for m, c in r.items():
                col[(nu, m)] = c
        columns.append(col)
    keys = sorted({k for col in columns for k in col}, key=lambda k: (k[0], str(k[1])))
    rows = [[col.get(k, Fraction(0)) for col in columns] for k in keys]
    labels = [(nu, Expr({m: Fraction(1)})) for nu, m in keys]
    return DeterminingSystem(sys, ansatz, unknowns, rows, labels)


@dataclass
class SymmetryBasis:
    fields: list[VectorField]
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)


def solve_determining(linsys: DeterminingSystem) -> SymmetryBasis:
    vectors = nullspace(linsys.rows, len(linsys.unknowns))
    fields = [linsys.field(vec) for vec in vectors]
    for f in fields:
        if not verify_generator(linsys.sys, f):
            raise AssertionError(f"nullspace vector {f} fails the criterion")
    prov = {"system": linsys.sys.name, "deg_xt": linsys.ansatz.deg_xt,
            "deg_uv": linsys.ansatz.deg_uv, "unknowns": len(linsys.unknowns),
            "equations": len(linsys.rows), "dimension": len(fields)}
    return SymmetryBasis(fields, prov)


def find_symmetries(sys: PdeSystem, deg_xt: int, deg_uv: int) -> SymmetryBasis:
    return solve_determining(determining_system(sys, Ansatz(deg_xt, deg_uv)))


def coefficient_vectors(fields: Iterable[VectorField]) -> list[list[Fraction]]:
    """Coordinates of fields over the union of their (component, monomial) keys."""
    dicts = []
    for f in fields:
        d = {}
        for name, c in f.components().items():
            for m, coef in c.items():
                d[(name, m)] = coef
        dicts.append(d)
    keys = sorted({k for d in dicts for k in d}, key=str)
    return [[d.get(k, Fraction(0)) for k in keys] for d in dicts]


def span_rank(fields: Sequence[VectorField]) -> int:
    fields = list(fields)
    if not fields:
        return 0
    return rank(coefficient_vectors(fields))


def same_span(a: Sequence[VectorField], b: Sequence[VectorField]) -> bool:
    ra, rb = span_rank(a), span_rank(b)
    return ra == rb == span_rank(list(a) + list(b))


def contains_span(basis: Sequence[VectorField], fields: Sequence[VectorField]) -> bool:
    return span_rank(basis) == span_rank(list(basis) + list(fields))


def product_filter(basis: SymmetryBasis, sys: PdeSystem, variable: str | None = None) -> SymmetryBasis:
    """Sub-algebra whose ``variable`` coefficient vanishes when ``variable = 0``."""
    a = sys.alphabet
    variable = variable or a.dependent[0]
    idx = a.dependent.index(variable)
    restricted = [f.phi[idx].subs({variable: Expr()}) for f in basis.fields]
    keys = sorted({m for r in restricted for m in r.terms}, key=str)
    rows = [[r.coefficient(m) for r in restricted] for m in keys]
    combos = nullspace(rows, len(restricted)) if keys else [
        [Fraction(int(i == j)) for j in range(len(restricted))] for i in range(len(restricted))]
    fields = []
    for combo in combos:
        f = VectorField(a, [Expr()] * len(a.independent), [Expr()] * len(a.dependent))
        for c, g in zip(combo, basis.fields):
            if c:
                f = f + c * g
        fields.append(f)
    prov = dict(basis.provenance, filtered_on=variable, dimension=len(fields))
    return SymmetryBasis(fields, prov)


def flow(v: VectorField, start: Sequence[float], eta: float, rtol: float = 1e-10,
         atol: float = 1e-12) -> np.ndarray:
    """Integrate ``dz/deta = v(z)`` from 0 to ``eta`` (Dormand-Prince 5(4))."""
    z0 = np.asarray(start, dtype=float)
    if eta == 0:
        return z0.copy()
    names = list(v.alphabet.independent + v.alphabet.dependent)
    comps = [c.compile(names) for c in v.xi + v.phi]

    def rhs(_, z):
        return np.array([f(*z) for f in comps])

    sol = solve_ivp(rhs, (0.0, eta), z0, method="RK45", rtol=rtol, atol=atol)
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise FlowError(f"flow of {v} from {tuple(z0)} failed before eta={eta}: {sol.message}")
    return sol.y[:, -1]
