"""Vector fields on (independent, dependent) space and their prolongations."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .symbolic import Alphabet, Expr, ExprError, parse


def total_derivative(e: Expr, var: str, alphabet: Alphabet) -> Expr:
    """Total derivative ``D_var`` in jet space.

    Requires every jet in ``e`` to have order below ``alphabet.max_order``.
    """
    if var not in alphabet.independent:
        raise ExprError(f"{var!r} is not an independent variable")
    out = e.diff(var)
    for name in e.free_symbols():
        sym = alphabet.resolve(name)
        if sym.kind == "dependent":
            out = out + e.diff(name) * Expr.symbol(alphabet.jet_name(name, (var,)))
        elif sym.kind == "jet":
            if sym.order >= alphabet.max_order:
                raise ExprError(f"D_{var} of {name} exceeds jet order {alphabet.max_order}")
            nxt = alphabet.jet_name(sym.base, sym.index + (var,))
            out = out + e.diff(name) * Expr.symbol(nxt)
    return out


class VectorField:
    """``sum xi^i d/dx^i + sum phi^a d/du^a`` with polynomial coefficients."""

    def __init__(self, alphabet: Alphabet, xi: Iterable[Expr], phi: Iterable[Expr]):
        self.alphabet = alphabet
        self.xi = tuple(Expr.lift(c) for c in xi)
        self.phi = tuple(Expr.lift(c) for c in phi)
        if len(self.xi) != len(alphabet.independent) or len(self.phi) != len(alphabet.dependent):
            raise ExprError("component count does not match the alphabet")

    @classmethod
    def from_components(cls, alphabet: Alphabet, components: Mapping[str, object]) -> "VectorField":
        """Build from ``{"x": expr, "u": expr, ...}``; strings are parsed."""
        unknown = set(components) - set(alphabet.independent) - set(alphabet.dependent)
        if unknown:
            raise ExprError(f"unknown components {sorted(unknown)}")

        def get(name):
            c = components.get(name, 0)
            return parse(c, alphabet) if isinstance(c, str) else Expr.lift(c)

        return cls(alphabet, [get(n) for n in alphabet.independent],
                   [get(n) for n in alphabet.dependent])

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet) -> "VectorField":
        """Parse ``"t*Dx + Du + u*Dv"`` where ``D<name>`` marks d/d<name>."""
        marks = {f"D{n}": n for n in alphabet.independent + alphabet.dependent}
        clash = [m for m in marks if m in alphabet]
        if clash:
            raise ExprError(f"basis marks clash with symbols {clash}")
        ext = alphabet.with_parameters(marks)
        e = parse(text, ext)
        comps = {}
        for mono, coef in e.collect(marks).items():
            names = mono.free_symbols()
            if mono.degree() != 1 or len(names) != 1:
                raise ExprError(f"every term must carry exactly one of {sorted(marks)}")
            comps[marks[names.pop()]] = coef
        return cls.from_components(alphabet, comps)

    def components(self) -> dict[str, Expr]:
        names = self.alphabet.independent + self.alphabet.dependent
        return dict(zip(names, self.xi + self.phi))

    def __call__(self, e: Expr) -> Expr:
        """Apply the (unprolonged) field as a derivation."""
        out = Expr()
        for name, c in self.components().items():
            if not c.is_zero():
                out = out + c * e.diff(name)
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.alphabet, [a + b for a, b in zip(self.xi, other.xi)],
                           [a + b for a, b in zip(self.phi, other.phi)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "VectorField":
        return VectorField(self.alphabet, [scalar * a for a in self.xi],
                           [scalar * a for a in self.phi])

    def __neg__(self) -> "VectorField":
        return (-1) * self

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.xi == other.xi and self.phi == other.phi

    def __hash__(self) -> int:
        return hash((self.xi, self.phi))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.xi + self.phi)

    def is_projectable(self) -> bool:
        """True when the base components depend on independent variables only."""
        allowed = set(self.alphabet.independent)
        return all(c.free_symbols() <= allowed for c in self.xi)

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket ``[self, other]``."""
        a, b = self.components(), other.components()
        out = {n: self(b[n]) - other(a[n]) for n in a}
        return VectorField.from_components(self.alphabet, out)

    def evaluate(self, point: Mapping[str, float]) -> np.ndarray:
        return np.array([float(c.evaluate(point)) for c in self.xi + self.phi])

    def to_string(self) -> str:
        parts = []
        for name, c in self.components().items():
            if c.is_zero():
                continue
            s = c.to_string(self.alphabet)
            if len(c) > 1:
                s = f"({s})"
            parts.append(f"D{name}" if s == "1" else f"-D{name}" if s == "-1" else f"{s}*D{name}")
        return " + ".join(parts).replace("+ -", "- ") or "0"

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"VectorField({self.to_string()!r})"


class ProlongedVectorField:
    """A field together with the coefficients on the jet coordinates."""

    def __init__(self, base: VectorField, order: int, alphabet: Alphabet,
                 jet_coefficients: dict[str, Expr]):
        self.base = base
        self.order = order
        self.alphabet = alphabet
        self.jet_coefficients = jet_coefficients

    def coefficient(self, dep: str, index: Iterable[str] = ()) -> Expr:
        index = tuple(index)
        if not index:
            return self.base.components()[dep]
        return self.jet_coefficients[self.alphabet.jet_name(dep, index)]

    def __call__(self, e: Expr) -> Expr:
        out = self.base(e)
        for name, c in self.jet_coefficients.items():
            if name in e.free_symbols():
                out = out + c * e.diff(name)
        return out


def prolong(v: VectorField, order: int) -> ProlongedVectorField:
    """Prolongation to jets of order ``<= order``.

    Uses the characteristic form: the coefficient on ``u^a_J`` is
    ``D_J(Q_a) + sum_i xi^i u^a_{J,i}`` with ``Q_a = phi_a - sum_i xi^i u^a_i``.
    """
    alpha = v.alphabet.with_order(max(order + 1, v.alphabet.max_order))
    indep = alpha.independent
    coeffs: dict[str, Expr] = {}
    for a, dep in enumerate(alpha.dependent):
        char = v.phi[a]
        for i, x in enumerate(indep):
            char = char - v.xi[i] * Expr.symbol(alpha.jet_name(dep, (x,)))
        derived = {(): char}
        for k in range(1, order + 1):
            for sym in alpha.jets(k):
                if sym.base != dep:
                    continue
                parent = sym.index[:-1]
                # every index of order k extends some canonical index of order k-1
                derived[sym.index] = total_derivative(derived[parent], sym.index[-1], alpha)
                c = derived[sym.index]
                for i, x in enumerate(indep):
                    c = c + v.xi[i] * Expr.symbol(alpha.jet_name(dep, sym.index + (x,)))
                coeffs[sym.name] = c
    return ProlongedVectorField(v, order, alpha, coeffs)


def apply(pv: ProlongedVectorField, e: Expr) -> Expr:
    return pv(e)
