"""Exact polynomial expressions over a jet-space alphabet.

Coefficients are :class:`fractions.Fraction`; an :class:`Expr` is always kept
in canonical form (no zero terms, monomials with sorted variable names), so
structural equality is mathematical equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Monomial = tuple  # tuple[tuple[str, int], ...] sorted by symbol name


class ExprError(ValueError):
    """Base class for expression errors."""


class ParseError(ExprError):
    """Malformed expression text."""


class UnknownSymbolError(ExprError):
    """A name that is not part of the alphabet."""


class UnboundSymbolError(ExprError):
    """Numeric evaluation without a value for some symbol."""


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # "independent", "dependent", "jet" or "parameter"
    base: str | None = None
    index: tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return len(self.index)


class Alphabet:
    """Independent and dependent variables, their jets up to ``max_order``
    and optional formal parameters (unknown coefficients, constants).

    Jet names are ``u_x``, ``u_xt``, ... with the derivative index sorted
    in the declared order of the independent variables.
    """

    def __init__(self, independent: Iterable[str], dependent: Iterable[str],
                 max_order: int = 1, parameters: Iterable[str] = ()):
        self.independent = tuple(independent)
        self.dependent = tuple(dependent)
        self.max_order = int(max_order)
        self.parameters = tuple(parameters)
        if self.max_order < 0:
            raise ExprError("max_order must be non-negative")
        for name in self.independent + self.dependent:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
                raise ExprError(f"invalid variable name {name!r}")
        self._symbols: dict[str, Symbol] = {}
        for name in self.independent:
            self._add(Symbol(name, "independent"))
        for name in self.dependent:
            self._add(Symbol(name, "dependent"))
        for k in range(1, self.max_order + 1):
            for idx in self._indices(k):
                for dep in self.dependent:
                    self._add(Symbol(self.jet_name(dep, idx), "jet", dep, idx))
        for name in self.parameters:
            self._add(Symbol(name, "parameter"))
        self._rank = {name: i for i, name in enumerate(self._symbols)}

    def _add(self, sym: Symbol) -> None:
        if sym.name in self._symbols:
            raise ExprError(f"duplicate symbol {sym.name!r}")
        self._symbols[sym.name] = sym

    def _indices(self, k: int) -> list[tuple[str, ...]]:
        out = [()]
        for _ in range(k):
            out = [idx + (x,) for idx in out for x in self.independent
                   if not idx or self.independent.index(x) >= self.independent.index(idx[-1])]
        return out

    def sort_index(self, index: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(index, key=self.independent.index))

    def jet_name(self, dep: str, index: Iterable[str]) -> str:
        index = self.sort_index(index)
        return dep if not index else f"{dep}_{''.join(index)}"

    def jet(self, dep: str, index: Iterable[str]) -> Symbol:
        name = self.jet_name(dep, index)
        if name not in self._symbols:
            raise UnknownSymbolError(f"jet {name!r} exceeds order {self.max_order}")
        return self._symbols[name]

    def jets(self, order: int | None = None) -> list[Symbol]:
        return [s for s in self._symbols.values()
                if s.kind == "jet" and (order is None or s.order == order)]

    def with_parameters(self, names: Iterable[str]) -> "Alphabet":
        return Alphabet(self.independent, self.dependent, self.max_order,
                        self.parameters + tuple(names))

    def with_order(self, max_order: int) -> "Alphabet":
        return Alphabet(self.independent, self.dependent, max_order, self.parameters)

    def resolve(self, name: str) -> Symbol:
        if name in self._symbols:
            return self._symbols[name]
        dep, sep, idx = name.partition("_")
        if sep and dep in self.dependent and idx and all(c in self.independent for c in idx):
            canonical = self.jet_name(dep, tuple(idx))
            if canonical in self._symbols:
                return self._symbols[canonical]
            raise UnknownSymbolError(f"jet {name!r} exceeds order {self.max_order}")
        raise UnknownSymbolError(f"unknown symbol {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def __iter__(self):
        return iter(self._symbols.values())

    def rank(self, name: str) -> int:
        return self._rank.get(name, len(self._rank))

    @property
    def names(self) -> list[str]:
        return list(self._symbols)

    def __repr__(self) -> str:
        return (f"Alphabet(independent={self.independent}, dependent={self.dependent}, "
                f"max_order={self.max_order}, parameters={len(self.parameters)})")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for name, e in b:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items()))


def _coerce(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class Expr:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self._terms = {m: c for m, c in (terms or {}).items() if c != 0}
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value) -> "Expr":
        return cls({(): _coerce(value)})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "Expr":
        return cls({((name, power),): Fraction(1)}) if power else cls.const(1)

    @staticmethod
    def lift(value) -> "Expr":
        return value if isinstance(value, Expr) else Expr.const(value)

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == () for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ExprError("expression is not constant")
        return self._terms.get((), Fraction(0))

    def free_symbols(self) -> set[str]:
        return {name for m in self._terms for name, _ in m}

    def degree(self, names: Iterable[str] | None = None) -> int:
        if not self._terms:
            return -1
        keep = None if names is None else set(names)
        return max(sum(e for n, e in m if keep is None or n in keep) for m in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = Expr.lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Expr(out)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Expr":
        return self + (-Expr.lift(other))

    def __rsub__(self, other) -> "Expr":
        return Expr.lift(other) - self

    def __mul__(self, other) -> "Expr":
        if not isinstance(other, Expr):
            c = _coerce(other)
            return Expr({m: v * c for m, v in self._terms.items()})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Expr(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        if isinstance(other, Expr):
            if not other.is_constant() or other.is_zero():
                raise ExprError("division is only defined by non-zero constants")
            other = other.constant_value()
        c = _coerce(other)
        if c == 0:
            raise ZeroDivisionError("division of an expression by zero")
        return self * (1 / c)

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ExprError("exponent must be a non-negative integer")
        out, base = Expr.const(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            try:
                other = Expr.const(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus and substitution -----------------------------------------
    def diff(self, name: str) -> "Expr":
        out: dict = {}
        for m, c in self._terms.items():
            for i, (n, e) in enumerate(m):
                if n == name:
                    rest = m[:i] + (((n, e - 1),) if e > 1 else ()) + m[i + 1:]
                    out[rest] = out.get(rest, 0) + c * e
                    break
        return Expr(out)

    def subs(self, bindings: Mapping[str, "Expr"]) -> "Expr":
        """Simultaneous substitution of symbols by expressions."""
        if not bindings:
            return self
        bindings = {k: Expr.lift(v) for k, v in bindings.items()}
        powers: dict = {}
        result = Expr()
        for m, c in self._terms.items():
            keep = []
            term = Expr.const(c)
            for n, e in m:
                if n in bindings:
                    key = (n, e)
                    if key not in powers:
                        powers[key] = bindings[n] ** e
                    term = term * powers[key]
                else:
                    keep.append((n, e))
            if keep:
                term = term * Expr({tuple(keep): Fraction(1)})
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, object]):
        """Numeric value; ``point`` maps names to floats or numpy arrays."""
        missing = self.free_symbols() - set(point)
        if missing:
            raise UnboundSymbolError(f"no value for {sorted(missing)}")
        total = 0.0
        for m, c in self._terms.items():
            term = float(c)
            for n, e in m:
                term = term * (point[n] if e == 1 else point[n] ** e)
            total = total + term
        return total

    def collect(self, formal: Iterable[str]) -> dict["Expr", "Expr"]:
        """Group terms by monomials in the ``formal`` symbols.

        Returns a mapping from each monomial (as an Expr) to its coefficient,
        which involves only the remaining symbols.
        """
        formal = set(formal)
        groups: dict = {}
        for m, c in self._terms.items():
            key = tuple((n, e) for n, e in m if n in formal)
            rest = tuple((n, e) for n, e in m if n not in formal)
            groups.setdefault(key, {})[rest] = c
        return {Expr({k: Fraction(1)}): Expr(v) for k, v in groups.items()}

    def coefficient(self, monomial: Monomial) -> Fraction:
        return self._terms.get(tuple(sorted(monomial)), Fraction(0))

    # printing -----------------------------------------------------------
    def sorted_terms(self, alphabet: Alphabet | None = None) -> list:
        """Terms in graded-lexicographic order, highest first."""
        def rank(name):
            return (alphabet.rank(name), name) if alphabet else (0, name)

        def key(item):
            m = item[0]
            total = sum(e for _, e in m)
            exps = sorted(((rank(n), e) for n, e in m))
            # earlier variables with larger exponents sort first
            return (-total, [(r, -e) for r, e in exps])

        return sorted(self._terms.items(), key=key)

    def to_string(self, alphabet: Alphabet | None = None) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self.sorted_terms(alphabet)):
            if alphabet is not None:
                m = sorted(m, key=lambda ne: (alphabet.rank(ne[0]), ne[0]))
            factors = [n if e == 1 else f"{n}^{e}" for n, e in m]
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Expr({self.to_string()!r})"

    def compile(self, names: Iterable[str]):
        """Fast numeric callable taking the given symbols positionally."""
        names = list(names)
        missing = self.free_symbols() - set(names)
        if missing:
            raise UnboundSymbolError(f"no argument for {sorted(missing)}")
        args = [f"a{i}" for i in range(len(names))]
        lookup = dict(zip(names, args))
        body = []
        for m, c in self._terms.items():
            f = [repr(float(c))] + [lookup[n] if e == 1 else f"{lookup[n]}**{e}" for n, e in m]
            body.append("*".join(f))
        src = f"lambda {', '.join(args)}: 0.0 + " + (" + ".join(body) if body else "0.0")
        return eval(src, {})


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r} at position {pos}")
        num, name, op = m.groups()
        out.append(("num", num) if num else ("name", name) if name else ("op", op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.alphabet = alphabet

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val!r}")

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression")
        e = self.sum()
        if self.pos != len(self.tokens):
            raise ParseError(f"unexpected token {self.peek()[1]!r}")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> Expr:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek() in (("op", "^"), ("op", "**")):
            self.take()
            exp = self.unary()
            if not exp.is_constant():
                raise ParseError("exponent must be a constant")
            value = exp.constant_value()
            if value.denominator != 1 or value < 0:
                raise ParseError(f"exponent must be a non-negative integer, got {value}")
            return base ** int(value)
        return base

    def atom(self) -> Expr:
        kind, val = self.take()
        if kind == "num":
            return Expr.const(Fraction(val))
        if kind == "name":
            return Expr.symbol(self.alphabet.resolve(val).name)
        if (kind, val) == ("op", "("):
            e = self.sum()
            self.expect(")")
            return e
        raise ParseError("unexpected end of input" if kind is None else f"unexpected token {val!r}")


def parse(text: str, alphabet: Alphabet) -> Expr:
    """Parse ``+ - * / ^ **``, integer/decimal literals and parentheses.

    Division is allowed only by non-zero constants.
    """
    try:
        return _Parser(text, alphabet).parse()
    except ExprError:
        raise
    except ZeroDivisionError as exc:
        raise ParseError(str(exc)) from None


def diff(e: Expr, symbol: str) -> Expr:
    return e.diff(symbol)


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    return e.subs(bindings)


def evaluate(e: Expr, point: Mapping[str, object]):
    return e.evaluate(point)


def collect(e: Expr, formal: Iterable[str]) -> dict[Expr, Expr]:
    return e.collect(formal)


def simplify(e: Expr) -> Expr:
    """Canonical form; expressions are stored canonically so this is a copy."""
    return Expr(e.terms)
