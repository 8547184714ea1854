"""Forward-mode first derivatives in two variables, for chain-rule composition."""

from __future__ import annotations

import numpy as np


class Dual:
    """Value with partials along the two independent variables (x, t)."""

    __slots__ = ("val", "dx", "dt")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, val, dx=0.0, dt=0.0):
        self.val, self.dx, self.dt = val, dx, dt

    @staticmethod
    def lift(a) -> "Dual":
        return a if isinstance(a, Dual) else Dual(a)

    def __add__(self, o):
        o = Dual.lift(o)
        return Dual(self.val + o.val, self.dx + o.dx, self.dt + o.dt)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.dx, -self.dt)

    def __sub__(self, o):
        return self + (-Dual.lift(o))

    def __rsub__(self, o):
        return Dual.lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, Dual):
            return Dual(self.val * o, self.dx * o, self.dt * o)
        return Dual(self.val * o.val, self.dx * o.val + self.val * o.dx,
                    self.dt * o.val + self.val * o.dt)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, Dual):
            return Dual(self.val / o, self.dx / o, self.dt / o)
        q = self.val / o.val
        return Dual(q, (self.dx - q * o.dx) / o.val, (self.dt - q * o.dt) / o.val)

    def __rtruediv__(self, o):
        return Dual.lift(o) / self

    def __pow__(self, p):
        base = self.val ** (p - 1)
        return Dual(base * self.val, p * base * self.dx, p * base * self.dt)

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, dx={self.dx!r}, dt={self.dt!r})"


def exp(a):
    if isinstance(a, Dual):
        e = np.exp(a.val)
        return Dual(e, e * a.dx, e * a.dt)
    return np.exp(a)


def value(a):
    return a.val if isinstance(a, Dual) else a
