"""Exponential bump, its integral, and the split-delta profile sets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev, legendre
from scipy.integrate import quad


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(n)
    return x, w


def panel_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on consecutive panels.

    ``edges`` has shape (..., k+1); results have shape (..., k*n).
    """
    x, w = gauss_legendre(n)
    a, b = edges[..., :-1, None], edges[..., 1:, None]
    half = (b - a) / 2
    nodes = (a + b) / 2 + half * x
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def _raw_bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


class Mollifier:
    """``rho(y) = N exp(-1/(1-y^2))`` on (-1, 1), zero outside, unit mass."""

    def __init__(self, cdf_panels: int = 64, cdf_degree: int = 24):
        mass, _ = quad(lambda y: float(_raw_bump(y)), -1, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
        self.norm = 1.0 / mass
        self._build_cdf(cdf_panels, cdf_degree)

    def __call__(self, y):
        return self.norm * _raw_bump(y)

    def power(self, y, p: float):
        """``rho(y)**p`` and its derivative in ``y``."""
        y = np.asarray(y, dtype=float)
        val = np.zeros_like(y)
        der = np.zeros_like(y)
        inside = np.abs(y) < 1
        yi = y[inside]
        s = 1.0 - yi * yi
        v = self.norm ** p * np.exp(-p / s)
        val[inside] = v
        der[inside] = v * (-2.0 * p * yi / (s * s))
        return val, der

    def _build_cdf(self, panels: int, degree: int) -> None:
        edges = np.linspace(-1.0, 1.0, panels + 1)
        k = np.arange(degree + 1)
        cheb = np.cos(np.pi * (k + 0.5) / (degree + 1))  # Chebyshev points on (-1, 1)
        coeffs = np.empty((panels, degree + 1))
        base = 0.0
        for i in range(panels):
            a, b = edges[i], edges[i + 1]
            pts = (a + b) / 2 + (b - a) / 2 * cheb
            vals = np.array([base + self._mass(a, p) for p in pts])
            coeffs[i] = chebyshev.chebfit(cheb, vals, degree)
            base += self._mass(a, b)
        self._edges, self._coeffs, self._total = edges, coeffs, base

    def _mass(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        nodes, weights = panel_nodes(np.linspace(a, b, 5), 32)
        return float(np.sum(weights * self(nodes)))

    def cdf(self, s):
        """``int_{-1}^{s} rho``, clamped to 0 below -1 and 1 above 1."""
        s = np.asarray(s, dtype=float)
        out = np.where(s >= 1, 1.0, 0.0)
        inside = np.abs(s) < 1
        si = s[inside]
        n = len(self._edges) - 1
        idx = np.clip(((si + 1) / 2 * n).astype(int), 0, n - 1)
        a, b = self._edges[idx], self._edges[idx + 1]
        z = (2 * si - a - b) / (b - a)
        c = self._coeffs[idx]
        # Clenshaw recurrence, vectorized over points
        b1 = np.zeros_like(z)
        b2 = np.zeros_like(z)
        for j in range(c.shape[1] - 1, 0, -1):
            b1, b2 = 2 * z * b1 - b2 + c[:, j], b1
        out[inside] = z * b1 - b2 + c[:, 0]
        return out


@lru_cache(maxsize=1)
def mollifier() -> Mollifier:
    return Mollifier()


@dataclass(frozen=True)
class Window:
    """Support window ``[lo, hi]`` in units of epsilon, relative to the shock."""

    name: str
    lo: Fraction
    hi: Fraction


KINDS = ("3'SD", "3SD")


class ProfileSet:
    """Step, S-delta and split-delta profiles of width ``eps``.

    Profiles are functions of the shock coordinate ``z = x - c t``; each
    evaluation returns the value and the derivative in ``z``.

    ``3'SD`` split profiles are signed square roots of two-window bumps:
    positive on the inner window (|z| in [3, 5] eps), negative on the outer
    one ([5, 7] eps), so the square integrates to 1 and the cube to 0.
    ``3SD`` split profiles are cube roots of a single bump on [3, 5] eps, so
    the cube integrates to 1.
    """

    def __init__(self, eps: float, kind: str = "3'SD", c: float = 0.0, weights: dict | None = None):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.eps, self.kind, self.c = float(eps), kind, float(c)
        self.weights = dict(weights or {})
        self.rho = mollifier()

    # geometry -----------------------------------------------------------
    def windows(self) -> list[Window]:
        F = Fraction
        out = [Window("step", F(-1), F(1)), Window("D-", F(-3), F(-1)), Window("D+", F(1), F(3))]
        if self.kind == "3'SD":
            out += [Window("d- outer", F(-7), F(-5)), Window("d- inner", F(-5), F(-3)),
                    Window("d+ inner", F(3), F(5)), Window("d+ outer", F(5), F(7))]
        else:
            out += [Window("d-", F(-5), F(-3)), Window("d+", F(3), F(5))]
        return out

    def compatible(self) -> bool:
        """Window interiors are pairwise disjoint (exact rational arithmetic)."""
        ws = sorted(self.windows(), key=lambda w: w.lo)
        return all(a.hi <= b.lo for a, b in zip(ws, ws[1:]))

    def offsets(self) -> list[Fraction]:
        """Sorted window edges and unit subdivisions, in units of eps."""
        lo = min(w.lo for w in self.windows())
        hi = max(w.hi for w in self.windows())
        return [Fraction(k) for k in range(int(lo), int(hi) + 1)]

    @property
    def halfwidth(self) -> float:
        return float(max(w.hi for w in self.windows())) * self.eps

    # profiles -----------------------------------------------------------
    def step(self, z):
        """Transition from 0 to 1 across [-eps, eps]."""
        y = np.asarray(z, dtype=float) / self.eps
        return self.rho.cdf(y), self.rho.power(y, 1.0)[0] / self.eps

    def delta(self, z, side: int):
        """S-delta component ``rho((z -/+ 2 eps)/eps)/eps``; ``side`` is -1 or +1."""
        y = (np.asarray(z, dtype=float) - side * 2 * self.eps) / self.eps
        val, der = self.rho.power(y, 1.0)
        return val / self.eps, der / self.eps ** 2

    def split(self, z, side: int):
        """Split-delta component on the ``side`` (-1 or +1) of the shock."""
        eps = self.eps
        zz = side * np.asarray(z, dtype=float)  # mirror image for the left side
        if self.kind == "3'SD":
            scale = (2 * eps) ** -0.5
            vi, di = self.rho.power((zz - 4 * eps) / eps, 0.5)
            vo, do = self.rho.power((zz - 6 * eps) / eps, 0.5)
            val = scale * (vi - vo)
            der = scale * (di - do) / eps
        else:
            scale = eps ** (-1.0 / 3.0)
            v, d = self.rho.power((zz - 4 * eps) / eps, 1.0 / 3.0)
            val, der = scale * v, scale * d / eps
        return val, side * der

    def profile(self, name: str, z):
        if name == "step":
            return self.step(z)
        if name in ("D-", "D+"):
            return self.delta(z, -1 if name == "D-" else 1)
        if name in ("d-", "d+"):
            return self.split(z, -1 if name == "d-" else 1)
        raise KeyError(name)

    def moment(self, name: str, power: int = 1, panels: int = 8, nodes: int = 32) -> float:
        """``int profile(z)**power dz`` with windows resolved exactly."""
        edges = np.array([float(k) * self.eps for k in self.offsets()])
        fine = np.concatenate([np.linspace(a, b, panels + 1)[:-1] for a, b in zip(edges, edges[1:])] + [edges[-1:]])
        z, w = panel_nodes(fine, nodes)
        val = self.profile(name, z)[0]
        return float(np.sum(w * val ** power))


def make_profiles(eps: float, c: float, kind: str, weights: dict | None = None) -> ProfileSet:
    return ProfileSet(eps, kind, c, weights)
