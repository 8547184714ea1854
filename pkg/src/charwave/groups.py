"""Closed-form projectable group actions and their factorization matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dual import exp
from .jets import VectorField
from .symbolic import Alphabet
from .systems import PdeSystem

_FIELDS = Alphabet(["x", "t"], ["u", "v"], max_order=1)


class DomainError(ValueError):
    """Point outside the (semi)group domain of an action."""


def _vf(text: str) -> VectorField:
    return VectorField.parse(text, _FIELDS)


@dataclass(frozen=True)
class GroupAction:
    """One-parameter projectable group ``(x,t,u,v) -> (Xi(x,t), Phi(x,t,u,v))``.

    ``denominators`` returns quantities that must stay positive for the
    action to be defined; ``q`` gives the factorization matrix at the
    original point for the system named by ``q_system``.
    """

    name: str
    family: str
    xi: Callable
    phi: Callable
    generator: VectorField | None = None
    q: Callable | None = None
    q_system: str | None = None
    denominators: Callable | None = None
    semigroup: bool = False
    theorem_scope: bool = True
    description: str = ""

    def valid(self, x, t, u, v, eta) -> bool:
        if self.semigroup and eta < 0:
            return False
        if self.denominators is None:
            return True
        return all(np.all(np.asarray(d) > 0) for d in self.denominators(x, t, u, v, eta))

    def act(self, x, t, u, v, eta):
        return (*self.xi(x, t, eta), *self.phi(x, t, u, v, eta))

    def preimage(self, x, t, eta):
        """Base point mapped to ``(x, t)``; the base action is a group on (x, t)."""
        return self.xi(x, t, -eta)

    def transform(self, ufun: Callable, vfun: Callable, eta: float) -> Callable:
        """``(x, t) -> (u~, v~)`` for the transformed solution."""
        def transformed(x, t):
            px, pt = self.preimage(x, t, eta)
            u, v = ufun(px, pt), vfun(px, pt)
            if not self.valid(px, pt, u, v, eta):
                raise DomainError(f"{self.family}:{self.name} undefined at eta={eta}")
            return self.phi(px, pt, u, v, eta)
        return transformed

    def q_matrix(self, eta, x, t, u, v) -> np.ndarray:
        if self.q is None:
            raise ValueError(f"{self.name} has no factorization matrix")
        return np.array(self.q(eta, x, t, u, v), dtype=float)


def _identity(eta, x, t, u, v):
    return [[1.0, 0.0], [0.0, 1.0]]


def system1_groups() -> dict[str, GroupAction]:
    fam = "system1"
    return {
        "G1": GroupAction("G1", fam, lambda x, t, e: (exp(e) * x, exp(e) * t),
                          lambda x, t, u, v, e: (u, v), _vf("x*Dx + t*Dt"),
                          lambda e, x, t, u, v: [[np.exp(-e), 0.0], [0.0, np.exp(-e)]], fam,
                          description="scaling of x and t"),
        "G2": GroupAction("G2", fam, lambda x, t, e: (x, t + e),
                          lambda x, t, u, v, e: (u, v), _vf("Dt"), _identity, fam,
                          description="translation in t"),
        "G3": GroupAction("G3", fam, lambda x, t, e: (x + e * t, t),
                          lambda x, t, u, v, e: (u + e, v + e * u + e * e / 2),
                          _vf("t*Dx + Du + u*Dv"),
                          lambda e, x, t, u, v: [[1.0, 0.0], [e, 1.0]], fam,
                          description="Galilean shift"),
        "G4": GroupAction("G4", fam, lambda x, t, e: (x + e, t),
                          lambda x, t, u, v, e: (u, v), _vf("Dx"), _identity, fam,
                          description="translation in x"),
        "G5": GroupAction("G5", fam, lambda x, t, e: (x, t),
                          lambda x, t, u, v, e: (u, v + e), _vf("Dv"), _identity, fam,
                          description="translation in v"),
    }


def _q_g4(e, x, t, u, v):
    d = 1 + e * v
    return [[(1 + 2 * e * v) / d ** 2, -e / d ** 2],
            [2 * e * v ** 2 / d ** 3, (1 - e * v) / d ** 3]]


def _q_g5(e, x, t, u, v):
    # written in the image coordinates; u, v stay at the original point
    s = 1 - e * x
    xs, ts = x / s, t / s
    a, b = 1 + e * xs, 1 + e * ts * v
    return [[(1 + 2 * e * ts * v) / (a ** 2 * b ** 2), -e * ts / (a ** 2 * b ** 2)],
            [2 * e * ts * v ** 2 / (a * b ** 3), (1 - e * ts * v) / (a * b ** 3)]]


def _q_g8(e, x, t, u, v):
    s = 1 - e * t
    return [[s ** 3, 0.0], [e * x * s ** 3, s ** 4]]


def beta_group(beta: Callable = lambda v: v, dbeta: Callable = lambda v: 1.0,
               generator: str | None = "u*v*Du") -> GroupAction:
    """``u -> exp(eta*beta(v)) u`` for a user-supplied ``beta`` and its derivative."""
    def q(e, x, t, u, v):
        g, db = np.exp(e * beta(v)), dbeta(v)
        return [[(1 - e * v * db) * g, e * db * g],
                [-e * v ** 2 * db * g, (1 + e * v * db) * g]]

    return GroupAction("Gbeta", "gas", lambda x, t, e: (x, t),
                       lambda x, t, u, v, e: (exp(e * beta(v)) * u, v),
                       _vf(generator) if generator else None, q, "gas-full",
                       theorem_scope=False, description="u rescaled by exp(eta*beta(v))")


def gas_groups() -> dict[str, GroupAction]:
    fam = "gas"
    return {
        "G1": GroupAction("G1", fam, lambda x, t, e: (x + e, t), lambda x, t, u, v, e: (u, v),
                          _vf("Dx"), _identity, "gas-full", description="translation in x"),
        "G2": GroupAction("G2", fam, lambda x, t, e: (exp(e) * x, t),
                          lambda x, t, u, v, e: (u, exp(e) * v), _vf("x*Dx + v*Dv"),
                          lambda e, x, t, u, v: [[1.0, 0.0], [0.0, np.exp(e)]], "gas-full",
                          description="scaling of x and v"),
        "G3": GroupAction("G3", fam, lambda x, t, e: (x + e * t, t),
                          lambda x, t, u, v, e: (u, v + e), _vf("t*Dx + Dv"),
                          lambda e, x, t, u, v: [[1.0, 0.0], [e, 1.0]], "gas-full",
                          description="Galilean shift"),
        "G4": GroupAction("G4", fam, lambda x, t, e: (x, t + e * x),
                          lambda x, t, u, v, e: (u, v / (1 + e * v)), _vf("x*Dt - v^2*Dv"),
                          _q_g4, "gas-full",
                          denominators=lambda x, t, u, v, e: (1 + e * v,),
                          semigroup=True, theorem_scope=False,
                          description="t sheared by x"),
        "G5": GroupAction("G5", fam, lambda x, t, e: (x / (1 - e * x), t / (1 - e * x)),
                          lambda x, t, u, v, e: ((1 - e * x) * u, v / (1 - e * (x - t * v))),
                          _vf("x^2*Dx + x*t*Dt - x*u*Du + (x*v - t*v^2)*Dv"), _q_g5, "gas-full",
                          denominators=lambda x, t, u, v, e: (1 - e * x, 1 - e * (x - t * v)),
                          semigroup=True, theorem_scope=False,
                          description="projective map in x"),
        "G6": GroupAction("G6", fam, lambda x, t, e: (x, t + e), lambda x, t, u, v, e: (u, v),
                          _vf("Dt"), _identity, "gas-full", description="translation in t"),
        "G7": GroupAction("G7", fam, lambda x, t, e: (x, exp(e) * t),
                          lambda x, t, u, v, e: (u, exp(-e) * v), _vf("t*Dt - v*Dv"),
                          lambda e, x, t, u, v: [[np.exp(-e), 0.0], [0.0, np.exp(-2 * e)]],
                          "gas-full", description="scaling of t against v"),
        "G8": GroupAction("G8", fam, lambda x, t, e: (x / (1 - e * t), t / (1 - e * t)),
                          lambda x, t, u, v, e: ((1 - e * t) * u, e * x + (1 - e * t) * v),
                          _vf("x*t*Dx + t^2*Dt - t*u*Du + (x - t*v)*Dv"), _q_g8, "gas-full",
                          denominators=lambda x, t, u, v, e: (1 - e * t,),
                          description="projective map in t"),
        "Gbeta": beta_group(),
    }


def groups_for(system: str) -> dict[str, GroupAction]:
    if system == "system1":
        return system1_groups()
    if system in ("gas-full", "gas-reduced", "gas"):
        return gas_groups()
    raise KeyError(f"no builtin group catalog for system {system!r}")


def get_group(system: str, name: str) -> GroupAction:
    groups = groups_for(system)
    if name not in groups:
        raise KeyError(f"unknown group {name!r} for {system}; choose from {sorted(groups)}")
    return groups[name]


@dataclass
class FactorizationReport:
    group: str
    eta: float
    trials: int
    max_residual: float
    resampled: int

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_residual < tol


def _probe(coeffs):
    a0, a1, a2, a3, a4, a5 = coeffs

    def f(x, t):
        return a0 + a1 * x + a2 * t + a3 * x * x + a4 * x * t + a5 * t * t

    def fx(x, t):
        return a1 + 2 * a3 * x + a4 * t

    def ft(x, t):
        return a2 + a4 * x + 2 * a5 * t

    return f, fx, ft


_STENCIL_POINTS = [(0, 0)] + [(k, 0) for k in (-2, -1, 1, 2)] + [(0, k) for k in (-2, -1, 1, 2)]


def _central(f, h):
    """Fourth-order central difference from samples at -2h..2h."""
    return (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * h)


def factorization_check(sys: PdeSystem, g: GroupAction, eta: float, trials: int = 100,
                        rng=None, step: float = 1e-5, box: float = 1.0,
                        max_resample: int = 10000) -> FactorizationReport:
    """Max of ``|Delta~ - Q Delta|`` over random quadratic probes.

    ``Delta~`` is the system evaluated at the image point on the jet of the
    transformed probe (central differences); ``Q Delta`` uses the probe's
    exact jet at the original point. Jets of the transformed probe come from
    a fourth-order central difference with spacing ``step``.
    """
    if g.q is None:
        raise ValueError(f"{g.name} has no factorization matrix")
    if g.q_system and sys.name != g.q_system:
        raise ValueError(f"{g.name} factorizes {g.q_system}, not {sys.name}")
    if g.semigroup and eta < 0:
        raise DomainError(f"{g.name} is restricted to eta >= 0")
    rng = np.random.default_rng(rng)
    names = ["x", "t", "u", "v", "u_x", "u_t", "v_x", "v_t"]
    eqs = [e.compile(names) for e in sys.equations]
    worst, resampled = 0.0, 0
    for _ in range(trials):
        for attempt in range(max_resample):
            u, ux, ut = _probe(rng.uniform(-1, 1, 6))
            v, vx, vt = _probe(rng.uniform(-1, 1, 6))
            x, t = rng.uniform(-box, box, 2)
            u0, v0 = u(x, t), v(x, t)
            if g.semigroup and v0 <= 0:
                resampled += 1
                continue
            if not g.valid(x, t, u0, v0, eta):
                resampled += 1
                continue
            try:
                X, T = g.xi(x, t, eta)
                tf = g.transform(u, v, eta)
                vals = {(dx, dt): tf(X + dx * step, T + dt * step)
                        for dx, dt in _STENCIL_POINTS}
            except (DomainError, ZeroDivisionError, FloatingPointError):
                resampled += 1
                continue
            break
        else:
            raise DomainError(f"could not draw a valid probe for {g.name} at eta={eta}")
        ut_, vt_ = vals[(0, 0)]
        jet = [_central(lambda k: vals[(k, 0)][i], step) for i in (0, 1)]
        jet_t = [_central(lambda k: vals[(0, k)][i], step) for i in (0, 1)]
        transformed = np.array([f(X, T, ut_, vt_, jet[0], jet_t[0], jet[1], jet_t[1]) for f in eqs])
        original = np.array([f(x, t, u0, v0, ux(x, t), ut(x, t), vx(x, t), vt(x, t)) for f in eqs])
        resid = np.max(np.abs(transformed - g.q_matrix(eta, x, t, u0, v0) @ original))
        worst = max(worst, float(resid))
    return FactorizationReport(g.name, eta, trials, worst, resampled)


def builtin_generators(system: str) -> dict[str, VectorField]:
    """Named generators ``w1, w2, ...`` of a builtin system; ``wi`` generates ``Gi``.

    The gas catalog also lists ``wbeta`` (with beta(v) = v), ``uDu`` and ``uvDu``.
    """
    fam = "gas" if system.startswith("gas") else system
    out = {"w" + name[1:]: g.generator for name, g in groups_for(fam).items()
           if g.generator is not None}
    if fam == "gas":
        out["uDu"] = _vf("u*Du")
        out["uvDu"] = _vf("u*v*Du")
    return out


def generator_list(text: str) -> list[tuple[str, VectorField]]:
    """Resolve ``"system1:w1..w5"`` or ``"gas:w1,w3,uDu"`` to named generators."""
    system, _, names = text.partition(":")
    table = builtin_generators(system)
    out = []
    for item in filter(None, (s.strip() for s in names.split(","))):
        if ".." in item:
            lo, hi = item.split("..")
            prefix = lo.rstrip("0123456789")
            if not hi.startswith(prefix):
                hi = prefix + hi
            start, stop = int(lo[len(prefix):]), int(hi[len(prefix):])
            keys = [f"{prefix}{k}" for k in range(start, stop + 1)]
        else:
            keys = [item]
        for key in keys:
            if key not in table:
                raise KeyError(f"unknown generator {key!r} for {system}; choose from {sorted(table)}")
            out.append((key, table[key]))
    return out
