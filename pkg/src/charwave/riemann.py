"""Riemann problems for the builtin 2x2 systems, classical and singular."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .symbolic import Alphabet, Expr, parse
from .systems import PdeSystem, builtin_system

BOUNDARY_TOL = 1e-12
SQRT12 = math.sqrt(12.0)


class RiemannError(ValueError):
    """Riemann data outside the domain of the requested construction."""


@dataclass(frozen=True)
class State:
    u: float
    v: float

    def __iter__(self):
        return iter((self.u, self.v))

    def array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)

    @classmethod
    def of(cls, s) -> "State":
        return s if isinstance(s, State) else cls(float(s[0]), float(s[1]))


_UV = Alphabet(["x", "t"], ["u", "v"], max_order=0)


@dataclass
class FluxSystem:
    """``density(U)_t + flux(U)_x = 0`` in the state variables (u, v).

    ``eigen_exprs`` optionally lists closed-form ``(lambda_i, r_i)`` pairs
    used for the exact field-type decision.
    """

    name: str
    density: tuple[Expr, Expr]
    flux: tuple[Expr, Expr]
    eigen_exprs: list | None = None

    @classmethod
    def from_pde(cls, sys: PdeSystem) -> "FluxSystem":
        if not sys.has_conservation_form:
            raise RiemannError(f"{sys.name} has no conservation form")
        return cls(sys.name, tuple(sys.density), tuple(sys.flux), _EIGEN.get(sys.name))

    def _eval(self, exprs, s: State) -> np.ndarray:
        p = {"u": s.u, "v": s.v}
        return np.array([float(e.evaluate(p)) for e in exprs])

    def density_at(self, s) -> np.ndarray:
        return self._eval(self.density, State.of(s))

    def flux_at(self, s) -> np.ndarray:
        return self._eval(self.flux, State.of(s))

    def jacobian(self, s) -> np.ndarray:
        """``A = (D density)^-1 D flux`` at ``s``."""
        s = State.of(s)
        p = {"u": s.u, "v": s.v}
        dr = np.array([[float(e.diff(n).evaluate(p)) for n in "uv"] for e in self.density])
        df = np.array([[float(e.diff(n).evaluate(p)) for n in "uv"] for e in self.flux])
        return np.linalg.solve(dr, df)


def _e(text: str) -> Expr:
    return parse(text, _UV)


_EIGEN = {
    "system1": [(_e("u - 1"), (_e("1"), _e("u + 1"))), (_e("u + 1"), (_e("1"), _e("u - 1")))],
    "gas-reduced": [(_e("v"), (_e("1"), _e("0"))), (_e("v"), (_e("1"), _e("0")))],
    "gas-full": [(_e("v"), (_e("1"), _e("0"))), (_e("v"), (_e("1"), _e("0")))],
}


def flux_system(name: str) -> FluxSystem:
    return FluxSystem.from_pde(builtin_system(name))


@dataclass
class EigenData:
    lam: tuple[float, float]
    r: tuple[np.ndarray, np.ndarray]
    l: tuple[np.ndarray, np.ndarray]
    field_types: tuple[str, str]


def _field_type(lam: Expr, r: Sequence[Expr]) -> str:
    g = lam.diff("u") * r[0] + lam.diff("v") * r[1]
    if g.is_zero():
        return "linearly degenerate"
    if g.is_constant():
        return "genuinely nonlinear"
    return "mixed"


def eigen(sys: FluxSystem, s) -> EigenData:
    """Eigenvalues (ascending), right and left eigenvectors, field types."""
    s = State.of(s)
    a = sys.jacobian(s)
    tr, det = a[0, 0] + a[1, 1], np.linalg.det(a)
    disc = tr * tr / 4 - det
    if disc < -BOUNDARY_TOL:
        raise RiemannError(f"{sys.name} is not hyperbolic at {s}: complex eigenvalues")
    root = math.sqrt(max(disc, 0.0))
    lam = (tr / 2 - root, tr / 2 + root)
    if sys.eigen_exprs:
        p = {"u": s.u, "v": s.v}
        lam = tuple(float(l_.evaluate(p)) for l_, _ in sys.eigen_exprs)
        r = tuple(np.array([float(c.evaluate(p)) for c in vec]) for _, vec in sys.eigen_exprs)
        types = tuple(_field_type(l_, vec) for l_, vec in sys.eigen_exprs)
    else:
        r = tuple(_null_vector(a - l_ * np.eye(2)) for l_ in lam)
        types = ("unknown", "unknown")
    rmat = np.column_stack(r)
    if abs(np.linalg.det(rmat)) > 1e-14:
        inv = np.linalg.inv(rmat)
        left = (inv[0], inv[1])
    else:
        # defective: one left eigenvector for the double eigenvalue
        w = _null_vector((a - lam[0] * np.eye(2)).T)
        left = (w, w)
    return EigenData(lam, r, left, types)


def _null_vector(m: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(m)
    v = vt[-1]
    return v / v[np.argmax(np.abs(v))]


def rh_residual(sys: FluxSystem, left, right, speed: float) -> np.ndarray:
    """``speed * [density] - [flux]``."""
    left, right = State.of(left), State.of(right)
    return speed * (sys.density_at(right) - sys.density_at(left)) - (sys.flux_at(right) - sys.flux_at(left))


def lax_admissible(sys: FluxSystem, left, right, speed: float, i: int, tol: float = BOUNDARY_TOL) -> bool:
    lam_l = eigen(sys, left).lam[i - 1]
    lam_r = eigen(sys, right).lam[i - 1]
    return lam_l >= speed - tol and speed >= lam_r - tol


def rarefaction_curve(sys: FluxSystem, s0, i: int, sigma: float) -> State:
    """Integrate ``dU/dsigma = r_i(U)`` with ``D lambda_i . r_i = 1``."""
    if i not in (1, 2):
        raise RiemannError(f"family index must be 1 or 2, got {i}")
    if not sys.eigen_exprs or sys.name != "system1":
        raise RiemannError("rarefaction curves are defined for system1 only")
    s0 = State.of(s0)
    if sigma == 0:
        return s0
    _, vec = sys.eigen_exprs[i - 1]
    fr = [c.compile(["u", "v"]) for c in vec]
    sol = solve_ivp(lambda _, z: [fr[0](*z), fr[1](*z)], (0.0, sigma), s0.array(),
                    method="DOP853", rtol=1e-12, atol=1e-13)
    return State(*sol.y[:, -1])


def rarefaction_constant(s: State, i: int) -> float:
    """Riemann invariant ``v - (u^2/2 + u)`` (i=1) or ``v - (u^2/2 - u)`` (i=2)."""
    return s.v - (s.u ** 2 / 2 + (s.u if i == 1 else -s.u))


def shock_curve_system1(s0, u: float, branch: int) -> tuple[State, float]:
    """State with the given ``u`` on the ``branch``-family shock curve from ``s0``."""
    if branch not in (1, 2):
        raise RiemannError(f"branch must be 1 or 2, got {branch}")
    s0 = State.of(s0)
    du = u - s0.u
    rad = 1 - du * du / 12
    if rad < 0:
        raise RiemannError(f"|u - u0| = {abs(du):.6g} exceeds sqrt(12)")
    r = math.sqrt(rad)
    sign = -1.0 if branch == 1 else 1.0
    v = s0.v + du * ((u + s0.u) / 2 - sign * r)
    speed = s0.u + du / 2 + sign * r
    return State(u, v), speed


@dataclass
class Classification:
    label: str  # classical, Q1, Q2, Q3 or boundary
    curves: list[str] = field(default_factory=list)
    in_q: bool = False

    def __str__(self) -> str:
        return self.label if not self.curves else f"{self.label} ({', '.join(self.curves)})"


def system1_curves(left) -> dict:
    """Boundary curves of the classical region as functions of u."""
    u0, v0 = State.of(left)
    return {
        "J": lambda u: u * u / 2 + u + 4.5 + v0 - u0 * u0 / 2 - u0,
        "J2": lambda u: u * u / 2 - u - 4.5 + v0 - u0 * u0 / 2 + u0,
        "D": lambda u: v0 + (u - u0) * (u + 1),
        "E": lambda u: v0 + (u - u0) * (u0 - 1),
        "J1-1": lambda u: shock_curve_system1((u0, v0), u, 1)[0].v,
        "J1-2": lambda u: shock_curve_system1((u0, v0), u, 2)[0].v,
    }


def classify_system1(left, right, tol: float = BOUNDARY_TOL) -> Classification:
    left, right = State.of(left), State.of(right)
    u0 = left.u
    u, v = right
    c = system1_curves(left)
    split = u0 - 3
    on = []
    if u >= split - tol:
        on += [n for n in ("J", "J2") if abs(v - c[n](u)) <= tol]
    if u <= split + tol:
        on += [n for n in ("D", "E") if abs(v - c[n](u)) <= tol]
        if u >= u0 - SQRT12 - tol:
            uu = max(u, u0 - SQRT12)
            on += [n for n in ("J1-1", "J1-2") if abs(v - c[n](uu)) <= tol]
    if u >= split:
        if v > c["J"](u):
            region = "Q1"
        elif v < c["J2"](u):
            region = "Q3"
        else:
            region = "classical"
    else:
        inside_cap = u >= u0 - SQRT12 and c["J1-1"](u) <= v <= c["J1-2"](u)
        if inside_cap:
            region = "classical"
        elif v > c["D"](u):
            region = "Q1"
        elif v < c["E"](u):
            region = "Q3"
        else:
            region = "Q2"
    classical_edges = {"J", "J2", "J1-1", "J1-2"}
    in_q = region != "classical" and not (set(on) & classical_edges)
    if on:
        return Classification("boundary", on, in_q)
    return Classification(region, [], in_q)


@dataclass
class Wave:
    kind: str  # rarefaction, shock, contact, vacuum, singular-shock
    left: State
    right: State
    speeds: tuple[float, float]
    family: int | None = None

    def to_json(self) -> dict:
        d = {"type": self.kind, "left": list(self.left), "right": list(self.right),
             "speeds": list(self.speeds)}
        if self.family is not None:
            d["family"] = self.family
        return d


@dataclass
class SingularShockParams:
    """Parameters of a singular shock; strengths are functions of t."""

    system: str
    left: State
    right: State
    c: float
    sigma1: float
    weights: dict

    def s1(self, t):
        if self.system == "system1":
            return np.sqrt(self.sigma1 * np.asarray(t))
        return self.sigma1 * np.asarray(t)

    def ds1(self, t):
        t = np.asarray(t)
        if self.system == "system1":
            return 0.5 * np.sqrt(self.sigma1 / t)
        return np.full_like(t, self.sigma1, dtype=float)

    def s2(self, t):
        t = np.asarray(t)
        if self.system == "system1":
            return self.sigma1 * t
        return -self.s1(t) / self.s3(t) ** 2

    def ds2(self, t):
        t = np.asarray(t)
        if self.system == "system1":
            return np.full_like(t, self.sigma1, dtype=float)
        # s2 = -s1 / s3^2 with s1 ~ t and s3 ~ t^(1/3), so s2 ~ t^(1/3)
        return self.s2(t) / (3 * t)

    def s3(self, t):
        return self.weights["s3_scale"] * np.cbrt(self.s1(t))

    def ds3(self, t):
        t = np.asarray(t)
        return self.s3(t) / (3 * t)

    def residuals(self, ts: Sequence[float] = (0.5, 1.0, 2.0)) -> dict[str, float]:
        return (_system1_residuals if self.system == "system1" else _gas_residuals)(self, ts)

    def to_json(self) -> dict:
        return {"system": self.system, "left": list(self.left), "right": list(self.right),
                "c": self.c, "sigma1": self.sigma1, "weights": dict(self.weights),
                "residuals": self.residuals()}


def _jumps(left: State, right: State) -> dict:
    (u0, v0), (u1, v1) = left, right
    return {"G": u1 - u0, "H": v1 - v0, "G2": u1 ** 2 - u0 ** 2, "G3": u1 ** 3 - u0 ** 3,
            "GH": u1 * v1 - u0 * v0, "GH2": u1 * v1 ** 2 - u0 * v0 ** 2}


def singular_params_system1(left, right) -> SingularShockParams:
    left, right = State.of(left), State.of(right)
    j = _jumps(left, right)
    if j["G"] == 0:
        raise RiemannError("[G] = 0: the shock speed is undetermined")
    c = (j["G2"] - j["H"]) / j["G"]
    sigma1 = c * j["H"] - j["G3"] / 3 + j["G"]
    if not sigma1 > 0:
        raise RiemannError(f"sigma1 = {sigma1:.6g} <= 0: no singular shock")
    a1sq = (c - left.u) / (right.u - left.u)
    a0sq = 1 - a1sq
    if not (-BOUNDARY_TOL <= a1sq <= 1 + BOUNDARY_TOL):
        raise RiemannError(f"alpha1^2 = {a1sq:.6g} outside [0, 1]")
    a1sq = min(max(a1sq, 0.0), 1.0)
    a0sq = 1 - a1sq
    weights = {"alpha0_sq": a0sq, "alpha1_sq": a1sq, "alpha0": math.sqrt(a0sq),
               "alpha1": math.sqrt(a1sq), "beta0": 0.5, "beta1": 0.5}
    return SingularShockParams("system1", left, right, c, sigma1, weights)


def _system1_residuals(p: SingularShockParams, ts) -> dict[str, float]:
    j = _jumps(p.left, p.right)
    w = p.weights
    (u0, _), (u1, _) = p.left, p.right
    a0, a1 = w["alpha0"], w["alpha1"]
    out = {
        "uslov1": -p.c * j["G"] + j["G2"] - j["H"],
        "uslov3": p.sigma1 - (p.c * j["H"] - j["G3"] / 3 + j["G"]),
        "normalization": a0 ** 2 + a1 ** 2 - 1,
        "uslov4": a0 ** 2 * u0 + a1 ** 2 * u1 - p.c,
        "beta_sum": w["beta0"] + w["beta1"] - 1,
    }
    ts = np.asarray(ts, dtype=float)
    out["uslov2"] = float(np.max(np.abs(p.s2(ts) - p.s1(ts) ** 2 * (a0 ** 2 + a1 ** 2))))
    out["uslov3_strength"] = float(np.max(np.abs(p.s2(ts) - p.sigma1 * ts)))
    out["uslov4_strength"] = float(np.max(np.abs(
        p.c * p.s2(ts) - p.s1(ts) ** 2 * (a0 ** 2 * u0 + a1 ** 2 * u1))))
    return {k: abs(float(v)) for k, v in out.items()}


def gas_speed(left: State, right: State) -> float:
    """Root of ``c^2[G] - 2c[GH] + [GH^2]`` in ``[v1, v0]``.

    The quadratic equals ``u1 (c - v1)^2 - u0 (c - v0)^2``, so the root in
    the interval is a square-root weighted mean of the velocities.
    """
    (u0, v0), (u1, v1) = left, right
    a, b = math.sqrt(u0), math.sqrt(u1)
    if a + b == 0:
        raise RiemannError("both states are vacuum: no singular shock")
    return (a * v0 + b * v1) / (a + b)


def singular_params_gas(left, right) -> SingularShockParams:
    left, right = State.of(left), State.of(right)
    (u0, v0), (u1, v1) = left, right
    if not v0 > v1:
        raise RiemannError("singular shocks need v0 > v1")
    j = _jumps(left, right)
    c = gas_speed(left, right)
    sigma1 = c * j["G"] - j["GH"]
    if not sigma1 > 0:
        raise RiemannError(f"sigma1 = {sigma1:.6g} <= 0: no singular shock")
    a0 = (v1 - c) / (v1 - v0)
    a1 = (c - v0) / (v1 - v0)
    rhs = a0 * (v0 ** 2 - c * v0) + a1 * (v1 ** 2 - c * v1)
    gamma = math.sqrt(max(rhs, 0.0))
    # s3 = scale * s1^(1/3); the scale cancels the leading square moments
    if gamma > 0 and u0 + u1 > 0:
        scale = np.cbrt((v0 - v1) / (gamma * (u0 + u1)))
    else:
        scale = 1.0
    weights = {"alpha0": a0, "alpha1": a1, "beta0": 0.5, "beta1": 0.5,
               "gamma0": gamma, "gamma1": -gamma, "s3_scale": float(scale)}
    return SingularShockParams("gas", left, right, c, sigma1, weights)


def _gas_residuals(p: SingularShockParams, ts) -> dict[str, float]:
    j = _jumps(p.left, p.right)
    w = p.weights
    (u0, v0), (u1, v1) = p.left, p.right
    ts = np.asarray(ts, dtype=float)
    out = {
        "model2": p.sigma1 - (p.c * j["G"] - j["GH"]),
        "model3_alpha0": w["alpha0"] - (v1 - p.c) / (v1 - v0),
        "model3_alpha1": w["alpha1"] - (p.c - v0) / (v1 - v0),
        "model4": p.sigma1 * p.c - (p.c * j["GH"] - j["GH2"]),
        "model4_mean": p.sigma1 * (w["alpha0"] * v0 + w["alpha1"] * v1) - p.sigma1 * p.c,
        "model5": float(np.max(np.abs(-p.s2(ts) * p.s3(ts) ** 2 - p.s1(ts)))),
        "model6": w["alpha0"] * (v0 ** 2 - p.c * v0) + w["alpha1"] * (v1 ** 2 - p.c * v1)
                  - (w["beta0"] * w["gamma0"] ** 2 + w["beta1"] * w["gamma1"] ** 2),
        "beta_sum": w["beta0"] + w["beta1"] - 1,
        "model2_strength": float(np.max(np.abs(p.s1(ts) - p.sigma1 * ts))),
    }
    return {k: abs(float(v)) for k, v in out.items()}


@dataclass
class WaveFan:
    system: str
    left: State
    right: State
    waves: list[Wave]
    classification: str = ""
    singular: SingularShockParams | None = None

    def speeds(self) -> list[float]:
        return [s for w in self.waves for s in w.speeds]

    def sample(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """Self-similar profile ``(u, v)(x/t)``; singular parts are omitted."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        u = np.full_like(xi, self.left.u)
        v = np.full_like(xi, self.left.v)
        for w in self.waves:
            a, b = w.speeds
            beyond = xi >= b if w.kind in ("rarefaction", "vacuum") else xi > a
            u[beyond], v[beyond] = w.right.u, w.right.v
            if w.kind == "rarefaction":
                inside = (xi > a) & (xi < b)
                uu = xi[inside] + (1.0 if w.family == 1 else -1.0)
                v[inside] = uu ** 2 / 2 + (uu if w.family == 1 else -uu) + rarefaction_constant(w.left, w.family)
                u[inside] = uu
            elif w.kind == "vacuum":
                inside = (xi > a) & (xi < b)
                u[inside], v[inside] = 0.0, xi[inside]
        return u, v

    def to_json(self) -> dict:
        return {"system": self.system, "left": list(self.left), "right": list(self.right),
                "classification": self.classification,
                "waves": [w.to_json() for w in self.waves],
                "singular": self.singular.to_json() if self.singular else None}


def _wave1(left: State, s: float) -> State:
    if s >= 0:
        u = left.u + s
        return State(u, u * u / 2 + u + rarefaction_constant(left, 1))
    return shock_curve_system1(left, left.u + s, 1)[0]


def _wave2_back(right: State, s: float) -> State:
    """State ``M`` joined to ``right`` by a 2-wave of strength ``s = u_R - u_M``."""
    um = right.u - s
    if s >= 0:
        return State(um, um * um / 2 - um + rarefaction_constant(right, 2))
    r = math.sqrt(max(1 - s * s / 12, 0.0))
    return State(um, right.v - s * ((right.u + um) / 2 - r))


def _mismatch(left, right, s):
    m1, m2 = _wave1(left, s[0]), _wave2_back(right, s[1])
    return np.array([m1.u - m2.u, m1.v - m2.v])


def solve_classical_system1(left, right, tol: float = 1e-10, max_iter: int = 100) -> WaveFan:
    left, right = State.of(left), State.of(right)
    cls = classify_system1(left, right)
    if cls.label not in ("classical", "boundary") or cls.in_q:
        raise RiemannError(f"no classical solution: right state is in {cls}")
    sys = flux_system("system1")
    if left == right:
        return WaveFan("system1", left, right, [], str(cls))
    mid = (left.u + right.u) / 2
    s = np.array([mid - left.u, right.u - mid])
    lo = -SQRT12

    def clip(z):
        return np.maximum(z, lo)

    f = _mismatch(left, right, s)
    # single-wave data first: at curve junctions the Jacobian is singular and Newton stalls near 1e-8
    for single in (np.array([right.u - left.u, 0.0]), np.array([0.0, right.u - left.u])):
        try:
            fs = _mismatch(left, right, single)
        except RiemannError:
            continue
        if np.max(np.abs(fs)) < 1e-12:
            s, f = single, fs
            break
    # iterate past ``tol`` down to roundoff; the mismatch feeds the RH residual of the second wave
    for _ in range(max_iter):
        if np.max(np.abs(f)) < 1e-14:
            break
        h = 1e-7
        jac = np.column_stack([(_mismatch(left, right, s + h * e) - _mismatch(left, right, s - h * e)) / (2 * h)
                               for e in np.eye(2)])
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = -f
        lam = 1.0
        while lam > 1e-8:
            trial = clip(s + lam * step)
            ft = _mismatch(left, right, trial)
            if np.linalg.norm(ft) < np.linalg.norm(f):
                break
            lam /= 2
        else:
            break
        s, f = trial, ft
    if np.max(np.abs(f)) >= tol:
        raise RiemannError(f"Newton did not converge: residual {np.max(np.abs(f)):.3g}")
    mid_state = _wave1(left, s[0])
    waves = []
    for fam, (a, b), strength in ((1, (left, mid_state), s[0]), (2, (mid_state, right), s[1])):
        if abs(strength) < 1e-14:
            continue
        if strength > 0:
            lam_a, lam_b = eigen(sys, a).lam[fam - 1], eigen(sys, b).lam[fam - 1]
            waves.append(Wave("rarefaction", a, b, (lam_a, lam_b), fam))
        else:
            _, speed = shock_curve_system1(a, b.u, fam)
            waves.append(Wave("shock", a, b, (speed, speed), fam))
    return WaveFan("system1", left, right, waves, str(cls))


def solve_system1(left, right) -> WaveFan:
    left, right = State.of(left), State.of(right)
    cls = classify_system1(left, right)
    if not cls.in_q:
        fan = solve_classical_system1(left, right)
        return fan
    params = singular_params_system1(left, right)
    wave = Wave("singular-shock", left, right, (params.c, params.c))
    return WaveFan("system1", left, right, [wave], str(cls), params)


def solve_gas(left, right) -> WaveFan:
    left, right = State.of(left), State.of(right)
    (u0, v0), (u1, v1) = left, right
    if u0 < 0 or u1 < 0:
        raise RiemannError("gas densities must be non-negative")
    waves: list[Wave] = []
    if v0 < v1:
        if u0 > 0:
            waves.append(Wave("contact", left, State(0.0, v0), (v0, v0)))
        waves.append(Wave("vacuum", State(0.0, v0), State(0.0, v1), (v0, v1)))
        if u1 > 0:
            waves.append(Wave("contact", State(0.0, v1), right, (v1, v1)))
        return WaveFan("gas-full", left, right, waves, "vacuum")
    if v0 == v1:
        if left != right:
            waves.append(Wave("contact", left, right, (v0, v0)))
        return WaveFan("gas-full", left, right, waves, "contact")
    params = singular_params_gas(left, right)
    waves.append(Wave("singular-shock", left, right, (params.c, params.c)))
    return WaveFan("gas-full", left, right, waves, "singular", params)


def solve(system: str, left, right) -> WaveFan:
    if system == "system1":
        return solve_system1(left, right)
    if system in ("gas-full", "gas-reduced", "gas"):
        return solve_gas(left, right)
    raise RiemannError(f"no Riemann solver for {system!r}")


def fan_rh_residuals(fan: WaveFan) -> list[float]:
    """RH residual norms of the shocks and contacts of a fan."""
    sys = flux_system("system1" if fan.system == "system1" else "gas-full")
    return [float(np.max(np.abs(rh_residual(sys, w.left, w.right, w.speeds[0]))))
            for w in fan.waves if w.kind in ("shock", "contact")]
