"""Mollified singular-shock representatives and weak-residual sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dual import Dual
from .groups import DomainError, GroupAction
from .mollify import ProfileSet, mollifier, panel_nodes
from .riemann import SingularShockParams
from .systems import PdeSystem, builtin_system

DEFAULT_EPS = tuple(0.2 * 2.0 ** -k for k in range(6))


class QuadratureBudgetError(RuntimeError):
    """The requested quadrature exceeds the cell budget."""


@dataclass
class FieldValues:
    U: np.ndarray
    V: np.ndarray
    Ux: np.ndarray
    Ut: np.ndarray
    Vx: np.ndarray
    Vt: np.ndarray


class RegularizedField:
    """Mollified representative of a singular shock at width ``eps``."""

    def __init__(self, params: SingularShockParams, eps: float):
        self.params = params
        self.eps = float(eps)
        self.kind = params.system
        self.c = params.c
        profile_kind = "3'SD" if self.kind == "system1" else "3SD"
        self.profiles = ProfileSet(eps, profile_kind, params.c, params.weights)
        if not self.profiles.compatible():
            raise AssertionError("profile windows overlap")

    @property
    def offsets(self) -> np.ndarray:
        """Shock-coordinate values of all window edges."""
        return np.array([float(k) for k in self.profiles.offsets()]) * self.eps

    def shock_coordinate(self, x, t):
        return x - self.c * t

    def shock_position(self, t):
        return self.c * np.asarray(t, dtype=float)

    def breakpoints(self, t: np.ndarray) -> np.ndarray:
        """x positions of the window edges at each time, shape (len(t), k)."""
        return self.offsets[None, :] + self.c * np.asarray(t)[:, None]

    def evaluate(self, x, t) -> FieldValues:
        x = np.asarray(x, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        if np.any(t <= 0):
            raise DomainError("singular shock representatives live in t > 0")
        p, w, prof = self.params, self.params.weights, self.profiles
        (u0, v0), (u1, v1) = p.left, p.right
        z = x - self.c * t
        step, dstep = prof.step(z)
        dm, ddm = prof.split(z, -1)
        dp, ddp = prof.split(z, 1)
        Dm, dDm = prof.delta(z, -1)
        Dp, dDp = prof.delta(z, 1)
        U = u0 + (u1 - u0) * step
        V = v0 + (v1 - v0) * step
        Uz = (u1 - u0) * dstep
        Vz = (v1 - v0) * dstep
        Ut = np.zeros_like(U)
        Vt = np.zeros_like(V)
        if self.kind == "system1":
            s1, ds1, s2, ds2 = p.s1(t), p.ds1(t), p.s2(t), p.ds2(t)
            split = w["alpha0"] * dm + w["alpha1"] * dp
            delta = w["beta0"] * Dm + w["beta1"] * Dp
            U = U + s1 * split
            Uz = Uz + s1 * (w["alpha0"] * ddm + w["alpha1"] * ddp)
            Ut = Ut + ds1 * split
            V = V + s2 * delta
            Vz = Vz + s2 * (w["beta0"] * dDm + w["beta1"] * dDp)
            Vt = Vt + ds2 * delta
        else:
            s1, ds1, s2, ds2, s3, ds3 = p.s1(t), p.ds1(t), p.s2(t), p.ds2(t), p.s3(t), p.ds3(t)
            delta = w["alpha0"] * Dm + w["alpha1"] * Dp
            split_u = w["beta0"] * dm + w["beta1"] * dp
            split_v = w["gamma0"] * dm + w["gamma1"] * dp
            U = U + s1 * delta + s2 * split_u
            Uz = Uz + s1 * (w["alpha0"] * dDm + w["alpha1"] * dDp) + s2 * (w["beta0"] * ddm + w["beta1"] * ddp)
            Ut = Ut + ds1 * delta + ds2 * split_u
            V = V + s3 * split_v
            Vz = Vz + s3 * (w["gamma0"] * ddm + w["gamma1"] * ddp)
            Vt = Vt + ds3 * split_v
        return FieldValues(U, V, Uz, Ut - self.c * Uz, Vz, Vt - self.c * Vz)


def build_field(params: SingularShockParams, eps: float) -> RegularizedField:
    return RegularizedField(params, eps)


class TransformedField:
    """Image of a field under a group action; derivatives by the chain rule."""

    def __init__(self, base, group: GroupAction, eta: float):
        if group.semigroup and eta < 0:
            raise DomainError(f"{group.name} is restricted to eta >= 0")
        self.base, self.group, self.eta = base, group, float(eta)
        self.eps = base.eps
        self.kind = base.kind
        self.params = base.params

    @property
    def offsets(self) -> np.ndarray:
        return self.base.offsets

    def shock_coordinate(self, x, t):
        px, pt = self.group.preimage(x, t, self.eta)
        return self.base.shock_coordinate(px, pt)

    def _solve(self, t: np.ndarray, targets: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Bisection for ``shock_coordinate(x, t) = target`` on [lo, hi]."""
        t = np.broadcast_to(t, targets.shape)
        lo = np.broadcast_to(lo, targets.shape).astype(float)
        hi = np.broadcast_to(hi, targets.shape).astype(float)
        increasing = self.shock_coordinate(hi, t) >= self.shock_coordinate(lo, t)
        for _ in range(64):
            mid = (lo + hi) / 2
            below = (self.shock_coordinate(mid, t) < targets) == increasing
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return (lo + hi) / 2

    def shock_position(self, t, reach: float = 50.0):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        # bracket around the image of the base shock point at the same time
        guess = np.array([self.group.xi(float(self.base.shock_position(tt)), float(tt), self.eta)[0] for tt in t])
        return self._solve(t, np.zeros_like(t), guess - reach, guess + reach)

    def breakpoints(self, t: np.ndarray, lo: float, hi: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)[:, None]
        targets = np.broadcast_to(self.offsets[None, :], (t.shape[0], len(self.offsets)))
        zlo, zhi = self.shock_coordinate(np.full_like(t, lo), t), self.shock_coordinate(np.full_like(t, hi), t)
        zmin, zmax = np.minimum(zlo, zhi), np.maximum(zlo, zhi)
        out = self._solve(t, targets, lo, hi)
        # edges outside the support collapse onto its ends
        out = np.where(targets <= zmin, np.where(zlo <= zhi, lo, hi), out)
        out = np.where(targets >= zmax, np.where(zlo <= zhi, hi, lo), out)
        return out

    def evaluate(self, x, t) -> FieldValues:
        x = np.asarray(x, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        g, eta = self.group, self.eta
        px, pt = g.preimage(Dual(x, 1.0, 0.0), Dual(t, 0.0, 1.0), eta)
        px, pt = Dual.lift(px), Dual.lift(pt)
        b = self.base.evaluate(np.broadcast_to(px.val, x.shape), np.broadcast_to(pt.val, x.shape))
        u = Dual(b.U, b.Ux * px.dx + b.Ut * pt.dx, b.Ux * px.dt + b.Ut * pt.dt)
        v = Dual(b.V, b.Vx * px.dx + b.Vt * pt.dx, b.Vx * px.dt + b.Vt * pt.dt)
        if not g.valid(px.val, pt.val, b.U, b.V, eta):
            raise DomainError(f"{g.name} with eta={eta} leaves its domain on this field")
        nu, nv = (Dual.lift(a) for a in g.phi(px, pt, u, v, eta))
        shape = x.shape
        return FieldValues(*(np.broadcast_to(a, shape) for a in
                             (nu.val, nv.val, nu.dx, nu.dt, nv.dx, nv.dt)))


def transform_field(g: GroupAction, f, eta: float):
    if eta == 0:
        return f
    return TransformedField(f, g, eta)


def field_breakpoints(f, t: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if isinstance(f, TransformedField):
        return f.breakpoints(t, lo, hi)
    return np.clip(f.breakpoints(t), lo, hi)


@dataclass(frozen=True)
class TestFunction:
    """``rho((x-a)/w) rho((t-b)/w)``."""

    __test__ = False  # not a pytest class

    a: float
    b: float
    w: float = 0.5

    @property
    def support(self) -> tuple[float, float, float, float]:
        return self.a - self.w, self.a + self.w, self.b - self.w, self.b + self.w

    def evaluate(self, x, t):
        """Values and first partials."""
        rho = mollifier()
        px, dpx = rho.power((np.asarray(x) - self.a) / self.w, 1.0)
        pt, dpt = rho.power((np.asarray(t) - self.b) / self.w, 1.0)
        return px * pt, dpx * pt / self.w, px * dpt / self.w


@dataclass
class TestFamily:
    __test__ = False

    functions: list[TestFunction]
    label: str = "default"

    def bounds(self) -> dict[str, float]:
        """Shared sup bounds of psi and its first partials."""
        rho = mollifier()
        y = np.linspace(-1, 1, 4001)
        val, der = rho.power(y, 1.0)
        w = min(f.w for f in self.functions)
        return {"psi": float(val.max() ** 2), "psi_x": float(np.abs(der).max() * val.max() / w),
                "psi_t": float(np.abs(der).max() * val.max() / w)}

    def to_json(self) -> dict:
        return {"label": self.label, "centers": [[f.a, f.b] for f in self.functions],
                "width": self.functions[0].w if self.functions else None,
                "bounds": self.bounds() if self.functions else None}


def default_family(f, t_centers: Sequence[float] = (0.5, 1.5, 2.5), spread: float = 1.0,
                   nx: int = 5, width: float = 0.5) -> TestFamily:
    """Grid of test functions straddling the shock of ``f``, one row per time."""
    funcs = []
    for b in t_centers:
        xs = float(np.atleast_1d(f.shock_position(b))[0])
        funcs += [TestFunction(float(xs + d), float(b), width) for d in np.linspace(-spread, spread, nx)]
    return TestFamily(funcs, "default")


def off_shock_family(f, t_centers: Sequence[float] = (0.5, 1.5, 2.5), margin: float = 2.0,
                     nx: int = 5, width: float = 0.5) -> TestFamily:
    """Test functions supported to the right of the shock tube."""
    funcs = []
    for b in t_centers:
        ts = np.linspace(max(b - width, 1e-3), b + width, 41)
        xs = float(np.max(f.shock_position(ts)))
        funcs += [TestFunction(float(xs + margin + width + d), float(b), width)
                  for d in np.linspace(0, 2, nx)]
    return TestFamily(funcs, "off-shock")


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre layout for weak residuals.

    In t: ``t_slices`` uniform slices with ``t_nodes`` nodes each. In x, per
    t node: one panel of ``x_nodes`` nodes per cell, where cells are cut at
    every profile-window edge, every test-support edge and a uniform grid of
    spacing ``outer_step``.
    """

    t_nodes: int = 32
    t_slices: int = 32
    x_nodes: int = 64
    outer_step: float = 0.5
    max_cells: int = 2_000_000


@dataclass
class WeakResidual:
    direct: np.ndarray
    by_parts: np.ndarray

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.direct - self.by_parts)))


class ConservationForm:
    """Compiled density/flux of a system in conservation form."""

    def __init__(self, sys: PdeSystem):
        if not sys.has_conservation_form:
            raise ValueError(f"{sys.name} has no conservation form")
        self.name = sys.name
        names = ["u", "v"]
        self.density = [e.compile(names) for e in sys.density]
        self.flux = [e.compile(names) for e in sys.flux]
        self.d_density = [[e.diff(n).compile(names) for n in names] for e in sys.density]
        self.d_flux = [[e.diff(n).compile(names) for n in names] for e in sys.flux]

    def accumulate(self, fv: FieldValues, psi, psi_x, psi_t, w) -> tuple[np.ndarray, np.ndarray]:
        direct, parts = [], []
        U, V = fv.U, fv.V
        for k in range(len(self.density)):
            dr, df = self.d_density[k], self.d_flux[k]
            lhs = dr[0](U, V) * fv.Ut + dr[1](U, V) * fv.Vt + df[0](U, V) * fv.Ux + df[1](U, V) * fv.Vx
            direct.append(np.sum(w * lhs * psi))
            parts.append(-np.sum(w * (self.density[k](U, V) * psi_t + self.flux[k](U, V) * psi_x)))
        return np.array(direct), np.array(parts)


def weak_residuals(sys, f, psis: Sequence[TestFunction], quad: QuadratureSpec = QuadratureSpec(),
                   form: ConservationForm | None = None) -> list[WeakResidual]:
    """Weak residuals for test functions sharing one t-support.

    The field is evaluated once on a grid covering the union of the x-supports.
    """
    form = form or ConservationForm(sys)
    supports = [psi.support for psi in psis]
    ta, tb = supports[0][2], supports[0][3]
    if any((s[2], s[3]) != (ta, tb) for s in supports):
        raise ValueError("test functions must share their t-support")
    if ta < 0:
        raise ValueError("test functions must be supported in t >= 0")
    xa, xb = min(s[0] for s in supports), max(s[1] for s in supports)
    t_edges = np.linspace(ta, tb, quad.t_slices + 1)
    tn, tw = panel_nodes(t_edges, quad.t_nodes)
    fixed = np.unique(np.concatenate([
        np.linspace(xa, xb, max(int(math.ceil((xb - xa) / quad.outer_step)), 1) + 1),
        [e for s in supports for e in s[:2]]]))
    bps = field_breakpoints(f, tn, xa, xb)
    cuts = np.sort(np.concatenate([bps, np.broadcast_to(fixed, (len(tn), len(fixed)))], axis=1), axis=1)
    if cuts.size > quad.max_cells:
        raise QuadratureBudgetError(f"{cuts.size} cells exceed the budget {quad.max_cells}")
    xn, xw = panel_nodes(cuts, quad.x_nodes)
    w = xw * tw[:, None]
    keep = w > 0
    xs, ts, ws = xn[keep], np.broadcast_to(tn[:, None], xn.shape)[keep], w[keep]
    fv = f.evaluate(xs, ts)
    out = []
    for psi in psis:
        psi_v, psi_x, psi_t = psi.evaluate(xs, ts)
        d, p = form.accumulate(fv, psi_v, psi_x, psi_t, ws)
        out.append(WeakResidual(d, p))
    return out


def weak_residual(sys, f, psi: TestFunction, quad: QuadratureSpec = QuadratureSpec(),
                  form: ConservationForm | None = None) -> WeakResidual:
    """Direct and by-parts weak residuals of ``f`` against ``psi``, per equation."""
    return weak_residuals(sys, f, [psi], quad, form)[0]


@dataclass
class ConvergenceReport:
    eps: list[float]
    sup_residual: np.ndarray  # shape (len(eps), equations)
    by_parts_gap: float
    floor: float = 1e-11
    min_slope: float = 0.4
    gap_tol: float = 1e-8
    meta: dict = field(default_factory=dict)

    def slopes(self) -> list[float]:
        le = np.log(np.asarray(self.eps))
        out = []
        for k in range(self.sup_residual.shape[1]):
            r = self.sup_residual[:, k]
            if np.all(r < self.floor):
                out.append(float("inf"))
                continue
            out.append(float(np.polyfit(le, np.log(np.maximum(r, 1e-300)), 1)[0]))
        return out

    def decreasing(self) -> list[bool]:
        order = np.argsort(self.eps)[::-1]  # from largest eps to smallest
        out = []
        for k in range(self.sup_residual.shape[1]):
            r = self.sup_residual[order, k]
            out.append(bool(np.all(r < self.floor) or np.all(np.diff(r) < 0)))
        return out

    @property
    def passed(self) -> bool:
        return (all(self.decreasing()) and all(s >= self.min_slope for s in self.slopes())
                and self.by_parts_gap < self.gap_tol)

    def to_json(self) -> dict:
        slopes = self.slopes()
        return {**self.meta,
                "eps": list(self.eps),
                "sup_residual": {str(k + 1): [float(v) for v in self.sup_residual[:, k]]
                                 for k in range(self.sup_residual.shape[1])},
                "slope": {str(k + 1): (None if math.isinf(s) else s) for k, s in enumerate(slopes)},
                "strictly_decreasing": {str(k + 1): d for k, d in enumerate(self.decreasing())},
                "by_parts_max_gap": self.by_parts_gap,
                "floor": self.floor, "min_slope": self.min_slope, "gap_tol": self.gap_tol,
                "verdict": "pass" if self.passed else "fail"}


def _sweep(sys, make_field: Callable[[float], object], family_for: Callable, eps_list,
           quad: QuadratureSpec, jobs: int, meta: dict, criteria: dict) -> ConvergenceReport:
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if eps_list and eps_list[-1] < 1e-4:
        raise ValueError("smallest eps must be at least 1e-4")
    form = ConservationForm(sys)
    fields = [make_field(e) for e in eps_list]
    family = family_for(fields[0])
    rows: dict[tuple, list[TestFunction]] = {}
    for psi in family.functions:
        rows.setdefault((psi.b, psi.w), []).append(psi)
    tasks = [(i, row) for i in range(len(eps_list)) for row in rows.values()]

    def run(task):
        i, row = task
        return [(i, r) for r in weak_residuals(sys, fields[i], row, quad, form)]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = [r for rs in pool.map(run, tasks) for r in rs]
    else:
        results = [r for t in tasks for r in run(t)]
    sup = np.zeros((len(eps_list), len(form.density)))
    gap = 0.0
    for i, r in results:
        sup[i] = np.maximum(sup[i], np.abs(r.direct))
        gap = max(gap, r.discrepancy)
    meta = dict(meta, family=family.to_json(), quadrature=asdict(quad))
    return ConvergenceReport(eps_list, sup, gap, meta=meta, **criteria)


def residual_system(params: SingularShockParams) -> PdeSystem:
    return builtin_system("system1" if params.system == "system1" else "gas-full")


def association_sweep(sys, params: SingularShockParams, family: TestFamily | None = None,
                      eps_list: Sequence[float] = DEFAULT_EPS, quad: QuadratureSpec = QuadratureSpec(),
                      jobs: int = 1, family_label: str = "default", **criteria) -> ConvergenceReport:
    """Sup weak residuals of the regularized singular shock across ``eps_list``.

    ``criteria`` may override ``min_slope``, ``gap_tol`` and ``floor``.
    """
    sys = sys or residual_system(params)
    meta = {"system": sys.name, "left": list(params.left), "right": list(params.right),
            "group": None, "eta": 0.0, "theorem_scope": True}
    fam = (lambda f: family) if family is not None else _family_factory(family_label)
    return _sweep(sys, lambda e: build_field(params, e), fam, eps_list, quad, jobs, meta, criteria)


def _family_factory(label: str, t_centers=(0.5, 1.5, 2.5)):
    if label == "default":
        make = default_family
    elif label == "off-shock":
        make = off_shock_family
    else:
        raise ValueError(f"unknown family {label!r}; choose default or off-shock")

    def build(f):
        if not isinstance(f, TransformedField):
            return make(f, t_centers)
        # later test times until every support maps back into t > 0
        for shift in np.arange(0.0, 10.0, 0.5):
            fam = make(f, tuple(b + shift for b in t_centers))
            if all(_preimage_positive(f, psi) for psi in fam.functions):
                return fam
        raise DomainError("no test family whose supports map back into t > 0")

    return build


def _preimage_positive(f: "TransformedField", psi: TestFunction, margin: float = 0.05) -> bool:
    xa, xb, ta, tb = psi.support
    x, t = np.meshgrid(np.linspace(xa, xb, 21), np.linspace(ta, tb, 21))
    _, pt = f.group.preimage(x, t, f.eta)
    return bool(np.all(np.asarray(pt) > margin))


TRANSFORMED_T_CENTERS = (1.0, 2.0, 3.0)


def symmetry_association_check(sys, g: GroupAction, params: SingularShockParams,
                               family: TestFamily | None = None,
                               eps_list: Sequence[float] = DEFAULT_EPS, eta: float = 0.2,
                               quad: QuadratureSpec = QuadratureSpec(), jobs: int = 1,
                               family_label: str = "default", **criteria) -> ConvergenceReport:
    """Association sweep of the transformed singular solution.

    The default family follows the transformed shock and uses later test
    times so that preimages of the supports stay in t > 0.
    """
    sys = sys or residual_system(params)
    meta = {"system": sys.name, "left": list(params.left), "right": list(params.right),
            "group": g.name, "eta": eta, "theorem_scope": g.theorem_scope,
            "scope": "within theorem scope" if g.theorem_scope else "outside theorem scope"}
    fam = (lambda f: family) if family is not None else _family_factory(family_label, TRANSFORMED_T_CENTERS)
    return _sweep(sys, lambda e: transform_field(g, build_field(params, e), eta), fam,
                  eps_list, quad, jobs, meta, criteria)


def report_csv(report: ConvergenceReport) -> str:
    lines = ["eps,equation,sup_residual"]
    for i, eps in enumerate(report.eps):
        for k in range(report.sup_residual.shape[1]):
            lines.append(f"{eps!r},{k + 1},{float(report.sup_residual[i, k])!r}")
    return "\n".join(lines) + "\n"


def report_svg(report: ConvergenceReport, width: int = 480, height: int = 360) -> str:
    """Log-log plot of sup residual against eps, one polyline per equation."""
    eps = np.asarray(report.eps)
    res = np.maximum(report.sup_residual, 1e-300)
    lx, ly = np.log10(eps), np.log10(res)
    x0, x1 = lx.min() - 0.1, lx.max() + 0.1
    y0, y1 = ly.min() - 0.2, ly.max() + 0.2
    pad = 50

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">log10 eps</text>',
             f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})" '
             'text-anchor="middle">log10 sup residual</text>']
    for v in np.arange(math.ceil(x0 * 2) / 2, x1, 0.5):
        parts.append(f'<text x="{px(v):.1f}" y="{height - pad + 16}" text-anchor="middle" '
                     f'font-size="10">{v:g}</text>')
    for v in np.arange(math.ceil(y0), y1, 1.0):
        parts.append(f'<text x="{pad - 6}" y="{py(v) + 3:.1f}" text-anchor="end" font-size="10">{v:g}</text>')
    slopes = report.slopes()
    for k in range(res.shape[1]):
        color = colors[k % len(colors)]
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(lx, ly[:, k]))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in zip(lx, ly[:, k]):
            parts.append(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="3" fill="{color}"/>')
        label = "inf" if math.isinf(slopes[k]) else f"{slopes[k]:.3f}"
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * k}" text-anchor="end" font-size="11" '
                     f'fill="{color}">equation {k + 1}: slope {label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
