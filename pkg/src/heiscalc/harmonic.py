"""Harmonic and gradient-harmonic maps: the induced second-order system,
Hessian determinants, the Bochner-type identity, grid sign scans, and the
growth-estimate ingredients along radial curves.

Polynomial inputs are scanned through the exact kernel so sign decisions are
not at the mercy of rounding; everything else falls back to jets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from . import exact
from . import expr as ex
from .errors import DomainError, EvalError, NotHarmonic
from .exact import (RatPoly, QQi, fit_constant, frame_t, frame_x, frame_y,
                    harmonic_nullspace, laplacian_h, ratpoly_from_expr)
from .expr import Expr, jet_eval
from .group import HeisMap, koranyi_norm, radial_curve
from .horizontal import (assess_contact, jt, jx, jy, jz, lambda_jet, sym_t,
                         sym_x, sym_y)
from .jets import Jet


def harmonic_poly_basis(d: int) -> list[RatPoly]:
    """Basis of sublaplacian-harmonic polynomials of weighted degree <= d."""
    return harmonic_nullspace(d)


def _as_expr(u) -> Expr:
    if isinstance(u, str):
        return ex.parse_expr(u)
    if isinstance(u, RatPoly):
        return u.to_expr()
    if isinstance(u, Expr):
        return u
    raise DomainError(f"cannot use {type(u).__name__} as a potential")


def _try_poly(u) -> RatPoly | None:
    if isinstance(u, RatPoly):
        return u
    try:
        return ratpoly_from_expr(_as_expr(u))
    except EvalError:
        return None


def _check_harmonic(u, samples=((0.3, -0.7, 0.4), (1.1, 0.5, -0.8), (-0.6, 0.9, 1.3))):
    poly = _try_poly(u)
    if poly is not None:
        if not laplacian_h(poly).is_zero():
            raise NotHarmonic("sublaplacian of the potential is not the zero polynomial")
        return
    e = _as_expr(u)
    for p in samples:
        j = jet_eval(e, p, 2)
        r = (jx(jx(j)) + jy(jy(j))).value
        if abs(r) > 1e-9 * (1.0 + abs(j.value)):
            raise NotHarmonic(f"sublaplacian is {r:.3e} at {p}")


def gradient_harmonic(u, name: str | None = None) -> HeisMap:
    """Map whose components are the frame derivatives (Xu, Yu, Tu) of a
    sublaplacian-harmonic potential."""
    _check_harmonic(u)
    e = _as_expr(u)
    return HeisMap(sym_x(e), sym_y(e), sym_t(e), name or "grad-harmonic")


class SystemResiduals(NamedTuple):
    r1: float          # lap f1 - 8 T f2
    r2: float          # lap f2 + 8 T f1
    r3: float          # lap f3
    rb1: float         # lap lap f1 + 64 T^2 f1
    rb2: float         # lap lap f2 + 64 T^2 f2


def _lap(j: Jet) -> Jet:
    return jx(jx(j)) + jy(jy(j))


def harmonic_system_residuals(m: HeisMap, p, order: int = 5) -> SystemResiduals:
    """Residuals of the coupled system a gradient-harmonic map satisfies."""
    j1, j2, j3 = m.jets(p, order)
    r1 = (_lap(j1) - 8.0 * jt(j2)).value
    r2 = (_lap(j2) + 8.0 * jt(j1)).value
    r3 = _lap(j3).value
    rb1 = (_lap(_lap(j1)) + 64.0 * jt(jt(j1))).value
    rb2 = (_lap(_lap(j2)) + 64.0 * jt(jt(j2))).value
    return SystemResiduals(r1.real, r2.real, r3.real, rb1.real, rb2.real)


@dataclass
class HessianReport:
    point: tuple
    x2u: float
    xyu: float
    yxu: float
    y2u: float
    tu: float
    det_hess: float          # X2u Y2u - XYu YXu
    det_hess_sym: float      # X2u Y2u - ((XYu+YXu)/2)^2
    j_f: float               # Jacobian of the gradient map, det route
    gap: float               # det_hess - det_hess_sym; equals 4 (Tu)^2

    def quasiconformal(self) -> bool:
        return self.j_f > 0


def hessian_report(u, p, order: int = 4) -> HessianReport:
    e = _as_expr(u)
    j = jet_eval(e, p, order)
    x2u = jx(jx(j)).value.real
    xyu = jx(jy(j)).value.real
    yxu = jy(jx(j)).value.real
    y2u = jy(jy(j)).value.real
    tu = jt(j).value.real
    det_hess = x2u * y2u - xyu * yxu
    det_sym = x2u * y2u - 0.25 * (xyu + yxu) ** 2
    grad = HeisMap(sym_x(e), sym_y(e), sym_t(e), "grad")
    g1, g2, g3 = grad.jets(p, 2)
    j_f = lambda_jet(g1, g2, g3).value.real
    return HessianReport(point=tuple(p), x2u=x2u, xyu=xyu, yxu=yxu, y2u=y2u,
                         tu=tu, det_hess=det_hess, det_hess_sym=det_sym,
                         j_f=j_f, gap=det_hess - det_sym)


def bochner_residual(u, p, kappa: float = 8.0, order: int = 5) -> float:
    """Residual of (1/2) lap |grad u|^2 = ||Hess u||^2 + kappa (Xu YTu - Yu XTu)."""
    j = jet_eval(_as_expr(u), p, order)
    gx, gy = jx(j), jy(j)
    lhs = 0.5 * _lap(gx * gx + gy * gy).value.real
    hess2 = (jx(gx).value.real ** 2 + jy(gx).value.real ** 2
             + jx(gy).value.real ** 2 + jy(gy).value.real ** 2)
    geom = (gx.value * jy(jt(j)).value - gy.value * jx(jt(j)).value).real
    return lhs - hess2 - kappa * geom


def geom_term(u, p, order: int = 3) -> float:
    """Xu YTu - Yu XTu at p; the level-set quantity gating the sign results."""
    j = jet_eval(_as_expr(u), p, order)
    return (jx(j).value * jy(jt(j)).value - jy(j).value * jx(jt(j)).value).real


def determine_kappa(dmax: int = 4) -> QQi:
    """Exact fit of the Bochner constant over the harmonic polynomial basis."""
    half = QQi(exact.Fraction(1, 2))
    pairs = []
    for u in harmonic_nullspace(dmax):
        gx, gy = frame_x(u), frame_y(u)
        lhs = laplacian_h(gx * gx + gy * gy) * half
        hess2 = (frame_x(gx) ** 2 + frame_y(gx) ** 2
                 + frame_x(gy) ** 2 + frame_y(gy) ** 2)
        geom = gx * frame_y(frame_t(u)) - gy * frame_x(frame_t(u))
        pairs.append((lhs - hess2, geom))
    return fit_constant(pairs)


# --- grid sign scans -------------------------------------------------------------


@dataclass
class CheckStat:
    name: str
    expect: str                       # "nonneg" or "nonpos"
    n_points: int = 0
    n_gated: int = 0                  # points where the gate held and the claim applies
    n_violations: int = 0
    worst: float = 0.0                # most violating signed value
    examples: list = field(default_factory=list)

    def record(self, point, value: float, gate_ok: bool, tol: float):
        self.n_points += 1
        if not gate_ok:
            return
        self.n_gated += 1
        bad = value < -tol if self.expect == "nonneg" else value > tol
        if bad:
            self.n_violations += 1
            margin = value if self.expect == "nonneg" else -value
            if margin < self.worst:
                self.worst = margin
            if len(self.examples) < 5:
                self.examples.append((point, value))

    def ok(self) -> bool:
        return self.n_violations == 0


@dataclass
class SignReport:
    label: str
    grid_shape: tuple
    checks: list
    singular_count: int = 0

    def ok(self) -> bool:
        return all(c.ok() for c in self.checks)

    def by_name(self, name: str) -> CheckStat:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "grid_shape": list(self.grid_shape),
            "singular_count": self.singular_count,
            "ok": self.ok(),
            "checks": [
                {
                    "name": c.name,
                    "expect": c.expect,
                    "n_points": c.n_points,
                    "n_gated": c.n_gated,
                    "n_violations": c.n_violations,
                    "worst": c.worst,
                }
                for c in self.checks
            ],
        }


def _grid_points(region):
    axes = []
    for lo, hi, n in region:
        if n < 1:
            raise DomainError("grid axis needs at least one sample")
        if n == 1:
            axes.append([0.5 * (lo + hi)])
        else:
            step = (hi - lo) / (n - 1)
            axes.append([lo + i * step for i in range(n)])
    for x in axes[0]:
        for y in axes[1]:
            for t in axes[2]:
                yield (x, y, t)


def _grad_quantities_poly(u: RatPoly):
    """Exact scan quantities for the gradient map of a polynomial potential.

    Log-claims are cleared: lap log g has the sign of g lap g - |grad_H g|^2
    on {g > 0}.
    """
    f1, f2, f3 = frame_x(u), frame_y(u), frame_t(u)
    fc = f1 + f2 * exact.QQI_I
    zf = exact.frame_z(fc)
    g = (zf * zf.conj()).re_part()                     # |ZF|^2
    absf2 = (fc * fc.conj()).re_part()
    grad2 = f1 * f1 + f2 * f2                          # |grad_H u|^2
    geom = f1 * frame_y(f3) - f2 * frame_x(f3)
    cleared_log = g * laplacian_h(g) - frame_x(g) ** 2 - frame_y(g) ** 2
    return {
        "lap_abs_zf2": (None, laplacian_h(g), "nonneg"),
        "cleared_log_abs_zf2": (g, cleared_log, "nonpos"),
        "lap_abs_f2": (geom, laplacian_h(absf2), "nonneg"),
        "lap_grad_u2": (geom, laplacian_h(grad2), "nonneg"),
    }, g


def subharmonicity_scan(u, region, label: str | None = None,
                        tol: float = 1e-10) -> SignReport:
    """Scan the gradient-map sign claims for a harmonic potential over a grid.

    region is three (lo, hi, n) triples for x, y, t. Points where ZF = 0 are
    counted as singular and excluded from the log claim, never from the rest.
    """
    _check_harmonic(u)
    poly = _try_poly(u)
    shape = tuple(n for (_, _, n) in region)
    if poly is None:
        return _scan_jets(u, region, label, tol, shape)
    quantities, g = _grad_quantities_poly(poly)
    checks = [CheckStat(name=k, expect=e) for k, (_, _, e) in quantities.items()]
    singular = 0
    scale = 1.0
    for p in _grid_points(region):
        gval = g.eval(p).real
        if gval <= tol:
            singular += 1
        for stat, (gate, val, _) in zip(checks, quantities.values()):
            if gate is None:
                gate_ok = True
            else:
                gv = gate.eval(p).real
                gate_ok = gv > tol if gate is g else gv >= -tol
            stat.record(p, val.eval(p).real, gate_ok, tol * scale)
    return SignReport(label=label or "gradient-scan", grid_shape=shape,
                      checks=checks, singular_count=singular)


def _scan_jets(u, region, label, tol, shape) -> SignReport:
    e = _as_expr(u)
    names = (("lap_abs_zf2", "nonneg"), ("cleared_log_abs_zf2", "nonpos"),
             ("lap_abs_f2", "nonneg"), ("lap_grad_u2", "nonneg"))
    checks = [CheckStat(name=n, expect=x) for n, x in names]
    singular = 0
    for p in _grid_points(region):
        j = jet_eval(e, p, 5)
        f1, f2, f3 = jx(j), jy(j), jt(j)
        fc = f1 + 1j * f2
        zf = jz(fc)
        g = (zf * zf.conj()).real()
        gval = g.value.real
        if gval <= tol:
            singular += 1
        geomv = (f1.value * jy(f3).value - f2.value * jx(f3).value).real
        cleared = (g * _lap(g) - jx(g) * jx(g) - jy(g) * jy(g)).value.real
        vals = (
            (_lap(g).value.real, True),
            (cleared, gval > tol),
            (_lap((fc * fc.conj()).real()).value.real, geomv >= -tol),
            (_lap((f1 * f1 + f2 * f2).real()).value.real, geomv >= -tol),
        )
        for stat, (val, gate_ok) in zip(checks, vals):
            stat.record(p, val, gate_ok, tol)
    return SignReport(label=label or "gradient-scan", grid_shape=shape,
                      checks=checks, singular_count=singular)


def contact_jacobian_scan(m: HeisMap, region, label: str | None = None,
                          tol: float = 1e-10) -> SignReport:
    """Sign scan of lap J and the cleared lap log J for a contact harmonic map,
    gated on the mixed-gradient condition for superharmonicity."""
    shape = tuple(n for (_, _, n) in region)
    checks = [CheckStat(name="lap_jf", expect="nonpos"),
              CheckStat(name="cleared_log_jf", expect="nonpos")]
    singular = 0
    for p in _grid_points(region):
        j1, j2, j3 = m.jets(p, 5)
        jac = lambda_jet(j1, j2, j3).real()
        jval = jac.value.real
        if jval <= tol:
            singular += 1
        tf1, tf2 = jt(j1), jt(j2)
        # h1 gate: grad f1 . grad T f2 <= grad f2 . grad T f1
        h1 = ((jx(j1) * jx(tf2) + jy(j1) * jy(tf2))
              - (jx(j2) * jx(tf1) + jy(j2) * jy(tf1))).value.real
        lap_j = _lap(jac).value.real
        cleared = (jac * _lap(jac) - jx(jac) * jx(jac) - jy(jac) * jy(jac)).value.real
        checks[0].record(p, lap_j, h1 <= tol, tol)
        checks[1].record(p, cleared, h1 <= tol and jval > tol, tol)
    return SignReport(label=label or "contact-jacobian-scan", grid_shape=shape,
                      checks=checks, singular_count=singular)


# --- growth ingredients ----------------------------------------------------------


@dataclass
class GrowthRow:
    r: float
    curve_point: tuple
    n_err: float            # |N(gamma(r,p)) - r N(p)|
    horiz_resid: float      # contact form on the curve velocity
    j_f: float
    t2u: float
    geom: float
    contact_ok: bool
    gate_ok: bool           # contact_ok and geom >= 0
    bound_gap: float        # j_f - t2u; claim is <= 0 where gate_ok

    @property
    def bound_ok(self) -> bool:
        return not self.gate_ok or self.bound_gap <= 1e-10


@dataclass
class GrowthReport:
    point: tuple
    alpha: float
    rows: list
    pf_norm: float | None           # sup |Pf| (1 - N^4)^alpha over the sample
    pf_skipped: int                 # sample points where the Jacobian was <= 0

    @property
    def max_n_err(self) -> float:
        return max((row.n_err for row in self.rows), default=0.0)

    @property
    def max_horiz_resid(self) -> float:
        return max((row.horiz_resid for row in self.rows), default=0.0)

    @property
    def gated_rows(self) -> int:
        return sum(1 for row in self.rows if row.gate_ok)

    @property
    def bound_violations(self) -> int:
        return sum(1 for row in self.rows if not row.bound_ok)

    def ok(self) -> bool:
        return (self.max_n_err <= 1e-9 and self.max_horiz_resid <= 1e-8
                and self.bound_violations == 0)


def _curve_velocity(r: float, p) -> tuple:
    """d/dr of the radial curve, exact: zeta' = (1 - i t/|z|^2) zeta / r."""
    q = radial_curve(r, p)
    x0, y0, t0 = p
    beta = t0 / (x0 * x0 + y0 * y0)
    zdot = (1.0 - 1j * beta) * complex(q[0], q[1]) / r
    return zdot.real, zdot.imag, 2.0 * r * t0


def growth_ingredients(u, p, alpha: float = 1.0, radii=None,
                       sample_points=None, order: int = 4) -> GrowthReport:
    """Everything the radial-curve growth estimate consumes, measured.

    For each radius: the dilation consistency of the curve, horizontality of
    its velocity, and the Jacobian-versus-T^2 u comparison gated on the
    contact equations holding and the level-set term being nonnegative.
    """
    if alpha < 1.0:
        raise DomainError("the weight exponent must be at least 1")
    if radii is None:
        radii = [0.1 + 0.8 * i / 9.0 for i in range(10)]
    e = _as_expr(u)
    grad = HeisMap(sym_x(e), sym_y(e), sym_t(e), "grad")
    n_p = koranyi_norm(p)
    rows = []
    for r in radii:
        q = radial_curve(r, p)
        n_err = abs(koranyi_norm(q) - r * n_p)
        vx, vy, vt = _curve_velocity(r, p)
        horiz = abs(vt - 2.0 * q[1] * vx + 2.0 * q[0] * vy)
        a = assess_contact(grad, q, order=2)
        j = jet_eval(e, q, order)
        t2u = jt(jt(j)).value.real
        geom = (jx(j).value * jy(jt(j)).value - jy(j).value * jx(jt(j)).value).real
        contact_ok = a.max_contact_residual() <= 1e-8 * (1.0 + abs(j.value))
        gate = contact_ok and geom >= -1e-12
        jac = a.lam.real
        rows.append(GrowthRow(r=r, curve_point=tuple(q), n_err=n_err,
                              horiz_resid=horiz, j_f=jac, t2u=t2u, geom=geom,
                              contact_ok=contact_ok, gate_ok=gate,
                              bound_gap=jac - t2u))
    pf_norm = None
    skipped = 0
    if sample_points:
        best = 0.0
        seen = False
        for sp in sample_points:
            n4 = koranyi_norm(sp) ** 4
            if n4 >= 1.0:
                raise DomainError(f"sample point {tuple(sp)} lies outside the unit ball")
            g1, g2, g3 = grad.jets(sp, 2)
            jac = lambda_jet(g1, g2, g3)
            if jac.value.real <= 0:
                skipped += 1
                continue
            pf = jz(jac.log()).value
            best = max(best, abs(pf) * (1.0 - n4) ** alpha)
            seen = True
        pf_norm = best if seen else None
    return GrowthReport(point=tuple(p), alpha=alpha, rows=rows,
                        pf_norm=pf_norm, pf_skipped=skipped)
