"""Numerical validation of the lifted equations along real trajectories.

The symbolic side promises that y = f^m (and every product f^i g^j with
i + j = m) satisfies the derived monic equation of order m+1 whenever f, g
solve y'' = p(x) y' + q(x) y.  This module integrates that base equation
with classical fixed-step RK4, evaluates the derivatives of each product
through the symbolic towers (never by finite differences), and reports a
scale-invariant residual plus a midpoint Wronskian for the basis claim.

Because the towers express every derivative exactly in terms of (f, f'),
(g, g') and the values of p, q and their derivatives, the residual is a
polynomial identity evaluated in floating point: it stays at rounding
level no matter how accurate the integrator was.  Only the Wronskian
actually judges the trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Sequence

import numpy as np

from .diffring import DiffPoly, DiffSymbol, P, Q
from .exprparse import (
    Add,
    Call,
    Div,
    Expr,
    ExprDomainError,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    diff_expr,
    eval_expr,
)
from .lifting import LiftedODE, derivative_tower

__all__ = [
    "ConfigError",
    "NumericConfig",
    "Trajectory",
    "integrate_base",
    "symbol_values",
    "power_derivative_values",
    "monomial_derivative_values",
    "residual",
    "MonomialResidual",
    "BasisReport",
    "basis_check",
    "monomial_label",
]


class ConfigError(ValueError):
    """Raised for unusable numeric configurations."""


@dataclass(frozen=True)
class NumericConfig:
    """Interval, step size, and initial conditions for the two base solutions.

    The grid must carry at least 10 points.  Linearly dependent initial
    conditions are allowed through on purpose: the Wronskian check exists
    to catch exactly that, and a report showing it fail is more useful
    than a constructor refusing to run.
    """

    interval: tuple[float, float]
    step: float
    ic_f: tuple[float, float] = (1.0, 0.0)
    ic_g: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        a, b = (float(v) for v in self.interval)
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "ic_f", tuple(float(v) for v in self.ic_f))
        object.__setattr__(self, "ic_g", tuple(float(v) for v in self.ic_g))
        if len(self.ic_f) != 2 or len(self.ic_g) != 2:
            raise ConfigError("initial conditions must be (value, derivative) pairs")
        if not (a < b):
            raise ConfigError(f"interval must satisfy a < b, got [{a}, {b}]")
        if not (self.step > 0.0) or not math.isfinite(self.step):
            raise ConfigError(f"step must be a positive real, got {self.step}")
        if (b - a) / self.step < 10.0:
            raise ConfigError(
                f"grid on [{a}, {b}] with step {self.step} has fewer than 10 points"
            )

    @property
    def steps(self) -> int:
        """Number of RK4 steps; the effective step is (b - a)/steps."""
        a, b = self.interval
        return max(10, round((b - a) / self.step))

    @property
    def ic_independent(self) -> bool:
        """Whether the two initial-condition vectors span the plane."""
        (f0, fp0), (g0, gp0) = self.ic_f, self.ic_g
        norms = math.hypot(f0, fp0) * math.hypot(g0, gp0)
        if norms == 0.0:
            return False
        return abs(f0 * gp0 - fp0 * g0) > 1e-12 * norms


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of one base solution: grid, f values, f' values."""

    grid: np.ndarray
    f_vals: np.ndarray
    fp_vals: np.ndarray

    def __post_init__(self) -> None:
        for name in ("grid", "f_vals", "fp_vals"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (len(self.grid) == len(self.f_vals) == len(self.fp_vals)):
            raise ValueError("grid, f_vals, fp_vals must have equal lengths")
        if len(self.grid) < 2:
            raise ValueError("a trajectory needs at least two samples")
        gaps = np.diff(self.grid)
        mean = float(np.mean(gaps))
        if mean <= 0.0 or np.max(np.abs(gaps - mean)) > 1e-12 * abs(mean):
            raise ValueError("grid must ascend with uniform spacing")

    def __len__(self) -> int:
        return len(self.grid)

    def point(self, index: int) -> tuple[float, float, float]:
        """(x, f, f') at one grid index."""
        return (
            float(self.grid[index]),
            float(self.f_vals[index]),
            float(self.fp_vals[index]),
        )


# --------------------------------------------------------------------------
# vectorized expression evaluation

# Walks an Expr over a whole grid with numpy, warnings silenced; any
# non-finite result is re-run through the scalar evaluator at the first
# offending x so callers always see the precise domain error.


def _walk(e: Expr, xs: np.ndarray):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        return xs
    if isinstance(e, Neg):
        return -_walk(e.arg, xs)
    if isinstance(e, Add):
        return _walk(e.left, xs) + _walk(e.right, xs)
    if isinstance(e, Sub):
        return _walk(e.left, xs) - _walk(e.right, xs)
    if isinstance(e, Mul):
        return _walk(e.left, xs) * _walk(e.right, xs)
    if isinstance(e, Div):
        return np.divide(_walk(e.left, xs), _walk(e.right, xs))
    if isinstance(e, Pow):
        return np.power(_walk(e.base, xs), float(e.exponent))
    if isinstance(e, Call):
        fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "ln": np.log}[e.func]
        return fn(_walk(e.arg, xs))
    raise TypeError(f"not an Expr: {e!r}")


def _eval_grid(e: Expr, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    with np.errstate(all="ignore"):
        vals = _walk(e, xs)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), xs.shape).copy()
    finite = np.isfinite(vals)
    if not finite.all():
        x_bad = float(xs[int(np.argmin(finite))])
        eval_expr(e, x_bad)
        raise ExprDomainError(e, x_bad, "non-finite value")
    return vals


def symbol_values(
    p: Expr, q: Expr, upto: int, x
) -> dict[DiffSymbol, object]:
    """Values of p, p', ..., p^(upto) and likewise for q, at x.

    x may be a scalar or a grid array; values follow suit.  Derivatives
    come from repeated diff_expr, never from finite differences.
    """
    scalar = np.ndim(x) == 0
    out: dict[DiffSymbol, object] = {}
    for make, expr in ((P, p), (Q, q)):
        chain = expr
        for order in range(upto + 1):
            if order:
                chain = diff_expr(chain)
            out[make(order)] = (
                eval_expr(chain, float(x)) if scalar else _eval_grid(chain, x)
            )
    return out


# --------------------------------------------------------------------------
# integration


def integrate_base(
    p: Expr,
    q: Expr,
    cfg: NumericConfig,
    ic: Optional[tuple[float, float]] = None,
) -> Trajectory:
    """Integrate y'' = p(x) y' + q(x) y with classical RK4.

    Fixed step (b - a)/n with n = round((b - a)/step); initial conditions
    default to cfg.ic_f.  Domain errors of p or q surface with the
    offending x.
    """
    a, b = cfg.interval
    n = cfg.steps
    dt = (b - a) / n
    xs = np.linspace(a, b, n + 1)
    mids = xs[:-1] + 0.5 * dt
    p_xs = _eval_grid(p, xs)
    q_xs = _eval_grid(q, xs)
    p_mid = _eval_grid(p, mids)
    q_mid = _eval_grid(q, mids)

    u, v = (float(w) for w in (ic if ic is not None else cfg.ic_f))
    f_vals = np.empty(n + 1)
    fp_vals = np.empty(n + 1)
    f_vals[0], fp_vals[0] = u, v
    for idx in range(n):
        p0, q0 = p_xs[idx], q_xs[idx]
        pm, qm = p_mid[idx], q_mid[idx]
        p1, q1 = p_xs[idx + 1], q_xs[idx + 1]
        k1u = v
        k1v = p0 * v + q0 * u
        u2, v2 = u + 0.5 * dt * k1u, v + 0.5 * dt * k1v
        k2u = v2
        k2v = pm * v2 + qm * u2
        u3, v3 = u + 0.5 * dt * k2u, v + 0.5 * dt * k2v
        k3u = v3
        k3v = pm * v3 + qm * u3
        u4, v4 = u + dt * k3u, v + dt * k3v
        k4u = v4
        k4v = p1 * v4 + q1 * u4
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        f_vals[idx + 1] = u
        fp_vals[idx + 1] = v
    return Trajectory(xs, f_vals, fp_vals)


# --------------------------------------------------------------------------
# derivative towers evaluated numerically


def power_derivative_values(traj_point, m: int, p: Expr, q: Expr) -> np.ndarray:
    """Derivatives y, y', ..., y^(m+1) of y = f^m at one trajectory point.

    traj_point is (x, f, f').  Each tower vector is evaluated at the
    symbol values of p, q at x and contracted against f^(m-i) (f')^i.
    """
    x, f, fp = traj_point
    syms = symbol_values(p, q, max(0, m - 1), x)
    return _contract_power_tower(m, f, fp, syms)


def _contract_power_tower(m: int, f, fp, syms: Mapping) -> np.ndarray:
    out = []
    for vec in derivative_tower(m):
        acc = 0.0
        for i, poly in enumerate(vec.coords):
            if poly.is_zero():
                continue
            acc = acc + poly.eval(syms) * f ** (m - i) * fp**i
        out.append(acc + np.zeros_like(f, dtype=float))
    return np.array(out)


@lru_cache(maxsize=None)
def _monomial_tower(i: int, j: int) -> tuple:
    """Coordinates of w, w', ..., w^(i+j+1) for w = f^i g^j.

    Coordinates live over the products f^(i-b) (f')^b g^(j-d) (g')^d.
    Differentiating one such product and rewriting f'' and g'' via the
    base equation gives, for the coefficient grid v:

        w[b,d] = D(v[b,d]) + (b+d) p v[b,d]
                 + (i-b+1) v[b-1,d] + (b+1) q v[b+1,d]
                 + (j-d+1) v[b,d-1] + (d+1) q v[b,d+1]

    with out-of-range entries contributing nothing.  For j = 0 this is
    exactly the single-variable tower, so the two evaluators cannot
    drift apart.
    """
    sym_p = DiffPoly.symbol(P())
    sym_q = DiffPoly.symbol(Q())
    cells = [(b, d) for b in range(i + 1) for d in range(j + 1)]
    v = {bd: DiffPoly.zero() for bd in cells}
    v[(0, 0)] = DiffPoly.const(1)
    levels = [v]
    for _ in range(i + j + 1):
        prev = levels[-1]
        nxt = {}
        for b, d in cells:
            entry = prev[(b, d)].derive() + (b + d) * sym_p * prev[(b, d)]
            if b >= 1:
                entry = entry + (i - b + 1) * prev[(b - 1, d)]
            if b < i:
                entry = entry + (b + 1) * sym_q * prev[(b + 1, d)]
            if d >= 1:
                entry = entry + (j - d + 1) * prev[(b, d - 1)]
            if d < j:
                entry = entry + (d + 1) * sym_q * prev[(b, d + 1)]
            nxt[(b, d)] = entry
        levels.append(nxt)
    return tuple(levels)


def monomial_derivative_values(
    f_pt, g_pt, i: int, j: int, p: Expr, q: Expr, x, upto: int
) -> np.ndarray:
    """Derivatives of w = f^i g^j up to order `upto` at x.

    f_pt and g_pt are (value, derivative) pairs of the two base solutions
    at x; upto must equal i + j + 1, the order of the lifted equation for
    m = i + j.
    """
    if i < 0 or j < 0 or i + j < 1:
        raise ValueError(f"need i, j >= 0 with i + j >= 1, got i={i}, j={j}")
    if upto != i + j + 1:
        raise ValueError(f"upto must be i + j + 1 = {i + j + 1}, got {upto}")
    syms = symbol_values(p, q, max(0, i + j - 1), x)
    return _contract_monomial_tower(i, j, f_pt, g_pt, syms)


def _contract_monomial_tower(i: int, j: int, f_pt, g_pt, syms: Mapping) -> np.ndarray:
    f, fp = f_pt
    g, gp = g_pt
    shape = np.zeros_like(np.asarray(f, dtype=float))
    out = []
    for level in _monomial_tower(i, j):
        acc = 0.0
        for (b, d), poly in level.items():
            if poly.is_zero():
                continue
            factor = f ** (i - b) * fp**b * g ** (j - d) * gp**d
            acc = acc + poly.eval(syms) * factor
        out.append(acc + shape)
    return np.array(out)


# --------------------------------------------------------------------------
# residual and basis report


def residual(ode: LiftedODE, derivs, sym_vals: Mapping) -> object:
    """Relative residual of the monic equation against given derivatives.

    derivs holds y, y', ..., y^(m+1) (scalars or grid arrays); returns
    r / s with r = y^(m+1) + sum c_k y^(k) and s the largest participating
    term magnitude, floored at 1.
    """
    m = ode.m
    derivs = np.asarray(derivs, dtype=float)
    if derivs.shape[0] != m + 2:
        raise ValueError(f"expected {m + 2} derivative rows, got {derivs.shape[0]}")
    lead = derivs[m + 1]
    r = lead.copy()
    s = np.maximum(1.0, np.abs(lead))
    for k, c in enumerate(ode.coeffs):
        term = c.eval(sym_vals) * derivs[k]
        r = r + term
        s = np.maximum(s, np.abs(term))
    return r / s


def monomial_label(i: int, j: int) -> str:
    """Short name for f^i g^j, e.g. 'f^3*g'."""
    parts = []
    if i > 0:
        parts.append("f" if i == 1 else f"f^{i}")
    if j > 0:
        parts.append("g" if j == 1 else f"g^{j}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class MonomialResidual:
    i: int
    j: int
    max_residual: float
    passed: bool

    @property
    def label(self) -> str:
        return monomial_label(self.i, self.j)


@dataclass(frozen=True)
class BasisReport:
    """Outcome of basis_check: residual per monomial plus one Wronskian."""

    m: int
    interval: tuple[float, float]
    step: float
    residuals: tuple[MonomialResidual, ...]
    residual_tol: float
    wronskian: float
    wronskian_scale: float
    wronskian_tol: float
    wronskian_x: float
    ic_independent: bool

    @property
    def residuals_passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    @property
    def wronskian_passed(self) -> bool:
        return (
            self.wronskian_scale > 0.0
            and abs(self.wronskian) > self.wronskian_tol * self.wronskian_scale
        )

    @property
    def passed(self) -> bool:
        return self.residuals_passed and self.wronskian_passed

    def summary(self) -> str:
        a, b = self.interval
        lines = [f"m={self.m} on [{a:g}, {b:g}], step {self.step:g}"]
        if not self.ic_independent:
            lines.append("  note: initial conditions are linearly dependent")
        width = max(len(r.label) for r in self.residuals)
        for r in self.residuals:
            state = "ok" if r.passed else "FAIL"
            lines.append(
                f"  {r.label:<{width}}  max residual {r.max_residual:.3e}"
                f"  (tol {self.residual_tol:g})  {state}"
            )
        state = "ok" if self.wronskian_passed else "FAIL"
        lines.append(
            f"  Wronskian at x={self.wronskian_x:g}: {self.wronskian:.6e}"
            f"  (threshold {self.wronskian_tol:g} x scale {self.wronskian_scale:.3e})  {state}"
        )
        lines.append(f"  -> {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def basis_check(
    ode: LiftedODE,
    p: Expr,
    q: Expr,
    cfg: NumericConfig,
    residual_tol: float = 1e-6,
    wronskian_tol: float = 1e-8,
) -> BasisReport:
    """Check every product f^(m-j) g^j against the lifted equation.

    Integrates the two base solutions from cfg's initial conditions,
    evaluates each product's derivatives through the towers on the whole
    grid, and reports per-product max relative residuals plus the
    midpoint Wronskian of all m+1 products.

    The Wronskian passes when |det| exceeds wronskian_tol times the
    product over derivative orders of the norm across products.  Norms
    are taken per derivative order because the alternative, per product,
    multiplies up the span between w and w^(m) once for every product
    and crushes the ratio of a genuinely independent family to rounding
    level by m=5; per-order norms keep the threshold well above floating
    noise and well below true Wronskians.
    """
    m = ode.m
    traj_f = integrate_base(p, q, cfg, cfg.ic_f)
    traj_g = integrate_base(p, q, cfg, cfg.ic_g)
    xs = traj_f.grid
    syms = symbol_values(p, q, max(0, m - 1), xs)
    mid = len(xs) // 2

    rows = []
    columns = []
    for j in range(m + 1):
        i = m - j
        derivs = _contract_monomial_tower(
            i, j, (traj_f.f_vals, traj_f.fp_vals), (traj_g.f_vals, traj_g.fp_vals), syms
        )
        res = residual(ode, derivs, syms)
        worst = float(np.max(np.abs(res)))
        rows.append(MonomialResidual(i, j, worst, worst < residual_tol))
        columns.append(derivs[: m + 1, mid])

    wron = np.column_stack(columns)
    det = float(np.linalg.det(wron))
    scale = float(np.prod(np.linalg.norm(wron, axis=1)))
    return BasisReport(
        m=m,
        interval=cfg.interval,
        step=cfg.step,
        residuals=tuple(rows),
        residual_tol=residual_tol,
        wronskian=det,
        wronskian_scale=scale,
        wronskian_tol=wronskian_tol,
        wronskian_x=float(xs[mid]),
        ic_independent=cfg.ic_independent,
    )
