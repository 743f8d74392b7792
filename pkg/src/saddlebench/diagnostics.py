"""Potential-function diagnostics for the doubly smoothed updates.

The per-iteration potential is

    Phi = F(x, y, z, v) - 2 d(y, z, v) + 2 q(z)
          + 1/(2 eta_x) ||x - x'||^2 + 1/(2 eta_y) ||y - y'||^2
          + r_x/(2 beta_x) ||z - z'||^2 + r_y/(2 beta_y) ||v - v'||^2

with d(y, z, v) = min_x F(x, y, z, v) and q(z) the max over y of
psi(y; z) = min_x [f(x, y) + r_x/2 ||x - z||^2]; the primed variables are
bound to the previous iterate. ``descent_check`` numerically certifies
the per-iteration decrease inequality along a trajectory, and
``error_bound_constants`` evaluates the primal-dual error-bound
coefficients used to control its one negative term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import core
from ._gridopt import grid_extremum
from .errors import DiagnosticUnavailableError, DegenerateConstantsError, InvalidParamsError
from .measures import inner_solve_strongly_convex

__all__ = [
    "LyapunovBreakdown",
    "ErrorBoundConstants",
    "DescentRow",
    "lyapunov",
    "descent_check",
    "error_bound_constants",
]


@dataclass(frozen=True)
class LyapunovBreakdown:
    """Pieces of the potential at one state pair."""

    F_val: float
    d_val: float
    q_val: float
    quad_terms: tuple  # the four coefficient-times-squared-distance terms
    phi: float


@dataclass(frozen=True)
class ErrorBoundConstants:
    """Primal-dual error-bound coefficients (concave case / exponent case)."""

    omega0: float
    omega1: Optional[float] = None


class DescentRow(NamedTuple):
    t: int
    lhs: float
    rhs: float
    holds: bool


# ---------------------------------------------------------------------------
# Inner solution mappings
# ---------------------------------------------------------------------------


def _argmin_x_reg(problem, y, rho, w, tol, start=None):
    """argmin_x f(x, y) + rho/2 ||x - w||^2 over the x-set."""
    o = problem.oracles
    if o.argmin_x_reg is not None:
        return core.as_vector(o.argmin_x_reg(y, rho, w), problem.set_x.dim), 0
    if rho == 0.0 and o.argmin_x is not None:
        return core.as_vector(o.argmin_x(y), problem.set_x.dim), 0
    L = problem.structure.lipschitz_L
    if rho <= L:
        raise DiagnosticUnavailableError(
            "inner x-solve needs rho > L or a closed-form oracle"
        )

    def grad(x):
        return problem.grad_x(x, y) + rho * (x - w)

    x0 = problem.set_x.project(w if start is None else start)
    return inner_solve_strongly_convex(
        grad, problem.set_x.project, x0, rho - L, rho + L, tol
    )


def _argmax_y_reg(problem, x, rho, w, tol, start=None):
    """argmax_y f(x, y) - rho/2 ||y - w||^2 over the y-set."""
    o = problem.oracles
    if o.argmax_y_reg is not None:
        return core.as_vector(o.argmax_y_reg(x, rho, w), problem.set_y.dim), 0
    if rho == 0.0 and o.argmax_y is not None:
        return core.as_vector(o.argmax_y(x), problem.set_y.dim), 0
    L = problem.structure.lipschitz_L
    modulus = rho - L if not problem.structure.concave_in_y else max(rho, 1e-12)
    if modulus <= 0:
        raise DiagnosticUnavailableError(
            "inner y-solve needs rho > L, concavity, or a closed-form oracle"
        )

    def grad(y):  # gradient of the negated objective
        return -(problem.grad_y(x, y) - rho * (y - w))

    y0 = problem.set_y.project(w if start is None else start)
    return inner_solve_strongly_convex(
        grad, problem.set_y.project, y0, modulus, rho + L, tol
    )


def _psi(problem, params, y, z, tol):
    """psi(y; z) = min_x [f(x, y) + r_x/2 ||x - z||^2]."""
    xhat, _ = _argmin_x_reg(problem, y, params.r_x, z, tol)
    dx = xhat - z
    return float(problem.eval_f(xhat, y)) + 0.5 * params.r_x * float(dx @ dx)


def _q_value(problem, params, z, tol, grid_tol=1e-6):
    """q(z) = max_y psi(y; z) via the reduced form (the auxiliary anchor
    maximization is attained at the maximizing y, so it never appears)."""
    set_y = problem.set_y

    def psi_of(yy):
        return _psi(problem, params, core.as_vector(yy, set_y.dim), z, tol)

    if set_y.dim <= 2 and math.isfinite(set_y.diameter()):
        _, val, _ = grid_extremum(psi_of, set_y, grid_tol, maximize=True)
        return val
    if problem.structure.concave_in_y:
        # smooth concave surrogate: ascent on the partial-minimum value
        def grad(y):
            xhat, _ = _argmin_x_reg(problem, y, params.r_x, z, tol)
            return -problem.grad_y(xhat, y)

        L = problem.structure.lipschitz_L
        y0 = set_y.project(np.zeros(set_y.dim))
        ystar, _ = inner_solve_strongly_convex(
            grad, set_y.project, y0, 1e-12, 2.0 * L + params.r_x, tol,
        )
        return psi_of(ystar)
    raise DiagnosticUnavailableError(
        "outer maximization of the reduced potential needs dim <= 2, "
        "concavity, or an oracle"
    )


def _saddle_x_of_zv(problem, params, z, v, tol, start=None):
    """argmin_x max_y F(x, y, z, v), solved through the inner maximizer."""
    r_x, r_y = params.r_x, params.r_y
    L = problem.structure.lipschitz_L

    def grad(x):
        ybar, _ = _argmax_y_reg(problem, x, r_y, v, tol)
        return problem.grad_x(x, ybar) + r_x * (x - z)

    smooth = r_x + L + L * L / max(r_y - L, 1e-12)
    x0 = problem.set_x.project(z if start is None else start)
    xs, _ = inner_solve_strongly_convex(
        grad, problem.set_x.project, x0, r_x - L, smooth, tol
    )
    return xs


# ---------------------------------------------------------------------------
# Public diagnostics
# ---------------------------------------------------------------------------


def lyapunov(problem, params, state_curr, state_prev, tol=1e-8) -> LyapunovBreakdown:
    """Evaluate the potential at ``state_curr`` with primed variables bound
    to ``state_prev``.

    Requires ``r_x >= 2L`` and ``r_y >= 2L`` so the partial minimization
    is strongly convex and the inner maximizations strongly concave.
    Anchor quadratic terms with ``beta = 0`` are omitted (the anchors
    never move, so the corresponding distances vanish identically).
    """
    L = problem.structure.lipschitz_L
    if params.r_x < 2.0 * L or params.r_y < 2.0 * L:
        raise InvalidParamsError(
            f"potential needs r_x, r_y >= 2L (got {params.r_x}, {params.r_y}, L={L})"
        )
    from .operator import regularized_value

    s, p = state_curr, state_prev
    F_val = regularized_value(problem, params, s.x, s.y, s.z, s.v)
    dy = s.y - s.v
    d_val = _psi(problem, params, s.y, s.z, tol) - 0.5 * params.r_y * float(dy @ dy)
    # the state's own x is always an admissible candidate for the min
    d_val = min(d_val, F_val)
    q_val = _q_value(problem, params, s.z, tol)

    q1 = 0.5 / params.eta_x * float((s.x - p.x) @ (s.x - p.x))
    q2 = 0.5 / params.eta_y * float((s.y - p.y) @ (s.y - p.y))
    q3 = (
        0.5 * params.r_x / params.beta_x * float((s.z - p.z) @ (s.z - p.z))
        if params.beta_x > 0.0 else 0.0
    )
    q4 = (
        0.5 * params.r_y / params.beta_y * float((s.v - p.v) @ (s.v - p.v))
        if params.beta_y > 0.0 else 0.0
    )
    phi = F_val - 2.0 * d_val + 2.0 * q_val + q1 + q2 + q3 + q4
    return LyapunovBreakdown(F_val=F_val, d_val=d_val, q_val=q_val,
                             quad_terms=(q1, q2, q3, q4), phi=phi)


def descent_check(problem, params, states, tol=1e-6, inner_tol=1e-8):
    """Evaluate the per-iteration descent inequality along a trajectory.

    For each consecutive state pair, lhs = Phi^t - Phi^{t+1} and rhs is
    the certified lower bound: the positive proximity terms built from
    the auxiliary points

        y_plus = proj_Y(y + eta_y grad_y F(xhat(y, z, v), y, z, v)),
        v_plus = v + beta_y (ybar(xs(z+, v), z+, v) - v),

    plus the single negative term bounded below by
    -8 r_x beta_x diam(X)^2. ``holds`` uses the relative tolerance
    ``tol * (1 + |lhs|)``. The check is reported, never asserted: grossly
    invalid parameters are allowed to produce failing rows.
    """
    if len(states) < 2:
        return []
    diam_x = problem.set_x.diameter()
    r_x, r_y = params.r_x, params.r_y
    ex, ey = params.eta_x, params.eta_y
    bx, by = params.beta_x, params.beta_y

    rows = []
    phis = {}

    def phi_at(i):
        if i not in phis:
            prev = states[i - 1] if i >= 1 else states[0]
            phis[i] = lyapunov(problem, params, states[i], prev, tol=inner_tol).phi
        return phis[i]

    for i in range(len(states) - 1):
        s, s_next = states[i], states[i + 1]
        s_prev = states[i - 1] if i >= 1 else states[0]
        lhs = phi_at(i) - phi_at(i + 1)

        rhs = 0.25 / ex * float((s.x - s_next.x) @ (s.x - s_next.x))
        xhat, _ = _argmin_x_reg(problem, s.y, r_x, s.z, inner_tol, start=s.x)
        grad_y_F = problem.grad_y(xhat, s.y) - r_y * (s.y - s.v)
        y_plus = problem.set_y.project(s.y + ey * grad_y_F)
        rhs += 1.0 / (60.0 * ey) * float((s.y - y_plus) @ (s.y - y_plus))
        if bx > 0.0:
            rhs += r_x / (8.0 * bx) * float((s.z - s_next.z) @ (s.z - s_next.z))
            rhs += r_x / (8.0 * bx) * float((s.z - s_prev.z) @ (s.z - s_prev.z))
        if by > 0.0:
            xs = _saddle_x_of_zv(problem, params, s_next.z, s.v, inner_tol, start=s.x)
            ybar, _ = _argmax_y_reg(problem, xs, r_y, s.v, inner_tol)
            v_plus = s.v + by * (ybar - s.v)
            rhs += r_y / (16.0 * by) * float((s.v - v_plus) @ (s.v - v_plus))
            rhs += r_y / (8.0 * by) * float((s.v - s_prev.v) @ (s.v - s_prev.v))
        rhs += 0.125 / ex * float((s.x - s_prev.x) @ (s.x - s_prev.x))
        rhs += 0.125 / ey * float((s.y - s_prev.y) @ (s.y - s_prev.y))
        if bx > 0.0:
            if not math.isfinite(diam_x):
                raise DiagnosticUnavailableError(
                    "descent check needs a compact x-set when beta_x > 0"
                )
            rhs -= 8.0 * r_x * bx * diam_x ** 2

        holds = (lhs - rhs) >= -tol * (1.0 + abs(lhs))
        rows.append(DescentRow(t=s.t, lhs=lhs, rhs=rhs, holds=holds))
    return rows


def error_bound_constants(params, structure, diam_y) -> ErrorBoundConstants:
    """Literal evaluation of the primal-dual error-bound coefficients.

    omega0 covers the concave-dual case; omega1 the exponent case and is
    omitted when no dual curvature-exponent metadata is present.
    """
    L = structure.lipschitz_L
    r_x, r_y, b_y = params.r_x, params.r_y, params.beta_y
    if r_x <= L or r_y <= L:
        raise DegenerateConstantsError("error bound needs r_x > L and r_y > L")
    if not (0.0 < b_y < 1.0):
        raise InvalidParamsError("error bound needs 0 < beta_y < 1")
    if not math.isfinite(diam_y):
        raise InvalidParamsError("error bound needs a compact y-set")
    omega0 = (4.0 * r_y * diam_y / (r_x - L)) * (
        (1.0 - b_y) / b_y + r_y / (r_y - L)
    )
    omega1 = None
    if structure.kl_y is not None:
        theta, tau = structure.kl_y.theta, structure.kl_y.tau
        omega1 = (2.0 / ((r_x - L) * tau)) * (
            r_y * (1.0 - b_y) / b_y + r_y ** 2 / (r_y - L)
        ) ** (1.0 / theta)
    return ErrorBoundConstants(omega0=omega0, omega1=omega1)
