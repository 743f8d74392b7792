"""The three stationarity measures and the inner solvers behind them.

- :func:`saddle_gap`: primal-dual gap  max_y f(x, .) - min_x f(., y).
- :func:`game_stationarity`: normal-cone residuals of both players.
- :func:`os_stationarity`: displacement under the proximal map of the
  inner-max value function  phi(x) = max_y f(x, y)  over the x-set.

Inner problems are solved by closed-form oracles when the problem ships
them, by projected gradient when the relevant curvature flag is declared,
and by a deterministic grid fallback in dimensions <= 2 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from ._gridopt import grid_extremum
from .errors import (
    ConvergenceFailureError,
    InvalidParamsError,
    MeasureUnavailableError,
)

#: default tolerance for oracle/projected-gradient inner solves
DEFAULT_INNER_TOL = 1e-8
#: default resolution of the grid fallbacks
DEFAULT_GRID_TOL = 1e-6

_MAX_INNER_ITERS = 10 ** 6


@dataclass(frozen=True)
class MeasureResult:
    """A measure value with provenance: ``exact`` is False whenever an
    iterative inner solve or grid surrogate contributed."""

    value: float
    exact: bool
    inner_iterations: int = 0
    tolerance_used: float = 0.0


def inner_solve_strongly_convex(grad, project, start, modulus, smoothness,
                                tol=DEFAULT_INNER_TOL, max_iter=_MAX_INNER_ITERS):
    """Projected gradient with step 1/smoothness on a strongly convex
    objective. Stops when ``||x - proj(x - grad(x))|| <= tol``; returns
    ``(x, iterations)``. ``modulus`` documents the strong convexity that
    guarantees the linear rate."""
    if modulus <= 0:
        raise InvalidParamsError("strong convexity modulus must be positive")
    if smoothness <= 0:
        raise InvalidParamsError("smoothness must be positive")
    x = core.as_vector(start)
    step = 1.0 / smoothness
    residual = math.inf
    for k in range(1, max_iter + 1):
        g = grad(x)
        residual = float(np.linalg.norm(x - project(x - g)))
        if residual <= tol:
            return x, k
        x = project(x - step * g)
    raise ConvergenceFailureError(
        f"inner solve exceeded {max_iter} iterations (residual {residual:.3e})",
        residual=residual, iterations=max_iter,
    )


def _pg_extremum(problem, other, fix_x, tol):
    """Projected-gradient inner solve for a declared convex/concave side.

    ``fix_x=True`` maximizes f(x, .) over the y-set from the point
    ``other``-independent start; returns (point, value, iterations).
    """
    L = problem.structure.lipschitz_L
    step = 1.0 / L
    if fix_x:
        x = other
        cset = problem.set_y
        p = cset.project(np.zeros(cset.dim))
        for k in range(1, _MAX_INNER_ITERS + 1):
            g = problem.grad_y(x, p)
            if np.linalg.norm(p - cset.project(p + g)) <= tol:
                return p, float(problem.eval_f(x, p)), k
            p = cset.project(p + step * g)
    else:
        y = other
        cset = problem.set_x
        p = cset.project(np.zeros(cset.dim))
        for k in range(1, _MAX_INNER_ITERS + 1):
            g = problem.grad_x(p, y)
            if np.linalg.norm(p - cset.project(p - g)) <= tol:
                return p, float(problem.eval_f(p, y)), k
            p = cset.project(p - step * g)
    raise ConvergenceFailureError("inner extremum did not converge")


def _inner_max(problem, x, tol, grid_tol):
    """max_y f(x, y): (value, iterations, exact)."""
    o = problem.oracles
    if o.argmax_y is not None:
        return float(problem.eval_f(x, o.argmax_y(x))), 0, True
    if o.argmax_y_reg is not None:
        ystar = o.argmax_y_reg(x, 0.0, problem.set_y.project(np.zeros(problem.set_y.dim)))
        return float(problem.eval_f(x, ystar)), 0, True
    if problem.structure.concave_in_y:
        _, val, k = _pg_extremum(problem, x, fix_x=True, tol=tol)
        return val, k, False
    if problem.set_y.dim <= 2 and math.isfinite(problem.set_y.diameter()):
        _, val, n = grid_extremum(lambda yy: problem.eval_f(x, yy),
                                  problem.set_y, grid_tol, maximize=True)
        return val, n, False
    raise MeasureUnavailableError(
        f"inner max of {problem.name} needs concavity, an oracle, or dim <= 2"
    )


def _inner_min(problem, y, tol, grid_tol):
    """min_x f(x, y): (value, iterations, exact)."""
    o = problem.oracles
    if o.argmin_x is not None:
        return float(problem.eval_f(o.argmin_x(y), y)), 0, True
    if o.argmin_x_reg is not None:
        xstar = o.argmin_x_reg(y, 0.0, problem.set_x.project(np.zeros(problem.set_x.dim)))
        return float(problem.eval_f(xstar, y)), 0, True
    if problem.structure.convex_in_x:
        _, val, k = _pg_extremum(problem, y, fix_x=False, tol=tol)
        return val, k, False
    if problem.set_x.dim <= 2 and math.isfinite(problem.set_x.diameter()):
        _, val, n = grid_extremum(lambda xx: problem.eval_f(xx, y),
                                  problem.set_x, grid_tol, maximize=False)
        return val, n, False
    raise MeasureUnavailableError(
        f"inner min of {problem.name} needs convexity, an oracle, or dim <= 2"
    )


def saddle_gap(problem, x, y, tol=DEFAULT_INNER_TOL,
               grid_tol=DEFAULT_GRID_TOL) -> MeasureResult:
    """Primal-dual gap at a feasible pair.

    Exact only when both inner problems are solved by closed-form
    oracles. Small negative values (within solver slack) are possible and
    left unclamped.
    """
    x = core.as_vector(x, problem.set_x.dim)
    y = core.as_vector(y, problem.set_y.dim)
    problem.require_feasible(x, y)
    max_val, it1, exact1 = _inner_max(problem, x, tol, grid_tol)
    min_val, it2, exact2 = _inner_min(problem, y, tol, grid_tol)
    return MeasureResult(
        value=max_val - min_val,
        exact=exact1 and exact2,
        inner_iterations=it1 + it2,
        tolerance_used=tol if (exact1 and exact2) else max(tol, grid_tol),
    )


def game_stationarity(problem, x, y) -> tuple[MeasureResult, MeasureResult]:
    """Normal-cone residuals ``dist(0, grad_x f + N_X(x))`` and
    ``dist(0, -grad_y f + N_Y(y))``. An eps-stationary pair has both <= eps."""
    x = core.as_vector(x, problem.set_x.dim)
    y = core.as_vector(y, problem.set_y.dim)
    gx = problem.grad_x(x, y)
    gy = problem.grad_y(x, y)
    val_x, exact_x = core.normal_cone_distance(problem.set_x, x, gx)
    val_y, exact_y = core.normal_cone_distance(problem.set_y, y, -gy)
    return (
        MeasureResult(value=val_x, exact=exact_x),
        MeasureResult(value=val_y, exact=exact_y),
    )


def _phi_and_maximizer(problem, x, tol, grid_tol):
    """Value and a maximizer of f(x, .) over the y-set."""
    o = problem.oracles
    if o.argmax_y is not None:
        ystar = o.argmax_y(x)
        return float(problem.eval_f(x, ystar)), ystar, 0
    if o.argmax_y_reg is not None:
        ystar = o.argmax_y_reg(x, 0.0, problem.set_y.project(np.zeros(problem.set_y.dim)))
        return float(problem.eval_f(x, ystar)), ystar, 0
    if problem.structure.concave_in_y:
        ystar, val, k = _pg_extremum(problem, x, fix_x=True, tol=tol)
        return val, ystar, k
    if problem.set_y.dim <= 2 and math.isfinite(problem.set_y.diameter()):
        ystar, val, n = grid_extremum(lambda yy: problem.eval_f(x, yy),
                                      problem.set_y, grid_tol, maximize=True)
        return val, ystar, n
    raise MeasureUnavailableError("inner max unavailable for the prox measure")


def os_stationarity(problem, z, r, tol=DEFAULT_INNER_TOL,
                    grid_tol=DEFAULT_GRID_TOL) -> MeasureResult:
    """Proximal displacement ``||prox_{phi/r}(z) - z||`` of the value
    function ``phi(x) = max_y f(x, y)`` restricted to the x-set.

    Requires ``r > L`` so the prox subproblem is strongly convex, and a
    compact y-set. The subproblem is minimized by a monotone-safeguarded
    projected (sub)gradient loop on the Danskin direction; on flagged
    maximizer ties or loop failure a grid fallback handles dims <= 2.
    """
    L = problem.structure.lipschitz_L
    if not (r > L):
        raise InvalidParamsError(f"prox weight r={r} must exceed L={L}")
    if not math.isfinite(problem.set_y.diameter()):
        raise MeasureUnavailableError("prox measure requires a compact y-set")
    z = core.as_vector(z, problem.set_x.dim)
    set_x = problem.set_x

    def theta(pt, iters_box):
        val, _, k = _phi_and_maximizer(problem, pt, tol, grid_tol)
        iters_box[0] += k
        return val + 0.5 * r * float((pt - z) @ (pt - z))

    ties = problem.oracles.max_ties
    tie_at_center = ties is not None and bool(ties(set_x.project(z)))

    if not tie_at_center:
        w, iters = _prox_danskin_loop(problem, z, r, tol)
        if w is not None:
            return MeasureResult(value=float(np.linalg.norm(w - z)), exact=False,
                                 inner_iterations=iters, tolerance_used=tol)

    if set_x.dim <= 2 and math.isfinite(set_x.diameter()):
        iters_box = [0]
        w, _, n = grid_extremum(lambda pt: theta(pt, iters_box), set_x,
                                grid_tol, maximize=False)
        return MeasureResult(value=float(np.linalg.norm(w - z)), exact=False,
                             inner_iterations=n + iters_box[0],
                             tolerance_used=grid_tol)
    if set_x.dim <= 2:
        # unbounded 1-d/2-d x-set: bracket around z; the prox point stays
        # within ||grad phi|| / (r - L) of z
        _, ystar, _ = _phi_and_maximizer(problem, z, tol, grid_tol)
        radius = float(np.linalg.norm(problem.grad_x(z, ystar))) / (r - L) + 1.0
        box = core.Box(z - radius, z + radius)
        iters_box = [0]
        w, _, n = grid_extremum(lambda pt: theta(pt, iters_box), box,
                                grid_tol, maximize=False)
        return MeasureResult(value=float(np.linalg.norm(w - z)), exact=False,
                             inner_iterations=n + iters_box[0],
                             tolerance_used=grid_tol)
    raise MeasureUnavailableError("prox subproblem unsolvable beyond dim 2")


def _prox_danskin_loop(problem, z, r, tol, max_iter=20000):
    """Safeguarded projected gradient on phi(x) + r/2 ||x - z||^2.

    Returns (solution, iterations) or (None, iterations) when progress
    stalls (nonsmooth kink or a bad step), signalling the grid fallback.
    """
    L = problem.structure.lipschitz_L
    set_x = problem.set_x
    x = set_x.project(z.copy())
    step = 1.0 / (r + 2.0 * L)
    grid_tol = DEFAULT_GRID_TOL

    def value_grad(pt):
        val, ystar, _ = _phi_and_maximizer(problem, pt, tol, grid_tol)
        g = problem.grad_x(pt, ystar) + r * (pt - z)
        return val + 0.5 * r * float((pt - z) @ (pt - z)), g

    val, g = value_grad(x)
    for k in range(1, max_iter + 1):
        residual = float(np.linalg.norm(x - set_x.project(x - g)))
        if residual <= tol:
            return x, k
        for _ in range(60):
            x_new = set_x.project(x - step * g)
            val_new, g_new = value_grad(x_new)
            if val_new <= val + 1e-15 * (1.0 + abs(val)):
                break
            step *= 0.5
        else:
            return None, k
        if float(np.linalg.norm(x_new - x)) == 0.0:
            return None, k  # pinned without reaching the residual: stalled
        x, val, g = x_new, val_new, g_new
    return None, max_iter
