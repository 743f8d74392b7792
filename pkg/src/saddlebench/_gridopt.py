"""Deterministic multilevel grid search over 1-d/2-d feasible sets.

Used as the fallback optimizer where no oracle or curvature structure is
available. Each level lays a uniform grid over the current window,
projects the points into the set, and shrinks the window around the best
point until the spacing reaches the requested tolerance. Exactness is
never claimed; callers flag results as inexact.
"""

from __future__ import annotations

import numpy as np

from .core import Ball, Box, ConvexSet, Simplex
from .errors import MeasureUnavailableError

_POINTS_1D = 257
_POINTS_2D = 49


def _window_points(lo, hi, m):
    axes = [np.linspace(lo[i], hi[i], m) for i in range(len(lo))]
    if len(axes) == 1:
        return axes[0][:, None]
    xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def grid_extremum(fun, cset: ConvexSet, tol: float, maximize: bool = False,
                  vectorized: bool = False):
    """Locate an extremum of ``fun`` over ``cset`` to resolution ``tol``.

    Returns ``(point, value, n_evals)``. Supports boxes and balls in one
    or two dimensions and the 2-simplex (reduced to a segment).
    """
    if isinstance(cset, Simplex):
        if cset.dim == 1:
            p = np.array([1.0])
            return p, float(fun(p[None, :])[0] if vectorized else fun(p)), 1
        if cset.dim != 2:
            raise MeasureUnavailableError("grid fallback supports the 2-simplex only")
        seg = Box([0.0], [1.0])

        def lifted(s):
            if vectorized:
                pts = np.column_stack([s[:, 0], 1.0 - s[:, 0]])
                return fun(pts)
            return fun(np.array([s[0], 1.0 - s[0]]))

        s, val, n = grid_extremum(lifted, seg, tol, maximize, vectorized)
        return np.array([s[0], 1.0 - s[0]]), val, n

    if not isinstance(cset, (Box, Ball)):
        raise MeasureUnavailableError(
            f"grid fallback unavailable for set kind {cset.kind!r}"
        )
    if cset.dim > 2:
        raise MeasureUnavailableError("grid fallback limited to dimensions <= 2")

    lo, hi = cset.bounding_box()
    lo, hi = lo.astype(float), hi.astype(float)
    m = _POINTS_1D if cset.dim == 1 else _POINTS_2D
    sign = -1.0 if maximize else 1.0
    needs_proj = isinstance(cset, Ball)

    best_p = None
    best_v = np.inf
    n_evals = 0
    for _ in range(200):
        pts = _window_points(lo, hi, m)
        if needs_proj:
            pts = np.array([cset.project(p) for p in pts])
        if vectorized:
            vals = sign * np.asarray(fun(pts), dtype=float)
        else:
            vals = sign * np.array([float(fun(p)) for p in pts])
        n_evals += pts.shape[0]
        k = int(np.argmin(vals))
        if vals[k] < best_v:
            best_v = float(vals[k])
            best_p = pts[k].copy()
        spacing = (hi - lo) / (m - 1)
        if np.all(spacing <= tol):
            break
        # shrink the window around the incumbent, clipped to the region
        glo, ghi = cset.bounding_box()
        half = 4.0 * spacing
        lo = np.maximum(best_p - half, glo)
        hi = np.minimum(best_p + half, ghi)
    return best_p, sign * best_v, n_evals
