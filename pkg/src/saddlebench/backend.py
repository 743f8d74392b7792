"""Backend selection for the hot iteration loops.

At import time the compiled kernels are picked up if the extension built;
otherwise every run uses the pure-Python step rule. ``run(...,
backend="auto")`` prefers the compiled path whenever the problem carries
native closed-form coefficients.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParamsError

try:
    from . import _stepkernels

    COMPILED_AVAILABLE = True
except ImportError:  # pure-Python fallback
    _stepkernels = None
    COMPILED_AVAILABLE = False

_KIND_CODES = {"ds_ogda": 0, "ds_gda": 1, "ogda": 2, "eg": 3, "gda": 4}


def _encodable(problem) -> bool:
    from ._family import set_descriptor

    if problem.native is None:
        return False
    try:
        set_descriptor(problem.set_x)
        set_descriptor(problem.set_y)
    except TypeError:
        return False
    return True


def resolve_backend(backend: str, problem) -> bool:
    """Whether the compiled path applies. ``backend`` in auto/python/compiled."""
    if backend == "python":
        return False
    if backend not in ("auto", "compiled"):
        raise InvalidParamsError(f"unknown backend {backend!r}")
    return COMPILED_AVAILABLE and _encodable(problem)


def run_compiled(kind, problem, params, x0, y0, snap_ts):
    """Run the compiled loop; returns ((xs, ys, zs, vs), diverged_at)."""
    from ._family import set_descriptor
    from .core import as_vector

    co = problem.native
    kx, xa, xb, xrad = set_descriptor(problem.set_x)
    ky, ya, yb, yrad = set_descriptor(problem.set_y)
    x0 = as_vector(x0, problem.set_x.dim, name="x0")
    y0 = as_vector(y0, problem.set_y.dim, name="y0")
    problem.require_feasible(x0, y0)
    ts = np.asarray(snap_ts, dtype=np.int64)
    n, d = co.n, co.d
    out_x = np.empty((ts.shape[0], n))
    out_y = np.empty((ts.shape[0], d))
    out_z = np.empty((ts.shape[0], n))
    out_v = np.empty((ts.shape[0], d))
    diverged_at = _stepkernels.run_loop(
        _KIND_CODES[str(kind.value if hasattr(kind, "value") else kind)],
        np.ascontiguousarray(co.P), np.ascontiguousarray(co.A),
        np.ascontiguousarray(co.b), np.ascontiguousarray(co.Q),
        np.ascontiguousarray(co.c),
        co.sx, co.sy, co.hx, co.hy,
        kx, np.ascontiguousarray(xa), np.ascontiguousarray(xb), xrad,
        ky, np.ascontiguousarray(ya), np.ascontiguousarray(yb), yrad,
        params.r_x, params.r_y, params.eta_x, params.eta_y,
        params.beta_x, params.beta_y,
        x0, y0, ts, out_x, out_y, out_z, out_v,
    )
    return (out_x, out_y, out_z, out_v), int(diverged_at)
