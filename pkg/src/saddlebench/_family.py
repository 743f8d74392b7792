"""Closed-form objective family backing the shipped benchmark instances.

    f(x, y) = 1/2 x'Px + x'Ay + b'x - 1/2 y'Qy - c'y
              + sx (x1^3 - 3 x1) y1 + sy (y1^3 - 3 y1) x1
              + 1/2 hx x1^2 y1 + 1/2 hy y1^2 x1

The cubic/quadratic coupling terms act on the first coordinates only and
cover the nonconvex and curvature-degenerate instances. The family is
closed under the min-max transposition f'(a, b) = -f(b, a), which is what
lets transposed instances keep a fast kernel path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# set descriptor codes shared with the compiled kernels
SET_WHOLE = 0
SET_BOX = 1
SET_BALL = 2
SET_SIMPLEX = 3


@dataclass(frozen=True)
class FamilyCoeffs:
    P: np.ndarray  # (n, n)
    A: np.ndarray  # (n, d)
    b: np.ndarray  # (n,)
    Q: np.ndarray  # (d, d)
    c: np.ndarray  # (d,)
    sx: float = 0.0
    sy: float = 0.0
    hx: float = 0.0
    hy: float = 0.0

    @property
    def n(self):
        return self.b.shape[0]

    @property
    def d(self):
        return self.c.shape[0]


def make_coeffs(n, d, P=None, A=None, b=None, Q=None, c=None, sx=0.0, sy=0.0,
                hx=0.0, hy=0.0) -> FamilyCoeffs:
    def _mat(M, r, cdim):
        out = np.zeros((r, cdim)) if M is None else np.asarray(M, dtype=float)
        assert out.shape == (r, cdim)
        out = out.copy()
        out.flags.writeable = False
        return out

    def _vec(v, r):
        out = np.zeros(r) if v is None else np.asarray(v, dtype=float).copy()
        assert out.shape == (r,)
        out.flags.writeable = False
        return out

    return FamilyCoeffs(
        P=_mat(P, n, n), A=_mat(A, n, d), b=_vec(b, n),
        Q=_mat(Q, d, d), c=_vec(c, d),
        sx=float(sx), sy=float(sy), hx=float(hx), hy=float(hy),
    )


def family_value(co: FamilyCoeffs, x, y) -> float:
    val = 0.5 * float(x @ (co.P @ x)) + float(x @ (co.A @ y)) + float(co.b @ x)
    val -= 0.5 * float(y @ (co.Q @ y)) + float(co.c @ y)
    x1, y1 = float(x[0]), float(y[0])
    if co.sx != 0.0:
        val += co.sx * (x1 * x1 * x1 - 3.0 * x1) * y1
    if co.sy != 0.0:
        val += co.sy * (y1 * y1 * y1 - 3.0 * y1) * x1
    if co.hx != 0.0:
        val += 0.5 * co.hx * x1 * x1 * y1
    if co.hy != 0.0:
        val += 0.5 * co.hy * y1 * y1 * x1
    return val


def family_grad_x(co: FamilyCoeffs, x, y) -> np.ndarray:
    g = co.P @ x + co.A @ y + co.b
    x1, y1 = float(x[0]), float(y[0])
    extra = 0.0
    if co.sx != 0.0:
        extra += 3.0 * co.sx * (x1 * x1 - 1.0) * y1
    if co.sy != 0.0:
        extra += co.sy * (y1 * y1 * y1 - 3.0 * y1)
    if co.hx != 0.0:
        extra += co.hx * x1 * y1
    if co.hy != 0.0:
        extra += 0.5 * co.hy * y1 * y1
    if extra != 0.0:
        g = g.copy()
        g[0] += extra
    return g


def family_grad_y(co: FamilyCoeffs, x, y) -> np.ndarray:
    g = co.A.T @ x - co.Q @ y - co.c
    x1, y1 = float(x[0]), float(y[0])
    extra = 0.0
    if co.sx != 0.0:
        extra += co.sx * (x1 * x1 * x1 - 3.0 * x1)
    if co.sy != 0.0:
        extra += 3.0 * co.sy * (y1 * y1 - 1.0) * x1
    if co.hx != 0.0:
        extra += 0.5 * co.hx * x1 * x1
    if co.hy != 0.0:
        extra += co.hy * y1 * x1
    if extra != 0.0:
        g = g.copy()
        g[0] += extra
    return g


def transpose_coeffs(co: FamilyCoeffs) -> FamilyCoeffs:
    """Coefficients of f'(a, b) = -f(b, a)."""
    return make_coeffs(
        co.d, co.n,
        P=co.Q, A=-co.A.T, b=co.c,
        Q=co.P, c=co.b,
        sx=-co.sy, sy=-co.sx, hx=-co.hy, hy=-co.hx,
    )


def set_descriptor(cset) -> tuple[int, np.ndarray, np.ndarray, float]:
    """Encode a ConvexSet as (code, arr1, arr2, scalar) for the kernels."""
    from . import core

    if isinstance(cset, core.WholeSpace):
        z = np.zeros(cset.dim)
        return SET_WHOLE, z, z, 0.0
    if isinstance(cset, core.Box):
        return SET_BOX, cset.lower, cset.upper, 0.0
    if isinstance(cset, core.Ball):
        return SET_BALL, cset.center, cset.center, cset.radius
    if isinstance(cset, core.Simplex):
        z = np.zeros(cset.dim)
        return SET_SIMPLEX, z, z, 0.0
    raise TypeError(f"unsupported set kind {type(cset)!r}")
