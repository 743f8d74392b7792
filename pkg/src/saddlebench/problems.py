"""The benchmark instance suite.

Five families spanning the structure classes handled by the solvers:

- ``bilinear_cc``: x'Ay + b'x - c'y on boxes, interior saddle planted.
- ``quadratic_cc``: strongly curved diagonal quadratics coupled by a dense
  A, interior saddle planted, closed-form separable inner solves.
- ``hard_gda``: f(x, y) = x^2 y / 2 with y in [0, 1]; the instance on
  which plain descent-ascent provably stalls at rate (1 - eta)^{2t}.
  Ships in the faithful unbounded-x form and a box form with finite
  gradient bounds.
- ``polynomial_nc_c``: a double-well cubic coupled to a strongly concave
  dual, nonconvex in x on its box.
- ``kl_quadratic``: the cubic primal against a rank-deficient concave
  quadratic dual, giving a dual curvature exponent of 1/2 with modulus
  computable from the spectrum.

All randomness flows through a counter-based 64-bit generator (Philox)
keyed by the instance seed, so construction is pure and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _family as fam
from .core import (
    Ball,
    Box,
    KLInfo,
    MinimaxProblem,
    Oracles,
    StructureInfo,
    WholeSpace,
    as_vector,
)
from .errors import RejectedSpecError

__all__ = ["InstanceSpec", "make_instance", "reference_solution", "FAMILIES"]

FAMILIES = (
    "bilinear_cc",
    "quadratic_cc",
    "hard_gda",
    "polynomial_nc_c",
    "kl_quadratic",
    "transposed",
)


@dataclass(frozen=True)
class InstanceSpec:
    """Serializable description of one benchmark instance."""

    family: str
    n: int = 1
    d: int = 1
    seed: int = 0
    scale: float = 1.0
    bounded: bool = True  # hard_gda: box form instead of the unbounded form
    base: Optional["InstanceSpec"] = None  # for family == "transposed"

    def as_dict(self) -> dict:
        out = {
            "family": self.family, "n": self.n, "d": self.d,
            "seed": self.seed, "scale": self.scale, "bounded": self.bounded,
        }
        if self.base is not None:
            out["base"] = self.base.as_dict()
        return out

    @staticmethod
    def from_dict(data: dict) -> "InstanceSpec":
        base = data.get("base")
        return InstanceSpec(
            family=data["family"], n=int(data.get("n", 1)), d=int(data.get("d", 1)),
            seed=int(data.get("seed", 0)), scale=float(data.get("scale", 1.0)),
            bounded=bool(data.get("bounded", True)),
            base=InstanceSpec.from_dict(base) if base else None,
        )


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _spectral_norm(M) -> float:
    return float(np.linalg.norm(M, 2))


def _problem(name, co, set_x, set_y, structure, oracles):
    def eval_f(x, y):
        return fam.family_value(co, as_vector(x, co.n), as_vector(y, co.d))

    def grad_x(x, y):
        return fam.family_grad_x(co, as_vector(x, co.n), as_vector(y, co.d))

    def grad_y(x, y):
        return fam.family_grad_y(co, as_vector(x, co.n), as_vector(y, co.d))

    return MinimaxProblem(
        name=name, eval_f=eval_f, grad_x=grad_x, grad_y=grad_y,
        set_x=set_x, set_y=set_y, structure=structure, oracles=oracles,
        native=co,
    )


def _clip_box(v, cset):
    return np.clip(v, cset.lower, cset.upper)


# ---------------------------------------------------------------------------
# Family builders
# ---------------------------------------------------------------------------


def _random_coupling(rng, n, d, scale):
    """Random coupling with controlled spectrum: singular values in
    [0.7, 1] * scale (largest exactly scale), random orthogonal factors.
    Keeping the spectrum away from zero keeps the game's rotation modes
    on one time scale, so rate fits are not polluted by a slow mode."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((d, d)))
    k = min(n, d)
    s = 0.7 + 0.3 * rng.random(k)
    s[0] = 1.0
    S = np.zeros((n, d))
    S[:k, :k] = np.diag(s)
    return scale * (U @ S @ V.T)


def _bilinear_cc(spec):
    n, d = spec.n, spec.d
    rng = _rng(spec.seed)
    A = _random_coupling(rng, n, d, spec.scale)
    x_star = 0.4 * (2.0 * rng.random(n) - 1.0)
    y_star = 0.4 * (2.0 * rng.random(d) - 1.0)
    b = -(A @ y_star)
    c = A.T @ x_star
    co = fam.make_coeffs(n, d, A=A, b=b, c=c)
    set_x = Box(-np.ones(n), np.ones(n))
    set_y = Box(-np.ones(d), np.ones(d))
    structure = StructureInfo(
        lipschitz_L=max(1.0, spec.scale), convex_in_x=True, concave_in_y=True,
    )

    def argmax_y_reg(x, rho, w):
        coef = A.T @ as_vector(x, n) - c
        if rho > 0.0:
            return _clip_box(as_vector(w, d) + coef / rho, set_y)
        return np.where(coef > 0.0, 1.0, np.where(coef < 0.0, -1.0, 0.0))

    def argmin_x_reg(y, rho, w):
        coef = A @ as_vector(y, d) + b
        if rho > 0.0:
            return _clip_box(as_vector(w, n) - coef / rho, set_x)
        return np.where(coef > 0.0, -1.0, np.where(coef < 0.0, 1.0, 0.0))

    oracles = Oracles(
        argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(d)),
        argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(n)),
        argmax_y_reg=argmax_y_reg,
        argmin_x_reg=argmin_x_reg,
        saddle=lambda: (x_star.copy(), y_star.copy()),
        max_ties=lambda x: bool(np.any(np.abs(A.T @ as_vector(x, n) - c) <= 1e-12)),
        min_ties=lambda y: bool(np.any(np.abs(A @ as_vector(y, d) + b) <= 1e-12)),
    )
    return _problem(f"bilinear_cc(n={n},d={d},seed={spec.seed})", co, set_x, set_y,
                    structure, oracles)


def _quadratic_cc(spec):
    n, d = spec.n, spec.d
    rng = _rng(spec.seed)
    p_diag = (0.5 + rng.random(n)) * spec.scale
    q_diag = (0.5 + rng.random(d)) * spec.scale
    A = _random_coupling(rng, n, d, spec.scale)
    P = np.diag(p_diag)
    Q = np.diag(q_diag)
    x_star = 0.4 * (2.0 * rng.random(n) - 1.0)
    y_star = 0.4 * (2.0 * rng.random(d) - 1.0)
    b = -(P @ x_star + A @ y_star)
    c = A.T @ x_star - Q @ y_star
    co = fam.make_coeffs(n, d, P=P, A=A, b=b, Q=Q, c=c)
    set_x = Box(-np.ones(n), np.ones(n))
    set_y = Box(-np.ones(d), np.ones(d))
    L = max(1.0, float(p_diag.max()) + spec.scale, float(q_diag.max()) + spec.scale)
    structure = StructureInfo(lipschitz_L=L, convex_in_x=True, concave_in_y=True)

    def argmax_y_reg(x, rho, w):
        coef = A.T @ as_vector(x, n) - c
        return _clip_box((coef + rho * as_vector(w, d)) / (q_diag + rho), set_y)

    def argmin_x_reg(y, rho, w):
        coef = A @ as_vector(y, d) + b
        return _clip_box((rho * as_vector(w, n) - coef) / (p_diag + rho), set_x)

    oracles = Oracles(
        argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(d)),
        argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(n)),
        argmax_y_reg=argmax_y_reg,
        argmin_x_reg=argmin_x_reg,
        saddle=lambda: (x_star.copy(), y_star.copy()),
    )
    return _problem(f"quadratic_cc(n={n},d={d},seed={spec.seed})", co, set_x, set_y,
                    structure, oracles)


def _hard_gda(spec):
    co = fam.make_coeffs(1, 1, hx=1.0)  # f = x^2 y / 2
    set_x = Box([-1.0], [1.0]) if spec.bounded else WholeSpace(1)
    set_y = Box([0.0], [1.0])
    structure = StructureInfo(lipschitz_L=1.0, convex_in_x=True, concave_in_y=True)

    def argmax_y_reg(x, rho, w):
        x = as_vector(x, 1)
        with np.errstate(over="ignore"):  # huge diverged iterates are fine
            coef = 0.5 * x[0] * x[0]
        if rho > 0.0:
            return _clip_box(as_vector(w, 1) + coef / rho, set_y)
        if coef > 0.0:
            return np.array([1.0])
        return _clip_box(as_vector(w, 1), set_y)  # f constant in y at x = 0

    def argmin_x_reg(y, rho, w):
        y = as_vector(y, 1)
        denom = y[0] + rho
        if denom <= 0.0:  # rho = 0, y = 0: f constant in x
            out = as_vector(w, 1)
        else:
            out = rho * as_vector(w, 1) / denom
        return _clip_box(out, set_x) if spec.bounded else out

    oracles = Oracles(
        argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(1)),
        argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(1)),
        argmax_y_reg=argmax_y_reg,
        argmin_x_reg=argmin_x_reg,
        saddle=lambda: (np.array([0.0]), np.array([1.0])),
        max_ties=lambda x: as_vector(x, 1)[0] == 0.0,
        min_ties=lambda y: as_vector(y, 1)[0] == 0.0,
    )
    kind = "box" if spec.bounded else "free"
    return _problem(f"hard_gda({kind})", co, set_x, set_y, structure, oracles)


_CUBIC_XMAX = 1.8
_CUBIC_YMAX = 2.2


def _cubic_inner_min_oracle(scale, set_x):
    """argmin_x over a box of scale*(x^3 - 3x)*y1 + rho/2 (x - w)^2.

    The stationarity condition is quadratic in x, so the candidates are
    its real roots plus the box endpoints and the interior extrema.
    """
    lo, hi = float(set_x.lower[0]), float(set_x.upper[0])

    def argmin_x_reg(y, rho, w):
        y1 = float(as_vector(y)[0])
        w0 = float(as_vector(w, 1)[0])

        def obj(x):
            return scale * (x * x * x - 3.0 * x) * y1 + 0.5 * rho * (x - w0) ** 2

        cands = [lo, hi]
        a = 3.0 * scale * y1
        bq = rho
        cq = -(3.0 * scale * y1 + rho * w0)
        if abs(a) < 1e-14:
            if bq > 0.0:
                cands.append(-cq / bq)
        else:
            disc = bq * bq - 4.0 * a * cq
            if disc >= 0.0:
                sq = math.sqrt(disc)
                cands.extend([(-bq + sq) / (2.0 * a), (-bq - sq) / (2.0 * a)])
        if rho == 0.0:
            cands.extend([-1.0, 1.0])  # stationary points of the cubic factor
        feas = [min(max(xc, lo), hi) for xc in cands]
        best = min(feas, key=obj)
        return np.array([best])

    return argmin_x_reg


def _polynomial_nc_c(spec):
    s = spec.scale
    co = fam.make_coeffs(1, 1, Q=[[1.0]], sx=s)  # s (x^3 - 3x) y - y^2/2
    set_x = Box([-_CUBIC_XMAX], [_CUBIC_XMAX])
    set_y = Box([-_CUBIC_YMAX], [_CUBIC_YMAX])
    L = max(1.0, 6.0 * _CUBIC_XMAX * _CUBIC_YMAX * s,
            (3.0 * _CUBIC_XMAX ** 2 - 3.0) * s)
    structure = StructureInfo(lipschitz_L=L, concave_in_y=True)

    def argmax_y_reg(x, rho, w):
        x1 = float(as_vector(x, 1)[0])
        g = s * (x1 ** 3 - 3.0 * x1)
        return _clip_box(np.array([(g + rho * float(as_vector(w, 1)[0])) / (1.0 + rho)]),
                         set_y)

    argmin_x_reg = _cubic_inner_min_oracle(s, set_x)
    oracles = Oracles(
        argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(1)),
        argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(1)),
        argmax_y_reg=argmax_y_reg,
        argmin_x_reg=argmin_x_reg,
        min_ties=lambda y: as_vector(y, 1)[0] == 0.0,
    )
    return _problem(f"polynomial_nc_c(scale={s})", co, set_x, set_y, structure,
                    oracles)


def _kl_quadratic(spec):
    d = max(spec.d, 2)
    s = spec.scale
    q_diag = np.zeros(d)
    q_diag[0] = 1.0  # rank-deficient dual curvature
    co = fam.make_coeffs(1, d, Q=np.diag(q_diag), sx=s)
    set_x = Box([-_CUBIC_XMAX], [_CUBIC_XMAX])
    set_y = Box(-_CUBIC_YMAX * np.ones(d), _CUBIC_YMAX * np.ones(d))
    L = max(1.0, 6.0 * _CUBIC_XMAX * _CUBIC_YMAX * s,
            (3.0 * _CUBIC_XMAX ** 2 - 3.0) * s)
    # exponent 1/2 with modulus sqrt(2 * smallest positive curvature);
    # certified for the spectrum-independent coupling used here
    structure = StructureInfo(
        lipschitz_L=L, concave_in_y=True,
        kl_y=KLInfo(theta=0.5, tau=math.sqrt(2.0)),
        epsilon_underbar=0.5,
    )

    def argmax_y_reg(x, rho, w):
        x1 = float(as_vector(x, 1)[0])
        w = as_vector(w, d)
        g = s * (x1 ** 3 - 3.0 * x1)
        out = np.empty(d)
        out[0] = (g + rho * w[0]) / (1.0 + rho)
        out[1:] = w[1:]  # flat directions: any feasible value attains the max
        return _clip_box(out, set_y)

    argmin_core = _cubic_inner_min_oracle(s, set_x)

    def argmin_x_reg(y, rho, w):
        return argmin_core(as_vector(y, d)[:1], rho, w)

    oracles = Oracles(
        argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(d)),
        argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(1)),
        argmax_y_reg=argmax_y_reg,
        argmin_x_reg=argmin_x_reg,
        max_ties=lambda x: True,  # flat dual directions everywhere
        min_ties=lambda y: as_vector(y, d)[0] == 0.0,
    )
    return _problem(f"kl_quadratic(d={d},scale={s})", co, set_x, set_y, structure,
                    oracles)


def make_instance(spec: InstanceSpec) -> MinimaxProblem:
    """Construct the problem described by ``spec``; pure given the seed."""
    if spec.family not in FAMILIES:
        raise RejectedSpecError(f"unknown family {spec.family!r}")
    if spec.family == "transposed":
        if spec.base is None:
            raise RejectedSpecError("transposed spec needs a base instance")
        from .operator import transpose_problem

        return transpose_problem(make_instance(spec.base))
    if spec.n < 1 or spec.d < 1:
        raise RejectedSpecError("dimensions must be >= 1")
    if not (spec.scale > 0.0 and math.isfinite(spec.scale)):
        raise RejectedSpecError("scale must be positive and finite")
    if spec.family == "bilinear_cc":
        return _bilinear_cc(spec)
    if spec.family == "quadratic_cc":
        return _quadratic_cc(spec)
    if spec.family == "hard_gda":
        return _hard_gda(spec)
    if spec.family == "polynomial_nc_c":
        return _polynomial_nc_c(spec)
    return _kl_quadratic(spec)


def reference_solution(problem) -> Optional[tuple]:
    """Exact saddle point and value when the family supports it, else None."""
    if problem.oracles.saddle is None:
        return None
    x_star, y_star = problem.oracles.saddle()
    return x_star, y_star, float(problem.eval_f(x_star, y_star))
