"""Core value types: vectors, convex feasible sets, problem descriptions,
solver parameters, solver state and per-iteration records.

All types are immutable after construction and safe to share across
threads. Vectors are plain 1-d ``numpy.float64`` arrays validated by
:func:`as_vector`; non-finite entries are rejected everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasiblePointError,
    InvalidParamsError,
    NonFiniteError,
)

#: Absolute tolerance for set membership checks (projections are computed
#: in double precision).
MEMBERSHIP_TOL = 1e-9


def as_vector(p, dim=None, name="vector") -> np.ndarray:
    """Validate ``p`` as a finite 1-d float64 vector, optionally of length ``dim``.

    Scalars are promoted to length-1 vectors. Returns a fresh array.
    """
    arr = np.array(p, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-d, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has dimension {arr.shape[0]}, expected {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


# ---------------------------------------------------------------------------
# Convex sets
# ---------------------------------------------------------------------------


class ConvexSet:
    """A closed convex set with Euclidean projection.

    Concrete kinds: :class:`WholeSpace`, :class:`Box`, :class:`Ball`,
    :class:`Simplex`. Subclasses implement :meth:`project`,
    :meth:`diameter` and :meth:`normal_cone_distance`.
    """

    kind: str = "abstract"
    dim: int = 0

    def project(self, p) -> np.ndarray:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, p, tol: float = MEMBERSHIP_TOL) -> bool:
        q = as_vector(p, self.dim)
        return bool(np.linalg.norm(q - self.project(q)) <= tol)

    def normal_cone_distance(self, x, g) -> tuple[float, bool]:
        """Distance from 0 to ``g + N(x)`` and whether it is exact."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one feasible point (used by sampling-based checks)."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """A box containing the set; used by grid fallbacks."""
        raise NotImplementedError


class WholeSpace(ConvexSet):
    kind = "whole-space"

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionMismatchError("dim must be >= 1")
        self.dim = int(dim)

    def project(self, p):
        return as_vector(p, self.dim)

    def diameter(self):
        return math.inf

    def contains(self, p, tol=MEMBERSHIP_TOL):
        as_vector(p, self.dim)
        return True

    def normal_cone_distance(self, x, g):
        # the normal cone is {0} everywhere
        as_vector(x, self.dim)
        return float(np.linalg.norm(as_vector(g, self.dim))), True

    def sample(self, rng):
        return rng.standard_normal(self.dim)

    def bounding_box(self):
        raise InfeasiblePointError("whole-space has no bounding box")

    def __repr__(self):
        return f"WholeSpace(dim={self.dim})"


class Box(ConvexSet):
    kind = "box"

    def __init__(self, lower, upper):
        self.lower = as_vector(lower, name="lower")
        self.upper = as_vector(upper, self.lower.shape[0], name="upper")
        if np.any(self.lower > self.upper):
            raise InvalidParamsError("box requires lower <= upper componentwise")
        self.dim = self.lower.shape[0]
        self.lower.flags.writeable = False
        self.upper.flags.writeable = False

    def project(self, p):
        return np.clip(as_vector(p, self.dim), self.lower, self.upper)

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def normal_cone_distance(self, x, g):
        xv = as_vector(x, self.dim)
        gv = as_vector(g, self.dim)
        # per-coordinate case analysis on the active bounds
        at_lo = xv <= self.lower + MEMBERSHIP_TOL
        at_hi = xv >= self.upper - MEMBERSHIP_TOL
        contrib = np.square(gv)  # interior: n_i = 0 forced
        # upper active: n_i >= 0, min |g_i + n_i| = max(g_i, 0)
        contrib = np.where(at_hi, np.square(np.maximum(gv, 0.0)), contrib)
        # lower active: n_i <= 0, min |g_i + n_i| = max(-g_i, 0)
        contrib = np.where(at_lo, np.square(np.maximum(-gv, 0.0)), contrib)
        # pinned coordinate (lower == upper): normal component is free
        contrib = np.where(at_lo & at_hi, 0.0, contrib)
        return float(math.sqrt(float(np.sum(contrib)))), True

    def sample(self, rng):
        return self.lower + (self.upper - self.lower) * rng.random(self.dim)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Ball(ConvexSet):
    kind = "euclidean-ball"

    def __init__(self, center, radius: float):
        self.center = as_vector(center, name="center")
        if not (radius > 0 and math.isfinite(radius)):
            raise InvalidParamsError("ball radius must be positive and finite")
        self.radius = float(radius)
        self.dim = self.center.shape[0]
        self.center.flags.writeable = False

    def project(self, p):
        q = as_vector(p, self.dim)
        w = q - self.center
        nrm = float(np.linalg.norm(w))
        if nrm <= self.radius:
            return q
        return self.center + w * (self.radius / nrm)

    def diameter(self):
        return 2.0 * self.radius

    def normal_cone_distance(self, x, g):
        xv = as_vector(x, self.dim)
        gv = as_vector(g, self.dim)
        w = xv - self.center
        nrm = float(np.linalg.norm(w))
        if nrm < self.radius - MEMBERSHIP_TOL:
            return float(np.linalg.norm(gv)), True
        # boundary: N(x) = {lam * w : lam >= 0}; minimize ||g + lam w|| over
        # lam >= 0, closed form lam* = max(0, -<g, w>/||w||^2)
        inner = float(np.dot(gv, w))
        if inner >= 0.0 or nrm == 0.0:
            return float(np.linalg.norm(gv)), True
        val = float(np.dot(gv, gv)) - inner * inner / (nrm * nrm)
        return float(math.sqrt(max(val, 0.0))), True

    def sample(self, rng):
        u = rng.standard_normal(self.dim)
        nrm = float(np.linalg.norm(u))
        if nrm == 0.0:
            return self.center.copy()
        rad = self.radius * rng.random() ** (1.0 / self.dim)
        return self.center + u * (rad / nrm)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


class Simplex(ConvexSet):
    """The probability simplex {y >= 0, sum(y) = 1}."""

    kind = "simplex"

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionMismatchError("dim must be >= 1")
        self.dim = int(dim)

    def project(self, p):
        # sort-based projection (Duchi et al. style), O(n log n)
        v = as_vector(p, self.dim)
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1.0
        idx = np.arange(1, self.dim + 1)
        cond = u - css / idx > 0
        rho = int(np.nonzero(cond)[0][-1])
        theta = css[rho] / (rho + 1.0)
        return np.maximum(v - theta, 0.0)

    def diameter(self):
        return math.sqrt(2.0) if self.dim >= 2 else 0.0

    def normal_cone_distance(self, x, g):
        # projected-gradient surrogate; vanishes exactly at stationarity
        xv = as_vector(x, self.dim)
        gv = as_vector(g, self.dim)
        return float(np.linalg.norm(xv - self.project(xv - gv))), False

    def sample(self, rng):
        return rng.dirichlet(np.ones(self.dim))

    def bounding_box(self):
        return np.zeros(self.dim), np.ones(self.dim)

    def __repr__(self):
        return f"Simplex(dim={self.dim})"


def project(cset: ConvexSet, p) -> np.ndarray:
    """Euclidean projection of ``p`` onto ``cset``."""
    return cset.project(as_vector(p, cset.dim, name="point"))


def normal_cone_distance(cset: ConvexSet, x, g) -> tuple[float, bool]:
    """Distance from the origin to ``g + N_cset(x)``.

    Exact (returns ``exact=True``) for whole-space, box and ball kinds;
    the simplex uses the projected-gradient surrogate with ``exact=False``.
    ``x`` must be a member of the set up to the membership tolerance.
    """
    xv = as_vector(x, cset.dim, name="x")
    if not cset.contains(xv):
        raise InfeasiblePointError(f"x is not a member of {cset!r}")
    return cset.normal_cone_distance(xv, as_vector(g, cset.dim, name="g"))


def diameter(cset: ConvexSet) -> float:
    """Euclidean diameter; ``math.inf`` for the whole space."""
    return cset.diameter()


# ---------------------------------------------------------------------------
# Problem description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KLInfo:
    """One-sided gradient-dominance data: exponent ``theta`` and modulus ``tau``."""

    theta: float
    tau: float

    def __post_init__(self):
        if not (0.0 < self.theta <= 1.0):
            raise InvalidParamsError("KL exponent theta must lie in (0, 1]")
        if not (self.tau > 0.0):
            raise InvalidParamsError("KL modulus tau must be positive")


@dataclass(frozen=True)
class StructureInfo:
    """Machine-checkable structure metadata attached to a problem.

    ``lipschitz_L`` is clamped up to at least 1 at construction; the common
    normalization used throughout the step-size machinery.
    """

    lipschitz_L: float
    convex_in_x: bool = False
    concave_in_y: bool = False
    kl_x: Optional[KLInfo] = None
    kl_y: Optional[KLInfo] = None
    lower_bound_known: Optional[float] = None
    epsilon_underbar: Optional[float] = None

    def __post_init__(self):
        L = float(self.lipschitz_L)
        if not math.isfinite(L) or L <= 0:
            raise InvalidParamsError("lipschitz_L must be positive and finite")
        object.__setattr__(self, "lipschitz_L", max(L, 1.0))
        if self.epsilon_underbar is not None and not (
            0.0 < self.epsilon_underbar <= 1.0
        ):
            raise InvalidParamsError("epsilon_underbar must lie in (0, 1]")


@dataclass(frozen=True)
class Oracles:
    """Optional exact inner-solution callbacks.

    ``argmax_y(x)`` and ``argmin_x(y)`` solve the plain inner problems;
    ``argmax_y_reg(x, rho, w)`` maximizes ``f(x, .) - rho/2 ||. - w||^2``
    and ``argmin_x_reg(y, rho, w)`` minimizes ``f(., y) + rho/2 ||. - w||^2``
    (``rho = 0`` recovers the plain versions). ``saddle()`` returns an exact
    saddle point. ``max_ties(x)`` flags a non-unique inner maximizer.
    """

    argmax_y: Optional[Callable] = None
    argmin_x: Optional[Callable] = None
    saddle: Optional[Callable] = None
    argmax_y_reg: Optional[Callable] = None
    argmin_x_reg: Optional[Callable] = None
    max_ties: Optional[Callable] = None
    min_ties: Optional[Callable] = None


@dataclass(frozen=True)
class MinimaxProblem:
    """A smooth constrained min-max problem.

    ``eval_f(x, y)`` returns the objective; ``grad_x``/``grad_y`` its
    partial gradients. ``set_x``/``set_y`` are the projectable feasible
    sets and ``structure`` carries smoothness/curvature metadata.
    ``native`` optionally holds closed-form coefficients consumed by the
    compiled iteration kernels.
    """

    name: str
    eval_f: Callable
    grad_x: Callable
    grad_y: Callable
    set_x: ConvexSet
    set_y: ConvexSet
    structure: StructureInfo
    oracles: Oracles = field(default_factory=Oracles)
    native: Optional[object] = None

    @property
    def dims(self) -> tuple[int, int]:
        return self.set_x.dim, self.set_y.dim

    def feasible(self, x, y, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.set_x.contains(x, tol) and self.set_y.contains(y, tol)

    def require_feasible(self, x, y, tol: float = MEMBERSHIP_TOL):
        if not self.set_x.contains(x, tol):
            raise InfeasiblePointError(f"x infeasible for {self.name}")
        if not self.set_y.contains(y, tol):
            raise InfeasiblePointError(f"y infeasible for {self.name}")


# ---------------------------------------------------------------------------
# Solver parameters, state, records
# ---------------------------------------------------------------------------


class Regime(str, Enum):
    """Provenance of a parameter choice."""

    UNIVERSAL = "universal"
    CC = "cc"
    NC_C = "nc_c"
    C_NC = "c_nc"
    NC_KL = "nc_kl"
    KL_NC = "kl_nc"
    MANUAL = "manual"


#: Regimes in which beta = 0 is admissible (plain optimistic/descent-ascent
#: reductions; elsewhere the smoothing anchors must move).
_ZERO_BETA_REGIMES = (Regime.CC, Regime.MANUAL)


@dataclass(frozen=True)
class SolverParams:
    """The six scalars driving the doubly smoothed updates.

    ``r_x, r_y``: smoothing weights; ``eta_x, eta_y``: step sizes;
    ``beta_x, beta_y``: anchor averaging rates in [0, 1).
    """

    r_x: float
    r_y: float
    eta_x: float
    eta_y: float
    beta_x: float
    beta_y: float
    regime: Regime = Regime.MANUAL

    def __post_init__(self):
        vals = (self.r_x, self.r_y, self.eta_x, self.eta_y, self.beta_x, self.beta_y)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParamsError("parameters must be finite")
        if self.r_x < 0 or self.r_y < 0:
            raise InvalidParamsError("smoothing weights must be >= 0")
        if self.eta_x <= 0 or self.eta_y <= 0:
            raise InvalidParamsError("step sizes must be positive")
        if not (0.0 <= self.beta_x < 1.0 and 0.0 <= self.beta_y < 1.0):
            raise InvalidParamsError("averaging rates must lie in [0, 1)")
        if (self.beta_x == 0.0 or self.beta_y == 0.0) and self.regime not in (
            _ZERO_BETA_REGIMES
        ):
            raise InvalidParamsError(
                f"beta = 0 is only admissible in regimes "
                f"{[r.value for r in _ZERO_BETA_REGIMES]}, got {self.regime.value}"
            )

    def as_dict(self) -> dict:
        return {
            "r_x": self.r_x,
            "r_y": self.r_y,
            "eta_x": self.eta_x,
            "eta_y": self.eta_y,
            "beta_x": self.beta_x,
            "beta_y": self.beta_y,
            "regime": self.regime.value,
        }


@dataclass(frozen=True)
class SolverState:
    """Current iterate (x, y, z, v) plus the previous operator evaluation.

    At t = 0 the anchors coincide with the primal-dual pair and ``prev_G``
    equals the operator at the initial point, so the first extrapolation
    correction vanishes.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    v: np.ndarray
    prev_G: object  # OperatorValue
    t: int


@dataclass(frozen=True)
class IterationRecord:
    """One metric row of a run trace. Missing measures stay ``None``."""

    t: int
    f_val: float
    gap: Optional[float] = None
    gs_x: Optional[float] = None
    gs_y: Optional[float] = None
    os_res: Optional[float] = None
    lyapunov: Optional[float] = None
    elapsed_ms: Optional[float] = None

    #: measures are allowed to dip this far below zero from inner-solve slack
    NEG_SLACK = -1e-12

    def __post_init__(self):
        if not math.isfinite(self.f_val):
            raise NonFiniteError("f_val must be finite")
        for name in ("gap", "gs_x", "gs_y", "os_res", "elapsed_ms"):
            val = getattr(self, name)
            if val is None:
                continue
            if not math.isfinite(val):
                raise NonFiniteError(f"{name} must be finite")
            if val < self.NEG_SLACK:
                raise InvalidParamsError(f"{name} = {val} is negative beyond slack")
        if self.lyapunov is not None and not math.isfinite(self.lyapunov):
            raise NonFiniteError("lyapunov must be finite")
