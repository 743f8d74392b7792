"""Step-size machinery: the descent-certificate validator, the symmetric
feasibility solver, and the per-regime parameter selectors.

``validate_condition1`` checks, verbatim, the full inequality system under
which the potential-function descent estimate is certified. Those
constants are extremely conservative; the selectors therefore come in two
profiles:

- default ("desk") profile: practical constants with the scaling shapes
  required by each regime (symmetric O(1) smoothing, beta ~ T^{-1/2}
  caps, cc-rate couplings). These make the rate separations visible at
  bench scale.
- ``strict`` profile (``overrides={"strict": True}``): the certified
  constants. Universal strict parameters always pass
  ``validate_condition1`` by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Regime, SolverParams
from .errors import (
    DegenerateConstantsError,
    InfeasibleStepSizesError,
    InvalidParamsError,
    RegimeUnavailableError,
)

__all__ = [
    "DerivedConstants",
    "ValidationReport",
    "FeasibilityInterval",
    "validate_condition1",
    "symmetric_feasibility",
    "select_params",
]


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from (L, params) used by the descent certificate."""

    sigma: float
    L_d: float
    sigma1: float
    sigma2: float
    sigma3: float
    sigma5: float
    sigma6: float
    sigma8: float
    kappa: float
    s1_x: float
    s2_x: float
    s1_y: float
    s2_y: float
    s1_z: float
    s2_z: float
    s1_v: float
    s2_v: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the step-size validation: every violated constraint is
    listed by name with both sides of the inequality."""

    satisfied: bool
    violations: list
    constants: DerivedConstants

    def as_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "violations": [
                {"name": n, "lhs": lhs, "rhs": rhs} for (n, lhs, rhs) in self.violations
            ],
            "constants": self.constants.as_dict(),
        }


@dataclass(frozen=True)
class FeasibilityInterval:
    """Admissible symmetric step-size interval for a smoothing weight r."""

    eta_lower: float
    eta_upper: float
    beta_upper: float
    r_used: float
    nonempty: bool


def derived_constants(L, params) -> DerivedConstants:
    """All certificate constants; requires r_x > L and r_y > L."""
    rx, ry = params.r_x, params.r_y
    ex, ey = params.eta_x, params.eta_y
    bx, by = params.beta_x, params.beta_y
    if rx <= L or ry <= L:
        raise DegenerateConstantsError(
            f"constants undefined: need r_x > L and r_y > L (r_x={rx}, r_y={ry}, L={L})"
        )
    sigma = (3.0 * ex * rx + 1.0) / (ex * (rx - L))
    L_d = (L / (rx - L) + 2.0) * L + ry
    sigma1 = rx / (rx - L)
    sigma2 = sigma1
    sigma3 = rx * sigma1 / (ry - L) + 1.0
    sigma5 = ry / (ry - L)
    sigma6 = (1.0 + 2.0 * ex * rx) / (ex * (rx - L))
    sigma8 = (1.0 + ey * L_d) / (ey * (ry - L))
    kappa = 4.0 * bx
    inf = math.inf
    s1_x = 1.0 / (2.0 * ex) - (6.0 * L + 3.0 * rx + 2.0 * ry) / 2.0
    s2_x = 1.0 / (2.0 * ex) - 3.0 * (2.0 * L + rx + ry) / 2.0 - L * (rx + L) / (rx - L)
    s1_y = (
        1.0 / (2.0 * ey)
        - L_d
        - L * sigma6 ** 2
        - (ry + 3.0 * L) / 2.0
        - 6.0 * rx * kappa * sigma1 ** 2
        - 2.0 * L * (rx + L) / (rx - L)
    )
    s2_y = 1.0 / (2.0 * ey) - 3.0 * (2.0 * L + rx + ry) / 2.0 - L * L / (rx - L)
    if bx > 0.0:
        s1_z = (
            (1.0 - bx * (2.0 + 4.0 * sigma2)) * rx / (2.0 * bx)
            - rx / kappa
            - 12.0 * rx * kappa * sigma1 ** 2 * sigma3 ** 2
        )
        s2_z = rx / (2.0 * bx) - 3.0 * (L + rx) / 2.0 - L * rx / (rx - L)
    else:
        s1_z = s2_z = inf
    if by > 0.0:
        s1_v = (1.0 - by) * ry / (2.0 * by) - L - ry
        s2_v = ry / (2.0 * by) - 3.0 * (L + ry) / 2.0
    else:
        s1_v = s2_v = inf
    return DerivedConstants(
        sigma=sigma, L_d=L_d, sigma1=sigma1, sigma2=sigma2, sigma3=sigma3,
        sigma5=sigma5, sigma6=sigma6, sigma8=sigma8, kappa=kappa,
        s1_x=s1_x, s2_x=s2_x, s1_y=s1_y, s2_y=s2_y,
        s1_z=s1_z, s2_z=s2_z, s1_v=s1_v, s2_v=s2_v,
    )


def validate_condition1(L, params) -> ValidationReport:
    """Check every inequality of the descent-certificate step-size system.

    Returns a report listing each violated constraint by name together
    with both sides. Raises :class:`DegenerateConstantsError` when
    ``r_x <= L`` or ``r_y <= L`` (the sigma constants are undefined).
    """
    if L < 1.0:
        raise InvalidParamsError("L must be >= 1 (normalized smoothness)")
    rx, ry = params.r_x, params.r_y
    ex, ey = params.eta_x, params.eta_y
    bx, by = params.beta_x, params.beta_y
    con = derived_constants(L, params)

    violations = []

    def check(name, lhs, rhs):
        if not (lhs <= rhs):
            violations.append((name, lhs, rhs))

    def check_pos(name, val):
        if not (val > 0.0):
            violations.append((name, val, 0.0))

    check_pos("eta_x_positive", ex)
    check_pos("eta_y_positive", ey)
    check_pos("beta_x_positive", bx)
    check_pos("beta_y_positive", by)
    check("r_x_lower", 2.0 * L, rx)
    check("r_y_lower", 2.0 * L, ry)

    check("eta_x_sum", ex, 1.0 / (6.0 * (4.0 * L + rx + ry)))
    check("eta_x_coupling", ex, 1.0 / (320.0 * ry ** 2 * ey))
    check("eta_y_sum", ey, 1.0 / (6.0 * (3.0 * L + rx + ry)))
    check("eta_y_sigma", ey, 1.0 / (6.0 * L * con.sigma ** 2))
    check("eta_y_dual_smoothness", ey, 1.0 / (3.0 * (2.0 * con.L_d + 15.0 * L + ry)))
    check("eta_y_absolute", ey, 1.0 / (20.0 * L * (5.0 * L + 2.0)))
    check(
        "beta_x_ratio",
        bx,
        2.0 * rx / (80.0 * rx + 6.0 * rx ** 2 + 3.0 * L ** 2 + 12.0 * rx * L),
    )
    check("beta_x_eta_y", bx, ey * L ** 2 / (7680.0 * rx))
    check("beta_y_eta_y", by, ey * L ** 2 / (240.0 * ry))

    return ValidationReport(satisfied=not violations, violations=violations,
                            constants=con)


# ---------------------------------------------------------------------------
# Symmetric feasibility
# ---------------------------------------------------------------------------


def _eta_bounds_symmetric(L, r):
    """Roots/bounds of the symmetric step-size system at smoothing weight r.

    The lower end is the smaller root of 6L(3 eta r + 1)^2 <= eta (r-L)^2,
    i.e. of 54 L r^2 eta^2 - eta (r^2 - 38 L r + L^2) + 6L <= 0; its
    discriminant factors as (L^2 - 74 L r + r^2)(r - L)^2.
    """
    disc = L * L - 74.0 * L * r + r * r
    if disc < 0.0:
        eta_lower = math.inf
    else:
        eta_lower = (-(r - L) * math.sqrt(disc) + L * L - 38.0 * L * r + r * r) / (
            108.0 * L * r * r
        )
    eta_upper = min(1.0 / (8.0 * math.sqrt(5.0) * r), 1.0 / (20.0 * L * (5.0 * L + 2.0)))
    return eta_lower, eta_upper


def _beta_bound_kl(L, r, tau, eps_underbar, diam):
    """Largest beta in (0, 1) satisfying the implicit curvature-exponent
    bound beta <= rhs(beta); solved numerically (the unknown appears on
    both sides). Returns 0.0 when no admissible beta exists."""

    def rhs(beta):
        num = math.sqrt((r - L) * tau) * (beta * (r - L)) ** (1.0 / (2.0 * eps_underbar))
        den = 8.0 * math.sqrt(
            2.0 * (2.0 * r * (r - L + r * beta)) ** (1.0 / eps_underbar)
            * diam ** (1.0 / eps_underbar - 2.0)
        )
        return num / den

    grid = np.logspace(-16, math.log10(0.999), 600)
    feas = np.array([b <= rhs(b) for b in grid])
    if not feas.any():
        return 0.0
    i = int(np.nonzero(feas)[0][-1])
    if i == len(grid) - 1:
        return float(grid[-1])
    lo, hi = float(grid[i]), float(grid[i + 1])  # feasible, infeasible
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= rhs(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(lo, 1e-300):
            break
    return lo


def _interval_at(L, r, tau, eps_underbar, diam_x, diam_y):
    eta_lower, eta_upper = _eta_bounds_symmetric(L, r)
    nonempty_eta = eta_lower <= eta_upper
    eta_ref = 0.5 * (eta_lower + eta_upper) if nonempty_eta else eta_upper
    b1 = 2.0 * r / (80.0 * r + 6.0 * r * r + 3.0 * L * L + 12.0 * r * L)
    b2 = eta_ref * L * L / (7680.0 * r)
    beta_upper = min(b1, b2)
    if tau is not None and eps_underbar is not None:
        if diam_x is None or diam_y is None or not (
            math.isfinite(diam_x) and math.isfinite(diam_y)
        ):
            raise InvalidParamsError(
                "finite diameters required for the curvature-exponent beta bound"
            )
        beta_upper = min(
            beta_upper,
            _beta_bound_kl(L, r, tau, eps_underbar, max(diam_x, diam_y)),
        )
    return FeasibilityInterval(
        eta_lower=eta_lower,
        eta_upper=eta_upper,
        beta_upper=beta_upper,
        r_used=r,
        nonempty=bool(nonempty_eta and beta_upper > 0.0),
    )


def symmetric_feasibility(L, T, tau=None, eps_underbar=None, diam_x=None,
                          diam_y=None, r=None) -> FeasibilityInterval:
    """Admissible interval of symmetric step sizes eta for a symmetric
    smoothing weight ``r`` (searched if not supplied).

    The lower endpoint is the smaller root of the quadratic descent
    constraint 6L(3 eta r + 1)^2 <= eta (r - L)^2 and the upper endpoint
    min{1/(8*sqrt(5) r), 1/(20L(5L+2))}. ``beta_upper`` is the minimum of
    the two explicit averaging-rate bounds (evaluated at the interval
    midpoint) and, when ``tau``/``eps_underbar`` are given, of the
    implicit exponent-dependent bound solved to 1e-12.

    In search mode ``r`` runs over a geometric grid in [74L, 1e4 L] and
    the smallest weight with a nonempty interval is returned; exhausting
    the grid raises :class:`InfeasibleStepSizesError` carrying the best
    candidate.
    """
    if L < 1.0:
        raise InvalidParamsError("L must be >= 1")
    if T < 1:
        raise InvalidParamsError("T must be >= 1")
    if r is not None:
        if r <= L:
            raise DegenerateConstantsError("r must exceed L")
        return _interval_at(L, float(r), tau, eps_underbar, diam_x, diam_y)

    best = None
    best_gap = math.inf
    rr = 74.0 * L
    while rr <= 1e4 * L:
        cand = _interval_at(L, rr, tau, eps_underbar, diam_x, diam_y)
        if cand.nonempty:
            return cand
        gap = cand.eta_lower - cand.eta_upper
        if math.isfinite(gap) and gap < best_gap:
            best, best_gap = cand, gap
        rr *= 1.02
    raise InfeasibleStepSizesError(
        f"no symmetric step size found for L={L} in r range [74L, 1e4 L]",
        best=best,
    )


# ---------------------------------------------------------------------------
# Regime selectors
# ---------------------------------------------------------------------------


def _require(cond, msg):
    if not cond:
        raise RegimeUnavailableError(msg)


def _kl_tau(structure):
    if structure.kl_y is not None:
        return structure.kl_y.tau
    if structure.kl_x is not None:
        return structure.kl_x.tau
    return None


def _finish(kwargs, overrides, regime):
    for key in ("r_x", "r_y", "eta_x", "eta_y", "beta_x", "beta_y"):
        if key in overrides:
            kwargs[key] = float(overrides[key])
    return SolverParams(regime=regime, **kwargs)


def _select_universal(problem, T, overrides):
    st = problem.structure
    L = st.lipschitz_L
    _require(
        st.convex_in_x or st.concave_in_y or st.kl_x is not None or st.kl_y is not None,
        "universal regime needs convexity, concavity, or a one-sided KL flag",
    )
    diam_x = problem.set_x.diameter()
    diam_y = problem.set_y.diameter()
    _require(
        math.isfinite(diam_x) and math.isfinite(diam_y),
        "universal regime requires compact sets",
    )
    if overrides.get("strict"):
        tau = _kl_tau(st)
        eps = st.epsilon_underbar
        if tau is None or eps is None:
            tau = eps = None  # skip the implicit beta bound
        fi = symmetric_feasibility(L, T, tau=tau, eps_underbar=eps,
                                   diam_x=diam_x, diam_y=diam_y,
                                   r=overrides.get("r"))
        if not fi.nonempty:
            raise InfeasibleStepSizesError("empty symmetric interval", best=fi)
        r = fi.r_used
        eta = 0.5 * (fi.eta_lower + fi.eta_upper)
        c_beta = float(overrides.get("c_beta", fi.beta_upper))
        beta = min(c_beta / math.sqrt(T), fi.beta_upper)
        kwargs = dict(r_x=r, r_y=r, eta_x=eta, eta_y=eta, beta_x=beta, beta_y=beta)
        params = _finish(kwargs, overrides, Regime.UNIVERSAL)
        report = validate_condition1(L, params)
        assert report.satisfied, f"strict universal selection failed: {report.violations}"
        return params
    r = float(overrides.get("r", 2.0 * L))
    eta = 1.0 / (7.0 * (L + r))
    beta_cap = r / (6.0 * (L + r))
    c_beta = float(overrides.get("c_beta", beta_cap))
    beta = min(c_beta / math.sqrt(T), beta_cap)
    kwargs = dict(r_x=r, r_y=r, eta_x=eta, eta_y=eta, beta_x=beta, beta_y=beta)
    return _finish(kwargs, overrides, Regime.UNIVERSAL)


def _select_cc(problem, T, overrides):
    st = problem.structure
    _require(st.convex_in_x and st.concave_in_y,
             "cc regime requires convex_in_x and concave_in_y")
    L = st.lipschitz_L
    c_r = float(overrides.get("c_r", 1.0))
    r = float(overrides.get("r", c_r / T))
    eta = 1.0 / (7.0 * (L + r))
    beta = r * eta
    kwargs = dict(r_x=r, r_y=r, eta_x=eta, eta_y=eta, beta_x=beta, beta_y=beta)
    return _finish(kwargs, overrides, Regime.CC)


def _strict_asymmetric(L, T, beta_x_exponent, overrides):
    """Certified asymmetric profile: the tightest explicit constants."""
    rx = ry = 2.0 * L
    eta_x = 1.0 / (6.0 * (4.0 * L + rx + ry))
    L_d = (L / (rx - L) + 2.0) * L + ry
    sigma = (3.0 * eta_x * rx + 1.0) / (eta_x * (rx - L))
    eta_y = min(
        1.0 / (6.0 * (3.0 * L + rx + ry)),
        1.0 / (6.0 * L * sigma ** 2),
        1.0 / (3.0 * (2.0 * L_d + 15.0 * L + ry)),
        1.0 / (20.0 * L * (5.0 * L + 2.0)),
    )
    # the eta_x/eta_y coupling almost never binds at these magnitudes,
    # but enforce it anyway
    eta_x = min(eta_x, 1.0 / (320.0 * ry ** 2 * eta_y))
    bx_bound = min(
        2.0 * rx / (80.0 * rx + 6.0 * rx ** 2 + 3.0 * L ** 2 + 12.0 * rx * L),
        eta_y * L ** 2 / (7680.0 * rx),
    )
    c_beta = float(overrides.get("c_beta", bx_bound))
    beta_x = min(bx_bound, c_beta * T ** (-beta_x_exponent))
    beta_y = eta_y * L ** 2 / (240.0 * ry)
    return dict(r_x=rx, r_y=ry, eta_x=eta_x, eta_y=eta_y,
                beta_x=beta_x, beta_y=beta_y)


def _select_primal_nc(problem, T, overrides, regime):
    """Shared selector for nc_c and nc_kl (dual side controls progress)."""
    st = problem.structure
    L = st.lipschitz_L
    if regime is Regime.NC_C:
        _require(st.concave_in_y, "nc_c regime requires concave_in_y")
        exponent = 0.5
    else:
        _require(st.kl_y is not None, "nc_kl regime requires kl_y metadata")
        theta = st.kl_y.theta
        exponent = max(2.0 * theta - 1.0, 0.0) / (2.0 * theta)
        _require(math.isfinite(problem.set_x.diameter()),
                 "nc_kl regime requires a compact x-set")
    _require(math.isfinite(problem.set_y.diameter()),
             f"{regime.value} regime requires a compact y-set")

    if overrides.get("strict"):
        kwargs = _strict_asymmetric(L, T, exponent, overrides)
        params = _finish(kwargs, overrides, regime)
        report = validate_condition1(L, params)
        assert report.satisfied, f"strict {regime.value} selection failed"
        return params

    r = float(overrides.get("r", 2.0 * L))
    eta = 1.0 / (7.0 * (L + r))
    c_beta = float(overrides.get("c_beta", 1.0))
    beta_y = 0.5
    beta_x = min(c_beta * T ** (-exponent), 0.5)
    kwargs = dict(r_x=r, r_y=r, eta_x=eta, eta_y=eta, beta_x=beta_x, beta_y=beta_y)
    return _finish(kwargs, overrides, regime)


def _swap_roles(params, regime):
    return SolverParams(
        r_x=params.r_y, r_y=params.r_x,
        eta_x=params.eta_y, eta_y=params.eta_x,
        beta_x=params.beta_y, beta_y=params.beta_x,
        regime=regime,
    )


def select_params(regime, problem, T, overrides=None) -> SolverParams:
    """Resolve solver parameters for a regime on a given problem.

    ``overrides`` may pin any of the six scalars directly, adjust the
    free constants (``c_r``, ``c_beta``, ``r``), or request the certified
    profile with ``{"strict": True}``. Mirrored regimes (``c_nc``,
    ``kl_nc``) are produced by selecting on the transposed problem and
    swapping the roles back.
    """
    regime = Regime(regime)
    overrides = dict(overrides or {})
    if T < 2:
        raise InvalidParamsError("T must be >= 2")

    if regime is Regime.MANUAL:
        try:
            return SolverParams(
                r_x=float(overrides["r_x"]), r_y=float(overrides["r_y"]),
                eta_x=float(overrides["eta_x"]), eta_y=float(overrides["eta_y"]),
                beta_x=float(overrides["beta_x"]), beta_y=float(overrides["beta_y"]),
                regime=Regime.MANUAL,
            )
        except KeyError as exc:
            raise InvalidParamsError(f"manual regime needs all six scalars: {exc}")

    if regime is Regime.UNIVERSAL:
        return _select_universal(problem, T, overrides)
    if regime is Regime.CC:
        return _select_cc(problem, T, overrides)
    if regime in (Regime.NC_C, Regime.NC_KL):
        return _select_primal_nc(problem, T, overrides, regime)

    # mirrored regimes via transposition (override keys swap roles too)
    from .operator import transpose_problem

    swapped = dict(overrides)
    for a, b in (("r_x", "r_y"), ("eta_x", "eta_y"), ("beta_x", "beta_y")):
        if a in overrides or b in overrides:
            swapped[a], swapped[b] = overrides.get(b), overrides.get(a)
            for key in (a, b):
                if swapped[key] is None:
                    del swapped[key]
    mirrored = Regime.NC_C if regime is Regime.C_NC else Regime.NC_KL
    sub = _select_primal_nc(transpose_problem(problem), T, swapped, mirrored)
    return _swap_roles(sub, regime)
