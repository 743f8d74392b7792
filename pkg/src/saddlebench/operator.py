"""The regularized four-block operator, the five iteration rules, the
iteration runner, and the min-max/max-min transposition.

The regularized objective is

    F(x, y, z, v) = f(x, y) + r_x/2 ||x - z||^2 - r_y/2 ||y - v||^2

with slowly tracked anchors (z, v). Its descent/ascent operator is

    G = [grad_x F; -grad_y F; grad_z F; -grad_v F].

``ds_ogda`` takes optimistic (extrapolated) primal-dual steps on F and
averaged anchor steps; ``ds_gda`` drops the extrapolation; ``ogda``,
``eg`` and ``gda`` are the plain baselines acting on f alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    IterationRecord,
    MinimaxProblem,
    SolverParams,
    SolverState,
    StructureInfo,
    KLInfo,
    Oracles,
    as_vector,
)
from .errors import DivergedError, InvalidParamsError, NonFiniteError

__all__ = [
    "AlgorithmKind",
    "OperatorValue",
    "RunResult",
    "regularized_value",
    "eval_operator",
    "initial_state",
    "step",
    "run",
    "transpose_problem",
    "ppm_error",
]


class AlgorithmKind(str, Enum):
    DS_OGDA = "ds_ogda"
    DS_GDA = "ds_gda"
    OGDA = "ogda"
    EG = "eg"
    GDA = "gda"


#: kinds whose updates use the smoothing blocks of G
_SMOOTHED = (AlgorithmKind.DS_OGDA, AlgorithmKind.DS_GDA)


@dataclass(frozen=True)
class OperatorValue:
    """The four blocks of G evaluated at one state."""

    g_x: np.ndarray
    g_y: np.ndarray
    g_z: np.ndarray
    g_v: np.ndarray


def regularized_value(problem, params, x, y, z, v) -> float:
    """F(x, y, z, v) at a feasible primal-dual pair."""
    x = as_vector(x, problem.set_x.dim)
    y = as_vector(y, problem.set_y.dim)
    z = as_vector(z, problem.set_x.dim)
    v = as_vector(v, problem.set_y.dim)
    problem.require_feasible(x, y)
    val = float(problem.eval_f(x, y))
    dx = x - z
    dy = y - v
    return val + 0.5 * params.r_x * float(dx @ dx) - 0.5 * params.r_y * float(dy @ dy)


def _blocks(problem, params, x, y, z, v):
    """The four operator blocks; closed forms for the smoothing blocks."""
    gx = problem.grad_x(x, y)
    gy = problem.grad_y(x, y)
    g_x = gx + params.r_x * (x - z)
    g_y = -gy + params.r_y * (y - v)
    g_z = params.r_x * (z - x)
    g_v = params.r_y * (v - y)
    return OperatorValue(g_x, g_y, g_z, g_v)


def eval_operator(problem, params, state) -> OperatorValue:
    """G at ``state``: [grad_x F; -grad_y F; grad_z F; -grad_v F]."""
    problem.require_feasible(state.x, state.y)
    return _blocks(problem, params, state.x, state.y, state.z, state.v)


def _plain_operator(problem, x, y) -> OperatorValue:
    """The operator of f alone (smoothing off), used by the baselines."""
    g_x = problem.grad_x(x, y)
    g_y = -problem.grad_y(x, y)
    zeros_x = np.zeros_like(g_x)
    zeros_y = np.zeros_like(g_y)
    return OperatorValue(g_x, g_y, zeros_x, zeros_y)


def initial_state(kind, problem, params, x0, y0) -> SolverState:
    """State at t = 0: anchors at the initial point and ``prev_G`` equal to
    the operator there, which makes the first extrapolation term vanish."""
    kind = AlgorithmKind(kind)
    x0 = as_vector(x0, problem.set_x.dim, name="x0")
    y0 = as_vector(y0, problem.set_y.dim, name="y0")
    problem.require_feasible(x0, y0)
    z0 = x0.copy()
    v0 = y0.copy()
    if kind in _SMOOTHED:
        prev = _blocks(problem, params, x0, y0, z0, v0)
    else:
        prev = _plain_operator(problem, x0, y0)
    return SolverState(x=x0, y=y0, z=z0, v=v0, prev_G=prev, t=0)


def _check_finite(t, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise DivergedError(t)


def step(kind, problem, params, state) -> SolverState:
    """Advance one iteration of the chosen algorithm.

    ``ds_ogda`` updates (with eta/beta from ``params``):

        x+ = proj_X(x - eta_x (2 G_x - G_x_prev))
        y+ = proj_Y(y - eta_y (2 G_y - G_y_prev))
        z+ = z + beta_x (x - z)
        v+ = v + beta_y (y - v)

    ``ds_gda`` drops the extrapolation; ``ogda``/``gda``/``eg`` act on f
    alone with frozen anchors. Raises :class:`DivergedError` if a
    non-finite coordinate is produced.
    """
    kind = AlgorithmKind(kind)
    x, y, z, v = state.x, state.y, state.z, state.v
    eta_x, eta_y = params.eta_x, params.eta_y
    t_new = state.t + 1

    try:
        return _step_body(kind, problem, params, state, x, y, z, v,
                          eta_x, eta_y, t_new)
    except NonFiniteError:
        # an unbounded set's projection rejected an overflowed update
        raise DivergedError(t_new)


def _step_body(kind, problem, params, state, x, y, z, v, eta_x, eta_y, t_new):
    if kind in _SMOOTHED:
        G = _blocks(problem, params, x, y, z, v)
        if kind is AlgorithmKind.DS_OGDA:
            x_new = problem.set_x.project(x - eta_x * (2.0 * G.g_x - state.prev_G.g_x))
            y_new = problem.set_y.project(y - eta_y * (2.0 * G.g_y - state.prev_G.g_y))
        else:
            x_new = problem.set_x.project(x - eta_x * G.g_x)
            y_new = problem.set_y.project(y - eta_y * G.g_y)
        z_new = z + params.beta_x * (x - z)
        v_new = v + params.beta_y * (y - v)
        prev = G
    elif kind is AlgorithmKind.OGDA:
        G = _plain_operator(problem, x, y)
        x_new = problem.set_x.project(x - eta_x * (2.0 * G.g_x - state.prev_G.g_x))
        y_new = problem.set_y.project(y - eta_y * (2.0 * G.g_y - state.prev_G.g_y))
        z_new, v_new, prev = z, v, G
    elif kind is AlgorithmKind.GDA:
        G = _plain_operator(problem, x, y)
        x_new = problem.set_x.project(x - eta_x * G.g_x)
        y_new = problem.set_y.project(y - eta_y * G.g_y)
        z_new, v_new, prev = z, v, G
    else:  # EG: half step to a midpoint, full step from the base point
        G = _plain_operator(problem, x, y)
        x_mid = problem.set_x.project(x - eta_x * G.g_x)
        y_mid = problem.set_y.project(y - eta_y * G.g_y)
        Gm = _plain_operator(problem, x_mid, y_mid)
        x_new = problem.set_x.project(x - eta_x * Gm.g_x)
        y_new = problem.set_y.project(y - eta_y * Gm.g_y)
        z_new, v_new, prev = z, v, Gm

    _check_finite(t_new, x_new, y_new, z_new, v_new)
    return SolverState(x=x_new, y=y_new, z=z_new, v=v_new, prev_G=prev, t=t_new)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """Trace of a run: records at scheduled iterations, the argmin index and
    value per requested measure, and optionally the raw state sequence."""

    records: list
    best: dict
    states: Optional[list] = None
    backend: str = "python"


def _schedule(T, stride):
    ts = list(range(stride, T + 1, stride))
    if not ts or ts[-1] != T:
        ts.append(T)
    return ts


def _measure_row(problem, params, t, x, y, z, measures, os_r, tol, lyap_val,
                 elapsed_ms):
    from . import measures as M

    f_val = float(problem.eval_f(x, y))
    gap = gs_x = gs_y = os_res = None
    if "gap" in measures:
        gap = M.saddle_gap(problem, x, y, tol=tol).value
    if "gs" in measures:
        rx, ry = M.game_stationarity(problem, x, y)
        gs_x, gs_y = rx.value, ry.value
    if "os" in measures:
        os_res = M.os_stationarity(problem, z, os_r, tol=tol).value
    return IterationRecord(
        t=t, f_val=f_val, gap=gap, gs_x=gs_x, gs_y=gs_y, os_res=os_res,
        lyapunov=lyap_val, elapsed_ms=elapsed_ms,
    )


def _collect_best(records):
    best = {}

    def consider(key, t, val):
        if val is None:
            return
        if key not in best or val < best[key][1]:
            best[key] = (t, val)

    for rec in records:
        consider("gap", rec.t, rec.gap)
        if rec.gs_x is not None and rec.gs_y is not None:
            consider("gs", rec.t, max(rec.gs_x, rec.gs_y))
        consider("os", rec.t, rec.os_res)
        consider("lyapunov", rec.t, rec.lyapunov)
    return best


def run(kind, problem, params, x0, y0, T, stride=1, measures=("gap", "gs"),
        lyapunov=False, os_r=None, tol=1e-8, keep_states=False,
        backend="auto", timing=False) -> RunResult:
    """Run ``T`` iterations and record metrics on the given schedule.

    Records are produced at every ``stride``-th iteration plus the final
    one; the trajectory is deterministic (bitwise reproducible for a fixed
    backend). ``backend`` is ``"auto"``, ``"python"`` or ``"compiled"``;
    the compiled kernels require a problem with native coefficients and
    plain record capture. On divergence a :class:`DivergedError` carrying
    the partial trace is raised.

    Returns a :class:`RunResult` whose ``best`` maps each requested
    measure to ``(t, value)`` at the iterate minimizing it, matching the
    "best evaluated iterate" convention used by the rate guarantees.
    """
    kind = AlgorithmKind(kind)
    if T < 1:
        raise InvalidParamsError("T must be >= 1")
    if stride < 1:
        raise InvalidParamsError("stride must be >= 1")
    measures = tuple(measures)
    if os_r is None:
        os_r = 2.0 * problem.structure.lipschitz_L

    from . import backend as B

    use_compiled = B.resolve_backend(backend, problem) and not (
        keep_states or lyapunov or timing
    )
    if backend == "compiled" and not use_compiled:
        raise InvalidParamsError(
            "compiled backend requires native coefficients and plain capture"
        )

    ts = _schedule(T, stride)

    if use_compiled:
        snaps, diverged_at = B.run_compiled(kind, problem, params, x0, y0, ts)
        records = []
        for i, t in enumerate(ts):
            if diverged_at >= 0 and t >= diverged_at:
                break
            xs, ys, zs, _vs = (snaps[0][i], snaps[1][i], snaps[2][i], snaps[3][i])
            try:
                records.append(
                    _measure_row(problem, params, t, xs, ys, zs, measures, os_r,
                                 tol, None, None)
                )
            except NonFiniteError:
                raise DivergedError(t, records=records)
        if diverged_at >= 0:
            raise DivergedError(diverged_at, records=records)
        return RunResult(records=records, best=_collect_best(records),
                         backend="compiled")

    state = initial_state(kind, problem, params, x0, y0)
    prev_state = state
    records = []
    states = [state] if keep_states else None
    t_start = time.perf_counter()
    sched = set(ts)
    try:
        for t in range(1, T + 1):
            new_state = step(kind, problem, params, state)
            prev_state, state = state, new_state
            if keep_states:
                states.append(state)
            if t in sched:
                lyap_val = None
                if lyapunov:
                    from . import diagnostics as D

                    lyap_val = D.lyapunov(problem, params, state, prev_state,
                                          tol=tol).phi
                elapsed_ms = (
                    (time.perf_counter() - t_start) * 1000.0 if timing else None
                )
                try:
                    records.append(
                        _measure_row(problem, params, t, state.x, state.y,
                                     state.z, measures, os_r, tol, lyap_val,
                                     elapsed_ms)
                    )
                except NonFiniteError:
                    # finite coordinates but an overflowed objective/measure
                    raise DivergedError(t)
    except DivergedError as exc:
        exc.records = records
        exc.states = states
        raise
    return RunResult(records=records, best=_collect_best(records), states=states,
                     backend="python")


# ---------------------------------------------------------------------------
# Transposition and the inexact-proximal diagnostic
# ---------------------------------------------------------------------------


def transpose_problem(problem) -> MinimaxProblem:
    """The mirrored problem g(a, b) = -f(b, a) with sets and flags swapped.

    Running any algorithm on the transpose with swapped initial points and
    swapped (x, y) parameter roles reproduces the mirrored trajectory.
    """
    f, gx, gy = problem.eval_f, problem.grad_x, problem.grad_y
    o = problem.oracles

    def eval_t(a, b):
        return -f(b, a)

    def grad_a(a, b):
        return -gy(b, a)

    def grad_b(a, b):
        return -gx(b, a)

    st = problem.structure
    structure = StructureInfo(
        lipschitz_L=st.lipschitz_L,
        convex_in_x=st.concave_in_y,
        concave_in_y=st.convex_in_x,
        kl_x=st.kl_y,
        kl_y=st.kl_x,
        epsilon_underbar=st.epsilon_underbar,
    )

    def swap_pair(fn):
        if fn is None:
            return None

        def wrapped():
            xs, ys = fn()
            return ys, xs

        return wrapped

    oracles = Oracles(
        argmax_y=o.argmin_x,
        argmin_x=o.argmax_y,
        saddle=swap_pair(o.saddle),
        argmax_y_reg=o.argmin_x_reg,
        argmin_x_reg=o.argmax_y_reg,
        max_ties=o.min_ties,
        min_ties=o.max_ties,
    )

    native = None
    if problem.native is not None:
        from ._family import transpose_coeffs

        native = transpose_coeffs(problem.native)

    return MinimaxProblem(
        name=f"transposed({problem.name})",
        eval_f=eval_t,
        grad_x=grad_a,
        grad_y=grad_b,
        set_x=problem.set_y,
        set_y=problem.set_x,
        structure=structure,
        oracles=oracles,
        native=native,
    )


def ppm_error(problem, params, state_prev, state_curr, state_next) -> np.ndarray:
    """Residual of the inexact proximal-point reading of ``ds_ogda``.

    For three consecutive states returns the concatenated error

        eps = [eta .* (G_pd^{t+1} - 2 G_pd^t + G_pd^{t-1});
               eta .* (G_ex^{t+1} - G_ex^t)]

    with eta_x scaling the x/z blocks and eta_y the y/v blocks. Under
    symmetric steps and beta = eta r the update rule coincides with
    ``u+ = proj(u - eta G^{t+1} + eps)``. Diagnostic only.
    """
    Gp = eval_operator(problem, params, state_prev)
    Gc = eval_operator(problem, params, state_curr)
    Gn = eval_operator(problem, params, state_next)
    ex = params.eta_x * (Gn.g_x - 2.0 * Gc.g_x + Gp.g_x)
    ey = params.eta_y * (Gn.g_y - 2.0 * Gc.g_y + Gp.g_y)
    ez = params.eta_x * (Gn.g_z - Gc.g_z)
    ev = params.eta_y * (Gn.g_v - Gc.g_v)
    return np.concatenate([ex, ey, ez, ev])
