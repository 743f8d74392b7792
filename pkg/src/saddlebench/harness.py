"""Experiment harness: flat-key config files, CSV/JSON persistence,
log-log rate fitting, multi-run comparison, and the descent-ascent
stall experiment.

Trace files are CSV with the fixed header
``t,f_val,gap,gs_x,gs_y,os_res,lyapunov,elapsed_ms`` (UTF-8, LF, absent
measures empty, floats at 17 significant digits so parsing round-trips
exactly). Summaries are versioned JSON; unknown fields are rejected on
read. Wall-clock capture is off by default so reruns are byte-for-byte
reproducible.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import Regime, SolverParams
from .errors import DivergedError, InvalidConfigError, InvalidParamsError
from .operator import AlgorithmKind, run
from .problems import InstanceSpec, make_instance
from .stepsizes import select_params, validate_condition1

__all__ = [
    "ExperimentConfig",
    "RateFit",
    "parse_config",
    "load_config",
    "run_experiment",
    "fit_rate",
    "compare",
    "min_so_far",
    "tightness_report",
    "load_summary",
    "read_trace",
]

SCHEMA_VERSION = 1

TRACE_COLUMNS = ("t", "f_val", "gap", "gs_x", "gs_y", "os_res", "lyapunov",
                 "elapsed_ms")

_SUMMARY_FIELDS = {
    "schema_version", "status", "instance", "algorithm", "regime", "params",
    "T", "stride", "measures", "min_so_far", "rate_fits", "init_seed",
    "code_version", "validation", "diverged_at", "os_weight",
}


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(value) against log(t)."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "window": list(self.window)}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell: instance, algorithm, parameters, schedule."""

    instance: InstanceSpec
    algorithm: AlgorithmKind
    T: int
    regime: Optional[Regime] = None
    params: Optional[SolverParams] = None
    overrides: dict = field(default_factory=dict)
    stride: int = 1
    measures: tuple = ("gap", "gs")
    lyapunov: bool = False
    timing: bool = False
    init_seed: int = 0
    x0: Optional[tuple] = None
    y0: Optional[tuple] = None
    backend: str = "auto"
    label: Optional[str] = None

    def __post_init__(self):
        if self.T < 2:
            raise InvalidConfigError("T must be >= 2")
        if self.stride < 1:
            raise InvalidConfigError("stride must be >= 1")
        if self.regime is None and self.params is None:
            raise InvalidConfigError("either a regime or manual params required")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        reg = self.regime.value if self.regime else "manual"
        return f"{self.instance.family}_{self.algorithm.value}_{reg}_T{self.T}"


# ---------------------------------------------------------------------------
# Config parsing (flat dotted keys)
# ---------------------------------------------------------------------------

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}

_KNOWN_KEYS = {
    "algorithm", "regime", "T", "stride", "measures", "lyapunov", "timing",
    "backend", "label", "init.seed", "init.x0", "init.y0",
}
_INSTANCE_KEYS = {"family", "n", "d", "seed", "scale", "bounded"}
_PARAM_KEYS = {"r_x", "r_y", "eta_x", "eta_y", "beta_x", "beta_y",
               "c_r", "c_beta", "strict", "r"}


def _parse_bool(raw, key):
    try:
        return _BOOL[raw.strip().lower()]
    except KeyError:
        raise InvalidConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_floats(raw):
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` config format. Unknown keys are
    rejected so configs stay diff-able provenance records."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InvalidConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key in pairs:
            raise InvalidConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = raw

    inst_kwargs: dict = {}
    base_kwargs: dict = {}
    param_overrides: dict = {}
    fields: dict = {}
    for key, raw in pairs.items():
        if key.startswith("instance.base."):
            sub = key[len("instance.base."):]
            if sub not in _INSTANCE_KEYS:
                raise InvalidConfigError(f"unknown config key {key!r}")
            base_kwargs[sub] = raw
        elif key.startswith("instance."):
            sub = key[len("instance."):]
            if sub not in _INSTANCE_KEYS:
                raise InvalidConfigError(f"unknown config key {key!r}")
            inst_kwargs[sub] = raw
        elif key.startswith("params."):
            sub = key[len("params."):]
            if sub not in _PARAM_KEYS:
                raise InvalidConfigError(f"unknown config key {key!r}")
            param_overrides[sub] = (
                _parse_bool(raw, key) if sub == "strict" else float(raw)
            )
        elif key in _KNOWN_KEYS:
            fields[key] = raw
        else:
            raise InvalidConfigError(f"unknown config key {key!r}")

    if "family" not in inst_kwargs:
        raise InvalidConfigError("instance.family is required")

    def build_spec(kw, base=None):
        return InstanceSpec(
            family=kw["family"],
            n=int(kw.get("n", 1)),
            d=int(kw.get("d", 1)),
            seed=int(kw.get("seed", 0)),
            scale=float(kw.get("scale", 1.0)),
            bounded=_parse_bool(kw["bounded"], "bounded") if "bounded" in kw else True,
            base=base,
        )

    base_spec = build_spec(base_kwargs) if base_kwargs else None
    instance = build_spec(inst_kwargs, base_spec)

    if "algorithm" not in fields:
        raise InvalidConfigError("algorithm is required")
    try:
        algorithm = AlgorithmKind(fields["algorithm"])
    except ValueError:
        raise InvalidConfigError(f"unknown algorithm {fields['algorithm']!r}")
    if "T" not in fields:
        raise InvalidConfigError("T is required")

    regime = None
    params = None
    if "regime" in fields and fields["regime"] != "manual":
        try:
            regime = Regime(fields["regime"])
        except ValueError:
            raise InvalidConfigError(f"unknown regime {fields['regime']!r}")
    else:
        # manual: all six scalars must be present
        missing = {k for k in ("r_x", "r_y", "eta_x", "eta_y", "beta_x", "beta_y")
                   } - set(param_overrides)
        if missing:
            raise InvalidConfigError(
                f"manual parameters incomplete, missing {sorted(missing)}"
            )
        params = SolverParams(
            r_x=param_overrides["r_x"], r_y=param_overrides["r_y"],
            eta_x=param_overrides["eta_x"], eta_y=param_overrides["eta_y"],
            beta_x=param_overrides["beta_x"], beta_y=param_overrides["beta_y"],
            regime=Regime.MANUAL,
        )
        param_overrides = {}

    try:
        return ExperimentConfig(
            instance=instance,
            algorithm=algorithm,
            T=int(fields["T"]),
            regime=regime,
            params=params,
            overrides=param_overrides,
            stride=int(fields.get("stride", 1)),
            measures=tuple(
                tok.strip() for tok in fields.get("measures", "gap,gs").split(",")
                if tok.strip()
            ),
            lyapunov=_parse_bool(fields["lyapunov"], "lyapunov")
            if "lyapunov" in fields else False,
            timing=_parse_bool(fields["timing"], "timing")
            if "timing" in fields else False,
            init_seed=int(fields.get("init.seed", 0)),
            x0=_parse_floats(fields["init.x0"]) if "init.x0" in fields else None,
            y0=_parse_floats(fields["init.y0"]) if "init.y0" in fields else None,
            backend=fields.get("backend", "auto"),
            label=fields.get("label"),
        )
    except (ValueError, InvalidParamsError) as exc:
        raise InvalidConfigError(str(exc))


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Running and persistence
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def _atomic_write(path: Path, data: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_to_csv(records) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, col)) for col in TRACE_COLUMNS))
    return "\n".join(lines) + "\n"


def read_trace(path):
    """Parse a trace CSV back into IterationRecord rows (exact round trip)."""
    from .core import IterationRecord

    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    header = tuple(lines[0].split(","))
    if header != TRACE_COLUMNS:
        raise InvalidConfigError(f"unexpected trace header {header}")
    records = []
    for ln in lines[1:]:
        toks = ln.split(",")
        vals = {
            col: (None if tok == "" else (int(tok) if col == "t" else float(tok)))
            for col, tok in zip(TRACE_COLUMNS, toks)
        }
        records.append(IterationRecord(**vals))
    return records


def min_so_far(records, key):
    """Running-minimum envelope of one measure over a record list.

    ``key`` is a record attribute, or ``"gs"`` for max(gs_x, gs_y).
    Returns a list of (t, value) at the record times where the measure is
    present.
    """
    out = []
    best = math.inf
    for rec in records:
        if key == "gs":
            if rec.gs_x is None or rec.gs_y is None:
                continue
            val = max(rec.gs_x, rec.gs_y)
        else:
            val = getattr(rec, key)
            if val is None:
                continue
        best = min(best, val)
        out.append((rec.t, best))
    return out


def fit_rate(values, window=None) -> RateFit:
    """Least squares on (log t, log v) over ``values = [(t, v), ...]``.

    Nonpositive values shrink the window with a warning; fewer than five
    usable points is an error. A constant series fits slope 0 with
    r_squared = 1.
    """
    pts = [(t, v) for t, v in values if window is None
           or (window[0] <= t <= window[1])]
    kept = [(t, v) for t, v in pts if v > 0 and t > 0]
    if len(kept) < len(pts):
        warnings.warn("fit_rate: dropped nonpositive values, window shrunk")
    if len(kept) < 5:
        raise InvalidParamsError("fit_rate needs at least 5 positive points")
    ts = np.log(np.array([t for t, _ in kept], dtype=float))
    vs = np.log(np.array([v for _, v in kept], dtype=float))
    A = np.column_stack([ts, np.ones_like(ts)])
    coef, *_ = np.linalg.lstsq(A, vs, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = vs - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((vs - vs.mean()) @ (vs - vs.mean())))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    lo = window[0] if window else math.exp(ts.min())
    hi = window[1] if window else math.exp(ts.max())
    return RateFit(slope=slope, intercept=intercept, r_squared=r2,
                   window=(float(lo), float(hi)))


def _resolve_params(config, problem):
    if config.params is not None:
        return config.params
    return select_params(config.regime, problem, config.T, config.overrides)


def _initial_point(config, problem):
    if config.x0 is not None:
        x0 = np.array(config.x0, dtype=float)
    else:
        x0 = problem.set_x.sample(np.random.Generator(np.random.Philox(config.init_seed)))
    if config.y0 is not None:
        y0 = np.array(config.y0, dtype=float)
    else:
        y0 = problem.set_y.sample(
            np.random.Generator(np.random.Philox(config.init_seed + 1))
        )
    return problem.set_x.project(x0), problem.set_y.project(y0)


def _execute(config):
    """Run one experiment cell; returns (records, summary_dict)."""
    problem = make_instance(config.instance)
    params = _resolve_params(config, problem)
    x0, y0 = _initial_point(config, problem)
    status = "ok"
    diverged_at = None
    try:
        result = run(
            config.algorithm, problem, params, x0, y0, config.T,
            stride=config.stride, measures=config.measures,
            lyapunov=config.lyapunov, backend=config.backend,
            timing=config.timing,
        )
        records, best = result.records, result.best
    except DivergedError as exc:
        records = exc.records
        best = {}
        status = "diverged"
        diverged_at = exc.t

    window = (max(1.0, config.T / 10.0), float(config.T))
    fits = {}
    for key in ("gap", "gs", "os"):
        env = min_so_far(records, "os_res" if key == "os" else key)
        try:
            fits[key] = fit_rate(env, window=window).as_dict()
        except InvalidParamsError:
            fits[key] = None

    try:
        validation = validate_condition1(
            problem.structure.lipschitz_L, params
        ).as_dict()
    except Exception:
        validation = None

    summary = {
        "schema_version": SCHEMA_VERSION,
        "status": status,
        "instance": config.instance.as_dict(),
        "algorithm": config.algorithm.value,
        "regime": config.regime.value if config.regime else "manual",
        "params": params.as_dict(),
        "T": config.T,
        "stride": config.stride,
        "measures": list(config.measures),
        "min_so_far": {
            key: {"t": t, "value": val} for key, (t, val) in best.items()
        },
        "rate_fits": fits,
        "init_seed": config.init_seed,
        "code_version": __version__,
        "validation": validation,
        "diverged_at": diverged_at,
        # prox weight used by the displacement measure (default 2L)
        "os_weight": 2.0 * problem.structure.lipschitz_L,
    }
    return records, summary


def run_experiment(config, out_dir=".", name=None):
    """Execute one config cell and persist its trace and summary.

    Writes ``<name>.trace.csv`` and ``<name>.summary.json`` atomically
    (temp file then rename). Returns (trace_path, summary_path, summary).
    Diverged runs are persisted with ``status = "diverged"`` and the
    partial trace; the caller decides the exit status.
    """
    records, summary = _execute(config)
    base = name or config.name
    out = Path(out_dir)
    trace_path = out / f"{base}.trace.csv"
    summary_path = out / f"{base}.summary.json"
    _atomic_write(trace_path, records_to_csv(records))
    _atomic_write(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return trace_path, summary_path, summary


def load_summary(path) -> dict:
    """Read a summary JSON, rejecting unknown fields and other versions."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(data) - _SUMMARY_FIELDS
    if unknown:
        raise InvalidConfigError(f"unknown summary fields {sorted(unknown)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise InvalidConfigError(
            f"unsupported summary schema {data.get('schema_version')!r}"
        )
    return data


# ---------------------------------------------------------------------------
# Comparison and the stall experiment
# ---------------------------------------------------------------------------


def compare(configs, out_path=None, max_workers=4):
    """Run several configs on one shared instance and tabulate the fits.

    Cells execute concurrently with isolated state; the output ordering
    follows the input order. Returns the comparison dict; also writes it
    as JSON plus an aligned text table when ``out_path`` is given.
    """
    configs = list(configs)
    if len(configs) < 2:
        raise InvalidConfigError("compare needs at least two configs")
    first = configs[0].instance
    for cfg in configs[1:]:
        if cfg.instance != first:
            raise InvalidConfigError("compare requires a shared instance spec")

    with ThreadPoolExecutor(max_workers=min(max_workers, len(configs))) as pool:
        results = list(pool.map(_execute, configs))

    rows = []
    for cfg, (records, summary) in zip(configs, results):
        row = {
            "label": cfg.name,
            "algorithm": cfg.algorithm.value,
            "regime": summary["regime"],
            "status": summary["status"],
            "T": cfg.T,
        }
        for key in ("gap", "gs", "os"):
            fit = summary["rate_fits"].get(key)
            row[f"slope_{key}"] = None if fit is None else fit["slope"]
            best = summary["min_so_far"].get(key)
            row[f"best_{key}"] = None if best is None else best["value"]
        rows.append(row)

    table = {
        "schema_version": SCHEMA_VERSION,
        "instance": first.as_dict(),
        "rows": rows,
        "across_T": _across_t_slopes(configs, rows),
    }
    if out_path is not None:
        _atomic_write(Path(out_path), json.dumps(table, indent=2, sort_keys=True) + "\n")
        _atomic_write(Path(str(out_path) + ".txt"), render_comparison(table))
    return table


def _across_t_slopes(configs, rows):
    """Cross-run slopes: when one algorithm/regime appears at several T
    values, fit its best-measure values against T (log-log least squares).
    This is the empirical counterpart of iteration-complexity exponents."""
    groups: dict = {}
    for cfg, row in zip(configs, rows):
        groups.setdefault((row["algorithm"], row["regime"]), []).append(row)
    out = {}
    for (algo, regime), grp in groups.items():
        ts = sorted({row["T"] for row in grp})
        if len(ts) < 2:
            continue
        entry = {}
        for key in ("gap", "gs", "os"):
            pts = [(row["T"], row[f"best_{key}"]) for row in grp
                   if row[f"best_{key}"] is not None and row[f"best_{key}"] > 0]
            if len({t for t, _ in pts}) < 2:
                continue
            lt = np.log(np.array([t for t, _ in pts], dtype=float))
            lv = np.log(np.array([v for _, v in pts], dtype=float))
            entry[key] = float(np.polyfit(lt, lv, 1)[0])
        if entry:
            out[f"{algo}/{regime}"] = entry
    return out


def render_comparison(table) -> str:
    cols = ["label", "algorithm", "regime", "status", "T",
            "slope_gap", "best_gap", "slope_gs", "best_gs"]
    rows = table["rows"]

    def cell(row, col):
        val = row.get(col)
        if val is None:
            return "-"
        if isinstance(val, float):
            return f"{val:.4g}"
        return str(val)

    widths = {c: max(len(c), *(len(cell(r, c)) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    lines.append("  ".join("-" * widths[c] for c in cols))
    for row in rows:
        lines.append("  ".join(cell(row, c).ljust(widths[c]) for c in cols))
    return "\n".join(lines) + "\n"


def tightness_report(eta=0.1, eps=0.02, T=1000):
    """Plain descent-ascent on the stall instance f = x^2 y / 2.

    Starts at x0 = sqrt(2 eps), y0 = 1 and reports, per iteration, the
    exact primal-dual gap (x_t^2 / 2) against the certified floor
    (1 - eta)^{2t} * eps. Returns a list of rows
    (t, gap, bound, ok) with ok = gap >= bound - 1e-12.
    """
    from .measures import saddle_gap

    spec = InstanceSpec(family="hard_gda", bounded=False)
    problem = make_instance(spec)
    params = SolverParams(r_x=0.0, r_y=0.0, eta_x=eta, eta_y=eta,
                          beta_x=0.0, beta_y=0.0, regime=Regime.MANUAL)
    x0 = np.array([math.sqrt(2.0 * eps)])
    y0 = np.array([1.0])
    result = run(AlgorithmKind.GDA, problem, params, x0, y0, T,
                 stride=1, measures=(), backend="python", keep_states=True)
    rows = []
    for state in result.states[1:]:
        gap = saddle_gap(problem, state.x, state.y).value
        bound = (1.0 - eta) ** (2 * state.t) * eps
        rows.append((state.t, gap, bound, bool(gap >= bound - 1e-12)))
    return rows
